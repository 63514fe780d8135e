#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"

#include "attractor_scout/error.hpp"
#include "attractor_scout/lisprott.hpp"
#include "attractor_scout/metrics.hpp"

using namespace ascout;

namespace {

LiSprottParams params(double a, double b, double sigma = 0.0) {
  LiSprottParams p;
  p.a = a;
  p.b = b;
  p.sigma = sigma;
  return p;
}

}  // namespace

TEST_CASE("drift matches direct substitution") {
  const auto d0 = drift({{0, 0, 0, 0}}, params(2.0, 0.8));
  CHECK(d0 == StateVec4{{0, 0, -2, 0}});
  CHECK(drift({{1, 1, 1, 1}}, params(0, 0)) == StateVec4{{0, 0, 1, 0}});
  const auto d = drift({{4, 1, -1, 1}}, params(2.0, 0.8));
  CHECK(d[0] == -3.0);
  CHECK(d[1] == 5.0);
  CHECK(d[2] == 2.0);
  CHECK(d[3] == doctest::Approx(-0.8));
}

TEST_CASE("a single deterministic step is one Euler step") {
  const auto p = params(2.0, 0.8);
  const StateVec4 x0{{1, 1, 1, 1}};
  const auto traj = integrate_em(p, x0, 1e-3, 1, 1, 42);
  REQUIRE(traj.points.size() == 1);
  const auto d = drift(x0, p);
  for (int i = 0; i < 4; ++i) CHECK(traj.points[0][i] == x0[i] + 1e-3 * d[i]);
  CHECK_FALSE(traj.rng_seed.has_value());
}

TEST_CASE("stride controls emission and timing") {
  const auto traj = integrate_em(params(2.0, 0.8), {{4, 1, -1, 1}}, 1e-3, 3000, 300, 0);
  CHECK(traj.points.size() == 10);
  CHECK(traj.sample_interval() == doctest::Approx(0.3));
  CHECK(traj.time_at(0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(integrate_em(params(2.0, 0.8), {{4, 1, -1, 1}}, 1e-3, 1000, 300, 0), InvalidArgument);
  CHECK_THROWS_AS(integrate_em(params(2.0, 0.8, -1.0), {{4, 1, -1, 1}}, 1e-3, 10, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(integrate_em(params(2.0, 0.8), {{4, 1, -1, 1}}, 0.0, 10, 1, 0), InvalidArgument);
}

TEST_CASE("deterministic Euler-Maruyama converges to a fine RK4 oracle") {
  const auto p = params(2.0, 0.8);
  const StateVec4 x0{{4, 1, -1, 1}};
  const auto ref = oracle::lisprott_rk4(p, x0, 1e-5, 100000);
  // Global Euler error at t = 1 is about 5.5h in z, so h = 1e-3 lands near
  // 5.5e-3 and h = 1e-4 below 1e-3.
  const auto coarse = integrate_em(p, x0, 1e-3, 1000, 1000, 0).points.back();
  const auto fine = integrate_em(p, x0, 1e-4, 10000, 10000, 0).points.back();
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(coarse[i] - ref[i]) < 6e-3);
    CHECK(std::abs(fine[i] - ref[i]) < 1e-3);
  }
}

TEST_CASE("Euler-Maruyama is first order in h without noise") {
  const auto p = params(2.0, 0.8);
  const StateVec4 x0{{4, 1, -1, 1}};
  const auto ref = oracle::lisprott_rk4(p, x0, 1e-5, 100000);
  auto err = [&](double h, std::size_t n) {
    const auto s = integrate_em(p, x0, h, n, static_cast<int>(n), 0).points.back();
    double e = 0.0;
    for (int i = 0; i < 4; ++i) e = std::max(e, std::abs(s[i] - ref[i]));
    return e;
  };
  const double ratio = err(2e-3, 500) / err(1e-3, 1000);
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);
}

TEST_CASE("symmetric initial conditions give mirrored trajectories") {
  const auto p = params(2.0, 0.8);
  const StateVec4 x0{{5, 1, 1, 1}};
  const auto a = integrate_em(p, x0, 1e-3, 200000, 100, 0);
  const auto b = integrate_em(p, mirror(x0), 1e-3, 200000, 100, 0);
  REQUIRE(a.points.size() == b.points.size());
  bool exact = true;
  for (std::size_t k = 0; k < a.points.size(); ++k) exact = exact && (mirror(a.points[k]) == b.points[k]);
  CHECK(exact);
}

TEST_CASE("noise increments have standard deviation sigma*sqrt(h)") {
  const double h = 1e-3;
  const auto p = params(2.0, 0.8, kDefaultNoise);
  const StateVec4 x0{{4, 1, -1, 1}};
  const std::size_t n = 200000;
  const auto traj = integrate_em(p, x0, h, n, 1, 2024);
  REQUIRE(traj.rng_seed == 2024u);
  const double expected = kDefaultNoise * std::sqrt(h);
  CHECK(expected == doctest::Approx(0.2 * h));
  for (int i = 0; i < 4; ++i) {
    double sum = 0.0, sum_sq = 0.0;
    StateVec4 prev = x0;
    for (const auto& s : traj.points) {
      const double inc = s[i] - prev[i] - h * drift(prev, p)[i];
      sum += inc;
      sum_sq += inc * inc;
      prev = s;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    CHECK(std::abs(sd / expected - 1.0) < 0.05);
  }
}

TEST_CASE("noisy runs are reproducible per seed and differ across seeds") {
  const auto p = params(2.0, 0.8, kDefaultNoise);
  const auto a = integrate_em(p, {{5, 1, 1, 1}}, 1e-3, 30000, 300, 7);
  const auto b = integrate_em(p, {{5, 1, 1, 1}}, 1e-3, 30000, 300, 7);
  const auto c = integrate_em(p, {{5, 1, 1, 1}}, 1e-3, 30000, 300, 8);
  CHECK(a.points == b.points);
  CHECK(a.points != c.points);
}

TEST_CASE("blow-ups raise NonFinite") {
  CHECK_THROWS_AS(integrate_em(params(2.0, 0.8), {{1e7, 1e7, 1e7, 1e7}}, 1e-3, 100, 1, 0), NonFinite);
}

TEST_CASE("scenario registry") {
  const auto a = scenario_a();
  CHECK(a.params.a == 2.0);
  CHECK(a.params.b == 0.8);
  CHECK(a.stride == 300);
  CHECK(a.attractors.size() == 3);
  CHECK(a.training_attractor().initial_condition == StateVec4{{5, 1, 1, 1}});
  CHECK(a.attractor("lc_minus").initial_condition == StateVec4{{-5, -1, 1, -1}});
  CHECK(a.attractor("torus").initial_condition == StateVec4{{4, 1, -1, 1}});

  const auto b = scenario_b();
  CHECK(b.params.a == 6.0);
  CHECK(b.params.b == 0.1);
  CHECK(b.stride == 200);
  CHECK(b.training_attractor().initial_condition == StateVec4{{0, -4, 0, 5}});
  CHECK(b.attractor("chaos_minus").initial_condition == StateVec4{{0, 4, 0, -5}});
  CHECK(b.attractor("torus").initial_condition == StateVec4{{1, -1, 1, -1}});

  CHECK(scenario_by_name("b").name == "B");
  CHECK_THROWS_AS(scenario_by_name("C"), InvalidArgument);
  CHECK_THROWS_AS(a.attractor("nope"), InvalidArgument);

  auto dup = a;
  dup.attractors.push_back(dup.attractors.front());
  CHECK_THROWS_AS(dup.validate(), InvalidArgument);
  auto missing = a;
  missing.training_attractor_id = "nope";
  CHECK_THROWS_AS(missing.validate(), InvalidArgument);
}

TEST_CASE("training series have the published length and sampling interval") {
  const auto a = make_training_series(scenario_a(), 3);
  CHECK(a.points.size() == kTrainingLength);
  CHECK(a.sample_interval() == doctest::Approx(0.3));
  CHECK(a.params.sigma == doctest::Approx(6.325e-3).epsilon(1e-3));

  const auto b = make_training_series(scenario_b(), 3);
  CHECK(b.points.size() == kTrainingLength);
  CHECK(b.sample_interval() == doctest::Approx(0.2));
}

TEST_CASE("noise-free training series ignore the seed") {
  auto spec = scenario_a();
  spec.params.sigma = 0.0;
  const auto one = make_training_series(spec, 1);
  const auto two = make_training_series(spec, 99);
  CHECK(one.points == two.points);
}

TEST_CASE("references") {
  SUBCASE("torus lengths") {
    const auto ref = make_reference(scenario_a(), "torus");
    CHECK(ref.transient.points.size() == kTransientLength);
    CHECK(ref.attractor.points.size() == kReferenceLength);
    CHECK(ref.transient.params.sigma == 0.0);
    CHECK(ref.transient.points.front() != ref.attractor.points.front());
    // The stats source starts after the transient and the discard window.
    CHECK(ref.attractor.t_first ==
          doctest::Approx(ref.transient.time_at(kTransientLength + kReferenceDiscard)));
  }
  SUBCASE("chaotic pair is mirror symmetric") {
    const auto spec = scenario_b();
    const auto plus = make_reference(spec, "chaos_plus");
    const auto minus = make_reference(spec, "chaos_minus");
    bool exact = true;
    for (std::size_t k = 0; k < plus.attractor.points.size(); ++k)
      exact = exact && (mirror(plus.attractor.points[k]) == minus.attractor.points[k]);
    CHECK(exact);
  }
  SUBCASE("limit-cycle statistics are stable against a doubled run") {
    const auto spec = scenario_a();
    const auto ref = make_reference(spec, "lc_plus");
    const auto p = ref.attractor.params;
    const auto& last = ref.attractor;
    // Continue from the reference's start for twice the length.
    const auto longer = integrate_em(p, ref.transient.points.back(), spec.h,
                                     (kReferenceDiscard + 2 * kReferenceLength) * spec.stride, spec.stride, 0);
    std::vector<StateVec4> doubled(longer.points.end() - 2 * kReferenceLength, longer.points.end());
    const auto s1 = stats(last.points);
    const auto s2 = stats(doubled);
    for (int i = 0; i < 4; ++i) {
      // Means of x, y, u are near zero, so compare on the scale of <|i|>.
      CHECK(std::abs(s1.mean[i] - s2.mean[i]) < 0.01 * s2.mean_abs[i]);
      CHECK(std::abs(s1.mean_abs[i] / s2.mean_abs[i] - 1.0) < 0.01);
    }
  }
  SUBCASE("symmetric limit cycles have sign-flipped means and equal absolute means") {
    const auto spec = scenario_a();
    const auto p = stats(make_reference(spec, "lc_plus").attractor.points);
    const auto m = stats(make_reference(spec, "lc_minus").attractor.points);
    for (int i : {0, 1, 3}) CHECK(std::abs(p.mean[i] + m.mean[i]) <= 0.01 * p.mean_abs[i]);
    CHECK(std::abs(p.mean[2] - m.mean[2]) <= 0.01 * p.mean_abs[2]);
    for (int i = 0; i < 4; ++i) CHECK(m.mean_abs[i] == doctest::Approx(p.mean_abs[i]).epsilon(0.01));
  }
}

TEST_CASE("basin checks flag attractor hopping") {
  SUBCASE("window sign of u") {
    const auto spec = scenario_b();
    const auto ref = make_reference(spec, "chaos_plus");
    CHECK_NOTHROW(check_basin(spec, ref.attractor.points, ref));
    std::vector<StateVec4> hopped = ref.attractor.points;
    for (std::size_t k = 5000; k < hopped.size(); ++k) hopped[k] = mirror(hopped[k]);
    CHECK_THROWS_AS(check_basin(spec, hopped, ref), BasinEscape);
  }
  SUBCASE("max |u| envelope") {
    const auto spec = scenario_a();
    const auto ref = make_reference(spec, "lc_plus");
    CHECK_NOTHROW(check_basin(spec, ref.attractor.points, ref));
    std::vector<StateVec4> escaped = ref.attractor.points;
    escaped[100][3] = 1e3;
    CHECK_THROWS_AS(check_basin(spec, escaped, ref), BasinEscape);
  }
}

TEST_CASE("label and basin-check names round trip") {
  for (auto l : {AttractorLabel::LimitCyclePlus, AttractorLabel::LimitCycleMinus, AttractorLabel::Torus,
                 AttractorLabel::ChaosPlus, AttractorLabel::ChaosMinus})
    CHECK(attractor_label_from_string(to_string(l)) == l);
  for (auto c : {BasinCheck::MaxAbsU, BasinCheck::WindowMeanUSign})
    CHECK(basin_check_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(attractor_label_from_string("spiral"), ConfigError);
}
