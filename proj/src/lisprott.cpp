#include "attractor_scout/lisprott.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "attractor_scout/error.hpp"

namespace ascout {

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
  return s;
}

bool escaped(const StateVec4& s) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(std::abs(s[i]) <= kNonFiniteThreshold)) return true;
  }
  return false;
}

}  // namespace

void LiSprottParams::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("Li-Sprott a and b must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise strength sigma must be >= 0");
}

std::string to_string(AttractorLabel label) {
  switch (label) {
    case AttractorLabel::LimitCyclePlus: return "limit_cycle_plus";
    case AttractorLabel::LimitCycleMinus: return "limit_cycle_minus";
    case AttractorLabel::Torus: return "torus";
    case AttractorLabel::ChaosPlus: return "chaos_plus";
    case AttractorLabel::ChaosMinus: return "chaos_minus";
  }
  return "unknown";
}

AttractorLabel attractor_label_from_string(const std::string& s) {
  for (auto label : {AttractorLabel::LimitCyclePlus, AttractorLabel::LimitCycleMinus, AttractorLabel::Torus,
                     AttractorLabel::ChaosPlus, AttractorLabel::ChaosMinus}) {
    if (to_string(label) == s) return label;
  }
  throw ConfigError("unknown attractor label '" + s + "'");
}

std::string to_string(BasinCheck check) {
  return check == BasinCheck::MaxAbsU ? "max_abs_u" : "window_mean_u_sign";
}

BasinCheck basin_check_from_string(const std::string& s) {
  if (s == "max_abs_u") return BasinCheck::MaxAbsU;
  if (s == "window_mean_u_sign") return BasinCheck::WindowMeanUSign;
  throw ConfigError("unknown basin check '" + s + "'");
}

void ScenarioSpec::validate() const {
  params.validate();
  if (!(h > 0.0)) throw InvalidArgument("scenario step h must be > 0");
  if (stride < 1) throw InvalidArgument("scenario stride must be >= 1");
  if (attractors.empty()) throw InvalidArgument("scenario has no attractors");
  for (std::size_t i = 0; i < attractors.size(); ++i) {
    if (!attractors[i].initial_condition.is_finite())
      throw InvalidArgument("attractor '" + attractors[i].id + "' has a non-finite initial condition");
    for (std::size_t j = i + 1; j < attractors.size(); ++j) {
      if (attractors[i].id == attractors[j].id)
        throw InvalidArgument("duplicate attractor id '" + attractors[i].id + "'");
    }
  }
  (void)attractor(training_attractor_id);
}

const AttractorSpec& ScenarioSpec::attractor(const std::string& id) const {
  auto it = std::find_if(attractors.begin(), attractors.end(), [&](const auto& a) { return a.id == id; });
  if (it == attractors.end()) throw InvalidArgument("scenario '" + name + "' has no attractor '" + id + "'");
  return *it;
}

ScenarioSpec scenario_a() {
  ScenarioSpec s;
  s.name = "A";
  s.params = {2.0, 0.8, kDefaultNoise};
  s.stride = 300;
  // The limit-cycle start is printed as "(+-5, +-1, 1 +-1)"; read as (+-5, +-1, 1, +-1).
  s.attractors = {
      {"lc_plus", {{5.0, 1.0, 1.0, 1.0}}, AttractorLabel::LimitCyclePlus},
      {"lc_minus", {{-5.0, -1.0, 1.0, -1.0}}, AttractorLabel::LimitCycleMinus},
      {"torus", {{4.0, 1.0, -1.0, 1.0}}, AttractorLabel::Torus},
  };
  s.training_attractor_id = "lc_plus";
  s.basin_check = BasinCheck::MaxAbsU;
  return s;
}

ScenarioSpec scenario_b() {
  ScenarioSpec s;
  s.name = "B";
  s.params = {6.0, 0.1, kDefaultNoise};
  s.stride = 200;
  s.attractors = {
      {"chaos_plus", {{0.0, -4.0, 0.0, 5.0}}, AttractorLabel::ChaosPlus},
      {"chaos_minus", {{0.0, 4.0, 0.0, -5.0}}, AttractorLabel::ChaosMinus},
      {"torus", {{1.0, -1.0, 1.0, -1.0}}, AttractorLabel::Torus},
  };
  s.training_attractor_id = "chaos_plus";
  s.basin_check = BasinCheck::WindowMeanUSign;
  return s;
}

ScenarioSpec scenario_by_name(const std::string& name) {
  const auto n = upper(name);
  if (n == "A") return scenario_a();
  if (n == "B") return scenario_b();
  throw InvalidArgument("unknown scenario '" + name + "' (expected A or B)");
}

SampledTrajectory integrate_em(const LiSprottParams& p, const StateVec4& x0, double h, std::size_t n_steps,
                               int stride, std::uint64_t seed, double t0) {
  p.validate();
  if (!(h > 0.0)) throw InvalidArgument("integration step h must be > 0");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (n_steps % static_cast<std::size_t>(stride) != 0)
    throw InvalidArgument("n_steps must be divisible by stride");
  if (!x0.is_finite()) throw InvalidArgument("initial condition must be finite");

  SampledTrajectory out;
  out.h = h;
  out.stride = stride;
  out.t_first = t0 + h * stride;
  out.params = p;
  out.initial_condition = x0;
  if (p.sigma > 0.0) out.rng_seed = seed;
  out.points.reserve(n_steps / static_cast<std::size_t>(stride));

  const double noise_scale = p.sigma * std::sqrt(h);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  StateVec4 s = x0;
  int until_emit = stride;
  for (std::size_t step = 0; step < n_steps; ++step) {
    const StateVec4 f = drift(s, p);
    for (std::size_t i = 0; i < 4; ++i) s[i] += h * f[i];
    if (noise_scale > 0.0) {
      for (std::size_t i = 0; i < 4; ++i) s[i] += noise_scale * normal(rng);
    }
    if (escaped(s)) {
      std::ostringstream msg;
      msg << "Euler-Maruyama state left the finite range at step " << step + 1;
      throw NonFinite(msg.str());
    }
    if (--until_emit == 0) {
      out.points.push_back(s);
      until_emit = stride;
    }
  }
  return out;
}

ReferenceSeries make_reference(const ScenarioSpec& spec, const std::string& attractor_id) {
  const auto& att = spec.attractor(attractor_id);
  LiSprottParams clean = spec.params;
  clean.sigma = 0.0;

  const std::size_t stride = static_cast<std::size_t>(spec.stride);
  const std::size_t total = kTransientLength + kReferenceDiscard + kReferenceLength;
  auto full = integrate_em(clean, att.initial_condition, spec.h, total * stride, spec.stride, 0);

  ReferenceSeries ref;
  ref.transient = full;
  ref.transient.points.assign(full.points.begin(), full.points.begin() + kTransientLength);

  const std::size_t skip = kTransientLength + kReferenceDiscard;
  ref.attractor = full;
  ref.attractor.points.assign(full.points.begin() + static_cast<std::ptrdiff_t>(skip), full.points.end());
  ref.attractor.t_first = full.time_at(skip);
  return ref;
}

void check_basin(const ScenarioSpec& spec, std::span<const StateVec4> series, const ReferenceSeries& reference) {
  const auto& ref = reference.attractor.points;
  if (ref.empty() || series.empty()) throw InvalidArgument("basin check needs nonempty series");

  switch (spec.basin_check) {
    case BasinCheck::MaxAbsU: {
      double ref_max = 0.0;
      for (const auto& p : ref) ref_max = std::max(ref_max, std::abs(p.u()));
      for (std::size_t k = 0; k < series.size(); ++k) {
        if (std::abs(series[k].u()) > 2.0 * ref_max) {
          std::ostringstream msg;
          msg << "training series left the basin: |u| = " << std::abs(series[k].u()) << " at sample " << k
              << " exceeds twice the reference max " << ref_max;
          throw BasinEscape(msg.str());
        }
      }
      break;
    }
    case BasinCheck::WindowMeanUSign: {
      double ref_mean = 0.0;
      for (const auto& p : ref) ref_mean += p.u();
      const bool positive = ref_mean > 0.0;
      constexpr std::size_t window = 1000;
      for (std::size_t start = 0; start + window <= series.size(); start += window) {
        double mean = 0.0;
        for (std::size_t k = start; k < start + window; ++k) mean += series[k].u();
        if ((mean > 0.0) != positive) {
          std::ostringstream msg;
          msg << "training series left the basin: u-average of window starting at sample " << start
              << " has the wrong sign";
          throw BasinEscape(msg.str());
        }
      }
      break;
    }
  }
}

SampledTrajectory make_training_series(const ScenarioSpec& spec, std::uint64_t seed) {
  return make_training_series(spec, seed, make_reference(spec, spec.training_attractor_id));
}

SampledTrajectory make_training_series(const ScenarioSpec& spec, std::uint64_t seed,
                                       const ReferenceSeries& training_reference) {
  spec.validate();
  const auto& att = spec.training_attractor();
  auto series = integrate_em(spec.params, att.initial_condition, spec.h,
                             kTrainingLength * static_cast<std::size_t>(spec.stride), spec.stride, seed);
  check_basin(spec, series.points, training_reference);
  return series;
}

}  // namespace ascout
