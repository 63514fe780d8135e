#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "attractor_scout/error.hpp"
#include "attractor_scout/experiment.hpp"

using namespace ascout;
namespace fs = std::filesystem;

namespace {

const ScenarioData& tiny_data() {
  static const ScenarioData data = prepare_scenario_data(scenario_a(), 1);
  return data;
}

std::string report_text(const std::vector<RunRecord>& records, const ScenarioSpec& spec) {
  std::ostringstream os;
  write_report(os, records, spec);
  return os.str();
}

}  // namespace

TEST_CASE("published meta-parameter presets") {
  const auto a = default_experiment("A");
  CHECK(a.reservoir.nodes == 300);
  CHECK(a.reservoir.density == 0.1);
  CHECK(a.reservoir.input_gain == 0.3);
  CHECK(a.reservoir.bias_amplitude == 1.0);
  CHECK(a.reservoir.theta == 2.5);
  CHECK(a.reservoir.lambda_max_target == 0.95);
  CHECK(a.ridge.eta == 1e-3);
  CHECK(a.autonomous_steps == 10000);

  const auto b = default_experiment("B");
  CHECK(b.scenario.name == "B");
  CHECK(b.reservoir.input_gain == 0.01);
  CHECK(b.reservoir.bias_amplitude == 3.0);
  CHECK(b.reservoir.lambda_max_target == 0.99);
  CHECK(b.ridge.eta == 1e-5);
}

TEST_CASE("experiment config JSON") {
  SUBCASE("partial files keep the scenario defaults") {
    const io::json j = {{"scenario", {{"name", "B"}}},
                        {"reservoir", {{"nodes", 120}}},
                        {"experiment", {{"n_seeds", 7}, {"base_seed", 100}}}};
    const auto cfg = experiment_from_json(j);
    CHECK(cfg.scenario.name == "B");
    CHECK(cfg.reservoir.nodes == 120);
    CHECK(cfg.reservoir.input_gain == 0.01);
    CHECK(cfg.ridge.eta == 1e-5);
    CHECK(cfg.n_seeds == 7);
    CHECK(cfg.base_seed == 100);
  }
  SUBCASE("round trip") {
    auto cfg = default_experiment("B");
    cfg.n_seeds = 3;
    cfg.noise_seed = 44;
    cfg.reservoir.theta = 7.5;
    cfg.scenario.attractors[2].initial_condition[0] = 1.25;
    const auto back = experiment_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
  }
  SUBCASE("invalid values name the field") {
    const io::json bad_type = {{"reservoir", {{"density", "dense"}}}};
    try {
      experiment_from_json(bad_type);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("reservoir.density") != std::string::npos);
    }
    const io::json bad_value = {{"experiment", {{"n_seeds", 0}}}};
    CHECK_THROWS_AS(experiment_from_json(bad_value), ConfigError);
  }
  SUBCASE("files") {
    const auto dir = testutil::scratch_dir("cfg");
    std::ofstream(dir / "c.json") << "{\"scenario\": {\"name\": \"A\"},\n \"ridge\": {\"eta\": 0.5}}\n";
    CHECK(load_experiment_config(dir / "c.json").ridge.eta == 0.5);
    std::ofstream(dir / "broken.json") << "{\"ridge\": {\"eta\": }}\n";
    CHECK_THROWS_AS(load_experiment_config(dir / "broken.json"), ConfigError);
  }
}

TEST_CASE("scenario data") {
  const auto& d = tiny_data();
  CHECK(d.training.points.size() == kTrainingLength);
  CHECK(d.references.size() == 3);
  CHECK(d.reference_stats.size() == 3);
  CHECK(d.noise_seed_used >= 1);
  CHECK(d.reference_stats[0].n_points == kReferenceLength);
}

TEST_CASE("single runs") {
  auto cfg = testutil::tiny_experiment();
  const auto rec = run_single(cfg, tiny_data(), 3);
  CHECK_FALSE(rec.failed());
  CHECK(rec.seed == 3);
  CHECK(rec.scenario == "A");
  CHECK(rec.attractors.size() == 3);
  CHECK(rec.outcome.per_attractor.size() == 3);
  CHECK(rec.outcome.delta_tot == doctest::Approx(total_error(rec.outcome.per_attractor)));
  for (const auto& a : rec.attractors) {
    if (!a.diverged_at) CHECK(a.generated == cfg.autonomous_steps);
  }

  SUBCASE("module errors become Failed records") {
    auto broken = cfg;
    broken.reservoir.density = 1e-12;
    broken.reservoir.nodes = 1;
    const auto failed = run_single(broken, tiny_data(), 3);
    CHECK(failed.failed());
    CHECK(failed.class_name() == "Failed");
    const auto text = report_text({failed}, broken.scenario);
    CHECK(text.find(",Failed,nan,") != std::string::npos);
  }
  SUBCASE("generated series are written on request") {
    const auto dir = testutil::scratch_dir("series");
    cfg.output_dir = dir;
    cfg.write_series = true;
    const auto r = run_single(cfg, tiny_data(), 4);
    for (const auto& a : r.attractors) {
      if (a.generated == 0) continue;
      REQUIRE(a.series_file.has_value());
      CHECK(fs::exists(*a.series_file));
      CHECK(a.series_file->parent_path() == fs::weakly_canonical(dir));
    }
  }
}

TEST_CASE("ensembles are deterministic regardless of parallelism") {
  auto cfg = testutil::tiny_experiment();
  cfg.n_seeds = 4;
  cfg.base_seed = 10;
  std::size_t calls = 0;
  const auto serial = run_ensemble(cfg, tiny_data(), 1, [&](const RunRecord&) { ++calls; });
  CHECK(calls == 4);
  const auto parallel = run_ensemble(cfg, tiny_data(), 3);
  REQUIRE(serial.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(serial[k].seed == 10 + k);
  CHECK(report_text(serial, cfg.scenario) == report_text(parallel, cfg.scenario));
}

TEST_CASE("report round trip") {
  auto cfg = testutil::tiny_experiment();
  cfg.n_seeds = 2;
  const auto records = run_ensemble(cfg, tiny_data(), 1);
  const auto text = report_text(records, cfg.scenario);
  std::istringstream is(text);
  const auto rows = read_report(is);
  REQUIRE(rows.size() == 6);
  CHECK(text.substr(0, text.find('\n')) ==
        "seed,scenario,attractor_id,class,delta_x,delta_y,delta_z,delta_u,delta_abs_x,delta_abs_y,delta_abs_z,"
        "delta_abs_u,delta_att,delta_tot");

  for (std::size_t r = 0; r < 2; ++r) {
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& row = rows[3 * r + i];
      CHECK(row.attractor_id == cfg.scenario.attractors[i].id);
      const auto& e = records[r].outcome.per_attractor[i];
      CHECK(row.error.delta == e.delta);
      CHECK(row.error.delta_abs == e.delta_abs);
      sum_sq += row.error.delta_att * row.error.delta_att;
    }
    if (std::isfinite(rows[3 * r].delta_tot)) CHECK(std::abs(std::sqrt(sum_sq) - rows[3 * r].delta_tot) < 1e-9);
  }
  const auto runs = summarize_report(rows);
  REQUIRE(runs.size() == 2);
  CHECK(runs[1].seed == records[1].seed);
  CHECK(runs[1].cls == records[1].class_name());

  std::istringstream bad("seed,scenario\n");
  CHECK_THROWS_AS(read_report(bad), ConfigError);
  std::istringstream short_row(text.substr(0, text.find('\n') + 1) + "1,A,lc_plus,Diverged,1\n");
  CHECK_THROWS_AS(read_report(short_row), ConfigError);
}

TEST_CASE("non-finite deltas survive the report") {
  RunRecord rec;
  rec.seed = 9;
  rec.scenario = "A";
  rec.outcome = classify({unbounded_error(), unbounded_error(), unbounded_error()}, true);
  std::istringstream is(report_text({rec}, scenario_a()));
  const auto rows = read_report(is);
  CHECK(std::isinf(rows[0].delta_tot));
  CHECK(rows[0].cls == "Diverged");
}

TEST_CASE("histogram examples") {
  const std::vector<double> edges{0, 1, 2, 3};
  const auto empty = histogram({}, edges);
  CHECK(empty.counts == std::vector<std::size_t>{0, 0, 0});

  const auto h = histogram({0.5, 1.5, 2.5}, edges);
  CHECK(h.counts == std::vector<std::size_t>{1, 1, 1});

  const auto edge_cases = histogram({0.0, 1.0, 3.0, 7.0, -1.0}, edges);
  CHECK(edge_cases.counts == std::vector<std::size_t>{1, 1, 0});
  CHECK(edge_cases.n_overflow == 2);
  CHECK(edge_cases.n_underflow == 1);

  CHECK_THROWS_AS(histogram({1.0}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(histogram({1.0}, {0.0, 2.0, 1.0}), InvalidArgument);

  std::ostringstream os;
  write_histogram(os, h);
  CHECK(os.str().substr(0, os.str().find('\n')) == "bin_low,bin_high,count");
}

TEST_CASE("histogram conserves finite values") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  std::vector<double> values;
  for (int k = 0; k < 1000; ++k) values.push_back(u(rng));
  values.push_back(std::numeric_limits<double>::infinity());
  values.push_back(std::nan(""));
  const auto h = histogram(values, uniform_edges(0.0, 10.0, 0.25));
  CHECK(h.counts.size() == 40);
  std::size_t total = h.n_overflow;
  for (auto c : h.counts) total += c;
  CHECK(total == 1000);
  CHECK(h.n_nonfinite == 2);
}

TEST_CASE("smoothing and bimodality") {
  const auto avg = moving_average({0, 3, 0, 3}, 3);
  CHECK(avg[0] == doctest::Approx(1.5));
  CHECK(avg[1] == doctest::Approx(1.0));
  CHECK(avg[3] == doctest::Approx(1.5));
  CHECK(moving_average({4, 5}, 1) == std::vector<double>{4, 5});

  CHECK(local_maxima({0, 2, 2, 1, 3, 0}) == std::vector<std::size_t>{1, 4});
  CHECK(local_maxima({1, 1, 1}).empty());
  CHECK(is_bimodal({0, 4, 1, 3, 0}));
  CHECK_FALSE(is_bimodal({0, 1, 3, 2, 0}));
  CHECK_FALSE(is_bimodal({0, 0, 0}));
}

TEST_CASE("output paths stay inside the output directory") {
  const auto dir = testutil::scratch_dir("paths");
  CHECK(child_path(dir, "report.csv") == fs::weakly_canonical(dir) / "report.csv");
  CHECK_THROWS_AS(child_path(dir, "../escape.csv"), InvalidArgument);
  CHECK_THROWS_AS(child_path(dir, "/etc/passwd"), InvalidArgument);
  CHECK_THROWS_AS(child_path(dir, ".."), InvalidArgument);
  CHECK_THROWS_AS(child_path(dir, ""), InvalidArgument);
}

TEST_CASE("parallelism resolution") {
  CHECK(resolve_parallelism(3) == 3);
  setenv(kThreadsEnvVar, "2", 1);
  CHECK(resolve_parallelism(std::nullopt) == std::min(2, kernels::max_threads()));
  CHECK(resolve_parallelism(5) == 5);
  setenv(kThreadsEnvVar, "junk", 1);
  CHECK(resolve_parallelism(std::nullopt) >= 1);
  unsetenv(kThreadsEnvVar);
}
