// attractor-scout: command-line front end.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "attractor_scout/error.hpp"
#include "attractor_scout/experiment.hpp"
#include "attractor_scout/io.hpp"

namespace fs = std::filesystem;
using namespace ascout;

namespace {

struct Common {
  std::string config;
  std::string scenario = "A";
  std::optional<std::uint64_t> seed;
  std::optional<int> n_seeds;
  std::string out;
  std::optional<int> parallelism;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed = true) {
  cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", c.scenario, "Scenario preset")->check(CLI::IsMember({"A", "B"}));
  if (with_seed) cmd->add_option("--seed", c.seed, "Seed (noise seed for data, topology seed otherwise)");
  cmd->add_option("--parallelism", c.parallelism, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_experiment(c.scenario)
                                          : load_experiment_config(c.config, c.scenario);
  if (c.n_seeds) cfg.n_seeds = *c.n_seeds;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

kernels::Backend backend_for(const Common& c) {
  return resolve_parallelism(c.parallelism) > 1 ? kernels::Backend::OpenMP : kernels::Backend::Serial;
}

void log(const std::string& msg) { std::cerr << "attractor-scout: " << msg << '\n'; }

int cmd_generate(const Common& c) {
  auto cfg = resolve_config(c);
  const fs::path dir = c.out.empty() ? fs::path("data") : fs::path(c.out);
  fs::create_directories(dir);
  const auto data = prepare_scenario_data(cfg.scenario, c.seed.value_or(cfg.noise_seed));
  const io::json common = {{"scenario", cfg.scenario.name}};

  auto extra = common;
  extra["kind"] = "training";
  extra["attractor_id"] = cfg.scenario.training_attractor_id;
  io::write_trajectory(child_path(dir, "training.csv"), data.training, extra);
  for (std::size_t i = 0; i < cfg.scenario.attractors.size(); ++i) {
    const auto& id = cfg.scenario.attractors[i].id;
    auto e = common;
    e["attractor_id"] = id;
    e["kind"] = "transient";
    io::write_trajectory(child_path(dir, id + "_transient.csv"), data.references[i].transient, e);
    e["kind"] = "reference";
    io::write_trajectory(child_path(dir, id + "_reference.csv"), data.references[i].attractor, e);
  }
  log("wrote training series (noise seed " + std::to_string(data.noise_seed_used) + ") and " +
      std::to_string(cfg.scenario.attractors.size()) + " reference pairs to " + dir.string());
  return 0;
}

int cmd_train(const Common& c, const std::string& data_path) {
  auto cfg = resolve_config(c);
  SampledTrajectory series = data_path.empty()
                                 ? prepare_scenario_data(cfg.scenario, cfg.noise_seed).training
                                 : io::read_trajectory(data_path);
  ReservoirConfig rc = cfg.reservoir;
  rc.topology_seed = c.seed.value_or(cfg.base_seed);
  const auto weights = build_reservoir(rc);
  const auto model = train(weights, rc, series, cfg.ridge, std::nullopt, backend_for(c));
  const fs::path out = c.out.empty() ? fs::path("model.json") : fs::path(c.out);
  io::save_model(out, model);
  char buf[160];
  std::snprintf(buf, sizeof buf, "trained seed %llu, NRMSE %.3g %.3g %.3g %.3g -> %s",
                static_cast<unsigned long long>(rc.topology_seed), model.meta.nrmse[0], model.meta.nrmse[1],
                model.meta.nrmse[2], model.meta.nrmse[3], out.string().c_str());
  log(buf);
  return 0;
}

int cmd_infer(const Common& c, const std::string& model_path, const std::string& attractor,
              const std::string& data_path, std::size_t steps) {
  auto cfg = resolve_config(c);
  const auto model = io::load_model(model_path);
  const std::string id = attractor.empty() ? cfg.scenario.training_attractor_id : attractor;
  cfg.scenario.attractor(id);  // rejects unknown ids
  const SampledTrajectory transient =
      data_path.empty() ? make_reference(cfg.scenario, id).transient : io::read_trajectory(data_path);
  const auto run = run_autonomous(model, transient.points, steps, id, std::nullopt, backend_for(c));

  SampledTrajectory out;
  out.points = run.generated;
  out.h = transient.h;
  out.stride = transient.stride;
  out.t_first = transient.time_at(transient.points.size());
  out.params = transient.params;
  out.initial_condition = run.warmup.empty() ? transient.points.back() : run.warmup.back();
  const fs::path path = c.out.empty() ? fs::path(id + "_generated.csv") : fs::path(c.out);
  io::write_trajectory(path, out,
                       {{"kind", "generated"},
                        {"attractor_id", id},
                        {"model", model_path},
                        {"diverged_at", run.diverged_at ? io::json(*run.diverged_at) : io::json(nullptr)}});
  log(std::to_string(run.generated.size()) + " points -> " + path.string() +
      (run.diverged() ? " (diverged at step " + std::to_string(*run.diverged_at) + ")" : ""));
  return run.diverged() ? 3 : 0;
}

int cmd_evaluate(const Common& c, const std::string& model_path, std::size_t steps) {
  auto cfg = resolve_config(c);
  cfg.autonomous_steps = steps;
  const auto model = io::load_model(model_path);
  const auto data = prepare_scenario_data(cfg.scenario, cfg.noise_seed);
  const auto rec = evaluate_model(cfg, data, model, model.cfg.topology_seed, backend_for(c));
  if (c.out.empty() || c.out == "-") {
    write_report(std::cout, {rec}, cfg.scenario);
  } else {
    write_report(fs::path(c.out), {rec}, cfg.scenario);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s, Delta_tot %.4g", rec.class_name().c_str(), rec.outcome.delta_tot);
  log(buf);
  return 0;
}

Histogram report_histogram(const std::vector<ReportRow>& rows, double width, double max) {
  std::vector<double> values;
  for (const auto& s : summarize_report(rows)) values.push_back(s.delta_tot);
  return histogram(values, uniform_edges(0.0, max, width));
}

int cmd_ensemble(const Common& c, double width, double max) {
  auto cfg = resolve_config(c);
  if (c.seed) cfg.base_seed = *c.seed;
  fs::create_directories(cfg.output_dir);
  const int workers = resolve_parallelism(c.parallelism);
  log("scenario " + cfg.scenario.name + ": " + std::to_string(cfg.n_seeds) + " seeds from " +
      std::to_string(cfg.base_seed) + " on " + std::to_string(workers) + " worker(s)");
  io::write_json_file(child_path(cfg.output_dir, "config.json"), to_json(cfg));

  const auto data = prepare_scenario_data(cfg.scenario, cfg.noise_seed);
  std::size_t done = 0;
  const auto records = run_ensemble(cfg, data, workers, [&](const RunRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "[%zu/%d] seed %llu: %s, Delta_tot %.4g", ++done, cfg.n_seeds,
                  static_cast<unsigned long long>(r.seed), r.class_name().c_str(),
                  r.failed() ? std::nan("") : r.outcome.delta_tot);
    log(buf);
  });
  const auto report = child_path(cfg.output_dir, "report.csv");
  write_report(report, records, cfg.scenario);
  write_histogram(child_path(cfg.output_dir, "histogram.csv"), report_histogram(read_report(report), width, max));

  std::size_t counts[4] = {};
  for (const auto& r : records) {
    if (r.failed()) ++counts[3];
    else ++counts[static_cast<int>(r.outcome.cls)];
  }
  log("Diverged " + std::to_string(counts[0]) + ", BoundedFailure " + std::to_string(counts[1]) +
      ", PartialSuccess " + std::to_string(counts[2]) + ", Failed " + std::to_string(counts[3]));
  return 0;
}

int cmd_histogram(const std::string& report, double width, double max, const std::string& out) {
  const auto h = report_histogram(read_report(report), width, max);
  if (out.empty() || out == "-") {
    write_histogram(std::cout, h);
  } else {
    write_histogram(fs::path(out), h);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reservoir-computing inference of unseen attractors in the Li-Sprott system", "attractor-scout"};
  app.require_subcommand(1);

  Common c;
  std::string data_path, model_path, attractor, report;
  std::size_t steps = kDefaultAutonomousSteps;
  double width = 0.1, max = 10.0;

  auto* gen = app.add_subcommand("generate-data", "Write the training series and reference pairs");
  add_common(gen, c);
  gen->add_option("--out", c.out, "Output directory");

  auto* tr = app.add_subcommand("train", "Train a readout and write a model file");
  add_common(tr, c);
  tr->add_option("--data", data_path, "Training series CSV (generated from the scenario if omitted)");
  tr->add_option("--out", c.out, "Model file");

  auto* inf = app.add_subcommand("infer", "Run the trained model autonomously");
  add_common(inf, c, false);
  inf->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  inf->add_option("--attractor", attractor, "Attractor id (default: the training attractor)");
  inf->add_option("--data", data_path, "Transient CSV (generated from the scenario if omitted)");
  inf->add_option("--steps", steps, "Autonomous steps")->check(CLI::PositiveNumber);
  inf->add_option("--out", c.out, "Output CSV");

  auto* ev = app.add_subcommand("evaluate", "Score a model on every scenario attractor");
  add_common(ev, c, false);
  ev->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--steps", steps, "Autonomous steps")->check(CLI::PositiveNumber);
  ev->add_option("--out", c.out, "Report CSV (stdout if omitted)");

  auto* ens = app.add_subcommand("ensemble", "Train and score many topology seeds");
  add_common(ens, c);
  ens->add_option("--n-seeds", c.n_seeds, "Number of topology seeds")->check(CLI::PositiveNumber);
  ens->add_option("--out", c.out, "Output directory");
  ens->add_option("--bin-width", width, "Histogram bin width")->check(CLI::PositiveNumber);
  ens->add_option("--max", max, "Upper histogram edge")->check(CLI::PositiveNumber);

  auto* hist = app.add_subcommand("histogram", "Rebin the Delta_tot values of a report");
  hist->add_option("--report", report, "Report CSV")->required()->check(CLI::ExistingFile);
  hist->add_option("--bin-width", width, "Bin width")->check(CLI::PositiveNumber);
  hist->add_option("--max", max, "Upper edge")->check(CLI::PositiveNumber);
  hist->add_option("--out", c.out, "Histogram CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "attractor-scout: error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*gen) return cmd_generate(c);
    if (*tr) return cmd_train(c, data_path);
    if (*inf) return cmd_infer(c, model_path, attractor, data_path, steps);
    if (*ev) return cmd_evaluate(c, model_path, steps);
    if (*ens) return cmd_ensemble(c, width, max);
    if (*hist) return cmd_histogram(report, width, max, c.out);
  } catch (const std::exception& e) {
    std::cerr << "attractor-scout: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
