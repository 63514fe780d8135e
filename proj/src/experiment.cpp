#include "attractor_scout/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "attractor_scout/error.hpp"

namespace ascout {

namespace fs = std::filesystem;

namespace {

const char* const kReportHeader =
    "seed,scenario,attractor_id,class,delta_x,delta_y,delta_z,delta_u,delta_abs_x,delta_abs_y,delta_abs_z,"
    "delta_abs_u,delta_att,delta_tot";

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || *end != '\0')
    throw ConfigError("report line " + std::to_string(line_no) + ": bad number '" + cell + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.validate();
  reservoir.validate();
  ridge.validate();
  if (n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
}

ExperimentConfig default_experiment(const std::string& scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario_by_name(scenario);
  if (cfg.scenario.name == "B") {
    cfg.reservoir.input_gain = 0.01;
    cfg.reservoir.bias_amplitude = 3.0;
    cfg.reservoir.lambda_max_target = 0.99;
    cfg.ridge.eta = 1e-5;
  }
  return cfg;
}

io::json to_json(const ExperimentConfig& cfg) {
  auto reservoir = io::to_json(cfg.reservoir);
  reservoir.erase("topology_seed");
  return {{"scenario", io::to_json(cfg.scenario)},
          {"reservoir", reservoir},
          {"ridge", {{"eta", cfg.ridge.eta}}},
          {"experiment",
           {{"n_seeds", cfg.n_seeds},
            {"base_seed", cfg.base_seed},
            {"noise_seed", cfg.noise_seed},
            {"autonomous_steps", cfg.autonomous_steps},
            {"output_dir", cfg.output_dir.string()},
            {"write_series", cfg.write_series}}}};
}

ExperimentConfig experiment_from_json(const io::json& j, const std::string& fallback_scenario) {
  if (!j.is_object()) throw ConfigError("<root>: expected an object");
  std::string name = fallback_scenario;
  if (j.contains("scenario")) name = io::field_or<std::string>(j["scenario"], "name", "scenario", name);
  ExperimentConfig cfg = default_experiment(name);
  if (j.contains("scenario")) cfg.scenario = io::scenario_from_json(j["scenario"], "scenario", cfg.scenario);
  if (j.contains("reservoir")) cfg.reservoir = io::reservoir_config_from_json(j["reservoir"], "reservoir", cfg.reservoir);
  if (j.contains("ridge")) cfg.ridge.eta = io::field_or(j["ridge"], "eta", "ridge", cfg.ridge.eta);
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    cfg.n_seeds = io::field_or(e, "n_seeds", "experiment", cfg.n_seeds);
    cfg.base_seed = io::field_or(e, "base_seed", "experiment", cfg.base_seed);
    cfg.noise_seed = io::field_or(e, "noise_seed", "experiment", cfg.noise_seed);
    cfg.autonomous_steps = io::field_or<std::uint64_t>(e, "autonomous_steps", "experiment", cfg.autonomous_steps);
    cfg.output_dir = io::field_or<std::string>(e, "output_dir", "experiment", cfg.output_dir.string());
    cfg.write_series = io::field_or(e, "write_series", "experiment", cfg.write_series);
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path, const std::string& fallback_scenario) {
  const auto j = io::read_json_file(path);
  try {
    return experiment_from_json(j, fallback_scenario);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ScenarioData prepare_scenario_data(const ScenarioSpec& spec, std::uint64_t noise_seed) {
  spec.validate();
  ScenarioData data;
  for (const auto& a : spec.attractors) {
    data.references.push_back(make_reference(spec, a.id));
    data.reference_stats.push_back(stats(data.references.back().attractor.points));
  }
  const auto train_idx = static_cast<std::size_t>(
      std::find_if(spec.attractors.begin(), spec.attractors.end(),
                   [&](const auto& a) { return a.id == spec.training_attractor_id; }) -
      spec.attractors.begin());

  std::string last_error;
  for (int attempt = 0; attempt < kNoiseSeedAttempts; ++attempt) {
    const std::uint64_t seed = noise_seed + static_cast<std::uint64_t>(attempt);
    try {
      data.training = make_training_series(spec, seed, data.references[train_idx]);
      data.noise_seed_used = seed;
      return data;
    } catch (const BasinEscape& e) {
      last_error = e.what();
    }
  }
  throw BasinEscape("no basin-confined training series after " + std::to_string(kNoiseSeedAttempts) +
                    " noise seeds; last: " + last_error);
}

fs::path child_path(const fs::path& dir, const std::string& name) {
  const bool ok = !name.empty() && name != "." && name != ".." &&
                  std::all_of(name.begin(), name.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
                  });
  if (!ok) throw InvalidArgument("'" + name + "' is not a plain file name");
  const fs::path base = fs::weakly_canonical(dir);
  const fs::path full = fs::weakly_canonical(base / name);
  if (full.parent_path() != base) throw InvalidArgument("'" + name + "' resolves outside " + dir.string());
  return full;
}

RunRecord evaluate_model(const ExperimentConfig& cfg, const ScenarioData& data, const TrainedModel& model,
                         std::uint64_t seed, kernels::Backend backend) {
  RunRecord rec;
  rec.seed = seed;
  rec.scenario = cfg.scenario.name;
  rec.training_nrmse = model.meta.nrmse;

  std::vector<AttractorError> errors;
  bool truncated = false;
  for (std::size_t i = 0; i < cfg.scenario.attractors.size(); ++i) {
    const auto& att = cfg.scenario.attractors[i];
    const auto run =
        run_autonomous(model, data.references[i].transient.points, cfg.autonomous_steps, att.id, std::nullopt, backend);
    truncated = truncated || run.diverged();
    errors.push_back(run.generated.empty() ? unbounded_error()
                                           : attractor_error(stats(run.generated), data.reference_stats[i]));

    AttractorResult res{att.id, run.generated.size(), run.diverged_at, std::nullopt};
    if (cfg.write_series && !run.generated.empty()) {
      SampledTrajectory out;
      out.points = run.generated;
      out.h = data.references[i].transient.h;
      out.stride = data.references[i].transient.stride;
      out.t_first = data.references[i].transient.time_at(kTransientLength);
      out.params = data.references[i].transient.params;
      out.initial_condition = run.warmup.back();
      const auto path = child_path(cfg.output_dir, "seed_" + std::to_string(seed) + "_" + att.id + ".csv");
      io::write_trajectory(path, out,
                           {{"kind", "generated"},
                            {"scenario", cfg.scenario.name},
                            {"attractor_id", att.id},
                            {"topology_seed", seed},
                            {"diverged_at", run.diverged_at ? io::json(*run.diverged_at) : io::json(nullptr)}});
      res.series_file = path;
    }
    rec.attractors.push_back(std::move(res));
  }
  rec.outcome = classify(std::move(errors), truncated);
  return rec;
}

RunRecord run_single(const ExperimentConfig& cfg, const ScenarioData& data, std::uint64_t topology_seed,
                     kernels::Backend backend) {
  try {
    ReservoirConfig rc = cfg.reservoir;
    rc.topology_seed = topology_seed;
    const auto weights = build_reservoir(rc);
    const auto model = train(weights, rc, data.training, cfg.ridge, std::nullopt, backend);
    return evaluate_model(cfg, data, model, topology_seed, backend);
  } catch (const std::exception& e) {
    RunRecord rec;
    rec.seed = topology_seed;
    rec.scenario = cfg.scenario.name;
    rec.failure = e.what();
    for (const auto& a : cfg.scenario.attractors) rec.attractors.push_back({a.id, 0, std::nullopt, std::nullopt});
    return rec;
  }
}

int resolve_parallelism(std::optional<int> requested) {
  if (requested && *requested > 0) return *requested;
  const int available = std::max(1, kernels::max_threads());
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, available));
  }
  return available;
}

std::vector<RunRecord> run_ensemble(const ExperimentConfig& cfg, const ScenarioData& data, int parallelism,
                                    const std::function<void(const RunRecord&)>& on_done) {
  cfg.validate();
  const int n = cfg.n_seeds;
  std::vector<RunRecord> records(static_cast<std::size_t>(n));
  const int workers = std::max(1, parallelism);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int k = 0; k < n; ++k) {
    auto& rec = records[static_cast<std::size_t>(k)];
    rec = run_single(cfg, data, cfg.base_seed + static_cast<std::uint64_t>(k));
    if (on_done) {
#pragma omp critical(ascout_ensemble_progress)
      on_done(rec);
    }
  }
  return records;
}

void write_report(std::ostream& os, const std::vector<RunRecord>& records, const ScenarioSpec& spec) {
  os << kReportHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : records) {
    for (std::size_t i = 0; i < spec.attractors.size(); ++i) {
      os << r.seed << ',' << r.scenario << ',' << spec.attractors[i].id << ',' << r.class_name();
      if (r.failed()) {
        for (int c = 0; c < 10; ++c) os << ',' << format_double(nan);
      } else {
        const auto& e = r.outcome.per_attractor[i];
        for (double d : e.delta) os << ',' << format_double(d);
        for (double d : e.delta_abs) os << ',' << format_double(d);
        os << ',' << format_double(e.delta_att) << ',' << format_double(r.outcome.delta_tot);
      }
      os << '\n';
    }
  }
}

void write_report(const fs::path& path, const std::vector<RunRecord>& records, const ScenarioSpec& spec) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_report(os, records, spec);
}

std::vector<ReportRow> read_report(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kReportHeader) throw ConfigError("report line 1: unexpected header");
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 14)
      throw ConfigError("report line " + std::to_string(line_no) + ": expected 14 columns, got " +
                        std::to_string(cells.size()));
    ReportRow row;
    char* end = nullptr;
    row.seed = std::strtoull(cells[0].c_str(), &end, 10);
    if (cells[0].empty() || *end != '\0') throw ConfigError("report line " + std::to_string(line_no) + ": bad seed");
    row.scenario = cells[1];
    row.attractor_id = cells[2];
    row.cls = cells[3];
    for (std::size_t i = 0; i < 4; ++i) {
      row.error.delta[i] = parse_double(cells[4 + i], line_no);
      row.error.delta_abs[i] = parse_double(cells[8 + i], line_no);
    }
    row.error.delta_att = parse_double(cells[12], line_no);
    row.delta_tot = parse_double(cells[13], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> read_report(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return read_report(is);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<RunSummary> summarize_report(const std::vector<ReportRow>& rows) {
  std::vector<RunSummary> out;
  for (const auto& r : rows) {
    if (!out.empty() && out.back().seed == r.seed && out.back().cls == r.cls) continue;
    out.push_back({r.seed, r.cls, r.delta_tot});
  }
  return out;
}

std::vector<double> uniform_edges(double low, double high, double width) {
  if (!(width > 0.0) || !(high > low)) throw InvalidArgument("histogram range must be ascending with width > 0");
  std::vector<double> edges;
  const auto n = static_cast<std::size_t>(std::llround((high - low) / width));
  for (std::size_t i = 0; i <= n; ++i) edges.push_back(low + width * static_cast<double>(i));
  return edges;
}

Histogram histogram(const std::vector<double>& values, const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2) throw InvalidArgument("histogram needs at least two edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) throw InvalidArgument("histogram edges must be strictly ascending");
  }
  Histogram h;
  h.bin_edges = bin_edges;
  h.counts.assign(bin_edges.size() - 1, 0);
  for (double v : values) {
    if (!std::isfinite(v)) {
      ++h.n_nonfinite;
    } else if (v < bin_edges.front()) {
      ++h.n_underflow;
    } else if (v >= bin_edges.back()) {
      ++h.n_overflow;
    } else {
      const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - bin_edges.begin()) - 1];
    }
  }
  return h;
}

void write_histogram(std::ostream& os, const Histogram& h) {
  os << "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << format_double(h.bin_edges[i]) << ',' << format_double(h.bin_edges[i + 1]) << ',' << h.counts[i] << '\n';
  os << format_double(h.bin_edges.back()) << ",inf," << h.n_overflow << '\n';
}

void write_histogram(const fs::path& path, const Histogram& h) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_histogram(os, h);
}

std::vector<double> moving_average(const std::vector<std::size_t>& counts, int window) {
  if (window < 1) throw InvalidArgument("moving-average window must be >= 1");
  const int half = window / 2;
  const int n = static_cast<int>(counts.size());
  std::vector<double> out(counts.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) sum += static_cast<double>(counts[static_cast<std::size_t>(k)]);
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& profile) {
  std::vector<std::size_t> peaks;
  const std::size_t n = profile.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && profile[j + 1] == profile[i]) ++j;
    const bool left_lower = i == 0 || profile[i - 1] < profile[i];
    const bool right_lower = j + 1 == n || profile[j + 1] < profile[i];
    // A plateau spanning the whole profile is not a peak.
    if (left_lower && right_lower && !(i == 0 && j + 1 == n) && profile[i] > 0.0) peaks.push_back(i);
    i = j + 1;
  }
  return peaks;
}

bool is_bimodal(const std::vector<double>& profile) {
  const auto peaks = local_maxima(profile);
  for (std::size_t p = 0; p + 1 < peaks.size(); ++p) {
    const auto lo = profile.begin() + static_cast<std::ptrdiff_t>(peaks[p]);
    const auto hi = profile.begin() + static_cast<std::ptrdiff_t>(peaks[p + 1]);
    const double valley = *std::min_element(lo, hi + 1);
    if (valley < profile[peaks[p]] && valley < profile[peaks[p + 1]]) return true;
  }
  return false;
}

}  // namespace ascout
