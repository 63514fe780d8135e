#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attractor_scout/autonomous.hpp"
#include "attractor_scout/io.hpp"
#include "attractor_scout/lisprott.hpp"
#include "attractor_scout/metrics.hpp"
#include "attractor_scout/reservoir.hpp"
#include "attractor_scout/training.hpp"

namespace ascout {

/// Environment variable capping the worker count of ensembles.
inline constexpr const char* kThreadsEnvVar = "ATTRACTOR_SCOUT_THREADS";

struct ExperimentConfig {
  ScenarioSpec scenario;
  ReservoirConfig reservoir;
  RidgeConfig ridge;
  int n_seeds = 1;
  /// Run k uses topology seed base_seed + k.
  std::uint64_t base_seed = 0;
  /// Seed of the training-series noise, shared by every run of an ensemble.
  std::uint64_t noise_seed = 1;
  std::size_t autonomous_steps = kDefaultAutonomousSteps;
  std::filesystem::path output_dir = "out";
  /// Write each run's generated series under output_dir.
  bool write_series = false;

  void validate() const;
};

/// Published meta-parameters: scenario A with N=300, rho=0.1, G=0.3, bias 1.0,
/// theta=2.5, Re(lambda)_max=0.95, eta=1e-3; scenario B with G=0.01, bias 3.0,
/// Re(lambda)_max=0.99, eta=1e-5.
ExperimentConfig default_experiment(const std::string& scenario);

io::json to_json(const ExperimentConfig& cfg);
/// Fields absent from `j` keep the defaults of the scenario named in
/// j["scenario"]["name"] (or `fallback_scenario`).
ExperimentConfig experiment_from_json(const io::json& j, const std::string& fallback_scenario = "A");
ExperimentConfig load_experiment_config(const std::filesystem::path& path, const std::string& fallback_scenario = "A");

/// Ground truth shared read-only by every run of an experiment.
struct ScenarioData {
  SampledTrajectory training;
  /// Noise seed that produced `training` (later seeds are tried on BasinEscape).
  std::uint64_t noise_seed_used = 0;
  std::vector<ReferenceSeries> references;
  std::vector<AttractorStats> reference_stats;
};

/// Number of consecutive noise seeds tried before BasinEscape propagates.
inline constexpr int kNoiseSeedAttempts = 16;

ScenarioData prepare_scenario_data(const ScenarioSpec& spec, std::uint64_t noise_seed);

struct AttractorResult {
  std::string attractor_id;
  std::size_t generated = 0;
  std::optional<std::size_t> diverged_at;
  std::optional<std::filesystem::path> series_file;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::string scenario;
  /// Set when a module error aborted the run; outcome is then meaningless.
  std::optional<std::string> failure;
  std::array<double, 4> training_nrmse{};
  RunOutcome outcome;
  std::vector<AttractorResult> attractors;

  bool failed() const { return failure.has_value(); }
  std::string class_name() const { return failed() ? "Failed" : to_string(outcome.cls); }
};

/// Evaluates a trained model on every scenario attractor.
RunRecord evaluate_model(const ExperimentConfig& cfg, const ScenarioData& data, const TrainedModel& model,
                         std::uint64_t seed, kernels::Backend backend = kernels::Backend::Serial);

/// Build, train and evaluate one topology. Never throws for module errors;
/// they become a Failed record.
RunRecord run_single(const ExperimentConfig& cfg, const ScenarioData& data, std::uint64_t topology_seed,
                     kernels::Backend backend = kernels::Backend::Serial);

/// Worker count: `requested` if positive, else every available OpenMP thread
/// capped by ATTRACTOR_SCOUT_THREADS.
int resolve_parallelism(std::optional<int> requested);

/// Runs seeds base_seed .. base_seed + n_seeds - 1 on `parallelism` workers.
/// Records come back ordered by seed whatever the schedule. `on_done` is
/// called once per finished run, never concurrently.
std::vector<RunRecord> run_ensemble(const ExperimentConfig& cfg, const ScenarioData& data, int parallelism,
                                    const std::function<void(const RunRecord&)>& on_done = {});

/// One row per (run, attractor):
/// seed,scenario,attractor_id,class,delta_x..delta_u,delta_abs_x..delta_abs_u,delta_att,delta_tot
void write_report(std::ostream& os, const std::vector<RunRecord>& records, const ScenarioSpec& spec);
void write_report(const std::filesystem::path& path, const std::vector<RunRecord>& records,
                  const ScenarioSpec& spec);

struct ReportRow {
  std::uint64_t seed = 0;
  std::string scenario;
  std::string attractor_id;
  std::string cls;
  AttractorError error;
  double delta_tot = 0.0;
};

std::vector<ReportRow> read_report(std::istream& is);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

/// One Delta_tot per run, keyed by the first row of each seed.
struct RunSummary {
  std::uint64_t seed = 0;
  std::string cls;
  double delta_tot = 0.0;
};
std::vector<RunSummary> summarize_report(const std::vector<ReportRow>& rows);

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
  std::size_t n_overflow = 0;
  std::size_t n_underflow = 0;
  std::size_t n_nonfinite = 0;
};

/// Left-closed, right-open bins; values >= the last edge go to n_overflow,
/// values below the first edge to n_underflow, NaN/inf to n_nonfinite.
Histogram histogram(const std::vector<double>& values, const std::vector<double>& bin_edges);
std::vector<double> uniform_edges(double low, double high, double width);
void write_histogram(std::ostream& os, const Histogram& h);
void write_histogram(const std::filesystem::path& path, const Histogram& h);

/// Centered moving average; windows are truncated at the ends.
std::vector<double> moving_average(const std::vector<std::size_t>& counts, int window);
/// Indices of local maxima; a plateau counts once, at its first index.
std::vector<std::size_t> local_maxima(const std::vector<double>& profile);
/// Two local maxima separated by a strictly lower local minimum.
bool is_bimodal(const std::vector<double>& profile);

/// Resolves `name` inside `dir`; throws if the result would leave `dir`.
std::filesystem::path child_path(const std::filesystem::path& dir, const std::string& name);

}  // namespace ascout
