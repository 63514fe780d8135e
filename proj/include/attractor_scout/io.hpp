#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "attractor_scout/lisprott.hpp"
#include "attractor_scout/reservoir.hpp"
#include "attractor_scout/training.hpp"

namespace ascout::io {

using nlohmann::json;

/// Sidecar path for a trajectory CSV: foo.csv -> foo.meta.json
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes `t,x,y,z,u` rows with 17 significant digits plus the JSON sidecar.
/// `extra` is merged into the sidecar (scenario, attractor id, model file...).
void write_trajectory(const std::filesystem::path& csv, const SampledTrajectory& traj, const json& extra = {});
void write_trajectory_csv(std::ostream& os, const SampledTrajectory& traj);

/// Reads a trajectory CSV and, when present, its sidecar. Without a sidecar the
/// sample interval is recovered from the t column with h = 1e-3.
SampledTrajectory read_trajectory(const std::filesystem::path& csv);

json to_json(const LiSprottParams& p);
LiSprottParams params_from_json(const json& j, const std::string& where);
json to_json(const StateVec4& s);
StateVec4 state_from_json(const json& j, const std::string& where);
json to_json(const ReservoirConfig& cfg);
ReservoirConfig reservoir_config_from_json(const json& j, const std::string& where, ReservoirConfig base = {});
json to_json(const ReservoirWeights& w);
ReservoirWeights weights_from_json(const json& j, const std::string& where);
json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const json& j, const std::string& where, ScenarioSpec base);

/// Reservoir file: config + sparse triplets of w_res, (row, col, value) list of
/// w_in, bias and achieved_lambda_max.
void save_reservoir(const std::filesystem::path& path, const ReservoirWeights& w, const ReservoirConfig& cfg);
std::pair<ReservoirWeights, ReservoirConfig> load_reservoir(const std::filesystem::path& path);

/// Model file: the reservoir file plus w_out, the relaxed state, eta and the
/// training-series provenance. Doubles are written in shortest round-trip form,
/// so loading reproduces every value bit for bit.
json to_json(const TrainedModel& m);
TrainedModel model_from_json(const json& j);
void save_model(const std::filesystem::path& path, const TrainedModel& m);
TrainedModel load_model(const std::filesystem::path& path);

/// Parses a JSON file; syntax errors cite the file, line and column.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// Typed field access; a missing or mistyped field throws ConfigError naming
/// the dotted path.
template <typename T>
T field(const json& j, const std::string& key, const std::string& where);
template <typename T>
T field_or(const json& j, const std::string& key, const std::string& where, T fallback);

}  // namespace ascout::io
