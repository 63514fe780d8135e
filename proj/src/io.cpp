#include "attractor_scout/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "attractor_scout/error.hpp"

namespace ascout::io {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFormat = "attractor_scout.model";
constexpr const char* kReservoirFormat = "attractor_scout.reservoir";
constexpr int kFormatVersion = 1;

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

template <typename T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError((where.empty() ? std::string("<root>") : where) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(where, key) + ": missing field");
  try {
    return it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(where, key) + ": " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return field<T>(j, key, where);
}

template double field<double>(const json&, const std::string&, const std::string&);
template int field<int>(const json&, const std::string&, const std::string&);
template std::uint64_t field<std::uint64_t>(const json&, const std::string&, const std::string&);
template std::string field<std::string>(const json&, const std::string&, const std::string&);
template json field<json>(const json&, const std::string&, const std::string&);
template double field_or<double>(const json&, const std::string&, const std::string&, double);
template int field_or<int>(const json&, const std::string&, const std::string&, int);
template std::uint64_t field_or<std::uint64_t>(const json&, const std::string&, const std::string&, std::uint64_t);
template std::string field_or<std::string>(const json&, const std::string&, const std::string&, std::string);
template std::array<double, 4> field<std::array<double, 4>>(const json&, const std::string&, const std::string&);
template bool field_or<bool>(const json&, const std::string&, const std::string&, bool);

json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

json to_json(const LiSprottParams& p) { return {{"a", p.a}, {"b", p.b}, {"sigma", p.sigma}}; }

LiSprottParams params_from_json(const json& j, const std::string& where) {
  LiSprottParams p;
  p.a = field<double>(j, "a", where);
  p.b = field<double>(j, "b", where);
  p.sigma = field_or<double>(j, "sigma", where, 0.0);
  return p;
}

json to_json(const StateVec4& s) { return json::array({s[0], s[1], s[2], s[3]}); }

StateVec4 state_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(where + ": expected an array of 4 numbers");
  StateVec4 s;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
    s[i] = j[i].get<double>();
  }
  return s;
}

json to_json(const ReservoirConfig& c) {
  return {{"nodes", c.nodes},
          {"density", c.density},
          {"input_gain", c.input_gain},
          {"bias_amplitude", c.bias_amplitude},
          {"theta", c.theta},
          {"dt", c.dt},
          {"lambda_max_target", c.lambda_max_target},
          {"relax_time", c.relax_time},
          {"topology_seed", c.topology_seed}};
}

ReservoirConfig reservoir_config_from_json(const json& j, const std::string& where, ReservoirConfig c) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  c.nodes = field_or(j, "nodes", where, c.nodes);
  c.density = field_or(j, "density", where, c.density);
  c.input_gain = field_or(j, "input_gain", where, c.input_gain);
  c.bias_amplitude = field_or(j, "bias_amplitude", where, c.bias_amplitude);
  c.theta = field_or(j, "theta", where, c.theta);
  c.dt = field_or(j, "dt", where, c.dt);
  c.lambda_max_target = field_or(j, "lambda_max_target", where, c.lambda_max_target);
  c.relax_time = field_or(j, "relax_time", where, c.relax_time);
  c.topology_seed = field_or(j, "topology_seed", where, c.topology_seed);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return c;
}

json to_json(const ReservoirWeights& w) {
  json triplets = json::array();
  for (int r = 0; r < w.w_res.outerSize(); ++r) {
    for (decltype(w.w_res)::InnerIterator it(w.w_res, r); it; ++it)
      triplets.push_back(json::array({it.row(), it.col(), it.value()}));
  }
  json w_in = json::array();
  for (int i = 0; i < w.nodes(); ++i) w_in.push_back(json::array({i, w.input_col[i], w.input_val[i]}));
  return {{"w_res", {{"rows", w.w_res.rows()}, {"cols", w.w_res.cols()}, {"triplets", triplets}}},
          {"w_in", w_in},
          {"bias", vector_to_json(w.bias)},
          {"achieved_lambda_max", w.achieved_lambda_max}};
}

ReservoirWeights weights_from_json(const json& j, const std::string& where) {
  ReservoirWeights w;
  w.bias = vector_from_json(field<json>(j, "bias", where), join(where, "bias"));
  const int n = static_cast<int>(w.bias.size());
  w.achieved_lambda_max = field<double>(j, "achieved_lambda_max", where);

  const std::string wr = join(where, "w_res");
  const json& res = field<json>(j, "w_res", where);
  const int rows = field<int>(res, "rows", wr);
  const int cols = field<int>(res, "cols", wr);
  if (rows != n || cols != n) throw ConfigError(wr + ": shape does not match the bias length");
  std::vector<Eigen::Triplet<double, int>> trips;
  for (const auto& t : field<json>(res, "triplets", wr)) {
    if (!t.is_array() || t.size() != 3) throw ConfigError(wr + ".triplets: expected [row, col, value]");
    const int r = t[0].get<int>();
    const int c = t[1].get<int>();
    if (r < 0 || r >= n || c < 0 || c >= n) throw ConfigError(wr + ".triplets: index out of range");
    trips.emplace_back(r, c, t[2].get<double>());
  }
  w.w_res.resize(n, n);
  w.w_res.setFromTriplets(trips.begin(), trips.end());
  w.w_res.makeCompressed();

  w.input_col.assign(static_cast<std::size_t>(n), -1);
  w.input_val.assign(static_cast<std::size_t>(n), 0.0);
  const std::string wi = join(where, "w_in");
  for (const auto& t : field<json>(j, "w_in", where)) {
    if (!t.is_array() || t.size() != 3) throw ConfigError(wi + ": expected [row, col, value]");
    const int r = t[0].get<int>();
    const int c = t[1].get<int>();
    if (r < 0 || r >= n || c < 0 || c >= kInputDim) throw ConfigError(wi + ": index out of range");
    if (w.input_col[r] != -1) throw ConfigError(wi + ": row " + std::to_string(r) + " has two entries");
    w.input_col[r] = c;
    w.input_val[r] = t[2].get<double>();
  }
  for (int r = 0; r < n; ++r) {
    if (w.input_col[r] < 0) throw ConfigError(wi + ": row " + std::to_string(r) + " has no entry");
  }
  return w;
}

json to_json(const ScenarioSpec& s) {
  json atts = json::array();
  for (const auto& a : s.attractors)
    atts.push_back({{"id", a.id}, {"initial_condition", to_json(a.initial_condition)}, {"label", to_string(a.label)}});
  return {{"name", s.name},
          {"params", to_json(s.params)},
          {"h", s.h},
          {"stride", s.stride},
          {"attractors", atts},
          {"training_attractor_id", s.training_attractor_id},
          {"basin_check", to_string(s.basin_check)}};
}

ScenarioSpec scenario_from_json(const json& j, const std::string& where, ScenarioSpec s) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  s.name = field_or(j, "name", where, s.name);
  if (j.contains("params")) {
    const std::string pw = join(where, "params");
    const json& p = j["params"];
    s.params.a = field_or(p, "a", pw, s.params.a);
    s.params.b = field_or(p, "b", pw, s.params.b);
    s.params.sigma = field_or(p, "sigma", pw, s.params.sigma);
  }
  s.h = field_or(j, "h", where, s.h);
  s.stride = field_or(j, "stride", where, s.stride);
  if (j.contains("attractors")) {
    s.attractors.clear();
    const std::string aw = join(where, "attractors");
    const json& arr = j["attractors"];
    if (!arr.is_array()) throw ConfigError(aw + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ew = aw + "[" + std::to_string(i) + "]";
      AttractorSpec a;
      a.id = field<std::string>(arr[i], "id", ew);
      a.initial_condition = state_from_json(field<json>(arr[i], "initial_condition", ew), ew + ".initial_condition");
      a.label = attractor_label_from_string(field<std::string>(arr[i], "label", ew));
      s.attractors.push_back(a);
    }
  }
  s.training_attractor_id = field_or(j, "training_attractor_id", where, s.training_attractor_id);
  if (j.contains("basin_check")) s.basin_check = basin_check_from_string(field<std::string>(j, "basin_check", where));
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void write_trajectory_csv(std::ostream& os, const SampledTrajectory& traj) {
  os << "t,x,y,z,u\n";
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    const auto& p = traj.points[k];
    os << format_double(traj.time_at(k)) << ',' << format_double(p[0]) << ',' << format_double(p[1]) << ','
       << format_double(p[2]) << ',' << format_double(p[3]) << '\n';
  }
}

void write_trajectory(const fs::path& csv, const SampledTrajectory& traj, const json& extra) {
  {
    auto os = open_out(csv);
    write_trajectory_csv(os, traj);
  }
  json meta = {{"params", to_json(traj.params)},
               {"seed", traj.rng_seed ? json(*traj.rng_seed) : json(nullptr)},
               {"h", traj.h},
               {"stride", traj.stride},
               {"t_first", traj.t_first},
               {"initial_condition", to_json(traj.initial_condition)},
               {"n_points", traj.points.size()}};
  if (extra.is_object()) meta.update(extra);
  write_json_file(sidecar_path(csv), meta);
}

SampledTrajectory read_trajectory(const fs::path& csv) {
  std::ifstream is(csv);
  if (!is) throw ConfigError("cannot open '" + csv.string() + "'");
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,x,y,z,u", 0) != 0)
    throw ConfigError(csv.string() + ":1: expected header 't,x,y,z,u'");

  SampledTrajectory traj;
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, 5> v{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      const std::size_t next = line.find(',', pos);
      const std::string cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      char* end = nullptr;
      v[i] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0' || (i < 4 && next == std::string::npos)) {
        throw ConfigError(csv.string() + ":" + std::to_string(line_no) + ": malformed row");
      }
      pos = next + 1;
    }
    times.push_back(v[0]);
    traj.points.push_back({{v[1], v[2], v[3], v[4]}});
  }
  if (traj.points.empty()) throw ConfigError(csv.string() + ": no samples");

  const fs::path meta_path = sidecar_path(csv);
  if (fs::exists(meta_path)) {
    const json meta = read_json_file(meta_path);
    const std::string where = meta_path.filename().string();
    traj.params = params_from_json(field<json>(meta, "params", where), where + ".params");
    traj.h = field<double>(meta, "h", where);
    traj.stride = field<int>(meta, "stride", where);
    traj.t_first = field<double>(meta, "t_first", where);
    traj.initial_condition = state_from_json(field<json>(meta, "initial_condition", where), where);
    if (meta.contains("seed") && !meta["seed"].is_null()) traj.rng_seed = meta["seed"].get<std::uint64_t>();
  } else {
    traj.t_first = times.front();
    const double interval = times.size() > 1 ? times[1] - times[0] : kDefaultStep;
    traj.h = kDefaultStep;
    traj.stride = std::max(1, static_cast<int>(std::lround(interval / kDefaultStep)));
  }
  return traj;
}

void save_reservoir(const fs::path& path, const ReservoirWeights& w, const ReservoirConfig& cfg) {
  json j = {{"format", kReservoirFormat}, {"version", kFormatVersion}, {"config", to_json(cfg)},
            {"weights", to_json(w)}};
  write_json_file(path, j);
}

std::pair<ReservoirWeights, ReservoirConfig> load_reservoir(const fs::path& path) {
  const json j = read_json_file(path);
  const std::string where = path.filename().string();
  auto cfg = reservoir_config_from_json(field<json>(j, "config", where), where + ".config");
  auto w = weights_from_json(field<json>(j, "weights", where), where + ".weights");
  if (w.nodes() != cfg.nodes) throw ConfigError(where + ": weights do not match config.nodes");
  return {std::move(w), cfg};
}

json to_json(const TrainedModel& m) {
  json w_out = json::array();
  for (Eigen::Index r = 0; r < m.w_out.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.w_out.cols(); ++c) row.push_back(m.w_out(r, c));
    w_out.push_back(row);
  }
  const auto& s = m.meta.series;
  json series = {{"params", to_json(s.params)},
                 {"h", s.h},
                 {"stride", s.stride},
                 {"initial_condition", to_json(s.initial_condition)},
                 {"seed", s.rng_seed ? json(*s.rng_seed) : json(nullptr)},
                 {"length", s.length}};
  return {{"format", kModelFormat},
          {"version", kFormatVersion},
          {"config", to_json(m.cfg)},
          {"weights", to_json(m.weights)},
          {"w_out", w_out},
          {"relaxed_state", {{"x", vector_to_json(m.relaxed_state.x)}, {"t", m.relaxed_state.t}}},
          {"training",
           {{"eta", m.meta.eta},
            {"washout", m.meta.washout},
            {"nrmse", m.meta.nrmse},
            {"series", series}}}};
}

TrainedModel model_from_json(const json& j) {
  const std::string where = "model";
  if (field_or<std::string>(j, "format", where, "") != kModelFormat)
    throw ConfigError(where + ".format: not an attractor_scout model file");
  TrainedModel m;
  m.cfg = reservoir_config_from_json(field<json>(j, "config", where), where + ".config");
  m.weights = weights_from_json(field<json>(j, "weights", where), where + ".weights");
  if (m.weights.nodes() != m.cfg.nodes) throw ConfigError(where + ": weights do not match config.nodes");

  const json& w_out = field<json>(j, "w_out", where);
  const Eigen::Index n1 = m.cfg.nodes + 1;
  if (!w_out.is_array() || static_cast<Eigen::Index>(w_out.size()) != n1)
    throw ConfigError(where + ".w_out: expected " + std::to_string(n1) + " rows");
  m.w_out.resize(n1, 4);
  for (Eigen::Index r = 0; r < n1; ++r) {
    const json& row = w_out[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 4) throw ConfigError(where + ".w_out: rows must have 4 entries");
    for (Eigen::Index c = 0; c < 4; ++c) m.w_out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }

  const json& rs = field<json>(j, "relaxed_state", where);
  m.relaxed_state.x = vector_from_json(field<json>(rs, "x", where + ".relaxed_state"), where + ".relaxed_state.x");
  m.relaxed_state.t = field<double>(rs, "t", where + ".relaxed_state");
  if (m.relaxed_state.x.size() != m.cfg.nodes) throw ConfigError(where + ".relaxed_state: wrong length");

  const std::string tw = where + ".training";
  const json& tr = field<json>(j, "training", where);
  m.meta.eta = field<double>(tr, "eta", tw);
  m.meta.washout = field<std::size_t>(tr, "washout", tw);
  m.meta.nrmse = field<std::array<double, 4>>(tr, "nrmse", tw);
  const std::string sw = tw + ".series";
  const json& s = field<json>(tr, "series", tw);
  m.meta.series.params = params_from_json(field<json>(s, "params", sw), sw + ".params");
  m.meta.series.h = field<double>(s, "h", sw);
  m.meta.series.stride = field<int>(s, "stride", sw);
  m.meta.series.initial_condition = state_from_json(field<json>(s, "initial_condition", sw), sw);
  if (s.contains("seed") && !s["seed"].is_null()) m.meta.series.rng_seed = s["seed"].get<std::uint64_t>();
  m.meta.series.length = field<std::size_t>(s, "length", sw);
  return m;
}

void save_model(const fs::path& path, const TrainedModel& m) { write_json_file(path, to_json(m)); }

TrainedModel load_model(const fs::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace ascout::io
