#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Core>

#include "attractor_scout/experiment.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

/// Hand-built weights: dense `w_res` (zeros dropped), one input entry per row.
inline ascout::ReservoirWeights manual_weights(const Eigen::MatrixXd& w_res, const std::vector<int>& col,
                                               const std::vector<double>& val, const Eigen::VectorXd& bias) {
  ascout::ReservoirWeights w;
  w.w_res = w_res.sparseView();
  w.w_res.makeCompressed();
  w.input_col = col;
  w.input_val = val;
  w.bias = bias;
  return w;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ascout_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Scenario-A experiment shrunk to a 20-node reservoir and short closed-loop
/// runs, cheap enough for unit tests.
inline ascout::ExperimentConfig tiny_experiment(const std::string& scenario = "A") {
  auto cfg = ascout::default_experiment(scenario);
  cfg.reservoir.nodes = 20;
  cfg.reservoir.density = 0.3;
  cfg.autonomous_steps = 200;
  return cfg;
}

}  // namespace testutil
