#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "attractor_scout/lisprott.hpp"
#include "attractor_scout/reservoir.hpp"

namespace ascout {

struct RidgeConfig {
  double eta = 1e-3;
  void validate() const;
};

/// Where a training series came from; enough to regenerate it.
struct SeriesProvenance {
  LiSprottParams params;
  double h = kDefaultStep;
  int stride = 1;
  StateVec4 initial_condition;
  std::optional<std::uint64_t> rng_seed;
  std::size_t length = 0;

  static SeriesProvenance of(const SampledTrajectory& t);
};

struct TrainingMeta {
  SeriesProvenance series;
  double eta = 0.0;
  std::size_t washout = kTransientLength;
  /// Per-variable one-step RMSE over the training rows divided by that
  /// variable's standard deviation over the targets.
  std::array<double, 4> nrmse{};
};

struct TrainedModel {
  ReservoirWeights weights;
  ReservoirConfig cfg;
  /// (N + 1) x 4; the last row multiplies the constant bias column.
  Eigen::MatrixXd w_out;
  ReservoirState relaxed_state;
  TrainingMeta meta;
};

/// Appends the constant-one bias column: row k = [X(t_k), 1].
Eigen::MatrixXd assemble_state_matrix(const Eigen::MatrixXd& recorded);

/// Solves (S^T S + eta I) W = S^T Y through a Cholesky factorization of the
/// Gram matrix, refined until the relative normal-equation residual is below
/// 1e-8. Throws SingularSystem when the Gram matrix is not positive definite.
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y, double eta);

/// ||(S^T S + eta I) W - S^T Y|| / ||S^T Y|| in the Frobenius norm.
double normal_equation_residual(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y, double eta,
                                const Eigen::MatrixXd& w);

/// One-step-ahead training on an 11,000-point series: relax, wash out with the
/// first 1,000 points, record 9,999 states, regress onto the next samples.
/// `start` is the reservoir state before relaxation (zeros when omitted).
TrainedModel train(const ReservoirWeights& weights, const ReservoirConfig& cfg, const SampledTrajectory& series,
                   const RidgeConfig& ridge, const std::optional<ReservoirState>& start = std::nullopt,
                   kernels::Backend backend = kernels::Backend::Serial);

/// Per-column RMSE of (prediction - target) divided by the column's standard deviation.
std::array<double, 4> nrmse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target);

}  // namespace ascout
