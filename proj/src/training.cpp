#include "attractor_scout/training.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "attractor_scout/error.hpp"

namespace ascout {

namespace {

constexpr double kResidualTarget = 1e-8;
constexpr int kMaxRefinements = 3;

}  // namespace

void RidgeConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidArgument("ridge eta must be >= 0");
}

SeriesProvenance SeriesProvenance::of(const SampledTrajectory& t) {
  return {t.params, t.h, t.stride, t.initial_condition, t.rng_seed, t.points.size()};
}

Eigen::MatrixXd assemble_state_matrix(const Eigen::MatrixXd& recorded) {
  if (recorded.rows() == 0 || recorded.cols() == 0) throw InvalidArgument("state matrix needs recorded states");
  Eigen::MatrixXd s(recorded.rows(), recorded.cols() + 1);
  s.leftCols(recorded.cols()) = recorded;
  s.col(recorded.cols()).setOnes();
  return s;
}

double normal_equation_residual(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y, double eta,
                                const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd rhs = s.transpose() * y;
  const Eigen::MatrixXd lhs = s.transpose() * (s * w) + eta * w;
  const double denom = rhs.norm();
  return denom > 0.0 ? (lhs - rhs).norm() / denom : (lhs - rhs).norm();
}

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y, double eta) {
  if (s.rows() != y.rows()) throw InvalidArgument("state matrix and targets have different row counts");
  if (s.rows() == 0 || s.cols() == 0) throw InvalidArgument("ridge regression needs a nonempty state matrix");
  RidgeConfig{eta}.validate();

  const Eigen::Index p = s.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += eta;
  const Eigen::MatrixXd rhs = s.transpose() * y;

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "regularized Gram matrix is not positive definite (eta = " << eta << ")";
    throw SingularSystem(msg.str());
  }
  Eigen::MatrixXd w = llt.solve(rhs);

  // Iterative refinement against the explicitly formed system.
  const double rhs_norm = rhs.norm();
  for (int it = 0; it < kMaxRefinements; ++it) {
    const Eigen::MatrixXd r = rhs - gram * w;
    const double rel = rhs_norm > 0.0 ? r.norm() / rhs_norm : r.norm();
    if (!std::isfinite(rel)) throw SingularSystem("ridge solution is not finite");
    if (rel < 0.01 * kResidualTarget) break;
    w += llt.solve(r);
  }
  if (!w.allFinite()) throw SingularSystem("ridge solution is not finite");
  return w;
}

std::array<double, 4> nrmse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != 4 || target.cols() != 4 || target.rows() < 2)
    throw InvalidArgument("nrmse needs matching K x 4 matrices with K >= 2");
  std::array<double, 4> out{};
  for (Eigen::Index c = 0; c < 4; ++c) {
    const double rmse = std::sqrt((prediction.col(c) - target.col(c)).squaredNorm() / double(target.rows()));
    const double mean = target.col(c).mean();
    const double sd = std::sqrt((target.col(c).array() - mean).square().sum() / double(target.rows()));
    out[static_cast<std::size_t>(c)] = sd > 0.0 ? rmse / sd : rmse;
  }
  return out;
}

TrainedModel train(const ReservoirWeights& weights, const ReservoirConfig& cfg, const SampledTrajectory& series,
                   const RidgeConfig& ridge, const std::optional<ReservoirState>& start, kernels::Backend backend) {
  cfg.validate();
  ridge.validate();
  if (series.points.size() != kTrainingLength) {
    std::ostringstream msg;
    msg << "training series must have exactly " << kTrainingLength << " points, got " << series.points.size();
    throw LengthMismatch(msg.str());
  }
  if (weights.nodes() != cfg.nodes) throw InvalidArgument("reservoir weights do not match cfg.nodes");

  const ReservoirState initial = start.value_or(ReservoirState{Eigen::VectorXd::Zero(weights.nodes()), 0.0});
  TrainedModel model;
  model.weights = weights;
  model.cfg = cfg;
  model.relaxed_state = relax(weights, cfg, initial);

  const std::span<const StateVec4> pts(series.points);
  const std::size_t washout = kTransientLength;
  const std::size_t rows = kTrainingLength - washout - 1;

  const ReservoirState washed = drive_final(weights, model.relaxed_state, pts.subspan(0, washout), cfg, backend);
  const DriveResult rec = drive(weights, washed, pts.subspan(washout, rows), cfg, backend);

  Eigen::MatrixXd targets(static_cast<Eigen::Index>(rows), 4);
  for (std::size_t k = 0; k < rows; ++k) {
    const auto& p = pts[washout + 1 + k];
    targets.row(static_cast<Eigen::Index>(k)) << p[0], p[1], p[2], p[3];
  }

  const Eigen::MatrixXd s = assemble_state_matrix(rec.recorded);
  model.w_out = ridge_solve(s, targets, ridge.eta);

  model.meta.series = SeriesProvenance::of(series);
  model.meta.eta = ridge.eta;
  model.meta.washout = washout;
  model.meta.nrmse = nrmse(s * model.w_out, targets);
  return model;
}

}  // namespace ascout
