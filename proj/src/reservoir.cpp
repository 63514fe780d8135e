#include "attractor_scout/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "attractor_scout/error.hpp"

namespace ascout {

namespace {

constexpr int kMaxSpectrumDraws = 8;
constexpr double kDegenerateThreshold = 1e-6;

int checked_ratio(double total, double dt, const char* what) {
  const double r = total / dt;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << what << " (" << total << ") must be a positive integer multiple of dt (" << dt << ")";
    throw InvalidArgument(msg.str());
  }
  return static_cast<int>(n);
}

}  // namespace

void ReservoirConfig::validate() const {
  if (nodes < 1) throw InvalidArgument("reservoir nodes must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("reservoir density must be in (0, 1]");
  if (!(lambda_max_target > 0.0)) throw InvalidArgument("lambda_max_target must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("rk4 dt must be > 0");
  if (!(bias_amplitude >= 0.0)) throw InvalidArgument("bias amplitude must be >= 0");
  if (!std::isfinite(input_gain)) throw InvalidArgument("input gain must be finite");
  if (!(relax_time >= 0.0)) throw InvalidArgument("relax time must be >= 0");
  (void)steps_per_input();
}

int ReservoirConfig::steps_per_input() const { return checked_ratio(theta, dt, "theta"); }

int ReservoirConfig::relax_steps() const {
  if (relax_time == 0.0) return 0;
  return checked_ratio(relax_time, dt, "relax time");
}

kernels::CsrView ReservoirWeights::csr() const {
  return {static_cast<int>(w_res.rows()), w_res.outerIndexPtr(), w_res.innerIndexPtr(), w_res.valuePtr()};
}

Eigen::MatrixXd ReservoirWeights::input_matrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nodes(), kInputDim);
  for (int i = 0; i < nodes(); ++i) m(i, input_col[i]) = input_val[i];
  return m;
}

bool operator==(const ReservoirWeights& a, const ReservoirWeights& b) {
  if (a.w_res.rows() != b.w_res.rows() || a.w_res.cols() != b.w_res.cols() ||
      a.w_res.nonZeros() != b.w_res.nonZeros())
    return false;
  const auto nnz = static_cast<std::size_t>(a.w_res.nonZeros());
  const auto rows = static_cast<std::size_t>(a.w_res.rows());
  return std::equal(a.w_res.outerIndexPtr(), a.w_res.outerIndexPtr() + rows + 1, b.w_res.outerIndexPtr()) &&
         std::equal(a.w_res.innerIndexPtr(), a.w_res.innerIndexPtr() + nnz, b.w_res.innerIndexPtr()) &&
         std::equal(a.w_res.valuePtr(), a.w_res.valuePtr() + nnz, b.w_res.valuePtr()) &&
         a.input_col == b.input_col && a.input_val == b.input_val && a.bias == b.bias &&
         a.achieved_lambda_max == b.achieved_lambda_max;
}

double max_real_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("eigenvalues need a nonempty square matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw DegenerateSpectrum("eigenvalue iteration did not converge");
  return solver.eigenvalues().real().maxCoeff();
}

ReservoirWeights build_reservoir(const ReservoirConfig& cfg) {
  cfg.validate();
  const int n = cfg.nodes;
  std::mt19937_64 rng(cfg.topology_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> pick_input(0, kInputDim - 1);

  ReservoirWeights w;
  w.bias.resize(n);
  for (int i = 0; i < n; ++i) w.bias[i] = cfg.bias_amplitude * unit(rng);

  w.input_col.resize(n);
  w.input_val.resize(n);
  for (int i = 0; i < n; ++i) {
    w.input_col[i] = pick_input(rng);
    w.input_val[i] = unit(rng);
  }

  for (int draw = 0; draw < kMaxSpectrumDraws; ++draw) {
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(static_cast<std::size_t>(cfg.density * n * n * 1.2) + 16);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (coin(rng) < cfg.density) triplets.emplace_back(i, j, unit(rng));
      }
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor, int> raw(n, n);
    raw.setFromTriplets(triplets.begin(), triplets.end());
    raw.makeCompressed();

    const double raw_max = max_real_eigenvalue(Eigen::MatrixXd(raw));
    if (!(raw_max > kDegenerateThreshold)) continue;

    w.w_res = raw * (cfg.lambda_max_target / raw_max);
    w.w_res.makeCompressed();
    w.achieved_lambda_max = max_real_eigenvalue(Eigen::MatrixXd(w.w_res));
    return w;
  }
  std::ostringstream msg;
  msg << "no reservoir draw with a positive rightmost eigenvalue after " << kMaxSpectrumDraws
      << " attempts (seed " << cfg.topology_seed << ")";
  throw DegenerateSpectrum(msg.str());
}

ReservoirIntegrator::ReservoirIntegrator(const ReservoirWeights& w, double input_gain, double dt,
                                         kernels::Backend backend)
    : w_(w), csr_(w.csr()), gain_(input_gain), dt_(dt), backend_(backend) {
  const auto n = static_cast<std::size_t>(w.nodes());
  drive_.resize(n);
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
  hold_zero();
}

void ReservoirIntegrator::hold(const StateVec4& u) {
  const int n = w_.nodes();
  for (int i = 0; i < n; ++i) drive_[i] = gain_ * w_.input_val[i] * u[w_.input_col[i]] + w_.bias[i];
}

void ReservoirIntegrator::hold_zero() {
  std::copy(w_.bias.begin(), w_.bias.end(), drive_.begin());
}

void ReservoirIntegrator::step(ReservoirState& s) {
  using kernels::axpy_into;
  if (s.x.size() != w_.nodes()) throw InvalidArgument("state size does not match reservoir");
  const std::span<double> x(s.x.data(), static_cast<std::size_t>(s.x.size()));
  const std::span<const double> drive(drive_);
  kernels::reservoir_rhs(backend_, csr_, x, drive, k1_);
  axpy_into(x, 0.5 * dt_, k1_, tmp_);
  kernels::reservoir_rhs(backend_, csr_, tmp_, drive, k2_);
  axpy_into(x, 0.5 * dt_, k2_, tmp_);
  kernels::reservoir_rhs(backend_, csr_, tmp_, drive, k3_);
  axpy_into(x, dt_, k3_, tmp_);
  kernels::reservoir_rhs(backend_, csr_, tmp_, drive, k4_);
  kernels::rk4_combine(x, dt_, k1_, k2_, k3_, k4_);
  s.t += dt_;
}

void ReservoirIntegrator::advance(ReservoirState& s, int n_steps) {
  for (int k = 0; k < n_steps; ++k) step(s);
}

ReservoirState rk4_step(const ReservoirState& state, const ReservoirWeights& w, const StateVec4& input_held,
                        double input_gain, double dt) {
  if (state.x.size() != w.nodes()) throw InvalidArgument("state size does not match reservoir");
  ReservoirIntegrator integ(w, input_gain, dt);
  integ.hold(input_held);
  ReservoirState next = state;
  integ.step(next);
  return next;
}

ReservoirState relax(const ReservoirWeights& w, const ReservoirConfig& cfg) {
  return relax(w, cfg, ReservoirState{Eigen::VectorXd::Zero(w.nodes()), 0.0});
}

ReservoirState relax(const ReservoirWeights& w, const ReservoirConfig& cfg, const ReservoirState& start) {
  if (start.x.size() != w.nodes()) throw InvalidArgument("state size does not match reservoir");
  ReservoirIntegrator integ(w, cfg.input_gain, cfg.dt);
  integ.hold_zero();
  ReservoirState s = start;
  integ.advance(s, cfg.relax_steps());
  return s;
}

DriveResult drive(const ReservoirWeights& w, const ReservoirState& s0, std::span<const StateVec4> inputs,
                  const ReservoirConfig& cfg, kernels::Backend backend) {
  if (inputs.empty()) throw InvalidArgument("drive needs at least one input");
  if (s0.x.size() != w.nodes()) throw InvalidArgument("state size does not match reservoir");
  const int steps = cfg.steps_per_input();
  ReservoirIntegrator integ(w, cfg.input_gain, cfg.dt, backend);
  DriveResult out{s0, Eigen::MatrixXd(static_cast<Eigen::Index>(inputs.size()), w.nodes())};
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    integ.hold(inputs[k]);
    integ.advance(out.final_state, steps);
    out.recorded.row(static_cast<Eigen::Index>(k)) = out.final_state.x.transpose();
  }
  return out;
}

ReservoirState drive_final(const ReservoirWeights& w, const ReservoirState& s0, std::span<const StateVec4> inputs,
                           const ReservoirConfig& cfg, kernels::Backend backend) {
  if (inputs.empty()) throw InvalidArgument("drive needs at least one input");
  if (s0.x.size() != w.nodes()) throw InvalidArgument("state size does not match reservoir");
  const int steps = cfg.steps_per_input();
  ReservoirIntegrator integ(w, cfg.input_gain, cfg.dt, backend);
  ReservoirState s = s0;
  for (const auto& u : inputs) {
    integ.hold(u);
    integ.advance(s, steps);
  }
  return s;
}

}  // namespace ascout
