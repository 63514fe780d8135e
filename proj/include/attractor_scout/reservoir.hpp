#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "attractor_scout/kernels.hpp"
#include "attractor_scout/lisprott.hpp"

namespace ascout {

inline constexpr int kInputDim = 4;

/// Meta-parameters of a continuous-time echo state network.
struct ReservoirConfig {
  int nodes = 300;
  double density = 0.1;
  double input_gain = 0.3;
  /// Half-width of the uniform bias distribution.
  double bias_amplitude = 1.0;
  /// Time each input sample is held.
  double theta = 2.5;
  double dt = 0.1;
  /// Target for the largest real part of the eigenvalues of w_res.
  double lambda_max_target = 0.95;
  double relax_time = 300.0;
  std::uint64_t topology_seed = 0;

  void validate() const;
  int steps_per_input() const;
  int relax_steps() const;
};

/// Fixed random weights. Each w_in row holds one nonzero: column input_col[i],
/// value input_val[i].
struct ReservoirWeights {
  Eigen::SparseMatrix<double, Eigen::RowMajor, int> w_res;
  std::vector<int> input_col;
  std::vector<double> input_val;
  Eigen::VectorXd bias;
  double achieved_lambda_max = 0.0;

  int nodes() const { return static_cast<int>(bias.size()); }
  kernels::CsrView csr() const;
  /// Dense N x 4 view of w_in.
  Eigen::MatrixXd input_matrix() const;
  friend bool operator==(const ReservoirWeights& a, const ReservoirWeights& b);
};

struct ReservoirState {
  Eigen::VectorXd x;
  double t = 0.0;
};

/// Largest real part among the eigenvalues of a square matrix (dense QR
/// iteration via Eigen::EigenSolver).
double max_real_eigenvalue(const Eigen::MatrixXd& m);

/// Random sparse reservoir scaled so its rightmost eigenvalue has real part
/// cfg.lambda_max_target. Throws DegenerateSpectrum after 8 raw draws whose
/// rightmost real part is <= 1e-6.
ReservoirWeights build_reservoir(const ReservoirConfig& cfg);

/// Integrates dX/dt = -X + tanh(W_res X + G W_in u + B) with classical RK4 and a
/// piecewise-constant input. Owns its scratch buffers; one per run.
class ReservoirIntegrator {
 public:
  ReservoirIntegrator(const ReservoirWeights& w, double input_gain, double dt,
                      kernels::Backend backend = kernels::Backend::Serial);

  /// Sets the input held until the next call.
  void hold(const StateVec4& u);
  void hold_zero();

  void step(ReservoirState& s);
  void advance(ReservoirState& s, int n_steps);

 private:
  const ReservoirWeights& w_;
  kernels::CsrView csr_;
  double gain_;
  double dt_;
  kernels::Backend backend_;
  std::vector<double> drive_, k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step of size dt with `input_held` constant.
ReservoirState rk4_step(const ReservoirState& state, const ReservoirWeights& w, const StateVec4& input_held,
                        double input_gain, double dt);

/// Input-free evolution for cfg.relax_time from `start` (all zeros by default).
ReservoirState relax(const ReservoirWeights& w, const ReservoirConfig& cfg);
ReservoirState relax(const ReservoirWeights& w, const ReservoirConfig& cfg, const ReservoirState& start);

struct DriveResult {
  ReservoirState final_state;
  /// Row k is the state at the end of the k-th input interval.
  Eigen::MatrixXd recorded;
};

/// Holds each input for theta and records the state at the last RK4 grid point
/// of the interval.
DriveResult drive(const ReservoirWeights& w, const ReservoirState& s0, std::span<const StateVec4> inputs,
                  const ReservoirConfig& cfg, kernels::Backend backend = kernels::Backend::Serial);

/// Same as drive() without keeping the recordings.
ReservoirState drive_final(const ReservoirWeights& w, const ReservoirState& s0, std::span<const StateVec4> inputs,
                           const ReservoirConfig& cfg, kernels::Backend backend = kernels::Backend::Serial);

}  // namespace ascout
