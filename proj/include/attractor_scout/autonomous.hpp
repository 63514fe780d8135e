#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attractor_scout/lisprott.hpp"
#include "attractor_scout/reservoir.hpp"
#include "attractor_scout/training.hpp"

namespace ascout {

/// Predictions with any component beyond this magnitude end a closed-loop run.
inline constexpr double kDivergenceGuard = 1e6;
inline constexpr std::size_t kDefaultAutonomousSteps = 10000;

struct InferenceRun {
  std::string attractor_id;
  std::vector<StateVec4> warmup;
  std::vector<StateVec4> generated;
  /// Index of the first prediction that tripped the divergence guard; that
  /// prediction is not stored, so generated.size() == *diverged_at.
  std::optional<std::size_t> diverged_at;

  bool diverged() const { return diverged_at.has_value(); }
};

/// Linear readout [X, 1] * W_out.
StateVec4 predict_next(const TrainedModel& model, const ReservoirState& state);

/// Closed-loop operation: reset to the cached relaxed state (or `start`), drive
/// with the ground-truth transient, then feed each prediction back as the next
/// held input for n_steps intervals.
InferenceRun run_autonomous(const TrainedModel& model, std::span<const StateVec4> transient,
                            std::size_t n_steps = kDefaultAutonomousSteps, std::string attractor_id = {},
                            const std::optional<ReservoirState>& start = std::nullopt,
                            kernels::Backend backend = kernels::Backend::Serial);

}  // namespace ascout
