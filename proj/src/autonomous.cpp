#include "attractor_scout/autonomous.hpp"

#include <cmath>

#include "attractor_scout/error.hpp"

namespace ascout {

StateVec4 predict_next(const TrainedModel& model, const ReservoirState& state) {
  const Eigen::Index n = state.x.size();
  if (model.w_out.rows() != n + 1 || model.w_out.cols() != 4)
    throw InvalidArgument("readout shape does not match the reservoir state");
  StateVec4 out;
  for (Eigen::Index c = 0; c < 4; ++c) {
    out[static_cast<std::size_t>(c)] = state.x.dot(model.w_out.col(c).head(n)) + model.w_out(n, c);
  }
  return out;
}

InferenceRun run_autonomous(const TrainedModel& model, std::span<const StateVec4> transient, std::size_t n_steps,
                            std::string attractor_id, const std::optional<ReservoirState>& start,
                            kernels::Backend backend) {
  if (transient.size() != kTransientLength) throw LengthMismatch("warm-up transient must have 1,000 points");
  InferenceRun run;
  run.attractor_id = std::move(attractor_id);
  run.warmup.assign(transient.begin(), transient.end());
  run.generated.reserve(n_steps);

  const ReservoirConfig& cfg = model.cfg;
  const int steps = cfg.steps_per_input();
  ReservoirIntegrator integ(model.weights, cfg.input_gain, cfg.dt, backend);

  ReservoirState state = start.value_or(model.relaxed_state);
  for (const auto& u : transient) {
    integ.hold(u);
    integ.advance(state, steps);
  }

  for (std::size_t k = 0; k < n_steps; ++k) {
    const StateVec4 next = predict_next(model, state);
    bool blown = false;
    for (std::size_t i = 0; i < 4; ++i) blown = blown || !(std::abs(next[i]) <= kDivergenceGuard);
    if (blown) {
      run.diverged_at = k;
      break;
    }
    run.generated.push_back(next);
    if (k + 1 == n_steps) break;
    integ.hold(next);
    integ.advance(state, steps);
  }
  return run;
}

}  // namespace ascout
