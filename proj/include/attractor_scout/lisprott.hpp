#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ascout {

/// One point (x, y, z, u) of the four-dimensional Li-Sprott flow.
struct StateVec4 {
  std::array<double, 4> c{};

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr double x() const { return c[0]; }
  constexpr double y() const { return c[1]; }
  constexpr double z() const { return c[2]; }
  constexpr double u() const { return c[3]; }

  bool is_finite() const {
    return std::isfinite(c[0]) && std::isfinite(c[1]) && std::isfinite(c[2]) &&
           std::isfinite(c[3]);
  }

  friend bool operator==(const StateVec4&, const StateVec4&) = default;
};

/// Image of `s` under the symmetry (x, y, z, u) -> (-x, -y, z, -u).
constexpr StateVec4 mirror(const StateVec4& s) { return {{-s[0], -s[1], s[2], -s[3]}}; }

struct LiSprottParams {
  double a = 2.0;
  double b = 0.8;
  /// Additive noise strength; 0 gives the deterministic flow.
  double sigma = 0.0;

  void validate() const;
};

/// Default integration step of the source system.
inline constexpr double kDefaultStep = 1e-3;
/// Noise strength used for training series: a per-step noise std of 0.2*h.
inline const double kDefaultNoise = 0.2 * std::sqrt(kDefaultStep);
/// |component| beyond this is treated as an integration blow-up.
inline constexpr double kNonFiniteThreshold = 1e12;

inline constexpr std::size_t kTrainingLength = 11000;
inline constexpr std::size_t kTransientLength = 1000;
inline constexpr std::size_t kReferenceLength = 10000;
inline constexpr std::size_t kReferenceDiscard = 10000;

/// Uniformly sampled trajectory plus enough provenance to regenerate it.
struct SampledTrajectory {
  std::vector<StateVec4> points;
  double h = kDefaultStep;
  int stride = 1;
  /// Simulation time of points.front().
  double t_first = 0.0;
  LiSprottParams params;
  StateVec4 initial_condition;
  std::optional<std::uint64_t> rng_seed;

  double sample_interval() const { return h * stride; }
  double time_at(std::size_t k) const { return t_first + static_cast<double>(k) * sample_interval(); }
};

enum class AttractorLabel { LimitCyclePlus, LimitCycleMinus, Torus, ChaosPlus, ChaosMinus };

std::string to_string(AttractorLabel label);
AttractorLabel attractor_label_from_string(const std::string& s);

struct AttractorSpec {
  std::string id;
  StateVec4 initial_condition;
  AttractorLabel label = AttractorLabel::Torus;
};

/// How a noisy training series is checked for attractor hopping.
enum class BasinCheck {
  /// Max |u| must stay within 2x the reference attractor's max |u|.
  MaxAbsU,
  /// The u-average of every 1,000-point window keeps the reference sign.
  WindowMeanUSign,
};

std::string to_string(BasinCheck check);
BasinCheck basin_check_from_string(const std::string& s);

struct ScenarioSpec {
  std::string name;
  /// sigma here is the training-series noise; references always use sigma = 0.
  LiSprottParams params;
  double h = kDefaultStep;
  int stride = 1;
  std::vector<AttractorSpec> attractors;
  std::string training_attractor_id;
  BasinCheck basin_check = BasinCheck::MaxAbsU;

  void validate() const;
  const AttractorSpec& attractor(const std::string& id) const;
  const AttractorSpec& training_attractor() const { return attractor(training_attractor_id); }
};

/// a=2, b=0.8, sampled every 300 steps: two symmetric limit cycles and a torus.
ScenarioSpec scenario_a();
/// a=6, b=0.1, sampled every 200 steps: two symmetric chaotic regions and a torus.
ScenarioSpec scenario_b();
/// Looks up "A" or "B" (case-insensitive).
ScenarioSpec scenario_by_name(const std::string& name);

/// Deterministic part of the vector field: (y - x, -xz + u, xy - a, -by).
constexpr StateVec4 drift(const StateVec4& s, const LiSprottParams& p) {
  return {{s[1] - s[0], -s[0] * s[2] + s[3], s[0] * s[1] - p.a, -p.b * s[1]}};
}

/// Euler-Maruyama integration, emitting every `stride`-th state.
///
/// Each step applies s += h*drift(s) + sigma*sqrt(h)*xi with xi four independent
/// standard normals drawn from std::mt19937_64(seed) through
/// std::normal_distribution<double>. With sigma == 0 no random numbers are
/// drawn and the seed is irrelevant. The returned trajectory holds
/// n_steps / stride points, the first one taken after `stride` steps.
/// Throws NonFinite when a component exceeds kNonFiniteThreshold.
SampledTrajectory integrate_em(const LiSprottParams& p, const StateVec4& x0, double h,
                               std::size_t n_steps, int stride, std::uint64_t seed,
                               double t0 = 0.0);

/// Noise-free ground truth for one attractor.
struct ReferenceSeries {
  /// First kTransientLength samples from the attractor's initial condition.
  SampledTrajectory transient;
  /// kReferenceLength samples collected after a further kReferenceDiscard
  /// samples were dropped.
  SampledTrajectory attractor;
};

ReferenceSeries make_reference(const ScenarioSpec& spec, const std::string& attractor_id);

/// Throws BasinEscape if `series` left the basin of `reference` per spec.basin_check.
void check_basin(const ScenarioSpec& spec, std::span<const StateVec4> series,
                 const ReferenceSeries& reference);

/// 11,000-point noisy series on the training attractor. Throws BasinEscape if
/// the series hops to another attractor.
SampledTrajectory make_training_series(const ScenarioSpec& spec, std::uint64_t seed);
SampledTrajectory make_training_series(const ScenarioSpec& spec, std::uint64_t seed,
                                       const ReferenceSeries& training_reference);

}  // namespace ascout
