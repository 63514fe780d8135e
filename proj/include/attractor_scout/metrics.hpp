#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "attractor_scout/lisprott.hpp"

namespace ascout {

/// Time averages <i> and <|i|> of the four variables.
struct AttractorStats {
  std::array<double, 4> mean{};
  std::array<double, 4> mean_abs{};
  std::size_t n_points = 0;
};

/// Normalized deviations of one predicted attractor from its reference:
///   delta[i]     = (<i> - <i~>) / <|i~|>
///   delta_abs[i] = (<|i|> - <|i~|>) / <|i~|>
///   delta_att    = sqrt(sum delta^2 + sum delta_abs^2)
struct AttractorError {
  std::array<double, 4> delta{};
  std::array<double, 4> delta_abs{};
  double delta_att = 0.0;

  /// Largest |value| among the eight deltas.
  double max_abs_delta() const;
};

enum class OutcomeClass { Diverged, BoundedFailure, PartialSuccess };

std::string to_string(OutcomeClass c);
OutcomeClass outcome_class_from_string(const std::string& s);

/// Any normalized delta at or above this magnitude marks a diverged run.
inline constexpr double kDivergedThreshold = 100.0;
/// All normalized deltas strictly below this magnitude mark a partial success.
inline constexpr double kSuccessThreshold = 2.0;

struct RunOutcome {
  OutcomeClass cls = OutcomeClass::BoundedFailure;
  std::vector<AttractorError> per_attractor;
  double delta_tot = 0.0;
};

/// Throws EmptySeries for an empty series.
AttractorStats stats(std::span<const StateVec4> series);

/// Throws ZeroNormalizer if any reference <|i~|> is zero.
AttractorError attractor_error(const AttractorStats& pred, const AttractorStats& ref);

/// Error for a prediction that produced no usable points: every delta is +inf.
AttractorError unbounded_error();

/// sqrt of the sum of squared delta_att values.
double total_error(std::span<const AttractorError> per_attractor);

/// `truncated` marks runs stopped by the divergence guard; they are always Diverged.
RunOutcome classify(std::vector<AttractorError> per_attractor, bool truncated = false);

}  // namespace ascout
