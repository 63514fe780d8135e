#include "attractor_scout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attractor_scout/error.hpp"

namespace ascout {

double AttractorError::max_abs_delta() const {
  double m = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    m = std::max({m, std::abs(delta[i]), std::abs(delta_abs[i])});
    if (std::isnan(delta[i]) || std::isnan(delta_abs[i])) return std::numeric_limits<double>::infinity();
  }
  return m;
}

std::string to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Diverged: return "Diverged";
    case OutcomeClass::BoundedFailure: return "BoundedFailure";
    case OutcomeClass::PartialSuccess: return "PartialSuccess";
  }
  return "Unknown";
}

OutcomeClass outcome_class_from_string(const std::string& s) {
  if (s == "Diverged") return OutcomeClass::Diverged;
  if (s == "BoundedFailure") return OutcomeClass::BoundedFailure;
  if (s == "PartialSuccess") return OutcomeClass::PartialSuccess;
  throw ConfigError("unknown outcome class '" + s + "'");
}

AttractorStats stats(std::span<const StateVec4> series) {
  if (series.empty()) throw EmptySeries("statistics need at least one point");
  AttractorStats st;
  for (const auto& p : series) {
    for (std::size_t i = 0; i < 4; ++i) {
      st.mean[i] += p[i];
      st.mean_abs[i] += std::abs(p[i]);
    }
  }
  const double n = static_cast<double>(series.size());
  for (std::size_t i = 0; i < 4; ++i) {
    st.mean[i] /= n;
    st.mean_abs[i] /= n;
  }
  st.n_points = series.size();
  return st;
}

AttractorError attractor_error(const AttractorStats& pred, const AttractorStats& ref) {
  AttractorError e;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double norm = ref.mean_abs[i];
    if (norm == 0.0) throw ZeroNormalizer("reference has a zero absolute average");
    e.delta[i] = (pred.mean[i] - ref.mean[i]) / norm;
    e.delta_abs[i] = (pred.mean_abs[i] - ref.mean_abs[i]) / norm;
    sum_sq += e.delta[i] * e.delta[i] + e.delta_abs[i] * e.delta_abs[i];
  }
  e.delta_att = std::sqrt(sum_sq);
  return e;
}

AttractorError unbounded_error() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  AttractorError e;
  e.delta.fill(inf);
  e.delta_abs.fill(inf);
  e.delta_att = inf;
  return e;
}

double total_error(std::span<const AttractorError> per_attractor) {
  if (per_attractor.empty()) throw InvalidArgument("total error needs at least one attractor");
  double sum_sq = 0.0;
  for (const auto& e : per_attractor) sum_sq += e.delta_att * e.delta_att;
  return std::sqrt(sum_sq);
}

RunOutcome classify(std::vector<AttractorError> per_attractor, bool truncated) {
  RunOutcome out;
  out.delta_tot = total_error(per_attractor);
  double worst = 0.0;
  for (const auto& e : per_attractor) worst = std::max(worst, e.max_abs_delta());
  if (truncated || worst >= kDivergedThreshold) {
    out.cls = OutcomeClass::Diverged;
  } else if (worst < kSuccessThreshold) {
    out.cls = OutcomeClass::PartialSuccess;
  } else {
    out.cls = OutcomeClass::BoundedFailure;
  }
  out.per_attractor = std::move(per_attractor);
  return out;
}

}  // namespace ascout
