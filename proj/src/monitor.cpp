#include "lsqroot/outcome.hpp"

#include <algorithm>
#include <cmath>

namespace lsqroot {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Converged:
      return "Converged";
    case Status::Oscillating:
      return "Oscillating";
    case Status::Diverged:
      return "Diverged";
    case Status::DomainError:
      return "DomainError";
    case Status::SymmetricStall:
      return "SymmetricStall";
    case Status::MaxIterations:
      return "MaxIterations";
  }
  return "?";
}

bool FailureMonitor::diverged(double x) const {
  return !std::isfinite(x) || std::fabs(x) > divergence_bound;
}

bool FailureMonitor::oscillating(std::span<const double> iterates) const {
  if (iterates.empty()) return false;
  const std::size_t j = iterates.size() - 1;
  if (j < static_cast<std::size_t>(min_cycle_index)) return false;
  const double xj = iterates[j];
  const double scale = std::max(1.0, std::fabs(xj));
  for (std::size_t p = 2; p <= static_cast<std::size_t>(max_period) && p <= j; ++p) {
    const auto window = iterates.subspan(j - p, p + 1);
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    const double spread = *hi - *lo;
    if (spread >= min_spread * scale && std::fabs(xj - iterates[j - p]) <= match_fraction * spread) return true;
  }
  return false;
}

std::size_t best_record(const std::vector<IterationRecord>& trace) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    // NaN never wins.
    if (std::fabs(trace[i].y) < std::fabs(trace[best].y) || std::isnan(trace[best].y)) best = i;
  }
  return best;
}

void settle_failure(SolveOutcome& out, Status status, std::string note) {
  out.status = status;
  out.note = std::move(note);
  out.iterations = static_cast<int>(out.trace.size());
  if (!out.trace.empty()) out.root = out.trace[best_record(out.trace)].x;
}

}  // namespace lsqroot
