#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lsqroot {

enum class Status { Converged, Oscillating, Diverged, DomainError, SymmetricStall, MaxIterations };

std::string_view status_name(Status s);

/// One step of an iteration, recorded before the update is applied.
/// Baseline solvers leave `delta` at 0, `n_used` at 1 and the probes at NaN.
struct IterationRecord {
  int k = 0;
  double x = 0.0;
  double y = 0.0;
  double delta = 0.0;
  double n_used = 1.0;
  double y_minus = 0.0;
  double y_plus = 0.0;
};

struct SolveOutcome {
  Status status = Status::MaxIterations;
  /// Final iterate when converged; otherwise the traced iterate with smallest |y|.
  double root = 0.0;
  /// Number of update steps taken; equals trace.size().
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::string note;
  std::int64_t evaluations = 0;
};

enum class StepFault { FlatProbe, ZeroPower, ZeroDerivative, FlatSecant };

/// Thrown by the single-step kernels when their precondition is violated.
class StepError : public std::domain_error {
 public:
  StepError(StepFault fault, const std::string& what) : std::domain_error(what), fault_(fault) {}
  StepFault fault() const noexcept { return fault_; }

 private:
  StepFault fault_;
};

/// Failure classification shared by every solver.
struct FailureMonitor {
  double divergence_bound = 1e12;
  /// Oscillation is only reported once this many iterates past the start exist.
  int min_cycle_index = 8;
  int max_period = 4;
  /// x_j "repeats" x_{j-p} when they differ by at most this fraction of the
  /// width of the window x_{j-p}..x_j. Measuring against the cycle's own width
  /// catches unstable cycles that drift geometrically under rounding, and
  /// never fires on monotone convergence (where the width is the difference).
  double match_fraction = 1e-3;
  /// The window must also be at least this wide relative to max(1, |x_j|),
  /// so wandering among neighbouring doubles at the noise floor is not a cycle.
  double min_spread = 1e-6;

  bool diverged(double x) const;

  /// `iterates` is x_0, x_1, ..., x_j. True when x_j repeats x_{j-p} for some
  /// period 2 <= p <= max_period.
  bool oscillating(std::span<const double> iterates) const;
};

/// Index into `trace` of the record with smallest |y|; trace must be nonempty.
std::size_t best_record(const std::vector<IterationRecord>& trace);

/// Fills root for a non-converged outcome per the best-iterate rule.
void settle_failure(SolveOutcome& out, Status status, std::string note);

}  // namespace lsqroot
