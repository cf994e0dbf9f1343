#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lsqroot/expr.hpp"
#include "lsqroot/outcome.hpp"

namespace lsqroot {

struct Interval {
  double lo;
  double hi;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// What estimate_power does with an estimate outside the clamp interval.
enum class OutOfRange {
  Clamp,     // move to the nearer bound
  Saturate,  // use the upper bound regardless of sign
};

struct PowerPolicy {
  Interval clamp{-3.0, 3.0};
  OutOfRange out_of_range = OutOfRange::Saturate;
  /// Estimates with smaller magnitude fall back to 1. Zero always falls back.
  double min_abs = 0.0;
};

enum class PowerMode { Fixed, Variable };

struct SolverConfig {
  PowerMode mode = PowerMode::Fixed;
  double fixed_n = 1.0;
  double delta0 = 0.1;
  std::vector<double> beta_series{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  PowerPolicy power;
  double tolerance = 1e-15;
  int max_iter = 500;
  /// Probe spacing never drops below delta_floor * |x| (or the smallest
  /// normal-ish 1e-300 at x = 0).
  double delta_floor = 2.0 * std::numeric_limits<double>::epsilon();
  double divergence_bound = 1e12;
  /// When the spacing has shrunk below this fraction of the estimated distance
  /// to the root, the probe is redone at that fraction. 0 disables.
  double scale_fraction = 1e-3;
  /// In variable mode, a second difference no larger than this multiple of
  /// its rounding-error bound is treated as noise and the previous N is kept.
  /// 0 disables.
  double noise_factor = 4.0;
  /// The probe difference y(x+d) - y(x-d) must exceed its rounding-error bound
  /// by 1/slope_noise_ratio; otherwise the spacing is widened (never past
  /// delta0) and the probe redone. 0 disables.
  double slope_noise_ratio = 1e-6;
  /// Caps the spacing at this multiple of |y / slope|, the distance a
  /// straight-line fit would move. 0 disables.
  double reach_cap = 1.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// One update of the three-point least-squares iteration.
/// Throws StepError (FlatProbe) if y_plus == y_minus and (ZeroPower) if n == 0.
double lsq3_step(double x, double y_minus, double y0, double y_plus, double delta, double n);

/// Local power estimate from central differences. Total: singular or
/// non-finite estimates give 1.
double estimate_power(double y_minus, double y0, double y_plus, double delta,
                      const PowerPolicy& policy = {});

/// Next probe spacing from the last two iterates.
double select_delta(double x_k, double x_prev, double delta_prev, const std::vector<double>& beta_series,
                    double floor);

struct Probe {
  double delta;
  double y_minus;
  double y_plus;
  /// Rounding-error bounds of the two probe values.
  double err_minus;
  double err_plus;
};

/// Raised by adjust_delta; status is SymmetricStall or DomainError. For a
/// stall, `value()` is the common value of the last probe pair.
class ProbeError : public std::runtime_error {
 public:
  ProbeError(Status status, const std::string& what, double value = 0.0)
      : std::runtime_error(what), status_(status), value_(value) {}
  Status status() const noexcept { return status_; }
  double value() const noexcept { return value_; }

 private:
  Status status_;
  double value_;
};

/// Evaluates f at x +- delta, shrinking delta on domain errors (halving, up to
/// 4 times) and widening it by 1.5x when the two values coincide (up to 8
/// times). `evaluations`, if given, is incremented per function evaluation.
Probe adjust_delta(const Expr& f, double x, double delta, std::int64_t* evaluations = nullptr);

SolveOutcome solve(const Expr& f, double x0, const SolverConfig& config = {});

}  // namespace lsqroot
