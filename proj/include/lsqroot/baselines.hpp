#pragma once

#include <optional>

#include "lsqroot/expr.hpp"
#include "lsqroot/outcome.hpp"

namespace lsqroot {

enum class BaselineMethod { Newton, Secant };

struct BaselineConfig {
  double tolerance = 1e-15;
  int max_iter = 500;
  double divergence_bound = 1e12;
  double derivative_floor = 1e-300;
  /// Offset of the secant's second start when none is given.
  double secant_offset = 0.1;
};

/// x - y/dy. Throws StepError (ZeroDerivative) when |dy| < derivative_floor.
double newton_step(double x, double y, double dy, double derivative_floor = 1e-300);

/// Root of the chord through (x0, y0) and (x1, y1). Throws StepError
/// (FlatSecant) when y1 == y0.
double secant_step(double x0, double y0, double x1, double y1);

/// Newton uses the symbolic derivative of f. Secant starts from x0 and
/// x1 (default x0 + secant_offset); the second start is noted in the outcome.
/// A vanishing derivative or flat chord away from a root ends the run as
/// Diverged: the step would be unbounded.
SolveOutcome solve_baseline(BaselineMethod method, const Expr& f, double x0, std::optional<double> x1 = {},
                            const BaselineConfig& config = {});

}  // namespace lsqroot
