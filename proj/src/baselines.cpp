#include "lsqroot/baselines.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace lsqroot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

IterationRecord record(int k, double x, double y) { return {k, x, y, 0.0, 1.0, kNaN, kNaN}; }

struct Runner {
  const Expr& f;
  const BaselineConfig& config;
  SolveOutcome out;
  FailureMonitor monitor;
  std::vector<double> iterates;

  Runner(const Expr& fn, const BaselineConfig& cfg)
      : f(fn), config(cfg), monitor{.divergence_bound = cfg.divergence_bound} {}

  EvalResult value(const Expr& e, double x) {
    ++out.evaluations;
    return eval(e, x);
  }

  // Common tail of every step. Returns true when the run is finished.
  bool advance(double x, double x_next, std::optional<double>& y_next) {
    if (monitor.diverged(x_next)) {
      settle_failure(out, Status::Diverged, fmt::format("iterate left the bound |x| <= {:g}", config.divergence_bound));
      return true;
    }
    y_next = value(f, x_next);
    if (!y_next) {
      settle_failure(out, Status::DomainError, fmt::format("iterate x = {:.15g} is outside the domain of f", x_next));
      return true;
    }
    if (std::fabs(x_next - x) + std::fabs(*y_next) < config.tolerance) {
      out.status = Status::Converged;
      out.root = x_next;
      out.iterations = static_cast<int>(out.trace.size());
      return true;
    }
    iterates.push_back(x_next);
    if (monitor.oscillating(iterates)) {
      settle_failure(out, Status::Oscillating, "iterates repeat without meeting the stopping criterion");
      return true;
    }
    return false;
  }

  void newton(double x0) {
    const Expr df = differentiate(f);
    iterates.push_back(x0);
    double x = x0;
    auto y = value(f, x);
    if (!y) return start_failure(x0);
    for (int k = 1; k <= config.max_iter; ++k) {
      out.trace.push_back(record(k, x, *y));
      if (exact_root(x, *y)) return;
      auto dy = value(df, x);
      if (!dy) {
        settle_failure(out, Status::DomainError, fmt::format("derivative undefined at x = {:.15g}", x));
        return;
      }
      double x_next = 0.0;
      try {
        x_next = newton_step(x, *y, *dy, config.derivative_floor);
      } catch (const StepError&) {
        settle_failure(out, Status::Diverged, fmt::format("zero derivative at x = {:.15g}", x));
        return;
      }
      std::optional<double> y_next;
      if (advance(x, x_next, y_next)) return;
      x = x_next;
      y = y_next;
    }
    settle_failure(out, Status::MaxIterations, fmt::format("no convergence in {} steps", config.max_iter));
  }

  void secant(double x0, double x1) {
    out.note = fmt::format("second start x1 = {:.15g}", x1);
    iterates = {x0, x1};
    auto y0 = value(f, x0);
    if (!y0) return start_failure(x0);
    auto y1 = value(f, x1);
    if (!y1) return start_failure(x1);
    for (int k = 1; k <= config.max_iter; ++k) {
      out.trace.push_back(record(k, x1, *y1));
      if (exact_root(x1, *y1)) return;
      double x2 = 0.0;
      try {
        x2 = secant_step(x0, *y0, x1, *y1);
      } catch (const StepError&) {
        settle_failure(out, Status::Diverged, fmt::format("flat secant at x = {:.15g}", x1));
        return;
      }
      std::optional<double> y2;
      if (advance(x1, x2, y2)) return;
      x0 = x1;
      y0 = y1;
      x1 = x2;
      y1 = y2;
    }
    settle_failure(out, Status::MaxIterations, fmt::format("no convergence in {} steps", config.max_iter));
  }

  // An iterate that is already an exact root needs no further step; without
  // this a double root hit exactly would read as a zero derivative.
  bool exact_root(double x, double y) {
    if (y != 0.0) return false;
    out.status = Status::Converged;
    out.root = x;
    out.iterations = static_cast<int>(out.trace.size());
    return true;
  }

  void start_failure(double x) {
    out.status = Status::DomainError;
    out.root = x;
    out.note = fmt::format("f is not defined at the start x = {:.15g}", x);
  }
};

}  // namespace

double newton_step(double x, double y, double dy, double derivative_floor) {
  if (!(std::fabs(dy) >= derivative_floor)) throw StepError(StepFault::ZeroDerivative, "derivative is zero");
  return x - y / dy;
}

double secant_step(double x0, double y0, double x1, double y1) {
  if (y1 == y0) throw StepError(StepFault::FlatSecant, "secant is horizontal");
  return x1 - y1 * (x1 - x0) / (y1 - y0);
}

SolveOutcome solve_baseline(BaselineMethod method, const Expr& f, double x0, std::optional<double> x1,
                            const BaselineConfig& config) {
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (config.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  Runner run(f, config);
  run.out.root = x0;
  if (method == BaselineMethod::Newton) {
    run.newton(x0);
  } else {
    run.secant(x0, x1.value_or(x0 + config.secant_offset));
  }
  return std::move(run.out);
}

}  // namespace lsqroot
