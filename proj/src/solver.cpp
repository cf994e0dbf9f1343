#include "lsqroot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace lsqroot {

namespace {

constexpr double kTinySpacing = 1e-300;
constexpr int kMaxShrinks = 4;
constexpr int kMaxWidenings = 8;
constexpr double kWidenFactor = 1.5;
constexpr int kMaxWidenRounds = 3;
constexpr double kMaxGrowth = 1e8;

struct Sample {
  double value;
  double error;
};

std::optional<Sample> sample(const Expr& f, double x, std::int64_t* evaluations) {
  if (evaluations) ++*evaluations;
  auto r = eval_bounded(f, x);
  if (!r) return std::nullopt;
  return Sample{r->value, r->error};
}

}  // namespace

void SolverConfig::validate() const {
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw std::invalid_argument("delta0 must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!power.clamp.contains(1.0)) throw std::invalid_argument("N clamp interval must contain 1");
  if (beta_series.empty()) throw std::invalid_argument("beta series must be nonempty");
  for (std::size_t i = 0; i < beta_series.size(); ++i) {
    if (!(beta_series[i] > 0.0)) throw std::invalid_argument("beta values must be positive");
    if (i > 0 && !(beta_series[i] < beta_series[i - 1]))
      throw std::invalid_argument("beta series must be strictly descending");
  }
  if (mode == PowerMode::Fixed && (fixed_n == 0.0 || !std::isfinite(fixed_n)))
    throw std::invalid_argument("fixed N must be finite and nonzero");
  if (!(delta_floor >= 0.0)) throw std::invalid_argument("delta_floor must be non-negative");
  if (!(divergence_bound > 0.0)) throw std::invalid_argument("divergence_bound must be positive");
}

double lsq3_step(double x, double y_minus, double y0, double y_plus, double delta, double n) {
  if (n == 0.0) throw StepError(StepFault::ZeroPower, "power N must be nonzero");
  if (y_plus == y_minus) throw StepError(StepFault::FlatProbe, "probe values coincide");
  // The factor N in front of the fitted mean cancels the 1/(6N) inside it;
  // dropping both keeps the update well conditioned for small |N|.
  const double mean = ((n + 1.0) * y_minus + (4.0 * n - 2.0) * y0 + (n + 1.0) * y_plus) / 6.0;
  const double slope = (y_plus - y_minus) / (2.0 * delta);
  return x - mean / slope;
}

double estimate_power(double y_minus, double y0, double y_plus, double delta, const PowerPolicy& policy) {
  const double slope = (y_plus - y_minus) / (2.0 * delta);
  const double curvature = (y_minus - 2.0 * y0 + y_plus) / (delta * delta);
  const double s2 = slope * slope;
  const double denom = s2 - y0 * curvature;
  if (!(std::fabs(denom) >= 1e-300)) return 1.0;
  double n = s2 / denom;
  if (!std::isfinite(n)) return 1.0;
  if (!policy.clamp.contains(n)) {
    n = policy.out_of_range == OutOfRange::Saturate ? policy.clamp.hi
                                                    : std::clamp(n, policy.clamp.lo, policy.clamp.hi);
  }
  if (n == 0.0 || std::fabs(n) < policy.min_abs) return 1.0;
  return n;
}

double select_delta(double x_k, double x_prev, double delta_prev, const std::vector<double>& beta_series,
                    double floor) {
  const double dx = x_k - x_prev;
  const double dx2 = dx * dx;
  for (double beta : beta_series) {
    const double candidate = beta * dx2;
    if (candidate < 1.0 && candidate <= delta_prev) return std::max(candidate, floor);
  }
  return std::max(floor, beta_series.back() * dx2);
}

Probe adjust_delta(const Expr& f, double x, double delta, std::int64_t* evaluations) {
  int shrinks = 0;
  int widenings = 0;
  for (;;) {
    auto lo = sample(f, x - delta, evaluations);
    auto hi = lo ? sample(f, x + delta, evaluations) : std::nullopt;
    if (!lo || !hi) {
      if (shrinks == kMaxShrinks)
        throw ProbeError(Status::DomainError,
                         fmt::format("domain error probing x = {:.15g} +- {:.3g}", x, delta));
      ++shrinks;
      delta /= 2.0;
      continue;
    }
    if (lo->value != hi->value) return Probe{delta, lo->value, hi->value, lo->error, hi->error};
    if (widenings == kMaxWidenings)
      throw ProbeError(Status::SymmetricStall,
                       fmt::format("f(x - d) == f(x + d) at x = {:.15g} for every tried d", x), lo->value);
    ++widenings;
    delta *= kWidenFactor;
  }
}

SolveOutcome solve(const Expr& f, double x0, const SolverConfig& config) {
  config.validate();
  SolveOutcome out;
  out.root = x0;
  const FailureMonitor monitor{.divergence_bound = config.divergence_bound};

  auto first = std::isfinite(x0) ? sample(f, x0, &out.evaluations) : std::nullopt;
  if (!first) {
    out.status = Status::DomainError;
    out.note = fmt::format("f is not defined at the start x0 = {:.15g}", x0);
    return out;
  }

  std::vector<double> iterates{x0};
  double x = x0;
  Sample y = *first;
  double x_prev = x0;
  double delta = config.delta0;
  double n_prev = 1.0;

  for (int k = 1; k <= config.max_iter; ++k) {
    if (k > 1) {
      const double floor = std::max(config.delta_floor * std::fabs(x), kTinySpacing);
      delta = select_delta(x, x_prev, delta, config.beta_series, floor);
    }

    if (y.value == 0.0) {
      // An exact zero is a fixed point of the iteration; probing here could
      // only stall (on an even function) or move by noise.
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.trace.push_back({k, x, 0.0, delta, n_prev, nan, nan});
      out.status = Status::Converged;
      out.root = x;
      out.iterations = k;
      return out;
    }

    Probe probe{};
    try {
      probe = adjust_delta(f, x, delta, &out.evaluations);
      if (config.scale_fraction > 0.0) {
        // |y / slope| is the distance a straight-line fit would move.
        const double reach = std::fabs(y.value * 2.0 * probe.delta / (probe.y_plus - probe.y_minus));
        const double wanted = config.scale_fraction * reach;
        if (std::isfinite(reach) && probe.delta < wanted && wanted < 1.0)
          probe = adjust_delta(f, x, wanted, &out.evaluations);
      }
      if (config.reach_cap > 0.0) {
        const double reach = std::fabs(y.value * 2.0 * probe.delta / (probe.y_plus - probe.y_minus));
        const double floor = std::max(config.delta_floor * std::fabs(x), kTinySpacing);
        const double cap = std::max(config.reach_cap * reach, floor);
        if (std::isfinite(reach) && probe.delta > cap) probe = adjust_delta(f, x, cap, &out.evaluations);
      }
      for (int round = 0; config.slope_noise_ratio > 0.0 && round < kMaxWidenRounds; ++round) {
        const double noise = probe.err_minus + probe.err_plus;
        const double diff = std::fabs(probe.y_plus - probe.y_minus);
        if (noise <= config.slope_noise_ratio * diff || probe.delta >= config.delta0) break;
        const double grow = std::min(2.0 * noise / (config.slope_noise_ratio * diff), kMaxGrowth);
        probe = adjust_delta(f, x, std::min(probe.delta * grow, config.delta0), &out.evaluations);
      }
    } catch (const ProbeError& e) {
      // Equal probes that also equal f(x) mean f is flat here: the step is
      // unbounded, the same situation as a zero derivative.
      if (e.status() == Status::SymmetricStall && e.value() == y.value && y.value != 0.0) {
        settle_failure(out, Status::Diverged, fmt::format("f is flat around x = {:.15g}", x));
      } else {
        settle_failure(out, e.status(), e.what());
      }
      return out;
    }
    delta = probe.delta;

    double n = config.fixed_n;
    if (config.mode == PowerMode::Variable) {
      n = estimate_power(probe.y_minus, y.value, probe.y_plus, delta, config.power);
      const double second_diff = probe.y_minus - 2.0 * y.value + probe.y_plus;
      const double noise = probe.err_minus + 2.0 * y.error + probe.err_plus;
      if (config.noise_factor > 0.0 && std::fabs(second_diff) <= config.noise_factor * noise) n = n_prev;
    }

    const double x_next = lsq3_step(x, probe.y_minus, y.value, probe.y_plus, delta, n);
    out.trace.push_back({k, x, y.value, delta, n, probe.y_minus, probe.y_plus});

    if (monitor.diverged(x_next)) {
      settle_failure(out, Status::Diverged, fmt::format("iterate left the bound |x| <= {:g}", config.divergence_bound));
      return out;
    }
    auto y_next = sample(f, x_next, &out.evaluations);
    if (!y_next) {
      settle_failure(out, Status::DomainError, fmt::format("iterate x = {:.15g} is outside the domain of f", x_next));
      return out;
    }
    if (std::fabs(x_next - x) + std::fabs(y_next->value) < config.tolerance) {
      out.status = Status::Converged;
      out.root = x_next;
      out.iterations = k;
      return out;
    }
    iterates.push_back(x_next);
    if (monitor.oscillating(iterates)) {
      settle_failure(out, Status::Oscillating, "iterates repeat without meeting the stopping criterion");
      return out;
    }
    x_prev = x;
    x = x_next;
    y = *y_next;
    n_prev = n;
  }
  settle_failure(out, Status::MaxIterations, fmt::format("no convergence in {} steps", config.max_iter));
  return out;
}

}  // namespace lsqroot
