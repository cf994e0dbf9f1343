#include <doctest.h>

#include <cmath>
#include <random>

#include "lsqroot/baselines.hpp"
#include "lsqroot/bench.hpp"
#include "lsqroot/solver.hpp"

using namespace lsqroot;

TEST_CASE("newton_step") {
  // x^2 - 4 at 3: 3 - 5/6.
  CHECK(newton_step(3.0, 5.0, 6.0) == doctest::Approx(2.1666666666666667).epsilon(1e-15));
  // A line in one step.
  CHECK(newton_step(7.0, 5.0, 1.0) == 2.0);
  try {
    newton_step(1.0, 1.0, 0.0);
    FAIL("expected a zero-derivative error");
  } catch (const StepError& e) {
    CHECK(e.fault() == StepFault::ZeroDerivative);
  }
  CHECK_THROWS_AS(newton_step(1.0, 1.0, 1e-310), StepError);
  CHECK_NOTHROW(newton_step(1.0, 1.0, 1e-310, 0.0));
}

TEST_CASE("secant_step") {
  // Chord through (1, -1) and (2, 2) of x^2 - 2 crosses at 4/3.
  CHECK(secant_step(1.0, -1.0, 2.0, 2.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  // Exact on a line, whichever order the points come in.
  CHECK(secant_step(0.0, -2.0, 4.0, 2.0) == 2.0);
  CHECK(secant_step(4.0, 2.0, 0.0, -2.0) == 2.0);
  try {
    secant_step(0.0, 1.0, 1.0, 1.0);
    FAIL("expected a flat-secant error");
  } catch (const StepError& e) {
    CHECK(e.fault() == StepFault::FlatSecant);
  }
}

TEST_CASE("solve_baseline: worked runs") {
  SUBCASE("Newton on x^2 - 4") {
    const SolveOutcome o = solve_baseline(BaselineMethod::Newton, parse("x^2 - 4"), 3.0);
    CHECK(o.status == Status::Converged);
    CHECK(o.root == 2.0);
    CHECK(o.trace.at(0).x == 3.0);
    CHECK(o.trace.at(1).x == doctest::Approx(2.1666666666666667).epsilon(1e-15));
    CHECK(o.iterations == static_cast<int>(o.trace.size()));
  }
  SUBCASE("secant records its second start") {
    const SolveOutcome o = solve_baseline(BaselineMethod::Secant, parse("x^2 - 2"), 1.0);
    CHECK(o.status == Status::Converged);
    CHECK(o.root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(o.note.find("1.1") != std::string::npos);
    CHECK(o.trace.at(0).x == 1.1);
  }
  SUBCASE("explicit second start") {
    const SolveOutcome o = solve_baseline(BaselineMethod::Secant, parse("x^2 - 2"), 1.0, 2.0);
    CHECK(o.status == Status::Converged);
    CHECK(o.trace.at(0).x == 2.0);
    CHECK(o.trace.at(1).x == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("exact root at the start") {
    const SolveOutcome o = solve_baseline(BaselineMethod::Newton, parse("(x - 1)^2"), 1.0);
    CHECK(o.status == Status::Converged);
    CHECK(o.iterations == 1);
  }
}

TEST_CASE("solve_baseline: failures") {
  CHECK(solve_baseline(BaselineMethod::Newton, parse("ln(x)"), -1.0).status == Status::DomainError);
  CHECK(solve_baseline(BaselineMethod::Newton, parse("ln(x)"), 3.0).status == Status::DomainError);
  CHECK(solve_baseline(BaselineMethod::Newton, parse("arctan(x)"), 3.0).status == Status::Diverged);
  // Zero slope off the root: the step is unbounded.
  const SolveOutcome flat = solve_baseline(BaselineMethod::Newton, parse("x^2 + 1"), 0.0);
  CHECK(flat.status == Status::Diverged);
  CHECK(flat.note.find("zero derivative") != std::string::npos);
  const SolveOutcome chord = solve_baseline(BaselineMethod::Secant, parse("x^2 + 1"), -1.0, 1.0);
  CHECK(chord.status == Status::Diverged);
  CHECK(chord.note.find("flat secant") != std::string::npos);
  // Newton's two-cycle on this cubic is exact: 3 -> 5 -> 3.
  const SolveOutcome cyc = solve_baseline(BaselineMethod::Newton, parse("0.5*x^3 - 6*x^2 + 21.5*x - 22"), 3.0);
  CHECK(cyc.status == Status::Oscillating);
  BaselineConfig c;
  c.max_iter = 2;
  CHECK(solve_baseline(BaselineMethod::Newton, parse("(x - 2)^4"), 5.0, {}, c).status == Status::MaxIterations);
  c = {};
  c.tolerance = 0.0;
  CHECK_THROWS_AS(solve_baseline(BaselineMethod::Newton, parse("x"), 1.0, {}, c), std::invalid_argument);
}

TEST_CASE("Newton is linear with ratio 1/2 on a double root") {
  const double r = 1.25;
  const SolveOutcome o = solve_baseline(BaselineMethod::Newton, parse("(x - 1.25)^2"), r + 1.0);
  REQUIRE(o.trace.size() >= 6);
  // Away from rounding level every error ratio is (N - 1) / N.
  for (std::size_t k = 0; k + 1 < o.trace.size() && std::fabs(o.trace[k + 1].x - r) > 1e-6; ++k) {
    const double ratio = (o.trace[k + 1].x - r) / (o.trace[k].x - r);
    CHECK(ratio >= 0.45);
    CHECK(ratio <= 0.55);
  }
}

TEST_CASE("property: Newton on random lines converges in one step") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    double a = u(rng);
    if (std::fabs(a) < 0.1) a = 1.0;
    const double b = u(rng);
    const double x0 = u(rng);
    const Expr f = Expr::constant(a) * Expr::variable() + Expr::constant(b);
    const double step = newton_step(x0, a * x0 + b, a);
    CHECK(std::fabs(step - (-b / a)) <= 1e-13 * (1.0 + std::fabs(x0) + std::fabs(b / a)));
    // The default absolute tolerance can sit below |f| at the double nearest
    // the root, so the run gets a tolerance above rounding level.
    BaselineConfig c;
    c.tolerance = 1e-10;
    const SolveOutcome o = solve_baseline(BaselineMethod::Newton, f, x0, {}, c);
    CHECK(o.status == Status::Converged);
    CHECK(o.iterations <= 2);
  }
}

TEST_CASE("property: secant error follows the golden-ratio recurrence") {
  // e_{k+1} ~ C e_k e_{k-1}, so log-error ratios approach 1.618.
  const SolveOutcome o = solve_baseline(BaselineMethod::Secant, parse("x^3 + 4*x^2 - 10"), 0.5, 0.6);
  REQUIRE(o.status == Status::Converged);
  const auto rates = convergence_rates(o.trace, 1.365230013414100);
  REQUIRE_FALSE(rates.empty());
  CHECK(rates.back() >= 1.4);
  CHECK(rates.back() <= 1.8);
}

TEST_CASE("Newton and lsq3 with N = 1 agree on the first table") {
  // The fixed-N step with a vanishing spacing is a Newton step; on the
  // reference problems their iteration counts stay close.
  for (const auto& p : builtin_suite()) {
    if (p.table != 1) continue;
    for (const auto& sc : p.starts) {
      const SolveOutcome n = solve_baseline(BaselineMethod::Newton, p.expr, sc.x0);
      SolverConfig c;
      const SolveOutcome l = solve(p.expr, sc.x0, c);
      CAPTURE(p.id);
      CAPTURE(sc.x0);
      REQUIRE(n.status == Status::Converged);
      REQUIRE(l.status == Status::Converged);
      CHECK(std::fabs(n.root - l.root) < 1e-9);
      CHECK(std::abs(n.iterations - l.iterations) <= 1);
    }
  }
}

TEST_CASE("trace invariants for both baselines over the suite") {
  for (const auto& p : builtin_suite()) {
    for (const auto& sc : p.starts) {
      for (auto m : {BaselineMethod::Newton, BaselineMethod::Secant}) {
        const SolveOutcome o = solve_baseline(m, p.expr, sc.x0);
        CAPTURE(p.id);
        CAPTURE(sc.x0);
        CHECK(o.iterations == static_cast<int>(o.trace.size()));
        for (std::size_t i = 0; i < o.trace.size(); ++i) {
          CHECK(o.trace[i].k == static_cast<int>(i) + 1);
          CHECK(std::isnan(o.trace[i].y_minus));
          CHECK(o.trace[i].n_used == 1.0);
        }
        if (o.status != Status::Converged && !o.trace.empty()) CHECK(o.root == o.trace[best_record(o.trace)].x);
      }
    }
  }
}
