#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lsqroot/baselines.hpp"
#include "lsqroot/expr.hpp"
#include "lsqroot/outcome.hpp"
#include "lsqroot/solver.hpp"

namespace lsqroot {

enum class Method { Newton, Secant, Lsq3Fixed, Lsq3Variable };
inline constexpr std::array kAllMethods{Method::Newton, Method::Secant, Method::Lsq3Fixed, Method::Lsq3Variable};

std::string_view method_name(Method m);

/// Failure labels used by the reference tables.
enum class Label { Oscillates, Diverges, Fails };
std::string_view label_name(Label l);
Label label_for(Status s);

/// Either a reference iteration count or a failure label.
using Expectation = std::variant<int, Label>;
std::string expectation_text(const Expectation& e);

struct StartCase {
  double x0;
  /// Indexed by Method.
  std::array<Expectation, 4> expected;
};

struct Problem {
  std::string id;
  std::string source;
  Expr expr;
  std::vector<double> reference_roots;
  std::vector<StartCase> starts;
  /// 1 for the convergence-comparison table, 2 for the failure-case table.
  int table = 1;
};

/// The 14 reference problems (27 runs). Throws std::logic_error if a stored
/// root does not satisfy |f(r)| < 1e-9.
const std::vector<Problem>& builtin_suite();

struct BenchOptions {
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  /// Base configuration for both lsq3 methods; the mode is set per method.
  SolverConfig lsq3;
  BaselineConfig baseline;
  double root_tolerance = 1e-9;
  /// Allowed |iterations - expected| for rows the reference says converge.
  int count_band = 3;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct RunResult {
  std::string problem;
  std::string expression;
  std::vector<double> reference_roots;
  double start = 0.0;
  Method method = Method::Newton;
  SolveOutcome outcome;
  std::optional<double> final_rate;
  Expectation expected;
  /// Signed count difference, or WRONG_ROOT / NOT_CONVERGED / LABEL_MISMATCH / MATCH.
  std::string deviation;
  bool within_tolerance = false;
};

struct BenchReport {
  std::vector<RunResult> rows;
  std::size_t converged = 0;
  std::size_t within_tolerance = 0;
  double seconds = 0.0;
};

/// Runs every (problem, start, method) combination. Row order is suite order,
/// then start order, then the order of options.methods, whatever the threading.
BenchReport run_benchmark(const std::vector<Problem>& suite, const BenchOptions& options = {});

/// Solves one problem with one method using the option's configs.
SolveOutcome run_method(Method method, const Expr& f, double x0, const BenchOptions& options);

/// Iterates x_1..x_k of a trace, followed by the final root when converged.
std::vector<double> iterate_sequence(const SolveOutcome& outcome);

/// C_k = log|x_{k+1} - r| / log|x_k - r| over consecutive iterates. Pairs with
/// an error >= 1 are skipped; the sequence stops where the error reaches
/// rounding level (<= 16 eps |r|, or exactly 0). Throws std::invalid_argument
/// for fewer than 3 iterates.
std::vector<double> convergence_rates(std::span<const double> iterates, double r);
std::vector<double> convergence_rates(const std::vector<IterationRecord>& trace, double r);

/// Last computable rate of a run, measured against its own final iterate when
/// converged and against the nearest reference root otherwise.
std::optional<double> final_rate(const SolveOutcome& outcome, std::span<const double> reference_roots);

/// f(n) = E^(n/4) + E^(1/n) - E at each grid point. Throws std::domain_error
/// unless 0 < E < 1 and every n > 0.
std::vector<std::pair<double, double>> f_n_curve(double E, std::span<const double> n_grid);

/// from, from + step, ... up to `to` inclusive (with a small slack for rounding).
std::vector<double> make_grid(double from, double to, double step);

/// Grid point of the smallest f; curve must be nonempty.
double curve_argmin(const std::vector<std::pair<double, double>>& curve);

enum class ReportFormat { Csv, Markdown };

std::string emit_report(const BenchReport& report, ReportFormat format);

}  // namespace lsqroot
