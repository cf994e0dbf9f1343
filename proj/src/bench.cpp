#include "lsqroot/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace lsqroot {

namespace {

constexpr auto O = Label::Oscillates;
constexpr auto D = Label::Diverges;
constexpr auto F = Label::Fails;

// Reference columns are listed as (secant, newton, N=1, N variable) to match
// the reference layout, then reordered into Method order.
StartCase row(double x0, Expectation secant, Expectation newton, Expectation fixed, Expectation variable) {
  return StartCase{x0, {newton, secant, fixed, variable}};
}

Problem problem(std::string id, std::string source, std::vector<double> roots, std::vector<StartCase> starts,
                int table) {
  Expr e = parse(source);
  for (double r : roots) {
    auto v = eval(e, r);
    if (!v || !(std::fabs(*v) < 1e-9))
      throw std::logic_error(fmt::format("suite problem {}: stored root {} is not a root", id, r));
  }
  return Problem{std::move(id), std::move(source), std::move(e), std::move(roots), std::move(starts), table};
}

std::vector<Problem> make_suite() {
  std::vector<Problem> s;
  s.push_back(problem("cubic", "x^3 + 4*x^2 - 10", {1.365230013414100},
                      {row(0.5, 10, 8, 8, 8), row(1.0, 8, 6, 6, 7)}, 1));
  s.push_back(problem("sin-square", "sin(x)^2 - x^2 + 1", {-1.404491648215340},
                      {row(-1.0, 9, 7, 7, 7), row(-3.0, 10, 7, 7, 6)}, 1));
  s.push_back(problem("quadruple-root", "(x - 2)*(x + 2)^4", {-2.0},
                      {row(-3.0, 168, 119, 116, 10), row(1.4, 116, 81, 81, 14), row(1.5, 252, 16, 15, 10)}, 1));
  s.push_back(problem("sextic", "(x - 1)^6 - 1", {2.0}, {row(2.5, 11, 8, 8, 8), row(3.5, 15, 11, 11, 9)}, 1));
  s.push_back(problem("sin-exp-log", "sin(x)*exp(x) + ln(x^2 + 1)", {-0.603231971557215},
                      {row(-0.8, 8, 7, 6, 7), row(-0.65, 8, 5, 5, 6)}, 1));
  s.push_back(problem("exp-quadratic", "exp(x^2 + 7*x - 30) - 1", {3.0},
                      {row(4.0, 27, 20, 20, 11), row(4.5, 39, 28, 28, 16)}, 1));
  s.push_back(problem("x-3ln", "x - 3*ln(x)", {1.857183860207840}, {row(2.0, 7, 5, 5, 5), row(0.5, 11, 8, 8, 8)}, 1));

  s.push_back(problem("quintic-poly", "2*x^5 - 3*x^4 + 4*x^3 - x^2 + 10*x - 13", {1.053392031515730},
                      {row(3.0, 13, O, 10, 7), row(-2.5, 14, O, 11, 8)}, 2));
  s.push_back(problem("log", "log(x)", {1.0}, {row(3.0, F, F, F, 7)}, 2));
  s.push_back(problem("arctan", "arctan(x)", {0.0}, {row(3.0, D, D, D, 7), row(-3.0, D, D, D, 7)}, 2));
  s.push_back(problem("quintic", "x^5 - x + 1", {-1.167303978261420},
                      {row(2.0, 48, O, O, 10), row(-3.0, 14, O, 11, 7)}, 2));
  s.push_back(problem("cycling-cubic", "0.5*x^3 - 6*x^2 + 21.5*x - 22", {4.0}, {row(3.0, 7, O, O, 7)}, 2));
  s.push_back(problem("cbrt", "cbrt(x)", {0.0}, {row(1.0, O, D, D, 14), row(-1.0, O, D, D, 14)}, 2));
  s.push_back(problem("gauss-bump", "10*x*exp(-x^2) - 1", {1.679630610428450, 0.101025848315685},
                      {row(3.0, D, D, D, 11), row(-1.0, D, D, D, 13)}, 2));
  return s;
}

bool matches_root(double x, const std::vector<double>& roots, double tol) {
  return std::any_of(roots.begin(), roots.end(), [&](double r) { return std::fabs(x - r) <= tol; });
}

void grade(RunResult& r, double root_tolerance, int band) {
  const bool converged = r.outcome.status == Status::Converged;
  if (const int* want = std::get_if<int>(&r.expected)) {
    if (!converged) {
      r.deviation = "NOT_CONVERGED";
    } else if (!matches_root(r.outcome.root, r.reference_roots, root_tolerance)) {
      r.deviation = "WRONG_ROOT";
    } else {
      const int diff = r.outcome.iterations - *want;
      r.deviation = diff > 0 ? fmt::format("+{}", diff) : fmt::format("{}", diff);
      r.within_tolerance = std::abs(diff) <= band;
    }
  } else {
    const Label wanted = std::get<Label>(r.expected);
    if (!converged && label_for(r.outcome.status) == wanted) {
      r.deviation = "MATCH";
      r.within_tolerance = true;
    } else {
      r.deviation = "LABEL_MISMATCH";
    }
  }
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string outcome_cell(const RunResult& r) {
  if (r.outcome.status == Status::Converged) {
    if (!matches_root(r.outcome.root, r.reference_roots, 1e-9))
      return fmt::format("{} (root {:.15g})", r.outcome.iterations, r.outcome.root);
    return fmt::format("{}", r.outcome.iterations);
  }
  return std::string(label_name(label_for(r.outcome.status)));
}

std::string emit_csv(const BenchReport& report) {
  std::string out = "problem,start,method,status,root,iterations,final_rate,expected,deviation\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{:.15g},{},{},{:.15g},{},{},{},{}\n", csv_field(r.problem), r.start,
                       method_name(r.method), status_name(r.outcome.status), r.outcome.root,
                       r.outcome.iterations, r.final_rate ? fmt::format("{:.15g}", *r.final_rate) : "",
                       csv_field(expectation_text(r.expected)), csv_field(r.deviation));
  }
  return out;
}

std::string emit_markdown(const BenchReport& report) {
  // Column order follows the reference tables: secant, Newton, N=1, N variable.
  constexpr std::array kColumnOrder{Method::Secant, Method::Newton, Method::Lsq3Fixed, Method::Lsq3Variable};
  constexpr std::array kHeadings{"Secant", "Newton", "LSQ3 N=1", "LSQ3 N=variable"};

  std::vector<Method> present;
  for (Method m : kColumnOrder) {
    if (std::any_of(report.rows.begin(), report.rows.end(), [m](const RunResult& r) { return r.method == m; }))
      present.push_back(m);
  }

  std::string out;
  std::size_t i = 0;
  while (i < report.rows.size()) {
    const std::string& id = report.rows[i].problem;
    std::size_t end = i;
    while (end < report.rows.size() && report.rows[end].problem == id) ++end;

    const RunResult& head = report.rows[i];
    std::vector<std::string> roots;
    for (double r : head.reference_roots) roots.push_back(fmt::format("{:.15f}", r));
    out += fmt::format("### {}: `{}`\n\nReference root(s): {}\n\n| Start |", id, head.expression,
                       fmt::join(roots, ", "));
    for (Method m : present) out += fmt::format(" {} |", kHeadings[static_cast<std::size_t>(
                                                            std::find(kColumnOrder.begin(), kColumnOrder.end(), m) -
                                                            kColumnOrder.begin())]);
    out += "\n|---|";
    for (std::size_t c = 0; c < present.size(); ++c) out += "---|";
    out += '\n';

    std::vector<double> starts;
    for (std::size_t j = i; j < end; ++j)
      if (std::find(starts.begin(), starts.end(), report.rows[j].start) == starts.end())
        starts.push_back(report.rows[j].start);
    for (double s : starts) {
      out += fmt::format("| {:.15g} |", s);
      for (Method m : present) {
        auto it = std::find_if(report.rows.begin() + static_cast<std::ptrdiff_t>(i),
                               report.rows.begin() + static_cast<std::ptrdiff_t>(end),
                               [&](const RunResult& r) { return r.start == s && r.method == m; });
        out += fmt::format(" {} (ref {}) |", outcome_cell(*it), expectation_text(it->expected));
      }
      out += '\n';
    }
    out += '\n';
    i = end;
  }
  out += fmt::format("{} runs, {} converged, {} within tolerance of the reference\n", report.rows.size(),
                     report.converged, report.within_tolerance);
  return out;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Newton:
      return "newton";
    case Method::Secant:
      return "secant";
    case Method::Lsq3Fixed:
      return "lsq3-fixed";
    case Method::Lsq3Variable:
      return "lsq3-variable";
  }
  return "?";
}

std::string_view label_name(Label l) {
  switch (l) {
    case Label::Oscillates:
      return "Oscillates";
    case Label::Diverges:
      return "Diverges";
    case Label::Fails:
      return "Fails";
  }
  return "?";
}

Label label_for(Status s) {
  switch (s) {
    case Status::Oscillating:
      return Label::Oscillates;
    case Status::Diverged:
      return Label::Diverges;
    default:
      return Label::Fails;
  }
}

std::string expectation_text(const Expectation& e) {
  if (const int* n = std::get_if<int>(&e)) return fmt::format("{}", *n);
  return std::string(label_name(std::get<Label>(e)));
}

const std::vector<Problem>& builtin_suite() {
  static const std::vector<Problem> suite = make_suite();
  return suite;
}

SolveOutcome run_method(Method method, const Expr& f, double x0, const BenchOptions& options) {
  switch (method) {
    case Method::Newton:
      return solve_baseline(BaselineMethod::Newton, f, x0, std::nullopt, options.baseline);
    case Method::Secant:
      return solve_baseline(BaselineMethod::Secant, f, x0, std::nullopt, options.baseline);
    case Method::Lsq3Fixed: {
      SolverConfig c = options.lsq3;
      c.mode = PowerMode::Fixed;
      return solve(f, x0, c);
    }
    case Method::Lsq3Variable: {
      SolverConfig c = options.lsq3;
      c.mode = PowerMode::Variable;
      return solve(f, x0, c);
    }
  }
  throw std::invalid_argument("unknown method");
}

BenchReport run_benchmark(const std::vector<Problem>& suite, const BenchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  BenchReport report;
  for (const auto& p : suite) {
    for (const auto& sc : p.starts) {
      for (Method m : options.methods) {
        RunResult r;
        r.problem = p.id;
        r.expression = p.source;
        r.reference_roots = p.reference_roots;
        r.start = sc.x0;
        r.method = m;
        r.expected = sc.expected[static_cast<std::size_t>(m)];
        report.rows.push_back(std::move(r));
      }
    }
  }

  // Every job writes only its own preassigned slot, so ordering is fixed.
  std::vector<const Expr*> exprs;
  for (const auto& p : suite)
    for (std::size_t s = 0; s < p.starts.size(); ++s)
      for (std::size_t m = 0; m < options.methods.size(); ++m) exprs.push_back(&p.expr);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.rows.size(); i = next++) {
      RunResult& r = report.rows[i];
      r.outcome = run_method(r.method, *exprs[i], r.start, options);
      r.final_rate = final_rate(r.outcome, r.reference_roots);
      grade(r, options.root_tolerance, options.count_band);
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, report.rows.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& r : report.rows) {
    if (r.outcome.status == Status::Converged) ++report.converged;
    if (r.within_tolerance) ++report.within_tolerance;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<double> iterate_sequence(const SolveOutcome& outcome) {
  std::vector<double> xs;
  xs.reserve(outcome.trace.size() + 1);
  for (const auto& rec : outcome.trace) xs.push_back(rec.x);
  if (outcome.status == Status::Converged) xs.push_back(outcome.root);
  return xs;
}

std::vector<double> convergence_rates(std::span<const double> iterates, double r) {
  if (iterates.size() < 3) throw std::invalid_argument("convergence rates need at least 3 iterates");
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::fabs(r);
  std::vector<double> rates;
  for (std::size_t k = 0; k + 1 < iterates.size(); ++k) {
    const double e0 = std::fabs(iterates[k] - r);
    const double e1 = std::fabs(iterates[k + 1] - r);
    if (e0 == 0.0 || e0 <= floor || e1 == 0.0 || e1 <= floor) break;
    if (e0 >= 1.0 || e1 >= 1.0) continue;
    rates.push_back(std::log(e1) / std::log(e0));
  }
  return rates;
}

std::vector<double> convergence_rates(const std::vector<IterationRecord>& trace, double r) {
  std::vector<double> xs;
  xs.reserve(trace.size());
  for (const auto& rec : trace) xs.push_back(rec.x);
  return convergence_rates(xs, r);
}

std::optional<double> final_rate(const SolveOutcome& outcome, std::span<const double> reference_roots) {
  const std::vector<double> xs = iterate_sequence(outcome);
  if (xs.size() < 3) return std::nullopt;
  double r = outcome.root;
  if (outcome.status != Status::Converged) {
    if (reference_roots.empty()) return std::nullopt;
    r = *std::min_element(reference_roots.begin(), reference_roots.end(), [&](double a, double b) {
      return std::fabs(a - xs.back()) < std::fabs(b - xs.back());
    });
  }
  const auto rates = convergence_rates(xs, r);
  if (rates.empty()) return std::nullopt;
  return rates.back();
}

std::vector<std::pair<double, double>> f_n_curve(double E, std::span<const double> n_grid) {
  if (!(E > 0.0 && E < 1.0)) throw std::domain_error("E must lie in (0, 1)");
  std::vector<std::pair<double, double>> out;
  out.reserve(n_grid.size());
  for (double n : n_grid) {
    if (!(n > 0.0)) throw std::domain_error("grid values must be positive");
    out.emplace_back(n, std::pow(E, n / 4.0) + std::pow(E, 1.0 / n) - E);
  }
  return out;
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from) || !std::isfinite(from) || !std::isfinite(to))
    throw std::invalid_argument("grid needs finite from <= to and a positive step");
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = from + static_cast<double>(i) * step;
  return grid;
}

double curve_argmin(const std::vector<std::pair<double, double>>& curve) {
  if (curve.empty()) throw std::invalid_argument("empty curve");
  return std::min_element(curve.begin(), curve.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

std::string emit_report(const BenchReport& report, ReportFormat format) {
  return format == ReportFormat::Csv ? emit_csv(report) : emit_markdown(report);
}

}  // namespace lsqroot
