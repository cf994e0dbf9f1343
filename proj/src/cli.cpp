#include "lsqroot/cli.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lsqroot/baselines.hpp"
#include "lsqroot/bench.hpp"
#include "lsqroot/expr.hpp"
#include "lsqroot/solver.hpp"

namespace lsqroot {

namespace {

constexpr std::string_view kSynopsis =
    "usage: lsqroot {solve|bench|rate|fncurve} [options]  (lsqroot <command> --help for details)";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveFlags {
  std::string expr;
  double x0 = 0.0;
  std::optional<double> x1;
  std::string method = "lsq3";
  std::string n = "fixed:1";
  std::optional<double> delta0;
  std::optional<double> tol;
  std::optional<int> max_iter;
  bool trace = false;
  std::string format = "csv";
  std::string out_path;
};

struct BenchFlags {
  std::string format = "csv";
  std::string out_path;
  std::optional<double> delta0;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::vector<std::string> methods;
  bool timing = false;
};

struct RateFlags {
  SolveFlags solve;
  std::optional<double> root;
};

struct CurveFlags {
  double E = 1e-22;
  double from = 1.0;
  double to = 4.0;
  double step = 0.01;
  std::string out_path;
};

const std::map<std::string, std::string> kFormats{{"csv", "csv"}, {"markdown", "markdown"}};

void add_solve_flags(CLI::App& cmd, SolveFlags& f) {
  cmd.add_option("--expr", f.expr, "Function of x, e.g. \"x^3 + 4*x^2 - 10\"")->required();
  cmd.add_option("--x0", f.x0, "Starting point")->required();
  cmd.add_option("--x1", f.x1, "Second start for the secant method (default x0 + 0.1)");
  cmd.add_option("--method", f.method, "newton, secant or lsq3")
      ->check(CLI::IsMember({"newton", "secant", "lsq3"}));
  cmd.add_option("--n", f.n, "Power for lsq3: fixed:REAL or variable");
  cmd.add_option("--delta0", f.delta0, "Initial probe spacing, in (0, 1)");
  cmd.add_option("--tol", f.tol, "Stopping tolerance");
  cmd.add_option("--max-iter", f.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
}

SolverConfig solver_config(const std::string& n_spec, std::optional<double> delta0, std::optional<double> tol,
                           std::optional<int> max_iter) {
  SolverConfig c;
  if (n_spec == "variable") {
    c.mode = PowerMode::Variable;
  } else if (n_spec.starts_with("fixed:")) {
    const std::string_view v = std::string_view(n_spec).substr(6);
    double n = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
      throw UsageError(fmt::format("--n: cannot read '{}' as a number", v));
    c.mode = PowerMode::Fixed;
    c.fixed_n = n;
  } else {
    throw UsageError(fmt::format("--n: expected 'variable' or 'fixed:REAL', got '{}'", n_spec));
  }
  if (delta0) c.delta0 = *delta0;
  if (tol) c.tolerance = *tol;
  if (max_iter) c.max_iter = *max_iter;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

BaselineConfig baseline_config(std::optional<double> tol, std::optional<int> max_iter) {
  BaselineConfig c;
  if (tol) {
    if (!(*tol > 0.0)) throw UsageError("--tol must be positive");
    c.tolerance = *tol;
  }
  if (max_iter) c.max_iter = *max_iter;
  return c;
}

Expr parse_flag(const std::string& text) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw UsageError(fmt::format("--expr: {}", e.what()));
  }
}

SolveOutcome run_solve(const SolveFlags& f, std::string& description) {
  const Expr e = parse_flag(f.expr);
  if (f.method == "lsq3") {
    const SolverConfig c = solver_config(f.n, f.delta0, f.tol, f.max_iter);
    description = c.mode == PowerMode::Variable ? "lsq3, N variable" : fmt::format("lsq3, N = {:.15g}", c.fixed_n);
    return solve(e, f.x0, c);
  }
  const BaselineConfig c = baseline_config(f.tol, f.max_iter);
  if (f.method == "newton") {
    description = "newton";
    return solve_baseline(BaselineMethod::Newton, e, f.x0, std::nullopt, c);
  }
  description = "secant";
  return solve_baseline(BaselineMethod::Secant, e, f.x0, f.x1, c);
}

std::string format_trace(const SolveOutcome& o, const std::string& format) {
  std::string s;
  if (format == "markdown") {
    s += "| k | x | y | delta | N | y(x-delta) | y(x+delta) |\n|---|---|---|---|---|---|---|\n";
    for (const auto& r : o.trace)
      s += fmt::format("| {} | {:.15g} | {:.15g} | {:.15g} | {:.15g} | {:.15g} | {:.15g} |\n", r.k, r.x, r.y,
                       r.delta, r.n_used, r.y_minus, r.y_plus);
    return s;
  }
  s += "# k,x,y,delta,n,y_minus,y_plus\n";
  for (const auto& r : o.trace)
    s += fmt::format("{},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g}\n", r.k, r.x, r.y, r.delta, r.n_used,
                     r.y_minus, r.y_plus);
  return s;
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError(fmt::format("--out: cannot open '{}' for writing", path));
  file << text;
}

int cmd_solve(const SolveFlags& f, std::ostream& out) {
  std::string description;
  const SolveOutcome o = run_solve(f, description);
  std::string text = fmt::format("# method {}\n# status {}\n# root {:.15g}\n# iterations {}\n# evaluations {}\n",
                                 description, status_name(o.status), o.root, o.iterations, o.evaluations);
  if (!o.note.empty()) text += fmt::format("# note {}\n", o.note);
  if (f.trace) text += format_trace(o, f.format);
  write_output(text, f.out_path, out);
  return o.status == Status::Converged ? 0 : 2;
}

int cmd_rate(const RateFlags& f, std::ostream& out) {
  std::string description;
  const SolveOutcome o = run_solve(f.solve, description);
  const std::vector<double> xs = iterate_sequence(o);
  std::string text = fmt::format("# method {}\n# status {}\n# root {:.15g}\n# iterations {}\n", description,
                                 status_name(o.status), o.root, o.iterations);
  if (o.status != Status::Converged && !f.root) {
    write_output(text, f.solve.out_path, out);
    return 2;
  }
  const double r = f.root.value_or(o.root);
  text += fmt::format("# reference {:.15g}\nk,rate\n", r);
  const auto rates = xs.size() < 3 ? std::vector<double>{} : convergence_rates(xs, r);
  if (rates.empty()) text += "# no measurable rate: too few iterates above rounding level\n";
  for (std::size_t i = 0; i < rates.size(); ++i) text += fmt::format("{},{:.15g}\n", i + 1, rates[i]);
  write_output(text, f.solve.out_path, out);
  return o.status == Status::Converged ? 0 : 2;
}

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err) {
  BenchOptions options;
  options.lsq3 = solver_config("fixed:1", f.delta0, f.tol, f.max_iter);
  options.baseline = baseline_config(f.tol, f.max_iter);
  if (!f.methods.empty()) {
    options.methods.clear();
    for (const auto& name : f.methods) {
      auto it = std::find_if(kAllMethods.begin(), kAllMethods.end(),
                             [&](Method m) { return method_name(m) == name; });
      if (it == kAllMethods.end()) throw UsageError(fmt::format("--methods: unknown method '{}'", name));
      options.methods.push_back(*it);
    }
  }
  const BenchReport report = run_benchmark(builtin_suite(), options);
  write_output(emit_report(report, f.format == "markdown" ? ReportFormat::Markdown : ReportFormat::Csv), f.out_path,
               out);
  if (f.timing) err << fmt::format("# bench: {} runs in {:.3f} s\n", report.rows.size(), report.seconds);
  return 0;
}

int cmd_fncurve(const CurveFlags& f, std::ostream& out) {
  std::vector<std::pair<double, double>> curve;
  try {
    curve = f_n_curve(f.E, make_grid(f.from, f.to, f.step));
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("fncurve: {}", e.what()));
  }
  std::string text = "n,f\n";
  for (const auto& [n, v] : curve) text += fmt::format("{:.15g},{:.15g}\n", n, v);
  text += fmt::format("# argmin {:.15g}\n", curve_argmin(curve));
  write_output(text, f.out_path, out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scalar root finding with a three-point least-squares iteration", "lsqroot"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Solve f(x) = 0 from a starting point");
  add_solve_flags(*solve_cmd, solve_flags);
  solve_cmd->add_flag("--trace", solve_flags.trace, "Print one line per iteration");
  solve_cmd->add_option("--format", solve_flags.format, "Trace format: csv or markdown")
      ->transform(CLI::IsMember(kFormats));
  solve_cmd->add_option("--out", solve_flags.out_path, "Write output to a file instead of stdout");

  BenchFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Run the built-in reference suite");
  bench_cmd->add_option("--format", bench_flags.format, "csv or markdown")->transform(CLI::IsMember(kFormats));
  bench_cmd->add_option("--out", bench_flags.out_path, "Write the report to a file instead of stdout");
  bench_cmd->add_option("--delta0", bench_flags.delta0, "Initial probe spacing for lsq3");
  bench_cmd->add_option("--tol", bench_flags.tol, "Stopping tolerance for every method");
  bench_cmd->add_option("--max-iter", bench_flags.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--methods", bench_flags.methods, "Subset of newton, secant, lsq3-fixed, lsq3-variable")
      ->delimiter(',');
  bench_cmd->add_flag("--timing", bench_flags.timing, "Report elapsed time on stderr");

  RateFlags rate_flags;
  auto* rate_cmd = app.add_subcommand("rate", "Solve, then print the per-step convergence rate");
  add_solve_flags(*rate_cmd, rate_flags.solve);
  rate_cmd->add_option("--root", rate_flags.root, "Reference root (default: the converged iterate)");
  rate_cmd->add_option("--out", rate_flags.solve.out_path, "Write output to a file instead of stdout");

  CurveFlags curve_flags;
  auto* curve_cmd = app.add_subcommand("fncurve", "Tabulate f(n) = E^(n/4) + E^(1/n) - E");
  curve_cmd->add_option("--E", curve_flags.E, "Error magnitude, in (0, 1)");
  curve_cmd->add_option("--from", curve_flags.from, "First n");
  curve_cmd->add_option("--to", curve_flags.to, "Last n");
  curve_cmd->add_option("--step", curve_flags.step, "Grid step");
  curve_cmd->add_option("--out", curve_flags.out_path, "Write output to a file instead of stdout");

  std::vector<const char*> argv{"lsqroot"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << kSynopsis << '\n';
    return 1;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_flags, out);
    if (bench_cmd->parsed()) return cmd_bench(bench_flags, out, err);
    if (rate_cmd->parsed()) return cmd_rate(rate_flags, out);
    return cmd_fncurve(curve_flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << kSynopsis << '\n';
    return 1;
  }
}

}  // namespace lsqroot
