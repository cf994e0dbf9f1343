#include "lsqroot/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace lsqroot {

namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

struct FuncEntry {
  std::string_view name;
  Func func;
};

// Parse-time names. Aliases come after the canonical spelling so that
// func_name() finds the canonical one first.
constexpr std::array kFuncTable{
    FuncEntry{"sin", Func::Sin},       FuncEntry{"cos", Func::Cos},
    FuncEntry{"tan", Func::Tan},       FuncEntry{"arctan", Func::Arctan},
    FuncEntry{"exp", Func::Exp},       FuncEntry{"ln", Func::Ln},
    FuncEntry{"log10", Func::Log10},   FuncEntry{"abs", Func::Abs},
    FuncEntry{"cbrt", Func::Cbrt},     FuncEntry{"sqrt", Func::Sqrt},
    FuncEntry{"log", Func::Ln},        FuncEntry{"atan", Func::Arctan},
};

bool is_integral(double v) { return std::isfinite(v) && std::trunc(v) == v; }

// ---------------------------------------------------------------------------
// Scalar kernels shared by eval() and eval_bounded(). Each returns nullopt on
// a domain error so both evaluators classify identically.

std::optional<double> finite_or_error(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<double> apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add:
      return finite_or_error(a + b);
    case BinaryOp::Sub:
      return finite_or_error(a - b);
    case BinaryOp::Mul:
      return finite_or_error(a * b);
    case BinaryOp::Div:
      if (b == 0.0) return std::nullopt;
      return finite_or_error(a / b);
    case BinaryOp::Pow:
      if (a < 0.0 && !is_integral(b)) return std::nullopt;
      if (a == 0.0 && b < 0.0) return std::nullopt;
      return finite_or_error(std::pow(a, b));
  }
  return std::nullopt;
}

std::optional<double> apply_func(Func f, double a) {
  switch (f) {
    case Func::Sin:
      return finite_or_error(std::sin(a));
    case Func::Cos:
      return finite_or_error(std::cos(a));
    case Func::Tan:
      return finite_or_error(std::tan(a));
    case Func::Arctan:
      return finite_or_error(std::atan(a));
    case Func::Exp:
      return finite_or_error(std::exp(a));
    case Func::Ln:
      if (a <= 0.0) return std::nullopt;
      return finite_or_error(std::log(a));
    case Func::Log10:
      if (a <= 0.0) return std::nullopt;
      return finite_or_error(std::log10(a));
    case Func::Abs:
      return std::fabs(a);
    case Func::Cbrt:
      return std::cbrt(a);
    case Func::Sqrt:
      if (a < 0.0) return std::nullopt;
      return std::sqrt(a);
  }
  return std::nullopt;
}

// |d f/d a| at a, with r = f(a). Used for first-order error propagation.
double func_sensitivity(Func f, double a, double r) {
  switch (f) {
    case Func::Sin:
      return std::fabs(std::cos(a));
    case Func::Cos:
      return std::fabs(std::sin(a));
    case Func::Tan:
      return 1.0 + r * r;
    case Func::Arctan:
      return 1.0 / (1.0 + a * a);
    case Func::Exp:
      return std::fabs(r);
    case Func::Ln:
      return 1.0 / std::fabs(a);
    case Func::Log10:
      return 1.0 / (std::fabs(a) * std::numbers::ln10);
    case Func::Abs:
      return 1.0;
    case Func::Cbrt:
      return a == 0.0 ? std::numeric_limits<double>::infinity()
                      : std::fabs(r) / (3.0 * std::fabs(a));
    case Func::Sqrt:
      return r == 0.0 ? std::numeric_limits<double>::infinity() : 0.5 / r;
  }
  return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Evaluation. With Track=false the error field stays zero and costs nothing.

template <bool Track>
std::optional<BoundedValue> evaluate(const Expr& e, double x) {
  using R = std::optional<BoundedValue>;
  return std::visit(
      [x](const auto& n) -> R {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Constant>) {
          double err = 0.0;
          if constexpr (Track) {
            if (!is_integral(n.value) || std::fabs(n.value) > 0x1p53)
              err = kUnitRoundoff * std::fabs(n.value);
          }
          return BoundedValue{n.value, err};
        } else if constexpr (std::is_same_v<T, node::Variable>) {
          return BoundedValue{x, 0.0};
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          auto c = evaluate<Track>(n.child, x);
          if (!c) return std::nullopt;
          return BoundedValue{-c->value, c->error};
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          auto l = evaluate<Track>(n.left, x);
          if (!l) return std::nullopt;
          auto r = evaluate<Track>(n.right, x);
          if (!r) return std::nullopt;
          auto v = apply_binary(n.op, l->value, r->value);
          if (!v) return std::nullopt;
          double err = 0.0;
          if constexpr (Track) {
            const double a = l->value, b = r->value, ea = l->error, eb = r->error;
            const double res = *v;
            switch (n.op) {
              case BinaryOp::Add:
              case BinaryOp::Sub:
                err = ea + eb + kUnitRoundoff * std::fabs(res);
                break;
              case BinaryOp::Mul:
                err = std::fabs(a) * eb + std::fabs(b) * ea + ea * eb +
                      kUnitRoundoff * std::fabs(res);
                break;
              case BinaryOp::Div:
                err = (ea + std::fabs(res) * eb) / std::fabs(b) + kUnitRoundoff * std::fabs(res);
                break;
              case BinaryOp::Pow: {
                double da = 0.0;
                if (ea > 0.0) {
                  da = a != 0.0 ? std::fabs(b * res / a) * ea
                                : (b == 1.0 ? ea : std::pow(ea, b));
                }
                const double db = eb > 0.0 ? std::fabs(res * std::log(std::fabs(a))) * eb : 0.0;
                err = da + db + 2 * kUnitRoundoff * std::fabs(res);
                break;
              }
            }
          }
          return BoundedValue{*v, err};
        } else {
          auto a = evaluate<Track>(n.arg, x);
          if (!a) return std::nullopt;
          auto v = apply_func(n.func, a->value);
          if (!v) return std::nullopt;
          double err = 0.0;
          if constexpr (Track) {
            const double prop = a->error > 0.0
                                    ? func_sensitivity(n.func, a->value, *v) * a->error
                                    : 0.0;
            err = prop + 2 * kUnitRoundoff * std::fabs(*v);
            if (n.func == Func::Cbrt && a->value == 0.0 && a->error > 0.0)
              err = std::cbrt(a->error);
            if (n.func == Func::Sqrt && a->value == 0.0 && a->error > 0.0)
              err = std::sqrt(a->error);
          }
          return BoundedValue{*v, err};
        }
      },
      e.node().v);
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    skip_space();
    if (at_end()) throw ParseError("empty expression", pos_);
    Expr e = parse_sum();
    skip_space();
    if (!at_end()) throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    return e;
  }

 private:
  static Expr raw_binary(BinaryOp op, Expr l, Expr r) {
    return Expr(ExprNode{node::Binary{op, std::move(l), std::move(r)}});
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                         text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = raw_binary(BinaryOp::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = raw_binary(BinaryOp::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = raw_binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = raw_binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr(ExprNode{node::Negate{parse_unary()}});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return raw_binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (at_end()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(fmt::format("unexpected '{}'", c), pos_);
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) throw ParseError(fmt::format("expected '{}' before end of expression", c), pos_);
      throw ParseError(fmt::format("expected '{}'", c), pos_);
    }
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [this] {
      std::size_t n = 0;
      while (!at_end() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t count = digits();
    if (!at_end() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw ParseError("malformed number", start);
    if (!at_end() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (!at_end() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // not an exponent; leave 'e' for the caller
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) throw ParseError("number out of range", start);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return Expr::variable();
    for (const auto& entry : kFuncTable) {
      if (entry.name == name) {
        skip_space();
        if (at_end() || text_[pos_] != '(')
          throw ParseError(fmt::format("expected '(' after '{}'", name), pos_);
        ++pos_;
        Expr arg = parse_sum();
        expect(')');
        return Expr(ExprNode{node::Call{entry.func, std::move(arg)}});
      }
    }
    throw ParseError(fmt::format("unknown identifier '{}'", name), start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

std::string format_constant(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::fabs(v));
  std::string digits(buf.data(), ptr);
  if (std::signbit(v)) return "(-" + digits + ")";
  return digits;
}

char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add:
      return '+';
    case BinaryOp::Sub:
      return '-';
    case BinaryOp::Mul:
      return '*';
    case BinaryOp::Div:
      return '/';
    case BinaryOp::Pow:
      return '^';
  }
  return '?';
}

void print_to(const Expr& e, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Constant>) {
          out += format_constant(n.value);
        } else if constexpr (std::is_same_v<T, node::Variable>) {
          out += 'x';
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          out += "(-";
          print_to(n.child, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          out += '(';
          print_to(n.left, out);
          out += ' ';
          out += op_char(n.op);
          out += ' ';
          print_to(n.right, out);
          out += ')';
        } else {
          out += func_name(n.func);
          out += '(';
          print_to(n.arg, out);
          out += ')';
        }
      },
      e.node().v);
}

std::optional<double> folded(const Expr& e) {
  if (!e.is_constant()) return std::nullopt;
  return e.constant_value();
}

bool is_const(const Expr& e, double v) { return e.is_constant() && e.constant_value() == v; }

Expr binary(BinaryOp op, const Expr& a, const Expr& b) {
  if (auto ca = folded(a), cb = folded(b); ca && cb) {
    if (auto v = apply_binary(op, *ca, *cb)) return Expr::constant(*v);
  }
  return Expr(ExprNode{node::Binary{op, a, b}});
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view func_name(Func f) {
  for (const auto& entry : kFuncTable)
    if (entry.func == f) return entry.name;
  return "?";
}

Expr::Expr() : Expr(ExprNode{node::Constant{0.0}}) {}
Expr::Expr(ExprNode n) : node_(std::make_shared<const ExprNode>(std::move(n))) {}

Expr Expr::constant(double c) { return Expr(ExprNode{node::Constant{c}}); }
Expr Expr::variable() { return Expr(ExprNode{node::Variable{}}); }

bool Expr::is_constant() const { return std::holds_alternative<node::Constant>(node_->v); }
double Expr::constant_value() const { return std::get<node::Constant>(node_->v).value; }

Expr operator+(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return binary(BinaryOp::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return -b;
  return binary(BinaryOp::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return -b;
  if (is_const(b, -1.0)) return -a;
  return binary(BinaryOp::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return Expr::constant(0.0);
  return binary(BinaryOp::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (auto c = folded(a)) return Expr::constant(-*c);
  if (const auto* neg = std::get_if<node::Negate>(&a.node().v)) return neg->child;
  return Expr(ExprNode{node::Negate{a}});
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (is_const(exponent, 1.0)) return base;
  if (is_const(exponent, 0.0)) return Expr::constant(1.0);
  return binary(BinaryOp::Pow, base, exponent);
}

Expr call(Func f, const Expr& arg) {
  if (auto c = folded(arg)) {
    if (auto v = apply_func(f, *c)) return Expr::constant(*v);
  }
  return Expr(ExprNode{node::Call{f, arg}});
}

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(fmt::format("{} at position {}", what, position)), position_(position) {}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out);
  return out;
}

EvalResult eval(const Expr& e, double x) {
  auto r = evaluate<false>(e, x);
  if (!r) return std::nullopt;
  return r->value;
}

std::optional<BoundedValue> eval_bounded(const Expr& e, double x) { return evaluate<true>(e, x); }

Expr differentiate(const Expr& e) {
  return std::visit(
      [&e](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Constant>) {
          return Expr::constant(0.0);
        } else if constexpr (std::is_same_v<T, node::Variable>) {
          return Expr::constant(1.0);
        } else if constexpr (std::is_same_v<T, node::Negate>) {
          return -differentiate(n.child);
        } else if constexpr (std::is_same_v<T, node::Binary>) {
          const Expr& u = n.left;
          const Expr& v = n.right;
          const Expr du = differentiate(u);
          const Expr dv = differentiate(v);
          switch (n.op) {
            case BinaryOp::Add:
              return du + dv;
            case BinaryOp::Sub:
              return du - dv;
            case BinaryOp::Mul:
              return du * v + u * dv;
            case BinaryOp::Div:
              if (v.is_constant()) return du / v;
              return (du * v - u * dv) / pow(v, Expr::constant(2.0));
            case BinaryOp::Pow:
              if (v.is_constant()) {
                const double c = v.constant_value();
                return Expr::constant(c) * pow(u, Expr::constant(c - 1.0)) * du;
              }
              if (u.is_constant()) return e * call(Func::Ln, u) * dv;
              return e * (dv * call(Func::Ln, u) + v * du / u);
          }
          return Expr::constant(0.0);
        } else {
          const Expr& u = n.arg;
          const Expr du = differentiate(u);
          switch (n.func) {
            case Func::Sin:
              return call(Func::Cos, u) * du;
            case Func::Cos:
              return -(call(Func::Sin, u) * du);
            case Func::Tan:
              return du / pow(call(Func::Cos, u), Expr::constant(2.0));
            case Func::Arctan:
              return du / (Expr::constant(1.0) + pow(u, Expr::constant(2.0)));
            case Func::Exp:
              return e * du;
            case Func::Ln:
              return du / u;
            case Func::Log10:
              return du / (u * Expr::constant(std::numbers::ln10));
            case Func::Abs:
              return du * u / e;
            case Func::Cbrt:
              return du / (Expr::constant(3.0) * pow(e, Expr::constant(2.0)));
            case Func::Sqrt:
              return du / (Expr::constant(2.0) * e);
          }
          return Expr::constant(0.0);
        }
      },
      e.node().v);
}

}  // namespace lsqroot
