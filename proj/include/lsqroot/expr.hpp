#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace lsqroot {

/// Built-in single-argument functions. `log` parses as `Ln`, `atan` as `Arctan`.
enum class Func { Sin, Cos, Tan, Arctan, Exp, Ln, Log10, Abs, Cbrt, Sqrt };

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

std::string_view func_name(Func f);

struct ExprNode;

/// Immutable AST of a univariate real function of `x`.
///
/// Copies share structure; a tree is never modified after construction, so
/// the same Expr can be evaluated from several threads at once.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(ExprNode n);

  static Expr constant(double c);
  static Expr variable();

  const ExprNode& node() const { return *node_; }

  bool is_constant() const;
  /// Value of a Constant node; only meaningful when is_constant().
  double constant_value() const;

 private:
  std::shared_ptr<const ExprNode> node_;
};

namespace node {
struct Constant {
  double value;
};
struct Variable {};
struct Negate {
  Expr child;
};
struct Binary {
  BinaryOp op;
  Expr left;
  Expr right;
};
struct Call {
  Func func;
  Expr arg;
};
}  // namespace node

struct ExprNode {
  std::variant<node::Constant, node::Variable, node::Negate, node::Binary, node::Call> v;
};

// Builders with constant folding. These are what differentiate() uses, and
// they are handy for constructing trees in code.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr call(Func f, const Expr& arg);

/// Raised by parse() on malformed input. `position()` is the 0-based byte
/// offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Parses an infix expression over `x`.
///
/// Precedence, tightest first: `^` (right-associative), unary minus,
/// `* /`, `+ -`. So `-x^2` is `-(x^2)` and `2^3^2` is `2^9`.
Expr parse(std::string_view text);

/// Fully parenthesized rendering that parse() reads back to an equivalent tree.
std::string print(const Expr& e);

/// A real value, or std::nullopt for a domain error (log of a non-positive
/// number, division by zero, a non-integer power of a negative base, or any
/// non-finite intermediate).
using EvalResult = std::optional<double>;

EvalResult eval(const Expr& e, double x);

/// Value plus a first-order bound on the absolute rounding error accumulated
/// while computing it.
struct BoundedValue {
  double value;
  double error;
};

/// Same domain rules as eval(); the value is bit-identical to eval()'s.
std::optional<BoundedValue> eval_bounded(const Expr& e, double x);

/// Symbolic d/dx. The result may contain subexpressions that fail to
/// evaluate where the original does (e.g. d|x| at 0); those surface as
/// domain errors from eval().
Expr differentiate(const Expr& e);

}  // namespace lsqroot
