#pragma once

// Scalar expressions used to describe plants, exosystems, controllers and
// regulator maps in system files.
//
// Grammar (whitespace ignored):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// '^' binds tighter than unary minus and is right-associative, so
// "-w1^4" is -(w1^4) and "2^3^2" is 2^(3^2).

#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regsyn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }
  // The message without the position.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

using Env = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  enum class Kind { kNumber, kVariable, kPi, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall };
  enum class Function { kSin, kCos, kTan, kExp, kSqrt, kAbs };

  // Literal zero.
  Expr();

  static Expr number(double value);
  static Expr variable(std::string name);
  static Expr pi();
  static Expr neg(Expr operand);
  static Expr binary(Kind kind, Expr lhs, Expr rhs);
  static Expr call(Function function, Expr argument);

  Kind kind() const;
  double value() const;
  const std::string& name() const;
  Function function() const;
  // Operand of kNeg / kCall, left side of binary nodes.
  const Expr& lhs() const;
  const Expr& rhs() const;

  std::set<std::string> variables() const;

  // Replaces variables by expressions; unknown names are kept.
  Expr substitute(const std::map<std::string, Expr, std::less<>>& replacement) const;
  // Renames variables; unknown names are kept.
  Expr rename(const std::map<std::string, std::string, std::less<>>& names) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);

Expr parse(std::string_view text);

// Minimal-parenthesis rendering; numbers use the shortest form that reads
// back exactly, so parse(to_string(e)) evaluates bit-identically to e.
std::string to_string(const Expr& e);

double eval(const Expr& e, const Env& env);

// Exact partial derivative of `e` with respect to `var` at `env` (forward mode).
double derivative(const Expr& e, const Env& env, std::string_view var);

std::string_view function_name(Expr::Function f);

// Shortest decimal form that reads back to the same double, as used in every
// text output.
std::string format_double(double v);

// An expression flattened to a stack program with variables bound to slot
// indices, for repeated evaluation inside integrators.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  // Throws EvalError if the expression references a name not in `slots`.
  CompiledExpr(const Expr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;

 private:
  struct Instr {
    Expr::Kind op;
    Expr::Function function;
    double value;
    int slot;
  };
  std::vector<Instr> program_;
  int max_depth_ = 0;
};

std::vector<CompiledExpr> compile_all(std::span<const Expr> exprs,
                                      std::span<const std::string> slots);

}  // namespace regsyn
