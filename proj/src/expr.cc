#include "regsyn/expr.h"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <utility>

namespace regsyn {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : Error(message + " at byte " + std::to_string(offset)), detail_(message), offset_(offset) {}

struct Expr::Node {
  Kind kind = Kind::kNumber;
  double value = 0.0;
  std::string name;
  Function function = Function::kSin;
  Expr lhs_expr{nullptr};
  Expr rhs_expr{nullptr};
};

Expr::Expr() : Expr(number(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::number(double value) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kNumber;
  node->value = value;
  return Expr(std::move(node));
}

Expr Expr::variable(std::string name) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kVariable;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Expr Expr::pi() {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kPi;
  return Expr(std::move(node));
}

Expr Expr::neg(Expr operand) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kNeg;
  node->lhs_expr = std::move(operand);
  return Expr(std::move(node));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
  if (kind != Kind::kAdd && kind != Kind::kSub && kind != Kind::kMul &&
      kind != Kind::kDiv && kind != Kind::kPow) {
    throw std::invalid_argument("Expr::binary: not a binary operator");
  }
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->lhs_expr = std::move(lhs);
  node->rhs_expr = std::move(rhs);
  return Expr(std::move(node));
}

Expr Expr::call(Function function, Expr argument) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kCall;
  node->function = function;
  node->lhs_expr = std::move(argument);
  return Expr(std::move(node));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Expr::Function Expr::function() const { return node_->function; }
const Expr& Expr::lhs() const { return node_->lhs_expr; }
const Expr& Expr::rhs() const { return node_->rhs_expr; }

namespace {

void collect_variables(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case Expr::Kind::kVariable:
      out.insert(e.name());
      return;
    case Expr::Kind::kNumber:
    case Expr::Kind::kPi:
      return;
    case Expr::Kind::kNeg:
    case Expr::Kind::kCall:
      collect_variables(e.lhs(), out);
      return;
    default:
      collect_variables(e.lhs(), out);
      collect_variables(e.rhs(), out);
  }
}

}  // namespace

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect_variables(*this, out);
  return out;
}

Expr Expr::substitute(const std::map<std::string, Expr, std::less<>>& replacement) const {
  switch (kind()) {
    case Kind::kVariable: {
      auto it = replacement.find(name());
      return it == replacement.end() ? *this : it->second;
    }
    case Kind::kNumber:
    case Kind::kPi:
      return *this;
    case Kind::kNeg:
      return neg(lhs().substitute(replacement));
    case Kind::kCall:
      return call(function(), lhs().substitute(replacement));
    default:
      return binary(kind(), lhs().substitute(replacement), rhs().substitute(replacement));
  }
}

Expr Expr::rename(const std::map<std::string, std::string, std::less<>>& names) const {
  std::map<std::string, Expr, std::less<>> replacement;
  for (const auto& [from, to] : names) replacement.emplace(from, variable(to));
  return substitute(replacement);
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expr::Kind::kNumber:
      // Bitwise comparison would separate 0 and -0; values are what matter.
      return a.value() == b.value();
    case Expr::Kind::kVariable:
      return a.name() == b.name();
    case Expr::Kind::kPi:
      return true;
    case Expr::Kind::kNeg:
      return a.lhs() == b.lhs();
    case Expr::Kind::kCall:
      return a.function() == b.function() && a.lhs() == b.lhs();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::kAdd, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::kSub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::kMul, a, b); }

std::string_view function_name(Expr::Function f) {
  switch (f) {
    case Expr::Function::kSin: return "sin";
    case Expr::Function::kCos: return "cos";
    case Expr::Function::kTan: return "tan";
    case Expr::Function::kExp: return "exp";
    case Expr::Function::kSqrt: return "sqrt";
    case Expr::Function::kAbs: return "abs";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr std::array<std::pair<std::string_view, Expr::Function>, 6> kFunctions{{
    {"sin", Expr::Function::kSin},
    {"cos", Expr::Function::kCos},
    {"tan", Expr::Function::kTan},
    {"exp", Expr::Function::kExp},
    {"sqrt", Expr::Function::kSqrt},
    {"abs", Expr::Function::kAbs},
}};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (true) {
      if (accept('+')) {
        lhs = Expr::binary(Expr::Kind::kAdd, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Kind::kSub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = Expr::binary(Expr::Kind::kMul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Kind::kDiv, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::neg(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return Expr::binary(Expr::Kind::kPow, base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", start);
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return Expr::number(std::strtod(literal.c_str(), nullptr));
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view ident = text_.substr(start, pos_ - start);
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const std::size_t paren = pos_;
      ++pos_;
      Expr::Function function{};
      bool known = false;
      for (const auto& [fname, f] : kFunctions) {
        if (fname == ident) {
          function = f;
          known = true;
        }
      }
      if (!known) throw ParseError("unknown function '" + std::string(ident) + "'", start);
      Expr argument = parse_expr();
      if (accept(',')) {
        throw ParseError("multi-argument functions are not supported", paren);
      }
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return Expr::call(function, argument);
    }
    if (ident == "pi") return Expr::pi();
    return Expr::variable(std::string(ident));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength of the printed form of a node.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::kAdd:
    case Expr::Kind::kSub:
      return 1;
    case Expr::Kind::kMul:
    case Expr::Kind::kDiv:
      return 2;
    case Expr::Kind::kNeg:
      return 3;
    case Expr::Kind::kPow:
      return 4;
    case Expr::Kind::kNumber:
      return std::signbit(e.value()) ? 3 : 5;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[40];
  for (int digits = 1; digits < 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::kNumber:
      out += format_number(e.value());
      return;
    case Expr::Kind::kVariable:
      out += e.name();
      return;
    case Expr::Kind::kPi:
      out += "pi";
      return;
    case Expr::Kind::kNeg:
      out += '-';
      print_child(e.lhs(), 3, out);
      return;
    case Expr::Kind::kCall:
      out += function_name(e.function());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
    case Expr::Kind::kAdd:
    case Expr::Kind::kSub:
      print_child(e.lhs(), 1, out);
      out += e.kind() == Expr::Kind::kAdd ? " + " : " - ";
      print_child(e.rhs(), 2, out);
      return;
    case Expr::Kind::kMul:
    case Expr::Kind::kDiv:
      print_child(e.lhs(), 2, out);
      out += e.kind() == Expr::Kind::kMul ? "*" : "/";
      print_child(e.rhs(), 3, out);
      return;
    case Expr::Kind::kPow:
      print_child(e.lhs(), 5, out);
      out += '^';
      print_child(e.rhs(), 3, out);
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double apply_function(Expr::Function f, double x) {
  switch (f) {
    case Expr::Function::kSin: return std::sin(x);
    case Expr::Function::kCos: return std::cos(x);
    case Expr::Function::kTan: return std::tan(x);
    case Expr::Function::kExp: return std::exp(x);
    case Expr::Function::kSqrt:
      if (x < 0.0) throw EvalError("sqrt of negative number");
      return std::sqrt(x);
    case Expr::Function::kAbs: return std::fabs(x);
  }
  return 0.0;
}

double apply_binary(Expr::Kind k, double a, double b) {
  switch (k) {
    case Expr::Kind::kAdd: return a + b;
    case Expr::Kind::kSub: return a - b;
    case Expr::Kind::kMul: return a * b;
    case Expr::Kind::kDiv:
      if (b == 0.0) throw EvalError("division by zero");
      return a / b;
    case Expr::Kind::kPow:
      if (a < 0.0 && std::trunc(b) != b) {
        throw EvalError("non-integer power of negative number");
      }
      if (a == 0.0 && b < 0.0) throw EvalError("division by zero in power");
      return std::pow(a, b);
    default:
      return 0.0;
  }
}

}  // namespace

double eval(const Expr& e, const Env& env) {
  switch (e.kind()) {
    case Expr::Kind::kNumber:
      return e.value();
    case Expr::Kind::kVariable: {
      auto it = env.find(e.name());
      if (it == env.end()) throw EvalError("unbound variable '" + e.name() + "'");
      return it->second;
    }
    case Expr::Kind::kPi:
      return std::numbers::pi;
    case Expr::Kind::kNeg:
      return -eval(e.lhs(), env);
    case Expr::Kind::kCall:
      return apply_function(e.function(), eval(e.lhs(), env));
    default: {
      const double a = eval(e.lhs(), env);
      const double b = eval(e.rhs(), env);
      return apply_binary(e.kind(), a, b);
    }
  }
}

namespace {

struct Dual {
  double v;
  double d;
};

Dual eval_dual(const Expr& e, const Env& env, std::string_view var) {
  switch (e.kind()) {
    case Expr::Kind::kNumber:
      return {e.value(), 0.0};
    case Expr::Kind::kPi:
      return {std::numbers::pi, 0.0};
    case Expr::Kind::kVariable: {
      auto it = env.find(e.name());
      if (it == env.end()) throw EvalError("unbound variable '" + e.name() + "'");
      return {it->second, e.name() == var ? 1.0 : 0.0};
    }
    case Expr::Kind::kNeg: {
      const Dual a = eval_dual(e.lhs(), env, var);
      return {-a.v, -a.d};
    }
    case Expr::Kind::kCall: {
      const Dual a = eval_dual(e.lhs(), env, var);
      const double v = apply_function(e.function(), a.v);
      switch (e.function()) {
        case Expr::Function::kSin: return {v, std::cos(a.v) * a.d};
        case Expr::Function::kCos: return {v, -std::sin(a.v) * a.d};
        case Expr::Function::kTan: return {v, (1.0 + v * v) * a.d};
        case Expr::Function::kExp: return {v, v * a.d};
        case Expr::Function::kSqrt:
          if (a.d == 0.0) return {v, 0.0};
          if (v == 0.0) throw EvalError("sqrt is not differentiable at zero");
          return {v, a.d / (2.0 * v)};
        case Expr::Function::kAbs:
          if (a.d == 0.0) return {v, 0.0};
          if (a.v == 0.0) throw EvalError("abs is not differentiable at zero");
          return {v, a.v > 0.0 ? a.d : -a.d};
      }
      return {v, 0.0};
    }
    default:
      break;
  }
  const Dual a = eval_dual(e.lhs(), env, var);
  const Dual b = eval_dual(e.rhs(), env, var);
  const double v = apply_binary(e.kind(), a.v, b.v);
  switch (e.kind()) {
    case Expr::Kind::kAdd: return {v, a.d + b.d};
    case Expr::Kind::kSub: return {v, a.d - b.d};
    case Expr::Kind::kMul: return {v, a.d * b.v + a.v * b.d};
    case Expr::Kind::kDiv: return {v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
    case Expr::Kind::kPow: {
      double d = 0.0;
      if (a.d != 0.0) {
        // b * a^(b-1) stays finite at a = 0 for b >= 1.
        if (a.v == 0.0 && b.v < 1.0) throw EvalError("power is not differentiable at zero");
        d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
      }
      if (b.d != 0.0) {
        if (a.v <= 0.0) throw EvalError("power with variable exponent needs a positive base");
        d += v * std::log(a.v) * b.d;
      }
      return {v, d};
    }
    default:
      return {v, 0.0};
  }
}

}  // namespace

double derivative(const Expr& e, const Env& env, std::string_view var) {
  return eval_dual(e, env, var).d;
}

// ---------------------------------------------------------------------------
// Compiled form

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots) {
  int depth = 0;
  // Post-order emission; evaluation order matches eval() (lhs before rhs).
  auto emit = [&](auto&& self, const Expr& node) -> void {
    switch (node.kind()) {
      case Expr::Kind::kNumber:
        program_.push_back({Expr::Kind::kNumber, {}, node.value(), -1});
        ++depth;
        break;
      case Expr::Kind::kPi:
        program_.push_back({Expr::Kind::kNumber, {}, std::numbers::pi, -1});
        ++depth;
        break;
      case Expr::Kind::kVariable: {
        int slot = -1;
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (slots[i] == node.name()) slot = static_cast<int>(i);
        }
        if (slot < 0) throw EvalError("unbound variable '" + node.name() + "'");
        program_.push_back({Expr::Kind::kVariable, {}, 0.0, slot});
        ++depth;
        break;
      }
      case Expr::Kind::kNeg:
        self(self, node.lhs());
        program_.push_back({Expr::Kind::kNeg, {}, 0.0, -1});
        break;
      case Expr::Kind::kCall:
        self(self, node.lhs());
        program_.push_back({Expr::Kind::kCall, node.function(), 0.0, -1});
        break;
      default:
        self(self, node.lhs());
        self(self, node.rhs());
        program_.push_back({node.kind(), {}, 0.0, -1});
        --depth;
        break;
    }
    max_depth_ = std::max(max_depth_, depth);
  };
  emit(emit, e);
}

double CompiledExpr::operator()(std::span<const double> values) const {
  constexpr int kInline = 64;
  std::array<double, kInline> small;
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > kInline) {
    large.resize(static_cast<std::size_t>(max_depth_));
    stack = large.data();
  }
  int top = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Expr::Kind::kNumber:
        stack[top++] = in.value;
        break;
      case Expr::Kind::kVariable:
        stack[top++] = values[static_cast<std::size_t>(in.slot)];
        break;
      case Expr::Kind::kNeg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Expr::Kind::kCall:
        stack[top - 1] = apply_function(in.function, stack[top - 1]);
        break;
      default:
        --top;
        stack[top - 1] = apply_binary(in.op, stack[top - 1], stack[top]);
        break;
    }
  }
  return program_.empty() ? 0.0 : stack[0];
}

std::vector<CompiledExpr> compile_all(std::span<const Expr> exprs,
                                      std::span<const std::string> slots) {
  std::vector<CompiledExpr> out;
  out.reserve(exprs.size());
  for (const Expr& e : exprs) out.emplace_back(e, slots);
  return out;
}

std::string format_double(double v) { return format_number(v); }

}  // namespace regsyn
