#include "addkit/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "addkit/error.hpp"

namespace addkit {

double log_cosh(double x) noexcept {
  const double a = std::fabs(x);
  // ln cosh a = a - ln 2 + ln(1 + e^{-2a})
  return a - std::numbers::ln2 + std::log1p(std::exp(-2.0 * a));
}

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression run() {
    Expression e;
    e.text_ = std::string(text_);
    out_ = &e.code_;
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    if (out_->empty()) fail("empty expression");
    int depth = 0;
    int max_depth = 0;
    for (const auto& ins : e.code_) {
      depth += stack_effect(ins.op);
      max_depth = std::max(max_depth, depth);
      if (ins.op == Expression::Op::var_t) e.uses_t_ = true;
    }
    if (max_depth > kMaxStack) fail("expression too deeply nested");
    return e;
  }

  static constexpr int kMaxStack = 64;

 private:
  using Op = Expression::Op;

  static int stack_effect(Op op) {
    switch (op) {
      case Op::constant:
      case Op::var_x:
      case Op::var_t: return 1;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
      case Op::pow: return -1;
      default: return 0;
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::config, "cannot parse symbol expression '" + std::string(text_) +
                                       "' at offset " + std::to_string(pos_) + ": " + why);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Op op, double v = 0.0) { out_->push_back({op, v}); }

  void parse_sum() {
    parse_product();
    for (;;) {
      if (accept('+')) {
        parse_product();
        emit(Op::add);
      } else if (accept('-')) {
        parse_product();
        emit(Op::sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    for (;;) {
      if (accept('*')) {
        parse_unary();
        emit(Op::mul);
      } else if (accept('/')) {
        parse_unary();
        emit(Op::div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      emit(Op::neg);
      return;
    }
    if (accept('+')) {
      parse_unary();
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_primary();
    if (accept('^')) {
      parse_unary();  // right associative, binds tighter than unary minus on the left
      emit(Op::pow);
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_sum();
      if (!accept(')')) fail("expected ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(ptr - text_.data());
      emit(Op::constant, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "x") return emit(Op::var_x);
      if (name == "t") return emit(Op::var_t);
      if (name == "pi") return emit(Op::constant, std::numbers::pi);
      if (name == "e") return emit(Op::constant, std::numbers::e);
      const Op fn = function_op(name);
      if (!accept('(')) fail("expected '(' after function name");
      parse_sum();
      if (!accept(')')) fail("expected ')'");
      emit(fn);
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Op function_op(std::string_view name) const {
    if (name == "abs") return Op::abs;
    if (name == "sqrt") return Op::sqrt;
    if (name == "exp") return Op::exp;
    if (name == "log" || name == "ln") return Op::log;
    if (name == "log1p") return Op::log1p;
    if (name == "sin") return Op::sin;
    if (name == "cos") return Op::cos;
    if (name == "tan") return Op::tan;
    if (name == "atan") return Op::atan;
    if (name == "sinh") return Op::sinh;
    if (name == "cosh") return Op::cosh;
    if (name == "tanh") return Op::tanh;
    if (name == "lncosh") return Op::lncosh;
    fail("unknown function '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instr>* out_ = nullptr;
};

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

double Expression::operator()(double x, double t) const {
  std::array<double, ExpressionParser::kMaxStack> stack;
  int sp = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::constant: stack[sp++] = ins.value; break;
      case Op::var_x: stack[sp++] = x; break;
      case Op::var_t: stack[sp++] = t; break;
      case Op::add: --sp; stack[sp - 1] += stack[sp]; break;
      case Op::sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Op::mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case Op::div: --sp; stack[sp - 1] /= stack[sp]; break;
      case Op::pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
      case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
      case Op::sqrt: stack[sp - 1] = std::sqrt(stack[sp - 1]); break;
      case Op::exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
      case Op::log: stack[sp - 1] = std::log(stack[sp - 1]); break;
      case Op::log1p: stack[sp - 1] = std::log1p(stack[sp - 1]); break;
      case Op::sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
      case Op::cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
      case Op::tan: stack[sp - 1] = std::tan(stack[sp - 1]); break;
      case Op::atan: stack[sp - 1] = std::atan(stack[sp - 1]); break;
      case Op::sinh: stack[sp - 1] = std::sinh(stack[sp - 1]); break;
      case Op::cosh: stack[sp - 1] = std::cosh(stack[sp - 1]); break;
      case Op::tanh: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
      case Op::lncosh: stack[sp - 1] = log_cosh(stack[sp - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace addkit
