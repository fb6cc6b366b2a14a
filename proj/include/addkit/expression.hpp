#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace addkit {

/// A small arithmetic expression in the variables `x` and `t`, used for
/// user-supplied symbols such as "abs(x)^3" or "(1+t)*log(cosh(x))".
///
/// Supported: numbers, pi, e, + - * / ^, unary minus, parentheses and the
/// functions abs sqrt exp log ln log1p sin cos tan atan sinh cosh tanh
/// lncosh. For multi-dimensional arguments callers bind `x` to |xi|.
class Expression {
 public:
  /// Throws Error(ErrorCode::config) on malformed input.
  static Expression parse(std::string_view text);

  double operator()(double x, double t = 0.0) const;

  const std::string& text() const noexcept { return text_; }
  bool uses_t() const noexcept { return uses_t_; }

 private:
  enum class Op : unsigned char {
    constant, var_x, var_t, add, sub, mul, div, pow, neg,
    abs, sqrt, exp, log, log1p, sin, cos, tan, atan, sinh, cosh, tanh, lncosh,
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };

  friend class ExpressionParser;

  std::string text_;
  std::vector<Instr> code_;
  bool uses_t_ = false;
};

/// ln cosh(x) without overflow, exactly even in x.
double log_cosh(double x) noexcept;

}  // namespace addkit
