#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metrikos/error.hpp"

namespace metrikos {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(ErrorCode::parse_error, what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Arithmetic over coordinate symbols: numbers, variables, + - * / ^,
/// unary minus, parentheses, the constant pi and the functions sqrt, cos,
/// sin, abs, min, max. A variable `a` may also be written `x_a`.
class Expression {
 public:
  static Expression parse(std::string_view text, const std::vector<std::string>& variables);

  double operator()(std::span<const double> values) const;
  const std::string& text() const noexcept { return text_; }

 private:
  enum class Op { constant, variable, add, sub, mul, div, pow, neg, call };
  enum class Fn { sqrt, cos, sin, abs, min, max };
  struct Node {
    Op op = Op::constant;
    double value = 0.0;
    std::size_t index = 0;
    Fn fn = Fn::sqrt;
    std::vector<std::size_t> children;
  };

  double eval(std::size_t node, std::span<const double> values) const;

  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  std::size_t arity_ = 0;
  std::string text_;

  friend class ExpressionParser;
};

}  // namespace metrikos
