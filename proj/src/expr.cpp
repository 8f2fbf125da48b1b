#include "metrikos/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace metrikos {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const std::vector<std::string>& vars, Expression& out)
      : text_(text), vars_(vars), out_(out) {}

  void run() {
    out_.root_ = expr();
    skip();
    if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
  }

 private:
  using Node = Expression::Node;
  using Op = Expression::Op;
  using Fn = Expression::Fn;

  std::size_t add(Node n) {
    out_.nodes_.push_back(std::move(n));
    return out_.nodes_.size() - 1;
  }
  std::size_t binary(Op op, std::size_t l, std::size_t r) {
    Node n;
    n.op = op;
    n.children = {l, r};
    return add(std::move(n));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  std::size_t expr() {
    std::size_t left = term();
    for (;;) {
      if (accept('+')) left = binary(Op::add, left, term());
      else if (accept('-')) left = binary(Op::sub, left, term());
      else return left;
    }
  }

  std::size_t term() {
    std::size_t left = unary();
    for (;;) {
      if (accept('*')) left = binary(Op::mul, left, unary());
      else if (accept('/')) left = binary(Op::div, left, unary());
      else return left;
    }
  }

  std::size_t unary() {
    if (accept('-')) {
      Node n;
      n.op = Op::neg;
      n.children = {unary()};
      return add(std::move(n));
    }
    if (accept('+')) return unary();
    return power();
  }

  std::size_t power() {
    const std::size_t base = primary();
    if (accept('^')) return binary(Op::pow, base, unary());
    return base;
  }

  std::size_t primary() {
    skip();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const std::size_t inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  std::size_t number() {
    const std::size_t start = pos_;
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(ptr - first);
    Node n;
    n.op = Op::constant;
    n.value = v;
    return add(std::move(n));
  }

  std::size_t identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));

    if (auto fn = function(name)) {
      skip();
      if (pos_ < text_.size() && text_[pos_] == '(') return call(*fn, name, start);
    }
    if (name == "pi") {
      Node n;
      n.value = std::numbers::pi;
      return add(std::move(n));
    }
    if (auto idx = variable(name)) {
      Node n;
      n.op = Op::variable;
      n.index = *idx;
      return add(std::move(n));
    }
    throw ParseError("unknown symbol '" + name + "'", start);
  }

  std::size_t call(Fn fn, const std::string& name, std::size_t start) {
    expect('(');
    Node n;
    n.op = Op::call;
    n.fn = fn;
    n.children.push_back(expr());
    while (accept(',')) n.children.push_back(expr());
    expect(')');
    const bool binary_fn = fn == Fn::min || fn == Fn::max;
    if (binary_fn ? n.children.size() < 2 : n.children.size() != 1)
      throw ParseError("wrong number of arguments to " + name, start);
    return add(std::move(n));
  }

  static std::optional<Fn> function(const std::string& name) {
    if (name == "sqrt") return Fn::sqrt;
    if (name == "cos") return Fn::cos;
    if (name == "sin") return Fn::sin;
    if (name == "abs") return Fn::abs;
    if (name == "min") return Fn::min;
    if (name == "max") return Fn::max;
    return std::nullopt;
  }

  std::optional<std::size_t> variable(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name || "x_" + vars_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = std::string(text);
  e.arity_ = variables.size();
  ExpressionParser(e.text_, variables, e).run();
  return e;
}

double Expression::operator()(std::span<const double> values) const {
  if (values.size() != arity_)
    fail(ErrorCode::invalid_input, "expression expects " + std::to_string(arity_) + " values");
  return eval(root_, values);
}

double Expression::eval(std::size_t id, std::span<const double> values) const {
  const Node& n = nodes_[id];
  auto arg = [&](std::size_t k) { return eval(n.children[k], values); };
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return values[n.index];
    case Op::add: return arg(0) + arg(1);
    case Op::sub: return arg(0) - arg(1);
    case Op::mul: return arg(0) * arg(1);
    case Op::div: return arg(0) / arg(1);
    case Op::pow: return std::pow(arg(0), arg(1));
    case Op::neg: return -arg(0);
    case Op::call:
      switch (n.fn) {
        case Fn::sqrt: return std::sqrt(arg(0));
        case Fn::cos: return std::cos(arg(0));
        case Fn::sin: return std::sin(arg(0));
        case Fn::abs: return std::abs(arg(0));
        case Fn::min: {
          double m = arg(0);
          for (std::size_t k = 1; k < n.children.size(); ++k) m = std::min(m, arg(k));
          return m;
        }
        case Fn::max: {
          double m = arg(0);
          for (std::size_t k = 1; k < n.children.size(); ++k) m = std::max(m, arg(k));
          return m;
        }
      }
  }
  return 0.0;
}

}  // namespace metrikos
