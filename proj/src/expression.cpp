#include "msmrf/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace msmrf {

struct Expression::Node {
  enum class Kind { constant, variable, neg, add, sub, mul, div, pow, call } kind;
  double value = 0.0;
  std::size_t index = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(std::span<const double> x) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::variable: return x[index];
      case Kind::neg: return -a->eval(x);
      case Kind::add: return a->eval(x) + b->eval(x);
      case Kind::sub: return a->eval(x) - b->eval(x);
      case Kind::mul: return a->eval(x) * b->eval(x);
      case Kind::div: return a->eval(x) / b->eval(x);
      case Kind::pow: return std::pow(a->eval(x), b->eval(x));
      case Kind::call: return fn(a->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
    {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
    {"tanh", [](double v) { return std::tanh(v); }}, {"abs", [](double v) { return std::abs(v); }},
};

class Parser {
 public:
  Parser(const std::string& s, std::size_t vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& what) const { throw ExpressionError(pos_ + 1, what); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto n = term();
    while (true) {
      if (accept('+')) n = make(Kind::add, n, term());
      else if (accept('-')) n = make(Kind::sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    auto n = unary();
    while (true) {
      if (accept('*')) n = make(Kind::mul, n, unary());
      else if (accept('/')) n = make(Kind::div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // Right associative: a^b^c = a^(b^c); -x^2 = -(x^2).
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of expression");
    const char c = s_[pos_];
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) error("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::constant;
      auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), n->value);
      if (res.ec != std::errc()) error("bad number");
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string word = s_.substr(start, pos_ - start);
      if (word == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::constant;
        n->value = std::numbers::pi;
        return n;
      }
      if (word.size() > 1 && word[0] == 'x' && word.find_first_not_of("0123456789", 1) == std::string::npos) {
        const std::size_t k = std::stoul(word.substr(1));
        if (k < 1 || k > vars_) {
          pos_ = start;
          error("variable " + word + " outside x1..x" + std::to_string(vars_));
        }
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::variable;
        n->index = k - 1;
        return n;
      }
      for (const auto& f : kFunctions) {
        if (word == f.name) {
          if (!accept('(')) error("expected '(' after " + word);
          auto arg = expr();
          if (!accept(')')) error("expected ')'");
          auto n = std::make_shared<Expression::Node>();
          n->kind = Kind::call;
          n->fn = f.fn;
          n->a = std::move(arg);
          return n;
        }
      }
      pos_ = start;
      error("unknown name '" + word + "'");
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, std::size_t variables) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, variables).parse();
  return e;
}

double Expression::operator()(std::span<const double> x) const { return root_->eval(x); }

}  // namespace msmrf
