#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace msmrf {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(std::size_t column, const std::string& what)
      : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Arithmetic over variables x1..xN: + - * / ^, unary minus, parentheses, the
/// constant pi and the functions sin cos tan exp log sqrt tanh abs.
class Expression {
 public:
  static Expression parse(const std::string& text, std::size_t variables);
  double operator()(std::span<const double> x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace msmrf
