#pragma once

// Arithmetic expressions over the spacetime coordinates t, x, y, used to
// specify metric components in run configurations.
//
// Grammar (all binary operators left-associative):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' signed)*
//   signed  := ('-' | '+') signed | primary
//   primary := number | 't' | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | sqrt | tanh

#include <memory>
#include <string>
#include <string_view>

namespace cqw {

struct SpacetimePoint;

class MetricExpression {
 public:
  struct Node;

  /// Parses `source`; throws ParseError carrying the character offset.
  static MetricExpression parse(std::string_view source);
  static MetricExpression constant(double value);

  double evaluate(double t, double x, double y) const;
  double evaluate(const SpacetimePoint& p) const;

  /// Fully parenthesised text that parses back to an equivalent tree.
  std::string print() const;

  bool depends_on(char variable) const;
  bool is_constant() const { return !depends_on('t') && !depends_on('x') && !depends_on('y'); }

  const std::string& source() const { return source_; }

 private:
  explicit MetricExpression(std::shared_ptr<const Node> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace cqw
