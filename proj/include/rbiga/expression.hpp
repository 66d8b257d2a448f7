#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace rbiga {

/// Closed-form scalar function of the parameter vector mu.
///
/// Grammar: numeric literals, mu1..muP (plain `mu` means mu1), + - * /,
/// unary minus, parentheses, abs(.) and sqrt(.). Construction folds
/// constants and drops trivial zeros and ones; there is no other simplification.
class ScalarExpression {
public:
  enum class Kind { Literal, Parameter, Add, Sub, Mul, Div, Neg, Abs, Sqrt };

  /// The constant 0.
  ScalarExpression();
  ScalarExpression(double value); // NOLINT(google-explicit-constructor)

  static ScalarExpression parameter(int index);
  static ScalarExpression parse(std::string_view text);

  Kind kind() const;
  bool is_constant() const;
  /// Constant value; only meaningful when is_constant().
  double constant_value() const;
  bool is_zero() const { return is_constant() && constant_value() == 0.0; }
  /// Largest 0-based parameter index referenced, -1 when none.
  int max_parameter_index() const;

  /// Evaluates at mu. Throws DomainError on a missing parameter, a zero
  /// denominator or a negative sqrt argument.
  double evaluate(std::span<const double> mu) const;

  /// Text that parses back to an equivalent expression.
  std::string to_string() const;

  friend ScalarExpression operator+(const ScalarExpression& a, const ScalarExpression& b);
  friend ScalarExpression operator-(const ScalarExpression& a, const ScalarExpression& b);
  friend ScalarExpression operator*(const ScalarExpression& a, const ScalarExpression& b);
  friend ScalarExpression operator/(const ScalarExpression& a, const ScalarExpression& b);
  friend ScalarExpression operator-(const ScalarExpression& a);
  friend ScalarExpression abs(const ScalarExpression& a);
  friend ScalarExpression sqrt(const ScalarExpression& a);

  struct Node;

private:
  explicit ScalarExpression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

} // namespace rbiga
