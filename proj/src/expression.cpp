#include "rbiga/expression.hpp"

#include "rbiga/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace rbiga {

struct ScalarExpression::Node {
  Kind kind;
  double value = 0.0; // literal
  int index = 0;      // parameter
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ScalarExpression::Node>;
using Kind = ScalarExpression::Kind;

NodePtr literal(double v) {
  auto n = std::make_shared<ScalarExpression::Node>();
  n->kind = Kind::Literal;
  n->value = v;
  return n;
}

NodePtr node(Kind k, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<ScalarExpression::Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool is_lit(const NodePtr& n, double v) { return n->kind == Kind::Literal && n->value == v; }
bool is_lit(const NodePtr& n) { return n->kind == Kind::Literal; }

int precedence(const NodePtr& n) {
  switch (n->kind) {
  case Kind::Add:
  case Kind::Sub:
    return 1;
  case Kind::Mul:
  case Kind::Div:
    return 2;
  case Kind::Neg:
    return 3;
  default:
    return 4;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  return v < 0 ? "(" + s + ")" : s;
}

void print(const NodePtr& n, std::ostringstream& os) {
  auto child = [&](const NodePtr& c, bool paren) {
    if (paren)
      os << '(';
    print(c, os);
    if (paren)
      os << ')';
  };
  switch (n->kind) {
  case Kind::Literal:
    os << format_number(n->value);
    return;
  case Kind::Parameter:
    os << "mu" << (n->index + 1);
    return;
  case Kind::Neg:
    os << '-';
    child(n->lhs, precedence(n->lhs) < 3);
    return;
  case Kind::Abs:
  case Kind::Sqrt:
    os << (n->kind == Kind::Abs ? "abs(" : "sqrt(");
    print(n->lhs, os);
    os << ')';
    return;
  default: {
    const int p = precedence(n);
    const char op = n->kind == Kind::Add ? '+' : n->kind == Kind::Sub ? '-' : n->kind == Kind::Mul ? '*' : '/';
    child(n->lhs, precedence(n->lhs) < p);
    os << op;
    // a right operand of equal precedence keeps its parentheses so that
    // parsing the text rebuilds the same evaluation order
    child(n->rhs, precedence(n->rhs) <= p);
    return;
  }
  }
}

double eval(const NodePtr& n, std::span<const double> mu) {
  switch (n->kind) {
  case Kind::Literal:
    return n->value;
  case Kind::Parameter:
    if (static_cast<std::size_t>(n->index) >= mu.size()) {
      std::ostringstream os;
      os << "expression references mu" << n->index + 1 << " but only " << mu.size()
         << " parameters are given";
      throw DomainError(os.str());
    }
    return mu[static_cast<std::size_t>(n->index)];
  case Kind::Add:
    return eval(n->lhs, mu) + eval(n->rhs, mu);
  case Kind::Sub:
    return eval(n->lhs, mu) - eval(n->rhs, mu);
  case Kind::Mul:
    return eval(n->lhs, mu) * eval(n->rhs, mu);
  case Kind::Div: {
    const double den = eval(n->rhs, mu);
    if (den == 0.0)
      throw DomainError("expression: division by zero");
    return eval(n->lhs, mu) / den;
  }
  case Kind::Neg:
    return -eval(n->lhs, mu);
  case Kind::Abs:
    return std::abs(eval(n->lhs, mu));
  case Kind::Sqrt: {
    const double a = eval(n->lhs, mu);
    if (a < 0.0)
      throw DomainError("expression: sqrt of a negative value");
    return std::sqrt(a);
  }
  }
  return 0.0;
}

int max_index(const NodePtr& n) {
  if (!n)
    return -1;
  if (n->kind == Kind::Parameter)
    return n->index;
  return std::max(max_index(n->lhs), max_index(n->rhs));
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  ScalarExpression run() {
    ScalarExpression e = expr();
    skip();
    if (pos_ != text_.size())
      fail("unexpected character");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression '" << text_ << "': " << what << " at position " << pos_;
    throw ConstructionError(os.str());
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ScalarExpression expr() {
    ScalarExpression e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  ScalarExpression term() {
    ScalarExpression e = unary();
    for (;;) {
      if (accept('*'))
        e = e * unary();
      else if (accept('/'))
        e = e / unary();
      else
        return e;
    }
  }

  ScalarExpression unary() {
    if (accept('-'))
      return -unary();
    if (accept('+'))
      return unary();
    return primary();
  }

  ScalarExpression primary() {
    skip();
    if (pos_ >= text_.size())
      fail("unexpected end of input");
    if (accept('(')) {
      ScalarExpression e = expr();
      if (!accept(')'))
        fail("missing ')'");
      return e;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str())
        fail("bad number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      return ScalarExpression(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == "mu") {
        std::size_t dstart = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
        if (dstart == pos_)
          return ScalarExpression::parameter(0);
        const int idx = std::atoi(std::string(text_.substr(dstart, pos_ - dstart)).c_str());
        if (idx < 1)
          fail("parameters are numbered from mu1");
        return ScalarExpression::parameter(idx - 1);
      }
      if (word == "abs" || word == "sqrt") {
        if (!accept('('))
          fail("expected '(' after function name");
        ScalarExpression e = expr();
        if (!accept(')'))
          fail("missing ')'");
        return word == "abs" ? abs(e) : sqrt(e);
      }
      pos_ = start;
      fail("unknown symbol '" + std::string(word) + "'");
    }
    fail("unexpected character");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

} // namespace

ScalarExpression::ScalarExpression() : node_(literal(0.0)) {}
ScalarExpression::ScalarExpression(double value) : node_(literal(value)) {}

ScalarExpression ScalarExpression::parameter(int index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Parameter;
  n->index = index;
  return ScalarExpression(std::move(n));
}

ScalarExpression ScalarExpression::parse(std::string_view text) { return Parser(text).run(); }

ScalarExpression::Kind ScalarExpression::kind() const { return node_->kind; }
bool ScalarExpression::is_constant() const { return node_->kind == Kind::Literal; }
double ScalarExpression::constant_value() const { return node_->value; }
int ScalarExpression::max_parameter_index() const { return max_index(node_); }

double ScalarExpression::evaluate(std::span<const double> mu) const { return eval(node_, mu); }

std::string ScalarExpression::to_string() const {
  std::ostringstream os;
  print(node_, os);
  return os.str();
}

ScalarExpression operator+(const ScalarExpression& a, const ScalarExpression& b) {
  if (is_lit(a.node_) && is_lit(b.node_))
    return ScalarExpression(a.node_->value + b.node_->value);
  if (is_lit(a.node_, 0.0))
    return b;
  if (is_lit(b.node_, 0.0))
    return a;
  return ScalarExpression(node(Kind::Add, a.node_, b.node_));
}

ScalarExpression operator-(const ScalarExpression& a, const ScalarExpression& b) {
  if (is_lit(a.node_) && is_lit(b.node_))
    return ScalarExpression(a.node_->value - b.node_->value);
  if (is_lit(b.node_, 0.0))
    return a;
  if (is_lit(a.node_, 0.0))
    return -b;
  return ScalarExpression(node(Kind::Sub, a.node_, b.node_));
}

ScalarExpression operator*(const ScalarExpression& a, const ScalarExpression& b) {
  if (is_lit(a.node_) && is_lit(b.node_))
    return ScalarExpression(a.node_->value * b.node_->value);
  if (is_lit(a.node_, 0.0) || is_lit(b.node_, 0.0))
    return ScalarExpression(0.0);
  if (is_lit(a.node_, 1.0))
    return b;
  if (is_lit(b.node_, 1.0))
    return a;
  return ScalarExpression(node(Kind::Mul, a.node_, b.node_));
}

ScalarExpression operator/(const ScalarExpression& a, const ScalarExpression& b) {
  if (is_lit(b.node_, 0.0))
    throw DomainError("expression: division by the constant zero");
  if (is_lit(a.node_) && is_lit(b.node_))
    return ScalarExpression(a.node_->value / b.node_->value);
  if (is_lit(a.node_, 0.0))
    return ScalarExpression(0.0);
  if (is_lit(b.node_, 1.0))
    return a;
  return ScalarExpression(node(Kind::Div, a.node_, b.node_));
}

ScalarExpression operator-(const ScalarExpression& a) {
  if (is_lit(a.node_))
    return ScalarExpression(-a.node_->value);
  if (a.node_->kind == Kind::Neg)
    return ScalarExpression(a.node_->lhs);
  return ScalarExpression(node(Kind::Neg, a.node_));
}

ScalarExpression abs(const ScalarExpression& a) {
  if (is_lit(a.node_))
    return ScalarExpression(std::abs(a.node_->value));
  return ScalarExpression(node(Kind::Abs, a.node_));
}

ScalarExpression sqrt(const ScalarExpression& a) {
  if (is_lit(a.node_)) {
    if (a.node_->value < 0.0)
      throw DomainError("expression: sqrt of a negative constant");
    return ScalarExpression(std::sqrt(a.node_->value));
  }
  return ScalarExpression(node(Kind::Sqrt, a.node_));
}

} // namespace rbiga
