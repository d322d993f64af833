#include "cqw/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "cqw/format.hpp"
#include "cqw/geometry.hpp"
#include "cqw/types.hpp"

namespace cqw {

struct MetricExpression::Node {
  enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };
  enum class Func { sin, cos, exp, sqrt, tanh };

  Kind kind;
  double value = 0.0;
  char variable = 0;
  Func func = Func::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = MetricExpression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::number;
  n->value = v;
  return n;
}

NodePtr make_variable(char c) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::variable;
  n->variable = c;
  return n;
}

NodePtr make_unary(Node::Kind k, NodePtr operand) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(Node::Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr make_call(Node::Func f, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::call;
  n->func = f;
  n->lhs = std::move(arg);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make_binary(Node::Kind::add, lhs, term());
      else if (accept('-'))
        lhs = make_binary(Node::Kind::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make_binary(Node::Kind::mul, lhs, unary());
      else if (accept('/'))
        lhs = make_binary(Node::Kind::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(Node::Kind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr lhs = primary();
    while (accept('^')) lhs = make_binary(Node::Kind::pow, lhs, signed_primary());
    return lhs;
  }

  NodePtr signed_primary() {
    if (accept('-')) return make_unary(Node::Kind::negate, signed_primary());
    if (accept('+')) return signed_primary();
    return primary();
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return make_number(value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Node::Func> kFuncs[] = {
        {"sin", Node::Func::sin},   {"cos", Node::Func::cos},   {"exp", Node::Func::exp},
        {"sqrt", Node::Func::sqrt}, {"tanh", Node::Func::tanh},
    };
    for (const auto& [fname, f] : kFuncs) {
      if (name != fname) continue;
      if (!accept('(')) fail("expected '(' after function '" + std::string(name) + "'");
      skip_space();
      if (pos_ < src_.size() && src_[pos_] == ')') fail("function '" + std::string(name) + "' expects 1 argument, got 0");
      NodePtr arg = expr();
      std::size_t extra = 0;
      while (accept(',')) {
        expr();
        ++extra;
      }
      if (extra > 0)
        fail("function '" + std::string(name) + "' expects 1 argument, got " + format_short(extra + 1));
      if (!accept(')')) fail("expected ')'");
      return make_call(f, arg);
    }
    if (name == "t" || name == "x" || name == "y") return make_variable(name[0]);
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, double t, double x, double y) {
  switch (n.kind) {
    case Node::Kind::number: return n.value;
    case Node::Kind::variable: return n.variable == 't' ? t : (n.variable == 'x' ? x : y);
    case Node::Kind::negate: return -eval(*n.lhs, t, x, y);
    case Node::Kind::add: return eval(*n.lhs, t, x, y) + eval(*n.rhs, t, x, y);
    case Node::Kind::sub: return eval(*n.lhs, t, x, y) - eval(*n.rhs, t, x, y);
    case Node::Kind::mul: return eval(*n.lhs, t, x, y) * eval(*n.rhs, t, x, y);
    case Node::Kind::div: return eval(*n.lhs, t, x, y) / eval(*n.rhs, t, x, y);
    case Node::Kind::pow: return std::pow(eval(*n.lhs, t, x, y), eval(*n.rhs, t, x, y));
    case Node::Kind::call: {
      const double a = eval(*n.lhs, t, x, y);
      switch (n.func) {
        case Node::Func::sin: return std::sin(a);
        case Node::Func::cos: return std::cos(a);
        case Node::Func::exp: return std::exp(a);
        case Node::Func::sqrt: return std::sqrt(a);
        case Node::Func::tanh: return std::tanh(a);
      }
    }
  }
  return 0.0;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

void print_node(const Node& n, std::string& out) {
  auto binary = [&](char op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Node::Kind::number: out += format_number(n.value); return;
    case Node::Kind::variable: out += n.variable; return;
    case Node::Kind::negate:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::add: binary('+'); return;
    case Node::Kind::sub: binary('-'); return;
    case Node::Kind::mul: binary('*'); return;
    case Node::Kind::div: binary('/'); return;
    case Node::Kind::pow: binary('^'); return;
    case Node::Kind::call: {
      static constexpr const char* kNames[] = {"sin", "cos", "exp", "sqrt", "tanh"};
      out += kNames[static_cast<int>(n.func)];
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    }
  }
}

bool uses(const Node& n, char v) {
  if (n.kind == Node::Kind::variable) return n.variable == v;
  return (n.lhs && uses(*n.lhs, v)) || (n.rhs && uses(*n.rhs, v));
}

}  // namespace

MetricExpression MetricExpression::parse(std::string_view source) {
  Parser p(source);
  return MetricExpression(p.parse(), std::string(source));
}

MetricExpression MetricExpression::constant(double value) {
  return MetricExpression(make_number(value), format_number(value));
}

double MetricExpression::evaluate(double t, double x, double y) const { return eval(*root_, t, x, y); }

double MetricExpression::evaluate(const SpacetimePoint& p) const { return eval(*root_, p.t, p.x, p.y); }

std::string MetricExpression::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool MetricExpression::depends_on(char variable) const { return uses(*root_, variable); }

}  // namespace cqw
