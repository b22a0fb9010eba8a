#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccs/errors.hpp"
#include "ccs/jet.hpp"

namespace ccs {

namespace detail {

enum class Op {
  kLiteral,
  kCoord,
  kConstant,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,  // constant exponent, folded at parse time into `number`
  kExp,
  kLog,
  kSin,
  kCos,
  kTan,
  kSqrt,
  kTanh,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double number = 0.0;  // literal / constant value, or the Pow exponent
  int coord = -1;
  std::string name;  // coordinate or constant identifier
  NodePtr lhs, rhs;
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string node_str(const Node& n) {
  switch (n.op) {
    case Op::kLiteral:
      return format_number(n.number);
    case Op::kCoord:
    case Op::kConstant:
      return n.name;
    case Op::kNeg:
      return "(-" + node_str(*n.lhs) + ")";
    case Op::kAdd:
      return "(" + node_str(*n.lhs) + "+" + node_str(*n.rhs) + ")";
    case Op::kSub:
      return "(" + node_str(*n.lhs) + "-" + node_str(*n.rhs) + ")";
    case Op::kMul:
      return "(" + node_str(*n.lhs) + "*" + node_str(*n.rhs) + ")";
    case Op::kDiv:
      return "(" + node_str(*n.lhs) + "/" + node_str(*n.rhs) + ")";
    case Op::kPow:
      return "(" + node_str(*n.lhs) + "^" + format_number(n.number) + ")";
    case Op::kExp:
      return "exp(" + node_str(*n.lhs) + ")";
    case Op::kLog:
      return "log(" + node_str(*n.lhs) + ")";
    case Op::kSin:
      return "sin(" + node_str(*n.lhs) + ")";
    case Op::kCos:
      return "cos(" + node_str(*n.lhs) + ")";
    case Op::kTan:
      return "tan(" + node_str(*n.lhs) + ")";
    case Op::kSqrt:
      return "sqrt(" + node_str(*n.lhs) + ")";
    case Op::kTanh:
      return "tanh(" + node_str(*n.lhs) + ")";
  }
  return "?";
}

inline double eval_value(const Node& n, const Vec& p) {
  switch (n.op) {
    case Op::kLiteral:
    case Op::kConstant:
      return n.number;
    case Op::kCoord:
      return p[n.coord];
    case Op::kNeg:
      return -eval_value(*n.lhs, p);
    case Op::kAdd:
      return eval_value(*n.lhs, p) + eval_value(*n.rhs, p);
    case Op::kSub:
      return eval_value(*n.lhs, p) - eval_value(*n.rhs, p);
    case Op::kMul:
      return eval_value(*n.lhs, p) * eval_value(*n.rhs, p);
    case Op::kDiv: {
      double d = eval_value(*n.rhs, p);
      if (d == 0.0) throw DomainError("division by zero", node_str(n));
      return eval_value(*n.lhs, p) / d;
    }
    case Op::kPow: {
      double b = eval_value(*n.lhs, p);
      double e = n.number;
      bool integral = (e == std::floor(e));
      if (!integral && b <= 0.0)
        throw DomainError("non-integer power of a nonpositive base", node_str(n));
      if (integral && b == 0.0 && e < 0.0)
        throw DomainError("zero base with negative exponent", node_str(n));
      return std::pow(b, e);
    }
    case Op::kExp:
      return std::exp(eval_value(*n.lhs, p));
    case Op::kLog: {
      double a = eval_value(*n.lhs, p);
      if (a <= 0.0) throw DomainError("log of a nonpositive argument", node_str(n));
      return std::log(a);
    }
    case Op::kSin:
      return std::sin(eval_value(*n.lhs, p));
    case Op::kCos:
      return std::cos(eval_value(*n.lhs, p));
    case Op::kTan:
      return std::tan(eval_value(*n.lhs, p));
    case Op::kSqrt: {
      double a = eval_value(*n.lhs, p);
      if (a <= 0.0) throw DomainError("sqrt of a nonpositive argument", node_str(n));
      return std::sqrt(a);
    }
    case Op::kTanh:
      return std::tanh(eval_value(*n.lhs, p));
  }
  return 0.0;
}

inline Jet2 eval_jet(const Node& n, const Vec& p) {
  int dim = static_cast<int>(p.size());
  switch (n.op) {
    case Op::kLiteral:
    case Op::kConstant:
      return Jet2::constant(dim, n.number);
    case Op::kCoord:
      return Jet2::coordinate(dim, n.coord, p[n.coord]);
    case Op::kNeg:
      return -eval_jet(*n.lhs, p);
    case Op::kAdd:
      return eval_jet(*n.lhs, p) + eval_jet(*n.rhs, p);
    case Op::kSub:
      return eval_jet(*n.lhs, p) - eval_jet(*n.rhs, p);
    case Op::kMul:
      return eval_jet(*n.lhs, p) * eval_jet(*n.rhs, p);
    case Op::kDiv: {
      Jet2 d = eval_jet(*n.rhs, p);
      if (d.val == 0.0) throw DomainError("division by zero", node_str(n));
      return eval_jet(*n.lhs, p) / d;
    }
    case Op::kPow: {
      Jet2 b = eval_jet(*n.lhs, p);
      double e = n.number;
      bool integral = (e == std::floor(e));
      if (!integral && b.val <= 0.0)
        throw DomainError("non-integer power of a nonpositive base", node_str(n));
      if (integral && b.val == 0.0 && e < 0.0)
        throw DomainError("zero base with negative exponent", node_str(n));
      return jet_pow(b, e);
    }
    case Op::kExp:
      return jet_exp(eval_jet(*n.lhs, p));
    case Op::kLog: {
      Jet2 a = eval_jet(*n.lhs, p);
      if (a.val <= 0.0) throw DomainError("log of a nonpositive argument", node_str(n));
      return jet_log(a);
    }
    case Op::kSin:
      return jet_sin(eval_jet(*n.lhs, p));
    case Op::kCos:
      return jet_cos(eval_jet(*n.lhs, p));
    case Op::kTan:
      return jet_tan(eval_jet(*n.lhs, p));
    case Op::kSqrt: {
      Jet2 a = eval_jet(*n.lhs, p);
      if (a.val <= 0.0) throw DomainError("sqrt of a nonpositive argument", node_str(n));
      return jet_sqrt(a);
    }
    case Op::kTanh:
      return jet_tanh(eval_jet(*n.lhs, p));
  }
  return Jet2(dim);
}

inline bool depends_on_coords(const Node& n) {
  if (n.op == Op::kCoord) return true;
  if (n.lhs && depends_on_coords(*n.lhs)) return true;
  if (n.rhs && depends_on_coords(*n.rhs)) return true;
  return false;
}

}  // namespace detail

// Immutable scalar expression over the coordinates of one chart. All
// evaluation is pure; an Expr may be shared freely across threads.
class Expr {
 public:
  Expr() = default;

  bool empty() const { return root_ == nullptr; }
  int dim() const { return dim_; }

  double value(const Vec& p) const { return detail::eval_value(*root_, p); }
  Jet2 jet(const Vec& p) const { return detail::eval_jet(*root_, p); }

  // Fully parenthesized form; reparsing it reproduces the same tree.
  std::string str() const { return root_ ? detail::node_str(*root_) : ""; }

  // Index of the coordinate when the expression is a bare coordinate.
  std::optional<int> as_coordinate() const {
    if (root_ && root_->op == detail::Op::kCoord) return root_->coord;
    return std::nullopt;
  }

  static Expr literal(int dim, double v) {
    auto n = std::make_shared<detail::Node>();
    n->op = detail::Op::kLiteral;
    n->number = v;
    return Expr(std::move(n), dim);
  }

  // Rebuilds the expression on the sub-chart whose coordinates are `keep`
  // (indices into this chart, in order); all other coordinates are frozen at
  // their value in `fixed`.
  Expr restrict_coords(const std::vector<int>& keep, const Vec& fixed,
                       const std::vector<std::string>& new_names) const;

 private:
  Expr(detail::NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}
  detail::NodePtr root_;
  int dim_ = 0;

  friend Expr parse(std::string_view, const std::vector<std::string>&,
                    const std::map<std::string, double>&);
  friend class Parser;
};

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& coords,
         const std::map<std::string, double>& constants)
      : text_(text), coords_(coords), constants_(constants) {}

  detail::NodePtr run() {
    auto n = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return n;
  }

 private:
  using Op = detail::Op;
  using NodePtr = detail::NodePtr;

  std::string_view text_;
  const std::vector<std::string>& coords_;
  const std::map<std::string, double>& constants_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  static std::shared_ptr<detail::Node> make(Op op, NodePtr lhs = nullptr,
                                            NodePtr rhs = nullptr) {
    auto n = std::make_shared<detail::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  NodePtr parse_expr() {
    NodePtr n = parse_term();
    for (;;) {
      if (consume('+'))
        n = make(Op::kAdd, n, parse_term());
      else if (consume('-'))
        n = make(Op::kSub, n, parse_term());
      else
        return n;
    }
  }

  NodePtr parse_term() {
    NodePtr n = parse_unary();
    for (;;) {
      if (consume('*'))
        n = make(Op::kMul, n, parse_unary());
      else if (consume('/'))
        n = make(Op::kDiv, n, parse_unary());
      else
        return n;
    }
  }

  NodePtr parse_unary() {
    if (consume('-')) return make(Op::kNeg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr n = parse_atom();
    while (consume('^')) {
      skip_ws();
      std::size_t expo_off = pos_;
      bool negate = consume('-');
      NodePtr e = parse_atom();
      if (detail::depends_on_coords(*e))
        throw ParseError("exponent must be a constant expression", expo_off);
      double expo = detail::eval_value(*e, {});
      if (negate) expo = -expo;
      auto p = make(Op::kPow, n);
      p->number = expo;
      n = p;
    }
    return n;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // the 'e' belongs to an identifier or is stray
      }
    }
    std::string s(text_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
      throw ParseError("malformed number '" + s + "'", start);
    auto n = make(Op::kLiteral);
    n->number = v;
    return n;
  }

  NodePtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      Op op;
      if (name == "exp")
        op = Op::kExp;
      else if (name == "log")
        op = Op::kLog;
      else if (name == "sin")
        op = Op::kSin;
      else if (name == "cos")
        op = Op::kCos;
      else if (name == "tan")
        op = Op::kTan;
      else if (name == "sqrt")
        op = Op::kSqrt;
      else if (name == "tanh")
        op = Op::kTanh;
      else
        throw ParseError("unknown function '" + name + "'", start);
      ++pos_;
      NodePtr arg = parse_expr();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return make(op, arg);
    }
    for (std::size_t i = 0; i < coords_.size(); ++i)
      if (coords_[i] == name) {
        auto n = make(Op::kCoord);
        n->coord = static_cast<int>(i);
        n->name = name;
        return n;
      }
    auto it = constants_.find(name);
    if (it != constants_.end()) {
      auto n = make(Op::kConstant);
      n->number = it->second;
      n->name = name;
      return n;
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

// Parses `text` against the declared coordinates and named constants.
// Constants may not shadow coordinates.
inline Expr parse(std::string_view text, const std::vector<std::string>& coords,
                  const std::map<std::string, double>& constants = {}) {
  if (text.empty()) throw ParseError("empty expression", 0);
  for (const auto& [name, value] : constants) {
    (void)value;
    for (const auto& c : coords)
      if (c == name)
        throw InputError("constant '" + name + "' shadows a coordinate");
  }
  Parser parser(text, coords, constants);
  return Expr(parser.run(), static_cast<int>(coords.size()));
}

namespace detail {

inline NodePtr restrict_node(const Node& n, const std::vector<int>& remap,
                             const Vec& fixed,
                             const std::vector<std::string>& new_names) {
  auto out = std::make_shared<Node>(n);
  if (n.op == Op::kCoord) {
    if (remap[n.coord] >= 0) {
      out->coord = remap[n.coord];
      out->name = new_names[out->coord];
    } else {
      out->op = Op::kLiteral;
      out->number = fixed[n.coord];
      out->coord = -1;
      out->name.clear();
    }
    return out;
  }
  if (n.lhs) out->lhs = restrict_node(*n.lhs, remap, fixed, new_names);
  if (n.rhs) out->rhs = restrict_node(*n.rhs, remap, fixed, new_names);
  return out;
}

}  // namespace detail

inline Expr Expr::restrict_coords(const std::vector<int>& keep, const Vec& fixed,
                                  const std::vector<std::string>& new_names) const {
  std::vector<int> remap(dim_, -1);
  for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = static_cast<int>(k);
  return Expr(detail::restrict_node(*root_, remap, fixed, new_names),
              static_cast<int>(keep.size()));
}

}  // namespace ccs
