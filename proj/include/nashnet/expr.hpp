#ifndef NASHNET_EXPR_HPP
#define NASHNET_EXPR_HPP

// Objective functions f(x, y) as immutable expression trees with formal
// (sub)differentiation. Absolute-value nodes are the only kinks; the value
// used for sign(0) comes from a SubgradientSelection indexed by the
// pre-order position of each abs node.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nashnet/error.hpp"
#include "nashnet/vec.hpp"

namespace nashnet {

enum class Side { x, y };

class Expr;

namespace expr_node {
struct Constant { double value; };
struct Variable { Side side; std::size_t index; };
struct Negate { std::shared_ptr<const Expr> child; };
struct Sum { std::vector<Expr> children; };
struct Scale { double factor; std::shared_ptr<const Expr> child; };
struct Product { std::vector<Expr> children; };
struct Power { std::shared_ptr<const Expr> child; unsigned exponent; };
struct Abs { std::shared_ptr<const Expr> child; };
struct Affine { Vec cx; Vec cy; double offset; };
} // namespace expr_node

/// Kink choices: entry r is the value taken for sign(0) at the r-th abs node
/// in pre-order. Missing entries default to 0.
class SubgradientSelection {
public:
  SubgradientSelection() = default;
  explicit SubgradientSelection(std::vector<double> at_zero) : at_zero_(std::move(at_zero)) {
    for (double v : at_zero_)
      if (!(v >= -1.0 && v <= 1.0)) throw DomainError("SubgradientSelection: constants must lie in [-1,1]");
  }

  double at(std::size_t abs_ordinal) const {
    return abs_ordinal < at_zero_.size() ? at_zero_[abs_ordinal] : 0.0;
  }
  const std::vector<double>& values() const noexcept { return at_zero_; }

  friend bool operator==(const SubgradientSelection&, const SubgradientSelection&) = default;

private:
  std::vector<double> at_zero_;
};

class Expr {
public:
  using Node = std::variant<expr_node::Constant, expr_node::Variable, expr_node::Negate, expr_node::Sum,
                            expr_node::Scale, expr_node::Product, expr_node::Power, expr_node::Abs,
                            expr_node::Affine>;

  Expr() : node_(std::make_shared<const Node>(expr_node::Constant{0.0})) {}
  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

  const Node& node() const noexcept { return *node_; }

  /// Highest variable index + 1 used on each side.
  std::pair<std::size_t, std::size_t> arity() const {
    std::pair<std::size_t, std::size_t> out{0, 0};
    visit_arity(*this, out);
    return out;
  }

  std::size_t abs_count() const {
    std::size_t c = 0;
    count_abs(*this, c);
    return c;
  }

private:
  static void visit_arity(const Expr& e, std::pair<std::size_t, std::size_t>& out);
  static void count_abs(const Expr& e, std::size_t& c);

  std::shared_ptr<const Node> node_;
};

// Builders -----------------------------------------------------------------

inline Expr constant(double c) { return Expr{expr_node::Constant{c}}; }
inline Expr var_x(std::size_t d = 0) { return Expr{expr_node::Variable{Side::x, d}}; }
inline Expr var_y(std::size_t d = 0) { return Expr{expr_node::Variable{Side::y, d}}; }
inline Expr negate(Expr e) { return Expr{expr_node::Negate{std::make_shared<const Expr>(std::move(e))}}; }
inline Expr sum(std::vector<Expr> c) { return Expr{expr_node::Sum{std::move(c)}}; }
inline Expr product(std::vector<Expr> c) { return Expr{expr_node::Product{std::move(c)}}; }
inline Expr scale(double f, Expr e) {
  return Expr{expr_node::Scale{f, std::make_shared<const Expr>(std::move(e))}};
}
inline Expr power(Expr e, unsigned n) {
  if (n < 1) throw ContractError("power: exponent must be >= 1");
  return Expr{expr_node::Power{std::make_shared<const Expr>(std::move(e)), n}};
}
inline Expr abs(Expr e) { return Expr{expr_node::Abs{std::make_shared<const Expr>(std::move(e))}}; }
inline Expr affine(Vec cx, Vec cy, double offset) {
  return Expr{expr_node::Affine{std::move(cx), std::move(cy), offset}};
}

inline Expr operator+(Expr a, Expr b) { return sum({std::move(a), std::move(b)}); }
inline Expr operator-(Expr a, Expr b) { return sum({std::move(a), negate(std::move(b))}); }
inline Expr operator-(Expr a) { return negate(std::move(a)); }
inline Expr operator*(Expr a, Expr b) { return product({std::move(a), std::move(b)}); }
inline Expr operator*(double c, Expr a) { return scale(c, std::move(a)); }
inline Expr operator+(Expr a, double c) { return std::move(a) + constant(c); }
inline Expr operator-(Expr a, double c) { return std::move(a) - constant(c); }
inline Expr operator-(double c, Expr a) { return constant(c) - std::move(a); }

inline void Expr::visit_arity(const Expr& e, std::pair<std::size_t, std::size_t>& out) {
  using namespace expr_node;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Variable>) {
          auto& slot = n.side == Side::x ? out.first : out.second;
          slot = std::max(slot, n.index + 1);
        } else if constexpr (std::is_same_v<T, Sum> || std::is_same_v<T, Product>) {
          for (const auto& c : n.children) visit_arity(c, out);
        } else if constexpr (std::is_same_v<T, Affine>) {
          out.first = std::max(out.first, n.cx.size());
          out.second = std::max(out.second, n.cy.size());
        } else if constexpr (!std::is_same_v<T, Constant>) {
          visit_arity(*n.child, out);
        }
      },
      e.node());
}

inline void Expr::count_abs(const Expr& e, std::size_t& c) {
  using namespace expr_node;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Abs>) {
          ++c;
          count_abs(*n.child, c);
        } else if constexpr (std::is_same_v<T, Sum> || std::is_same_v<T, Product>) {
          for (const auto& ch : n.children) count_abs(ch, c);
        } else if constexpr (std::is_same_v<T, Negate> || std::is_same_v<T, Scale> ||
                             std::is_same_v<T, Power>) {
          count_abs(*n.child, c);
        }
      },
      e.node());
}

// Evaluation ---------------------------------------------------------------

namespace detail {

struct ValueGrad {
  double value;
  Vec grad;
};

inline double ipow(double v, unsigned n) {
  double r = 1.0;
  for (unsigned i = 0; i < n; ++i) r *= v;
  return r;
}

inline double eval(const Expr& e, std::span<const double> x, std::span<const double> y) {
  using namespace expr_node;
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          const auto v = n.side == Side::x ? x : y;
          if (n.index >= v.size()) throw ContractError("evaluate: variable index out of range");
          return v[n.index];
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(*n.child, x, y);
        } else if constexpr (std::is_same_v<T, Sum>) {
          double s = 0.0;
          for (const auto& c : n.children) s += eval(c, x, y);
          return s;
        } else if constexpr (std::is_same_v<T, Scale>) {
          return n.factor * eval(*n.child, x, y);
        } else if constexpr (std::is_same_v<T, Product>) {
          double p = 1.0;
          for (const auto& c : n.children) p *= eval(c, x, y);
          return p;
        } else if constexpr (std::is_same_v<T, Power>) {
          return ipow(eval(*n.child, x, y), n.exponent);
        } else if constexpr (std::is_same_v<T, Abs>) {
          return std::abs(eval(*n.child, x, y));
        } else {
          if (n.cx.size() > x.size() || n.cy.size() > y.size())
            throw ContractError("evaluate: affine coefficients exceed dimensions");
          double s = n.offset;
          for (std::size_t i = 0; i < n.cx.size(); ++i) s += n.cx[i] * x[i];
          for (std::size_t i = 0; i < n.cy.size(); ++i) s += n.cy[i] * y[i];
          return s;
        }
      },
      e.node());
}

// Value and formal derivative with respect to the variables on `side`.
inline ValueGrad eval_grad(const Expr& e, std::span<const double> x, std::span<const double> y, Side side,
                           const SubgradientSelection& sel, std::size_t& abs_ordinal) {
  using namespace expr_node;
  const std::size_t dim = side == Side::x ? x.size() : y.size();
  return std::visit(
      [&](const auto& n) -> ValueGrad {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return {n.value, Vec(dim, 0.0)};
        } else if constexpr (std::is_same_v<T, Variable>) {
          const auto v = n.side == Side::x ? x : y;
          if (n.index >= v.size()) throw ContractError("evaluate: variable index out of range");
          Vec g(dim, 0.0);
          if (n.side == side) g[n.index] = 1.0;
          return {v[n.index], std::move(g)};
        } else if constexpr (std::is_same_v<T, Negate>) {
          auto r = eval_grad(*n.child, x, y, side, sel, abs_ordinal);
          r.value = -r.value;
          for (double& g : r.grad) g = -g;
          return r;
        } else if constexpr (std::is_same_v<T, Sum>) {
          ValueGrad out{0.0, Vec(dim, 0.0)};
          for (const auto& c : n.children) {
            auto r = eval_grad(c, x, y, side, sel, abs_ordinal);
            out.value += r.value;
            for (std::size_t i = 0; i < dim; ++i) out.grad[i] += r.grad[i];
          }
          return out;
        } else if constexpr (std::is_same_v<T, Scale>) {
          auto r = eval_grad(*n.child, x, y, side, sel, abs_ordinal);
          r.value *= n.factor;
          for (double& g : r.grad) g *= n.factor;
          return r;
        } else if constexpr (std::is_same_v<T, Product>) {
          std::vector<ValueGrad> parts;
          parts.reserve(n.children.size());
          for (const auto& c : n.children) parts.push_back(eval_grad(c, x, y, side, sel, abs_ordinal));
          ValueGrad out{1.0, Vec(dim, 0.0)};
          for (const auto& p : parts) out.value *= p.value;
          for (std::size_t i = 0; i < parts.size(); ++i) {
            double others = 1.0;
            for (std::size_t j = 0; j < parts.size(); ++j)
              if (j != i) others *= parts[j].value;
            for (std::size_t d = 0; d < dim; ++d) out.grad[d] += others * parts[i].grad[d];
          }
          return out;
        } else if constexpr (std::is_same_v<T, Power>) {
          auto r = eval_grad(*n.child, x, y, side, sel, abs_ordinal);
          const double outer = static_cast<double>(n.exponent) * ipow(r.value, n.exponent - 1);
          for (double& g : r.grad) g *= outer;
          r.value = ipow(r.value, n.exponent);
          return r;
        } else if constexpr (std::is_same_v<T, Abs>) {
          const std::size_t mine = abs_ordinal++;
          auto r = eval_grad(*n.child, x, y, side, sel, abs_ordinal);
          const double s = r.value > 0.0 ? 1.0 : (r.value < 0.0 ? -1.0 : sel.at(mine));
          for (double& g : r.grad) g *= s;
          r.value = std::abs(r.value);
          return r;
        } else {
          Vec g(dim, 0.0);
          const auto& c = side == Side::x ? n.cx : n.cy;
          for (std::size_t i = 0; i < c.size() && i < dim; ++i) g[i] = c[i];
          return {eval(e, x, y), std::move(g)};
        }
      },
      e.node());
}

} // namespace detail

inline double evaluate(const Expr& e, std::span<const double> x, std::span<const double> y) {
  return detail::eval(e, x, y);
}

/// Formal x-derivative; an element of the x-subdifferential when e is convex in x.
inline Vec subgradient_x(const Expr& e, std::span<const double> x, std::span<const double> y,
                         const SubgradientSelection& sel = {}) {
  std::size_t ord = 0;
  return detail::eval_grad(e, x, y, Side::x, sel, ord).grad;
}

/// Formal y-derivative; an element of the (concave) y-superdifferential when e is concave in y.
inline Vec subgradient_y(const Expr& e, std::span<const double> x, std::span<const double> y,
                         const SubgradientSelection& sel = {}) {
  std::size_t ord = 0;
  return detail::eval_grad(e, x, y, Side::y, sel, ord).grad;
}

// Prefix notation ----------------------------------------------------------
//
//   expr   := number | xN | yN | '(' op expr* ')'
//   op     := add | sub | neg | mul | scale | pow | abs | affine
//   (scale c e)          c * e
//   (pow e n)            e^n, integer n >= 1
//   (affine [cx..] [cy..] b)
//
// `sub` with k arguments is a - b - c ...; it is stored as a sum of negations.

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class PrefixParser {
public:
  explicit PrefixParser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression: " + msg + " at offset " + std::to_string(pos_), 0, pos_ + 1);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string_view token() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
           src_[pos_] != ')' && src_[pos_] != '[' && src_[pos_] != ']')
      ++pos_;
    if (start == pos_) fail("expected a token");
    return src_.substr(start, pos_ - start);
  }

  static bool parse_double(std::string_view t, double& out) {
    std::string s(t);
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && !s.empty();
  }

  double number() {
    const auto t = token();
    double v = 0.0;
    if (!parse_double(t, v)) fail("expected a number, got '" + std::string(t) + "'");
    return v;
  }

  Vec bracket_list() {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '[') fail("expected '['");
    ++pos_;
    Vec out;
    for (;;) {
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == ']') {
        ++pos_;
        return out;
      }
      out.push_back(number());
    }
  }

  void expect_close() {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')'");
    ++pos_;
  }

  std::vector<Expr> args_until_close() {
    std::vector<Expr> out;
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated list");
      if (src_[pos_] == ')') {
        ++pos_;
        return out;
      }
      out.push_back(parse_expr());
    }
  }

  Expr parse_expr() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    if (src_[pos_] == '(') {
      ++pos_;
      const std::string op(token());
      if (op == "add" || op == "sub" || op == "mul") {
        auto args = args_until_close();
        if (args.empty()) fail(op + " needs at least one argument");
        if (op == "add") return sum(std::move(args));
        if (op == "mul") return product(std::move(args));
        if (args.size() == 1) return negate(std::move(args[0]));
        std::vector<Expr> terms{std::move(args[0])};
        for (std::size_t i = 1; i < args.size(); ++i) terms.push_back(negate(std::move(args[i])));
        return sum(std::move(terms));
      }
      if (op == "neg" || op == "abs") {
        Expr a = parse_expr();
        expect_close();
        return op == "neg" ? negate(std::move(a)) : abs(std::move(a));
      }
      if (op == "scale") {
        const double c = number();
        Expr a = parse_expr();
        expect_close();
        return scale(c, std::move(a));
      }
      if (op == "pow") {
        Expr a = parse_expr();
        const double n = number();
        if (n < 1 || n != std::floor(n) || n > 1e6) fail("pow exponent must be a positive integer");
        expect_close();
        return power(std::move(a), static_cast<unsigned>(n));
      }
      if (op == "affine") {
        Vec cx = bracket_list();
        Vec cy = bracket_list();
        const double b = number();
        expect_close();
        return affine(std::move(cx), std::move(cy), b);
      }
      fail("unknown operator '" + op + "'");
    }
    if (src_[pos_] == ')') fail("unexpected ')'");
    const auto t = token();
    if ((t[0] == 'x' || t[0] == 'y') && t.size() > 1) {
      std::size_t idx = 0;
      for (std::size_t i = 1; i < t.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) fail("bad variable '" + std::string(t) + "'");
        idx = idx * 10 + static_cast<std::size_t>(t[i] - '0');
      }
      return t[0] == 'x' ? var_x(idx) : var_y(idx);
    }
    double v = 0.0;
    if (!parse_double(t, v)) fail("unknown token '" + std::string(t) + "'");
    return constant(v);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline void print(const Expr& e, std::ostringstream& os) {
  using namespace expr_node;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          os << format_number(n.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          os << (n.side == Side::x ? 'x' : 'y') << n.index;
        } else if constexpr (std::is_same_v<T, Negate>) {
          os << "(neg ";
          print(*n.child, os);
          os << ')';
        } else if constexpr (std::is_same_v<T, Sum>) {
          bool as_sub = n.children.size() >= 2;
          for (std::size_t i = 1; i < n.children.size() && as_sub; ++i)
            as_sub = std::holds_alternative<Negate>(n.children[i].node());
          os << (as_sub ? "(sub" : "(add");
          for (std::size_t i = 0; i < n.children.size(); ++i) {
            os << ' ';
            if (as_sub && i > 0)
              print(*std::get<Negate>(n.children[i].node()).child, os);
            else
              print(n.children[i], os);
          }
          os << ')';
        } else if constexpr (std::is_same_v<T, Scale>) {
          os << "(scale " << format_number(n.factor) << ' ';
          print(*n.child, os);
          os << ')';
        } else if constexpr (std::is_same_v<T, Product>) {
          os << "(mul";
          for (const auto& c : n.children) {
            os << ' ';
            print(c, os);
          }
          os << ')';
        } else if constexpr (std::is_same_v<T, Power>) {
          os << "(pow ";
          print(*n.child, os);
          os << ' ' << n.exponent << ')';
        } else if constexpr (std::is_same_v<T, Abs>) {
          os << "(abs ";
          print(*n.child, os);
          os << ')';
        } else {
          os << "(affine [";
          for (std::size_t i = 0; i < n.cx.size(); ++i) os << (i ? " " : "") << format_number(n.cx[i]);
          os << "] [";
          for (std::size_t i = 0; i < n.cy.size(); ++i) os << (i ? " " : "") << format_number(n.cy[i]);
          os << "] " << format_number(n.offset) << ')';
        }
      },
      e.node());
}

} // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::PrefixParser(text).parse(); }

inline std::string to_prefix(const Expr& e) {
  std::ostringstream os;
  detail::print(e, os);
  return os.str();
}

/// Structural equality through the canonical printed form.
inline bool same_tree(const Expr& a, const Expr& b) { return to_prefix(a) == to_prefix(b); }

} // namespace nashnet

#endif // NASHNET_EXPR_HPP
