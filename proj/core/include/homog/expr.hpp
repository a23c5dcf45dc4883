#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "homog/errors.hpp"

namespace homog {

/// Variables the expression language knows about. X1/X2 are slow (macro)
/// coordinates, Y1/Y2 fast (cell) coordinates, ETA the scale parameter.
enum class Var : int { X1 = 0, X2, Y1, Y2, Eta };

inline constexpr int kVarCount = 5;

std::string_view var_name(Var v);

/// Values bound to variables for one evaluation. Unset variables stay
/// unbound; evaluating an expression that references them throws EvalError.
class Bindings {
public:
  Bindings& set(Var v, double value) {
    values_[static_cast<int>(v)] = value;
    bound_[static_cast<int>(v)] = true;
    return *this;
  }

  std::optional<double> get(Var v) const {
    const int i = static_cast<int>(v);
    if (!bound_[i]) return std::nullopt;
    return values_[i];
  }

private:
  std::array<double, kVarCount> values_{};
  std::array<bool, kVarCount> bound_{};
};

namespace detail {
struct Node;
}

/// Immutable arithmetic expression. Copies share the underlying tree;
/// evaluation is pure, so an Expr may be shared across threads freely.
///
/// Grammar: numeric literals, the variables above, the constant pi,
/// binary + - * / ^ (usual precedence, ^ right-associative and binding
/// tighter than unary minus), unary minus, and the functions
/// sin, cos, exp, sqrt, abs.
class Expr {
public:
  Expr() = default;

  bool empty() const { return root_ == nullptr; }

  /// Evaluate with IEEE double arithmetic. Throws EvalError on unbound
  /// variables and on domain errors (division by zero, sqrt of a negative
  /// value, non-finite intermediate); the message names the offending
  /// sub-expression and its source offset.
  double eval(const Bindings& bindings) const;

  /// Canonical text form; parsing it back yields a structurally equal tree.
  std::string str() const;

  bool references(Var v) const;

  /// Structural equality (same tree shape, operators, and literal values).
  friend bool operator==(const Expr& a, const Expr& b);

  friend Expr parse(std::string_view source);

private:
  explicit Expr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const detail::Node> root_;
};

/// Parse an expression. Throws ParseError with a byte offset and an
/// expected-token description on syntax errors or unknown identifiers.
Expr parse(std::string_view source);

}  // namespace homog
