#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypstab {

enum class VarKind { kX, kT, kU, kEps };

struct VarRef {
  VarKind kind = VarKind::kX;
  int index = 0;  // zero based; meaningful for kX and kU
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

/// Identifiers an expression may reference: x1..xs, t, u1..un, eps.
struct VariableSet {
  int s = 1;
  int n = 1;
  bool allow_t = true;
  bool allow_u = true;
  bool allow_eps = true;

  /// Only the space variables; used for initial data.
  [[nodiscard]] static VariableSet space_only(int s) { return {s, 0, false, false, false}; }
};

/// Values bound to the variables during evaluation. Spans are not owned.
struct EvalPoint {
  std::span<const double> x;
  double t = 0.0;
  std::span<const double> u;
  double eps = 0.0;
};

/// Immutable expression tree with a compiled postfix program for evaluation.
/// Copies share the tree; safe to evaluate concurrently.
class Expr {
 public:
  enum class Op { kLiteral, kVariable, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos, kExp, kTanh };

  static Expr literal(double value);
  static Expr variable(VarRef var);
  /// Negation of a literal folds into a literal.
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  [[nodiscard]] Op op() const;
  [[nodiscard]] double value() const;  // kLiteral only
  [[nodiscard]] VarRef var() const;    // kVariable only
  [[nodiscard]] const Expr& lhs() const;
  [[nodiscard]] const Expr& rhs() const;  // binary only

  /// Throws EvalError on division by zero or a non-finite result.
  [[nodiscard]] double eval(const EvalPoint& at) const;

  /// Fully parenthesized text that parses back to the same tree.
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] bool same_tree(const Expr& other) const;
  [[nodiscard]] bool references(VarKind kind) const;
  /// Literal value when the tree is a single literal.
  [[nodiscard]] std::optional<double> as_literal() const;

 private:
  struct Node;
  struct Program;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
  std::shared_ptr<const Program> program_;
};

[[nodiscard]] const char* op_name(Expr::Op op);

/// Recursive-descent parser for
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | identifier | func '(' expr ')' | '(' expr ')'
///   func   := sin | cos | exp | tanh
/// Throws ParseError with the byte position of the offending token.
[[nodiscard]] Expr parse_expr(std::string_view text, const VariableSet& vars);

[[nodiscard]] std::string variable_name(VarRef var);

}  // namespace hypstab
