#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypstab/expr.hpp"
#include "hypstab/linalg.hpp"

namespace hypstab {

/// Matrix of expressions in (x, t, u, eps), e.g. a perturbation coefficient A1 or B1.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  CoefficientMatrix(int rows, int cols, std::vector<Expr> entries, VariableSet vars);

  /// rows x cols matrix of literal zeros.
  [[nodiscard]] static CoefficientMatrix zero(int rows, int cols, const VariableSet& vars);
  [[nodiscard]] static CoefficientMatrix constant(const Matrix& m, const VariableSet& vars);

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] const Expr& at(int i, int j) const { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }
  [[nodiscard]] const VariableSet& variables() const { return vars_; }

  /// True when every entry is the literal 0.
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool references(VarKind kind) const;

  /// Row-major expression text; re-parses to the same trees.
  [[nodiscard]] std::vector<std::vector<std::string>> to_strings() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Expr> entries_;
  VariableSet vars_{};
};

/// Parses a rectangular array of expression strings.
/// Throws ParseError (position and token) or DimensionError (ragged rows).
[[nodiscard]] CoefficientMatrix parse_matrix_expr(const std::vector<std::vector<std::string>>& text,
                                                  const VariableSet& vars);

/// Entrywise evaluation. Throws DimensionError when x or u have the wrong length,
/// EvalError on division by zero or non-finite entries.
[[nodiscard]] Matrix eval_coefficient(const CoefficientMatrix& cm, const EvalPoint& at);

/// Owning evaluation point.
struct SamplePoint {
  std::vector<double> x;
  double t = 0.0;
  std::vector<double> u;
  double eps = 0.0;

  [[nodiscard]] EvalPoint view() const { return {x, t, u, eps}; }
};

/// Box over which Assumption-1.1 style sampling happens: |u|_inf <= u_max, t in [0, t_max].
struct SampleBox {
  double u_max = 1.0;
  double t_max = 1.0;
  int count = 32;
  std::uint64_t seed = 1;
};

/// Deterministic pseudo-random samples in [0, 2pi)^s x [0, t_max] x [-u_max, u_max]^n x [0, eps_max].
[[nodiscard]] std::vector<SamplePoint> sample_box(const SampleBox& box, int s, int n, double eps_max);

struct SymmetryCheck {
  bool symmetric = false;
  double max_asymmetry = 0.0;  // max over samples of |M - M^T|_inf
};

/// Symmetry of the real coefficient at every sample (Hermitian for real matrices).
[[nodiscard]] SymmetryCheck check_hermitian_sampled(const CoefficientMatrix& cm,
                                                    const std::vector<SamplePoint>& samples, double tol);

struct BoundednessReport {
  bool finite = true;
  double max_entry = 0.0;       // max |entry| over samples
  double max_derivative = 0.0;  // max |central difference| over samples and variables
};

/// Sampled zeroth and first derivative bounds (finite differences with step h).
[[nodiscard]] BoundednessReport check_bounded_sampled(const CoefficientMatrix& cm,
                                                      const std::vector<SamplePoint>& samples, double h = 1e-5);

}  // namespace hypstab
