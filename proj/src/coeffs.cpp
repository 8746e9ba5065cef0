#include "hypstab/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hypstab/error.hpp"

namespace hypstab {

CoefficientMatrix::CoefficientMatrix(int rows, int cols, std::vector<Expr> entries, VariableSet vars)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), vars_(vars) {
  if (rows < 0 || cols < 0 || entries_.size() != static_cast<std::size_t>(rows * cols)) {
    throw DimensionError("coefficient matrix entry count does not match its shape");
  }
}

CoefficientMatrix CoefficientMatrix::zero(int rows, int cols, const VariableSet& vars) {
  return {rows, cols, std::vector<Expr>(static_cast<std::size_t>(rows * cols), Expr::literal(0.0)), vars};
}

CoefficientMatrix CoefficientMatrix::constant(const Matrix& m, const VariableSet& vars) {
  std::vector<Expr> entries;
  const auto rows = static_cast<int>(m.rows());
  const auto cols = static_cast<int>(m.cols());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = m(i, j);
      entries.push_back(v < 0 ? Expr::unary(Expr::Op::kNeg, Expr::literal(-v)) : Expr::literal(v));
    }
  }
  return {rows, cols, std::move(entries), vars};
}

bool CoefficientMatrix::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Expr& e) {
    auto v = e.as_literal();
    return v && *v == 0.0;
  });
}

bool CoefficientMatrix::references(VarKind kind) const {
  return std::any_of(entries_.begin(), entries_.end(), [kind](const Expr& e) { return e.references(kind); });
}

std::vector<std::vector<std::string>> CoefficientMatrix::to_strings() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(rows_));
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(i)].push_back(at(i, j).to_string());
  }
  return out;
}

CoefficientMatrix parse_matrix_expr(const std::vector<std::vector<std::string>>& text, const VariableSet& vars) {
  const auto rows = static_cast<int>(text.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(text.front().size());
  std::vector<Expr> entries;
  entries.reserve(static_cast<std::size_t>(rows * cols));
  for (int i = 0; i < rows; ++i) {
    const auto& row = text[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != cols) {
      throw DimensionError("non-rectangular matrix: row " + std::to_string(i) + " has " +
                           std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
    for (int j = 0; j < cols; ++j) {
      try {
        entries.push_back(parse_expr(row[static_cast<std::size_t>(j)], vars));
      } catch (const ParseError& e) {
        throw ParseError("entry (" + std::to_string(i) + "," + std::to_string(j) + "): " +
                             std::string(e.what()),
                         e.position(), e.token());
      }
    }
  }
  return {rows, cols, std::move(entries), vars};
}

Matrix eval_coefficient(const CoefficientMatrix& cm, const EvalPoint& at) {
  const VariableSet& vars = cm.variables();
  if (static_cast<int>(at.x.size()) != vars.s) {
    throw DimensionError("expected " + std::to_string(vars.s) + " space coordinates, got " +
                         std::to_string(at.x.size()));
  }
  if (vars.allow_u && static_cast<int>(at.u.size()) != vars.n) {
    throw DimensionError("expected state of size " + std::to_string(vars.n) + ", got " +
                         std::to_string(at.u.size()));
  }
  Matrix out(cm.rows(), cm.cols());
  for (int i = 0; i < cm.rows(); ++i) {
    for (int j = 0; j < cm.cols(); ++j) out(i, j) = cm.at(i, j).eval(at);
  }
  return out;
}

std::vector<SamplePoint> sample_box(const SampleBox& box, int s, int n, double eps_max) {
  std::mt19937_64 rng(box.seed);
  // 53-bit uniform in [0,1), independent of the standard library's distributions.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<SamplePoint> out;
  out.reserve(static_cast<std::size_t>(box.count));
  for (int k = 0; k < box.count; ++k) {
    SamplePoint p;
    for (int d = 0; d < s; ++d) p.x.push_back(2.0 * std::numbers::pi * uniform());
    p.t = box.t_max * uniform();
    for (int d = 0; d < n; ++d) p.u.push_back(box.u_max * (2.0 * uniform() - 1.0));
    p.eps = eps_max * uniform();
    out.push_back(std::move(p));
  }
  return out;
}

SymmetryCheck check_hermitian_sampled(const CoefficientMatrix& cm, const std::vector<SamplePoint>& samples,
                                      double tol) {
  if (samples.empty()) throw PreconditionError("check_hermitian_sampled needs at least one sample");
  if (cm.rows() != cm.cols()) return {false, std::numeric_limits<double>::infinity()};
  SymmetryCheck out;
  for (const auto& p : samples) {
    const Matrix m = eval_coefficient(cm, p.view());
    const double asym = (m - m.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
    out.max_asymmetry = std::max(out.max_asymmetry, asym);
  }
  out.symmetric = out.max_asymmetry <= tol;
  return out;
}

BoundednessReport check_bounded_sampled(const CoefficientMatrix& cm, const std::vector<SamplePoint>& samples,
                                        double h) {
  BoundednessReport out;
  auto consider = [&](double v, double& slot) {
    if (!std::isfinite(v)) out.finite = false;
    slot = std::max(slot, std::abs(v));
  };
  try {
    for (const auto& p : samples) {
      const Matrix m = eval_coefficient(cm, p.view());
      for (Eigen::Index i = 0; i < m.size(); ++i) consider(m.data()[i], out.max_entry);
      // Perturb every variable in turn.
      auto probe = [&](auto&& mutate) {
        SamplePoint plus = p;
        SamplePoint minus = p;
        mutate(plus, h);
        mutate(minus, -h);
        const Matrix d = (eval_coefficient(cm, plus.view()) - eval_coefficient(cm, minus.view())) / (2.0 * h);
        for (Eigen::Index i = 0; i < d.size(); ++i) consider(d.data()[i], out.max_derivative);
      };
      for (std::size_t k = 0; k < p.x.size(); ++k) probe([k](SamplePoint& q, double d) { q.x[k] += d; });
      for (std::size_t k = 0; k < p.u.size(); ++k) probe([k](SamplePoint& q, double d) { q.u[k] += d; });
      probe([](SamplePoint& q, double d) { q.t += d; });
      probe([](SamplePoint& q, double d) { q.eps += d; });
    }
  } catch (const EvalError&) {
    out.finite = false;
  }
  return out;
}

}  // namespace hypstab
