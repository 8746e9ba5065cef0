#include "hypstab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hypstab {

CMatrix two_re(const CMatrix& x) { return x + x.adjoint(); }

CMatrix hermitian_part(const CMatrix& x) { return (x + x.adjoint()) * 0.5; }

CVector eigenvalues(const CMatrix& m) {
  if (m.rows() == 0) return {};
  Eigen::ComplexEigenSolver<CMatrix> solver(m, false);
  return solver.eigenvalues();
}

double spectral_abscissa(const CMatrix& m) {
  const CVector ev = eigenvalues(m);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::max(best, ev[i].real());
  return best;
}

Vector hermitian_eigenvalues(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double lambda_max_hermitian(const CMatrix& h) {
  const Vector ev = hermitian_eigenvalues(h);
  return ev[ev.size() - 1];
}

double lambda_min_hermitian(const CMatrix& h) { return hermitian_eigenvalues(h)[0]; }

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()[0];
}

double default_cluster_gap(const CMatrix& m) { return 1e-6 * (1.0 + spectral_norm(m)); }

void normalize_phase(CVector& v) {
  const double norm = v.norm();
  if (norm == 0.0) return;
  v /= norm;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-8) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      return;
    }
  }
}

CMatrix canonical_basis(const CMatrix& w) {
  const Eigen::Index n = w.rows();
  const Eigen::Index m = w.cols();
  if (m == 0) return CMatrix(n, 0);
  // Orthonormalize W first so the projector is W W^*.
  Eigen::HouseholderQR<CMatrix> qr(w);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n, m);
  const CMatrix projector = q * q.adjoint();
  CMatrix out(n, m);
  Eigen::Index found = 0;
  // Prefer unit vectors with the largest projection so the result is well conditioned.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (Eigen::Index k : order) {
    if (found == m) break;
    CVector v = projector.col(k);
    for (Eigen::Index j = 0; j < found; ++j) v -= out.col(j) * out.col(j).dot(v);
    for (Eigen::Index j = 0; j < found; ++j) v -= out.col(j) * out.col(j).dot(v);
    if (v.norm() < 1e-6) continue;
    normalize_phase(v);
    out.col(found++) = v;
  }
  if (found < m) {
    // Degenerate projections; fall back to the QR basis.
    for (Eigen::Index j = found; j < m; ++j) {
      CVector v = q.col(j);
      for (Eigen::Index i = 0; i < j; ++i) v -= out.col(i) * out.col(i).dot(v);
      normalize_phase(v);
      out.col(j) = v;
    }
  }
  return out;
}

CMatrix nullspace(const CMatrix& m, double tol) {
  const Eigen::Index n = m.cols();
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

bool ClusterResult::complete() const {
  return std::all_of(clusters.begin(), clusters.end(),
                     [](const EigenCluster& c) { return c.complete(); });
}

std::vector<int> ClusterResult::signature() const {
  std::vector<int> sig;
  sig.reserve(clusters.size());
  for (const auto& c : clusters) sig.push_back(c.multiplicity);
  std::sort(sig.begin(), sig.end());
  return sig;
}

CMatrix ClusterResult::basis_matrix() const {
  Eigen::Index rows = clusters.empty() ? 0 : clusters.front().basis.rows();
  Eigen::Index cols = 0;
  for (const auto& c : clusters) cols += c.basis.cols();
  CMatrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& c : clusters) {
    out.middleCols(at, c.basis.cols()) = c.basis;
    at += c.basis.cols();
  }
  return out;
}

ClusterResult eigen_clusters(const CMatrix& m, double gap) {
  ClusterResult result;
  result.gap = gap > 0.0 ? gap : default_cluster_gap(m);
  const CVector ev = eigenvalues(m);
  const auto n = static_cast<std::size_t>(ev.size());

  // Single-linkage grouping via union-find.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(ev[static_cast<Eigen::Index>(i)] - ev[static_cast<Eigen::Index>(j)]) <= result.gap) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> root_to_group(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_to_group[r] == n) {
      root_to_group[r] = groups.size();
      groups.emplace_back();
    }
    groups[root_to_group[r]].push_back(i);
  }

  result.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (find(i) != find(j)) {
        result.min_separation = std::min(
            result.min_separation,
            std::abs(ev[static_cast<Eigen::Index>(i)] - ev[static_cast<Eigen::Index>(j)]));
      }
    }
  }
  result.ambiguous = result.min_separation < 10.0 * result.gap;

  const double ns_tol = 10.0 * result.gap;
  const auto dim = m.rows();
  for (const auto& g : groups) {
    EigenCluster c;
    Complex sum{0.0, 0.0};
    for (std::size_t i : g) sum += ev[static_cast<Eigen::Index>(i)];
    c.center = sum / static_cast<double>(g.size());
    c.multiplicity = static_cast<int>(g.size());
    const CMatrix shifted = m - c.center * CMatrix::Identity(dim, dim);
    CMatrix ns = nullspace(shifted, ns_tol);
    if (ns.cols() > c.multiplicity) {
      // Keep the directions with the smallest residual.
      ns = ns.rightCols(c.multiplicity).eval();
    }
    c.geometric = static_cast<int>(ns.cols());
    c.basis = canonical_basis(ns);
    result.clusters.push_back(std::move(c));
  }
  std::sort(result.clusters.begin(), result.clusters.end(),
            [gap = result.gap](const EigenCluster& a, const EigenCluster& b) {
              const auto ia = std::llround(a.center.imag() / gap);
              const auto ib = std::llround(b.center.imag() / gap);
              if (ia != ib) return ia > ib;
              return a.center.real() > b.center.real();
            });
  return result;
}

}  // namespace hypstab
