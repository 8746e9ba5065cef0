#include "hypstab/lyapunov.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hypstab/error.hpp"

namespace hypstab {

namespace {

CMatrix solve_kronecker(const CMatrix& a, const CMatrix& c) {
  const Eigen::Index n = a.rows();
  const Eigen::Index nn = n * n;
  // Column-major vec: vec(H A) = (A^T kron I) vec(H), vec(A^* H) = (I kron A^*) vec(H).
  CMatrix k = CMatrix::Zero(nn, nn);
  const CMatrix a_adj = a.adjoint();
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      for (Eigen::Index i = 0; i < n; ++i) {
        k(p * n + i, q * n + i) += a(q, p);
        k(p * n + i, p * n + q) += a_adj(i, q);
      }
    }
  }
  Eigen::FullPivLU<CMatrix> lu(k);
  if (!lu.isInvertible()) throw ConstructionError("Lyapunov operator is singular");
  const CVector rhs = Eigen::Map<const CVector>(c.data(), nn);
  const CVector x = lu.solve(rhs);
  return Eigen::Map<const CMatrix>(x.data(), n, n);
}

CMatrix solve_schur(const CMatrix& a, const CMatrix& c) {
  const Eigen::Index n = a.rows();
  Eigen::ComplexSchur<CMatrix> schur(a);
  const CMatrix& u = schur.matrixU();
  const CMatrix& r = schur.matrixT();
  const CMatrix ct = u.adjoint() * c * u;
  CMatrix h = CMatrix::Zero(n, n);
  // H~ R + R^* H~ = C~ with R upper triangular, solved column by column.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex acc = ct(i, j);
      for (Eigen::Index k = 0; k < j; ++k) acc -= h(i, k) * r(k, j);
      for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(r(k, i)) * h(k, j);
      const Complex pivot = r(j, j) + std::conj(r(i, i));
      if (std::abs(pivot) == 0.0) throw ConstructionError("Lyapunov operator is singular");
      h(i, j) = acc / pivot;
    }
  }
  return u * h * u.adjoint();
}

}  // namespace

CMatrix solve_lyapunov(const CMatrix& a, const CMatrix& c, LyapunovMethod method) {
  if (a.rows() != a.cols() || c.rows() != a.rows() || c.cols() != a.cols()) {
    throw DimensionError("solve_lyapunov: shape mismatch");
  }
  // Unique solvability: lambda_i + conj(lambda_j) != 0 for all pairs.
  const CVector ev = eigenvalues(a);
  const double scale = 1.0 + spectral_norm(a);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    for (Eigen::Index j = 0; j < ev.size(); ++j) {
      if (std::abs(ev[i] + std::conj(ev[j])) <= 1e-13 * scale) {
        throw ConstructionError("A and -A^* share an eigenvalue; Lyapunov equation is singular");
      }
    }
  }
  if (method == LyapunovMethod::kAuto) {
    method = a.rows() <= 16 ? LyapunovMethod::kKronecker : LyapunovMethod::kSchur;
  }
  return method == LyapunovMethod::kKronecker ? solve_kronecker(a, c) : solve_schur(a, c);
}

LyapunovCertificate lyapunov_symmetrizer(const CMatrix& m, double delta, double tol, LyapunovMethod method) {
  const Eigen::Index n = m.rows();
  const double abscissa = spectral_abscissa(m);
  if (!(abscissa < -0.5 * delta)) {
    std::ostringstream msg;
    msg << "spectral abscissa " << abscissa << " is not below -delta/2 = " << -0.5 * delta;
    throw PreconditionError(msg.str());
  }
  const CMatrix shifted = m + (0.5 * delta) * CMatrix::Identity(n, n);
  LyapunovCertificate cert;
  cert.delta = delta;
  cert.H = hermitian_part(solve_lyapunov(shifted, -CMatrix::Identity(n, n), method));
  const Vector ev = hermitian_eigenvalues(cert.H);
  cert.lambda_min = ev[0];
  cert.lambda_max = ev[n - 1];
  if (!(cert.lambda_min > 0.0)) throw ConstructionError("Lyapunov solution is not positive definite");
  cert.residual = lambda_max_hermitian(cert.H * m + m.adjoint() * cert.H + delta * cert.H);
  if (cert.residual > tol * std::max(1.0, cert.lambda_max)) {
    std::ostringstream msg;
    msg << "Lyapunov certificate residual " << cert.residual << " exceeds tolerance";
    throw ConstructionError(msg.str());
  }
  return cert;
}

}  // namespace hypstab
