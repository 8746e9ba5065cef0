#pragma once

#include "hypstab/linalg.hpp"

namespace hypstab {

enum class LyapunovMethod {
  kAuto,       // Kronecker for n <= 16, Schur otherwise
  kKronecker,  // dense n^2 x n^2 solve of vec(H)
  kSchur,      // Bartels-Stewart on the complex Schur form
};

/// Solves H A + A^* H = C. Throws ConstructionError when A and -A^* share an eigenvalue.
[[nodiscard]] CMatrix solve_lyapunov(const CMatrix& a, const CMatrix& c,
                                     LyapunovMethod method = LyapunovMethod::kAuto);

/// Hermitian positive definite H with 2 Re H M <= -delta H.
struct LyapunovCertificate {
  CMatrix H;
  double delta = 0.0;
  double residual = 0.0;  // lambda_max(H M + M^* H + delta H)
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  [[nodiscard]] double cond() const { return lambda_max / lambda_min; }
};

/// Solves H (M + delta/2 I) + (M + delta/2 I)^* H = -I, so that
/// H M + M^* H = -I - delta H <= -delta H.
/// Requires spectral_abscissa(M) < -delta/2 (PreconditionError otherwise).
/// Throws ConstructionError if the certificate residual exceeds `tol`.
[[nodiscard]] LyapunovCertificate lyapunov_symmetrizer(const CMatrix& m, double delta, double tol = 1e-9,
                                                       LyapunovMethod method = LyapunovMethod::kAuto);

}  // namespace hypstab
