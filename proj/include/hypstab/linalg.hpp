#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hypstab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// X + X^*, the "2 Re X" of an operator.
[[nodiscard]] CMatrix two_re(const CMatrix& x);

/// (X + X^*) / 2, used to store Hermitian matrices exactly Hermitian.
[[nodiscard]] CMatrix hermitian_part(const CMatrix& x);

[[nodiscard]] CVector eigenvalues(const CMatrix& m);

/// Largest real part over the spectrum.
[[nodiscard]] double spectral_abscissa(const CMatrix& m);

/// Eigenvalues of the Hermitian part of `h`, ascending.
[[nodiscard]] Vector hermitian_eigenvalues(const CMatrix& h);
[[nodiscard]] double lambda_max_hermitian(const CMatrix& h);
[[nodiscard]] double lambda_min_hermitian(const CMatrix& h);

[[nodiscard]] double spectral_norm(const CMatrix& m);

/// Default eigenvalue clustering threshold 1e-6 (1 + |M|).
[[nodiscard]] double default_cluster_gap(const CMatrix& m);

/// Scale `v` to unit length with its first significant component real positive.
void normalize_phase(CVector& v);

/// Deterministic orthonormal basis of span(W): Gram-Schmidt on the projected unit vectors.
[[nodiscard]] CMatrix canonical_basis(const CMatrix& w);

/// Orthonormal basis of the numerical nullspace (singular values <= tol).
[[nodiscard]] CMatrix nullspace(const CMatrix& m, double tol);

struct EigenCluster {
  Complex center;       // mean of the member eigenvalues
  int multiplicity = 0;  // algebraic
  int geometric = 0;     // dimension of the numerical eigenspace
  CMatrix basis;         // n x geometric, orthonormal, canonical
  [[nodiscard]] bool complete() const { return geometric == multiplicity; }
};

struct ClusterResult {
  std::vector<EigenCluster> clusters;  // ordered by Im descending, then Re descending
  double gap = 0.0;                    // threshold used
  double min_separation = 0.0;         // smallest distance between different clusters
  bool ambiguous = false;              // some separation below 10 * gap

  [[nodiscard]] bool complete() const;
  [[nodiscard]] std::vector<int> signature() const;  // sorted multiplicities
  /// Columns are the cluster bases in cluster order (square when complete).
  [[nodiscard]] CMatrix basis_matrix() const;
};

/// Groups the spectrum of `m` into clusters separated by more than `gap`
/// (<= 0 selects the default) and computes an eigenspace basis per cluster.
[[nodiscard]] ClusterResult eigen_clusters(const CMatrix& m, double gap = 0.0);

}  // namespace hypstab
