#pragma once

#include <vector>

#include "hypstab/linalg.hpp"
#include "hypstab/symbol.hpp"

namespace hypstab {

/// Block diagonalization of |omega| P0(i omega') + B0 along one direction omega'.
///
/// T0^{-1} P0(i omega') T0 = diag(lambda_j I), Btilde = T0^{-1} B0 T0 and the first-order
/// corrector T1 has T1_ab = Btilde_ab / (lambda_j - lambda_i) for a in block i, b in
/// block j != i (zero diagonal blocks), so that (I + T1/|w|)^{-1} T0^{-1} (...) T0 (I + T1/|w|)
/// is block diagonal up to O(1/|w|).
struct BlockForm {
  Vector direction;
  CMatrix principal;  // P0(i omega')
  CMatrix B0;
  std::vector<Complex> lambda;  // one eigenvalue per block
  std::vector<int> sizes;
  std::vector<int> offsets;
  bool unitary = false;   // outer transform from the Hermitian route
  CMatrix T0_outer;       // eigenvector basis of P0(i omega')
  std::vector<CMatrix> T0j;  // inner transforms, identity until chosen
  CMatrix T0;             // T0_outer * diag(T0j)
  CMatrix Btilde;         // T0^{-1} B0 T0
  CMatrix T1;
  double inner_rate = 0.0;     // certified: 2 Re(T0j^{-1} Btilde_jj T0j) <= -inner_rate I
  bool inner_reduced = false;  // inner_rate below the requested 3 delta / 2

  [[nodiscard]] int blocks() const { return static_cast<int>(lambda.size()); }
  [[nodiscard]] CMatrix block(const CMatrix& m, int i, int j) const;
  /// diag(lambda_j I).
  [[nodiscard]] CMatrix lambda_matrix() const;
};

/// Builds T0 from the eigenvector clusters of P0(i omega'). Symmetric A0 use a unitary
/// basis. Throws ConstructionError for defective, non-imaginary or ambiguous spectra.
[[nodiscard]] BlockForm block_diagonalize(const SystemSpec& spec, const Vector& direction);

/// Chooses constant inner transforms with 2 Re(T0j^{-1} Btilde_jj T0j) <= -(3 delta/2) I:
/// the identity when it already works, otherwise (L^*)^{-1} with L L^* the Lyapunov
/// certificate of Btilde_jj at rate 3 delta / 2. When a block's abscissa is not below
/// -3 delta / 4 the largest feasible rate is used and `inner_reduced` is set.
[[nodiscard]] BlockForm choose_inner_transforms(BlockForm block, double delta);

/// The conjugated symbol (I + T1/|w|)^{-1} T0^{-1} (|w| P0 + B0) T0 (I + T1/|w|).
[[nodiscard]] CMatrix conjugated_symbol(const BlockForm& block, double abs_omega);

/// Largest entry magnitude of the off-diagonal blocks of `m`.
[[nodiscard]] double off_block_norm(const BlockForm& block, const CMatrix& m);

struct AsymptoticSymbol {
  CMatrix H0;  // (T0^{-1})^* T0^{-1}
  CMatrix S;   // |w| (H - H0)
  CMatrix H;   // H0 + S / |w|
  double abs_omega = 0.0;
  double re_h0p0 = 0.0;   // |2 Re H0 P0(i omega')|
  double residual = 0.0;  // lambda_max(2 Re H (|w| P0 + B0) + delta H)
  bool holds = false;     // residual <= 0
  double threshold = 0.0;  // smallest |w| >= 1 where the inequality holds (search)
};

/// H = T^{-*} T^{-1} with T = T0 (I + T1/|w|), split as H0 + S/|w|, with both defining
/// inequalities checked at |w|.
[[nodiscard]] AsymptoticSymbol asymptotic_symmetrizer(const BlockForm& block, double abs_omega, double delta);

/// lambda_max(2 Re H(|w|)(|w| P0 + B0) + delta H(|w|)) for the construction above.
[[nodiscard]] double asymptotic_residual(const BlockForm& block, double abs_omega, double delta);

/// Smallest |w| >= 1 from which the asymptotic inequality holds (doubling then bisection).
/// Returns +inf if it never holds below 1e12.
[[nodiscard]] double asymptotic_threshold(const BlockForm& block, double delta);

struct BlockAbscissa {
  double abscissa = 0.0;  // sup over directions of max Re eig(Btilde_jj)
  std::vector<Vector> degenerate;  // directions where block diagonalization failed
  int directions = 0;
};

/// Large-|omega| limit of the spectral abscissa of the full symbol.
[[nodiscard]] BlockAbscissa asymptotic_block_abscissa(const SystemSpec& spec, int sphere_samples);

/// Symmetric A0 and B0: unitary outer transform with the Hermitian diagonal blocks of
/// U^* B0 U unitarily diagonalized. Throws PreconditionError for non-symmetric input.
[[nodiscard]] BlockForm symmetric_block_form(const SystemSpec& spec, const Vector& direction, double delta);

struct SymmetricAsymptotic {
  CMatrix H;  // I + S / |w|
  CMatrix S;
  double abs_omega = 0.0;
  double deviation = 0.0;  // |H - I| * |w|
  double residual = 0.0;   // lambda_max(2 Re H (|w| P0 + B0) + delta H)
  bool holds = false;
  double threshold = 0.0;
};

/// Hermitian A0 and B0: H = U (I + T^*/|w|)^{-1} (I + T/|w|)^{-1} U^* with U unitary.
/// Throws PreconditionError for non-symmetric input.
[[nodiscard]] SymmetricAsymptotic symmetric_asymptotic_symmetrizer(const SystemSpec& spec, const Vector& direction,
                                                                   double abs_omega, double delta);

struct FrozenH1 {
  CMatrix H1;
  double residual = 0.0;  // |2 Re (H0 + eps H1)(P0 + eps P1)| (spectral norm)
};

/// Correction H1 at a frozen point: (T^{-1})^* T^{-1} = H0 + eps H1 with T = T0 (I + eps T2)
/// obtained by projecting the columns of T0 onto the eigenspaces of P0 + eps P1.
/// Requires eps > 0. Throws ConstructionError if the eigenvalue clusters change.
[[nodiscard]] FrozenH1 frozen_h1(const SystemSpec& spec, const BlockForm& block, const EvalPoint& at);

/// Quintic smoothstep: 0 for |w| <= C, 1 for |w| >= C + 1.
[[nodiscard]] double cutoff_phi(double abs_omega, double cutoff);

}  // namespace hypstab
