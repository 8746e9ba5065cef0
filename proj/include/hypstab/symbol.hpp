#pragma once

#include <span>
#include <vector>

#include "hypstab/coeffs.hpp"
#include "hypstab/linalg.hpp"

namespace hypstab {

/// u_t = sum_nu (A0[nu] + eps A1[nu](x,t,u,eps)) du/dx_nu + (B0 + eps B1(x,t,u,eps)) u
/// on the 2pi-periodic torus of dimension s.
struct SystemSpec {
  int s = 1;
  int n = 1;
  std::vector<Matrix> A0;
  Matrix B0;
  double eps = 0.0;
  std::vector<CoefficientMatrix> A1;
  CoefficientMatrix B1;
  double delta_candidate = 1.0;

  /// Constant-coefficient system with zero perturbations.
  [[nodiscard]] static SystemSpec constant(std::vector<Matrix> a0, Matrix b0, double delta = 1.0);

  [[nodiscard]] VariableSet variables() const { return {s, n, true, true, true}; }

  /// Throws DimensionError / PreconditionError on violated invariants.
  void validate() const;

  [[nodiscard]] bool has_perturbation() const;
  /// A0[nu] and B0 symmetric to `tol`.
  [[nodiscard]] bool constant_part_symmetric(double tol = 1e-12) const;
};

/// Lattice (or real) frequency omega with its norm and unit direction.
class FrequencyVector {
 public:
  FrequencyVector() = default;
  explicit FrequencyVector(Vector omega);
  [[nodiscard]] static FrequencyVector integer(std::span<const int> omega);
  [[nodiscard]] static FrequencyVector of(std::initializer_list<double> omega);

  [[nodiscard]] const Vector& omega() const { return omega_; }
  [[nodiscard]] double norm() const { return norm_; }
  [[nodiscard]] bool is_zero() const { return norm_ == 0.0; }
  /// omega / |omega|; throws PreconditionError for omega = 0.
  [[nodiscard]] Vector direction() const;

 private:
  Vector omega_;
  double norm_ = 0.0;
};

struct SymbolMatrix {
  FrequencyVector freq;
  CMatrix value;
};

/// i sum_nu A0[nu] omega_nu.
[[nodiscard]] SymbolMatrix principal_symbol(const SystemSpec& spec, const FrequencyVector& freq);

/// i sum_nu A0[nu] omega_nu + B0.
[[nodiscard]] SymbolMatrix full_symbol(const SystemSpec& spec, const FrequencyVector& freq);

/// Real matrix sum_nu A0[nu] d_nu; the principal symbol is i times this.
[[nodiscard]] Matrix direction_matrix(const SystemSpec& spec, const Vector& direction);

/// i sum_nu (A0[nu] + eps A1[nu](x,t,u,eps)) d_nu at a frozen point; eps from `at`.
[[nodiscard]] SymbolMatrix frozen_perturbed_symbol(const SystemSpec& spec, const EvalPoint& at,
                                                   const Vector& direction);

/// Same, with eps taken from the system.
[[nodiscard]] SymbolMatrix frozen_perturbed_symbol(const SystemSpec& spec, std::span<const double> x, double t,
                                                   std::span<const double> u, const Vector& direction);

/// Unit directions used to sample the sphere: s = 1 gives {+1, -1}; s = 2 gives
/// `count` equally spaced angles.
[[nodiscard]] std::vector<Vector> sphere_directions(int s, int count);

/// Integer frequencies with |omega|_inf <= radius, lexicographic order.
[[nodiscard]] std::vector<std::vector<int>> lattice_points(int s, int radius);

}  // namespace hypstab
