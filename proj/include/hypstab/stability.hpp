#pragma once

#include <string>
#include <vector>

#include "hypstab/coeffs.hpp"
#include "hypstab/linalg.hpp"
#include "hypstab/symbol.hpp"

namespace hypstab {

/// A frequency (or direction, for asymptotic failures) with its offending eigenvalue.
struct Witness {
  Vector omega;
  Complex eigenvalue;
  std::string note;
};

struct ConditionReport {
  bool satisfied = false;
  double delta_star = 0.0;  // sup of achievable delta over the checked set, clamped at 0
  std::vector<Witness> witnesses;
  int lattice_radius = 0;
  int sphere_samples = 0;
  double cluster_gap = 0.0;

  double lattice_abscissa = 0.0;     // max Re over the lattice spectra
  double asymptotic_abscissa = 0.0;  // large-|w| limit from the block form
  bool asymptotic_certified = true;  // false when some direction needed the dense fallback
  std::vector<Vector> degenerate_directions;

  // Relaxed condition only.
  bool relaxed = false;
  int r = 0;           // multiplicity of the zero eigenvalue of B0
  CMatrix null_basis;  // n x r
};

struct HyperbolicityReport {
  bool strongly_hyperbolic = false;
  double K = 0.0;            // sup over directions of |T| + |T^{-1}|
  double imag_defect = 0.0;  // max |Re lambda(P0(i omega'))|
  int directions = 0;
  std::vector<std::string> diagnostics;
};

struct MultiplicityReport {
  bool constant = false;
  bool indeterminate = false;  // some sample had clusters closer than 10 gaps
  std::vector<int> signature;  // of the first sample
  int samples = 0;
  std::string diagnostic;
};

struct ConditionOptions {
  int sphere_samples = 64;
  double tol = 1e-9;
  bool real_omega = false;  // additionally sweep a non-integer grid
  double real_step = 0.125;
  int max_witnesses = 32;
};

/// Strong hyperbolicity over the sampled directions (K_max bounds |T| + |T^{-1}|).
[[nodiscard]] HyperbolicityReport check_strong_hyperbolicity(const SystemSpec& spec, int sphere_samples,
                                                             double tol = 1e-8, double K_max = 1e8);

/// Re lambda <= -delta for integer |w|_inf <= radius plus the asymptotic block abscissa.
[[nodiscard]] ConditionReport check_eigenvalue_condition(const SystemSpec& spec, int lattice_radius, double delta,
                                                         const ConditionOptions& opts = {});

/// Relaxed condition: damped spectrum for w != 0, semisimple zero eigenvalues of B0
/// otherwise damped, and null(B0) contained in null(B1) on the sample set.
[[nodiscard]] ConditionReport check_relaxed_condition(const SystemSpec& spec, int lattice_radius, double delta,
                                                      const std::vector<SamplePoint>& samples,
                                                      const ConditionOptions& opts = {});

struct MultiplicitySample {
  SamplePoint point;
  Vector direction;
};

/// Deterministic (x, t, u, eps) samples crossed with sphere directions.
[[nodiscard]] std::vector<MultiplicitySample> multiplicity_samples(const SystemSpec& spec, const SampleBox& box,
                                                                   int directions);

/// Eigenvalue multiplicities of the frozen perturbed principal symbol are the same at every
/// sample and every cluster has a full eigenvector set.
[[nodiscard]] MultiplicityReport check_constant_multiplicity(const SystemSpec& spec,
                                                             const std::vector<MultiplicitySample>& samples);

/// Zero-eigenvalue split of B0 used by the relaxed condition.
struct ZeroSpectrum {
  int r = 0;
  CMatrix null_basis;
  bool semisimple = true;
  std::vector<Complex> indeterminate;  // 1e-10 |B0| < |lambda| < delta / 10
  std::vector<Complex> nonzero;
};
[[nodiscard]] ZeroSpectrum zero_spectrum(const Matrix& b0, double delta);

}  // namespace hypstab
