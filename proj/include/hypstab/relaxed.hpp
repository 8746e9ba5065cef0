#pragma once

#include <vector>

#include "hypstab/coeffs.hpp"
#include "hypstab/grid.hpp"
#include "hypstab/simulator.hpp"
#include "hypstab/linalg.hpp"

namespace hypstab {

/// Coordinates in which B0 = S [[B01, 0], [0, 0]] S^-1. Columns of S: range basis, then null basis.
struct RelaxedDecomposition {
  Matrix S;
  Matrix S_inv;
  int r = 0;
  Matrix B01;
  Matrix Q_basis;          // n x r, last r unit vectors (transformed coordinates)
  double block_residual = 0.0;
  bool unitary = false;    // S^T S = I
};

/// Throws ConstructionError when the zero eigenvalue is defective.
[[nodiscard]] RelaxedDecomposition block_transform(const Matrix& B0, double tol = 1e-8);

/// Requires S^-1 B1 S to have zero trailing r columns at every sample; throws ConstructionError
/// naming the first offending sample.
void verify_b1_structure(const SystemSpec& spec, const RelaxedDecomposition& dec,
                         const std::vector<SamplePoint>& samples);

struct QSplit {
  Vector u0;        // II-block of S^-1 mean(u)
  GridFunction v;   // u - S [0; u0]
};

[[nodiscard]] QSplit project_Q(const RelaxedDecomposition& dec, const GridFunction& u);

struct RelaxedReport {
  EnergyReport energy;
  RelaxedDecomposition dec;
  std::vector<double> v_norm;
  std::vector<Vector> u0;             // one per recorded time
  RateFit v_rate;
  std::vector<double> dyadic_times;   // 1, 2, 4, ... <= T
  std::vector<double> dyadic_increments;
  std::vector<double> dyadic_ratios;
  std::vector<double> unit_increments;  // |u0(k+1) - u0(k)|
  std::vector<double> unit_ratios;
  Vector limit;                       // Aitken extrapolation on the last three dyadic times
  double drift = 0.0;                 // max_t |u0(t) - u0(0)|
  double drift_constant = 0.0;        // drift / eps
};

/// Unsplit simulation with the Q decomposition as a monitor. Operator as in simulate().
[[nodiscard]] RelaxedReport simulate_relaxed(const SystemSpec& spec, const GridFunction& f, const SimConfig& cfg,
                                             const HOperator* op = nullptr);

/// Extra CSV columns v_norm, u0_1..u0_r.
void relaxed_columns(const RelaxedReport& rep, std::vector<std::string>& names,
                     std::vector<std::vector<double>>& columns);

}  // namespace hypstab
