#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "hypstab/blockform.hpp"
#include "hypstab/grid.hpp"
#include "hypstab/symmetrizer.hpp"

namespace hypstab {

/// The operator H u = sum_w e^{i<w,x>} H(w) u(w) defined by a symmetrizer table. In frozen
/// mode the eps-part eps (H11 + H11^*)/2 with H11 u = sum_w e^{i<w,x>} phi(|w|) H1(x,t,u(x),w') u(w)
/// is added, refreezing H1 at the current state.
class HOperator {
 public:
  enum class Mode { kConstant, kFrozen };

  [[nodiscard]] static HOperator constant(SymmetrizerTable table);
  /// Requires a table built for `spec` (same route and delta).
  [[nodiscard]] static HOperator frozen(SymmetrizerTable table, SystemSpec spec);

  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] const SymmetrizerTable& table() const { return table_; }

  /// Constant-mode part: multiply each coefficient by H(w) and transform back.
  [[nodiscard]] GridFunction apply_constant(const GridFunction& u) const;
  /// Full operator at time t (the frozen part uses the real part of `state` as u).
  [[nodiscard]] GridFunction apply(const GridFunction& u, double t, const GridFunction& state) const;

 private:
  struct DirectionGroup {
    Vector direction;
    BlockForm form;
    std::vector<std::size_t> modes;  // FFT mode indices of this direction with phi > 0
    std::vector<double> phi;
  };

  void check_shape(const GridFunction& u) const;
  const std::vector<DirectionGroup>& groups_for(int N) const;
  std::vector<CMatrix> frozen_h1_field(const DirectionGroup& g, const GridFunction& state, double t) const;

  Mode mode_ = Mode::kConstant;
  SymmetrizerTable table_;
  std::optional<SystemSpec> spec_;
  std::shared_ptr<std::mutex> groups_mu_ = std::make_shared<std::mutex>();
  mutable std::map<int, std::vector<DirectionGroup>> groups_;  // by grid size, built on first use
};

/// H u with the state taken to be u itself.
[[nodiscard]] GridFunction apply_H(const HOperator& op, const GridFunction& u, double t);

/// (u, H v) by trapezoidal quadrature on the grid; frozen coefficients use `state`.
[[nodiscard]] Complex h_inner(const HOperator& op, const GridFunction& u, const GridFunction& v, double t,
                              const GridFunction& state);
/// Same with the frozen coefficients evaluated at u = 0.
[[nodiscard]] Complex h_inner(const HOperator& op, const GridFunction& u, const GridFunction& v, double t);

/// (2pi)^s sum_w <u(w), (H v)(w)>; for the constant mode (H v)(w) = H(w) v(w).
[[nodiscard]] Complex h_inner_fourier(const HOperator& op, const GridFunction& u, const GridFunction& v, double t,
                                      const GridFunction& state);
[[nodiscard]] Complex h_inner_fourier(const HOperator& op, const GridFunction& u, const GridFunction& v, double t);

/// Re (u, H u) with the frozen coefficients taken at u itself. Throws ConstructionError if it is negative beyond rounding.
[[nodiscard]] double h_norm_sq(const HOperator& op, const GridFunction& u, double t);

struct Equivalence {
  double c_low = 0.0;
  double c_high = 0.0;
  bool within_K4 = false;  // c_low >= 1/K4 - tol and c_high <= K4 + tol
  int probes = 0;
};

/// Empirical constants c_low |u|^2 <= |u|_H^2 <= c_high |u|^2 over random band-limited probes.
[[nodiscard]] Equivalence verify_equivalence(const HOperator& op, int N, int probes = 32, std::uint64_t seed = 1,
                                             double tol = 1e-10);

/// Same constants from single-mode probes e^{i<w,x>} v, v running over eigenvectors of H(w).
[[nodiscard]] Equivalence single_mode_equivalence(const HOperator& op, int N, double tol = 1e-10);

}  // namespace hypstab
