#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypstab/blockform.hpp"
#include "hypstab/linalg.hpp"
#include "hypstab/lyapunov.hpp"
#include "hypstab/symbol.hpp"

namespace hypstab {

/// Which large-|w| construction is used.
enum class AsymptoticRoute {
  kGeneral,    // eigenvector blocks with Lyapunov inner transforms
  kSymmetric,  // unitary blocks, Hermitian A0 and B0
};

/// Block form used at direction w' for the given route (inner transforms applied).
[[nodiscard]] BlockForm asymptotic_block_form(const SystemSpec& spec, const Vector& direction, double delta,
                                              AsymptoticRoute route);

/// Lyapunov certificates for every integer |w|_inf <= radius with |w| <= cutoff + 1.
/// Throws PreconditionError naming the first offending frequency.
[[nodiscard]] std::map<std::vector<int>, LyapunovCertificate> build_lowfreq_table(const SystemSpec& spec,
                                                                                  double cutoff, double delta,
                                                                                  int radius);

struct TableEntry {
  std::vector<int> omega;
  double abs_omega = 0.0;
  double phi = 0.0;
  CMatrix H;   // H0 + S
  CMatrix H0;  // phi Htilde0(w')
  CMatrix S;   // phi Stilde/|w| + (1 - phi) Lyapunov(w)
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double residual = 0.0;  // lambda_max(2 Re H (P0 + B0) + delta H)
  bool asymptotic = false;  // asymptotic data available at w'
};

struct PropertyChecks {
  double bound_violation = 0.0;  // max over entries of distance outside [1/K4, K4]
  double re_h0p0 = 0.0;          // max relative |2 Re Htilde0 P0(i w')|
  double lattice_residual = 0.0;     // max lambda_max(2 Re H(P0+B0) + delta H) over entries, relative
  double asymptotic_residual = 0.0;  // same at |w| = 1e2, 1e3, 1e4 along sampled directions
  double smoothing_sup = 0.0;     // sup |S(w)| |w| over entries with phi = 1
  double smoothing_median = 0.0;
  double blockdiag_ratio = 0.0;   // max off-block ratio between |w| = 200 and 100
  bool property2 = false;
  bool property3 = false;
  bool property4 = false;
  bool property5 = false;
  bool blockdiag = false;
  [[nodiscard]] bool all() const { return property2 && property3 && property4 && property5 && blockdiag; }
};

struct SymmetrizerOptions {
  double delta = 1.0;
  int lattice_radius = 32;
  int sphere_samples = 64;
  std::optional<double> cutoff;  // auto when empty
  std::optional<AsymptoticRoute> route;  // symmetric when A0, B0 symmetric, else general
  double tol = 1e-9;
};

/// Per-frequency symbol H(w) on the centered integer lattice, with certified bounds.
class SymmetrizerTable {
 public:
  SymmetrizerTable() = default;

  /// H(w) = I on |w|_inf <= radius.
  [[nodiscard]] static SymmetrizerTable identity(int s, int n, int radius);
  /// H(w) = fn(w) on |w|_inf <= radius; entries are Hermitian-symmetrized.
  [[nodiscard]] static SymmetrizerTable from_function(int s, int n, int radius,
                                                      const std::function<CMatrix(const std::vector<int>&)>& fn);

  [[nodiscard]] int s() const { return s_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int radius() const { return radius_; }
  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] double cutoff() const { return cutoff_; }
  [[nodiscard]] double K4() const { return K4_; }
  [[nodiscard]] AsymptoticRoute route() const { return route_; }
  [[nodiscard]] const std::vector<TableEntry>& entries() const { return entries_; }
  [[nodiscard]] const PropertyChecks& checks() const { return checks_; }

  /// True when every |w|_inf <= radius is stored.
  [[nodiscard]] bool covers(int radius) const { return radius <= radius_; }
  /// Entry for integer w; throws PreconditionError outside the table.
  [[nodiscard]] const TableEntry& entry(const std::vector<int>& omega) const;
  [[nodiscard]] const CMatrix& H(const std::vector<int>& omega) const { return entry(omega).H; }

  /// Line-based text: header, then per entry the frequency, scalars and n^2 complex values.
  void write(std::ostream& os) const;
  [[nodiscard]] static SymmetrizerTable read(std::istream& is);

  friend SymmetrizerTable assemble_symmetrizer(const SystemSpec& spec, const SymmetrizerOptions& opts);

 private:
  void compute_bounds();
  [[nodiscard]] std::size_t slot(const std::vector<int>& omega) const;

  int s_ = 1;
  int n_ = 1;
  int radius_ = 0;
  double delta_ = 0.0;
  double cutoff_ = 0.0;
  double K4_ = 1.0;
  AsymptoticRoute route_ = AsymptoticRoute::kGeneral;
  std::vector<TableEntry> entries_;  // lattice order: lexicographic in (w1, ..., ws)
  PropertyChecks checks_;
};

/// Builds the assembled table phi (Htilde0 + Stilde/|w|) + (1 - phi) Lyapunov(w) and verifies
/// its properties. Throws ConstructionError when a frequency cannot be certified.
[[nodiscard]] SymmetrizerTable assemble_symmetrizer(const SystemSpec& spec, const SymmetrizerOptions& opts);

/// Smallest integer C >= 1 with the asymptotic inequality holding at every lattice point
/// |w| > C and at |w| = C + 1 along the sampled directions.
[[nodiscard]] double auto_cutoff(const SystemSpec& spec, double delta, int radius, int sphere_samples,
                                 AsymptoticRoute route);

/// Name used in reports.
[[nodiscard]] const char* route_name(AsymptoticRoute route);

}  // namespace hypstab
