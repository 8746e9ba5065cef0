#include "hypstab/symmetrizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hypstab/error.hpp"
#include "hypstab/parallel.hpp"

namespace hypstab {

namespace {

constexpr Complex kI{0.0, 1.0};

std::vector<int> primitive(const std::vector<int>& omega) {
  int g = 0;
  for (int v : omega) g = std::gcd(g, std::abs(v));
  std::vector<int> out(omega);
  if (g > 0) {
    for (int& v : out) v /= g;
  }
  return out;
}

Vector unit(const std::vector<int>& omega) {
  Vector d(static_cast<Eigen::Index>(omega.size()));
  for (std::size_t k = 0; k < omega.size(); ++k) d[static_cast<Eigen::Index>(k)] = omega[k];
  return d / d.norm();
}

double euclid(const std::vector<int>& omega) {
  double sq = 0.0;
  for (int v : omega) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

// Relative amount by which 2 Re H M + delta H fails to be negative semidefinite.
double relative_residual(const CMatrix& h, const CMatrix& m, double delta) {
  const double res = lambda_max_hermitian(two_re(h * m) + delta * h);
  return res / (lambda_max_hermitian(h) * (1.0 + spectral_norm(m)));
}

struct Asymptotics {
  std::map<std::vector<int>, std::optional<BlockForm>> forms;  // keyed by primitive direction
  std::vector<std::optional<AsymptoticSymbol>> per_entry;       // lattice order, empty at w = 0
  std::vector<double> direction_thresholds;                      // sphere samples
  std::vector<BlockForm> sphere_forms;
  bool sphere_degenerate = false;
};

std::optional<BlockForm> try_form(const SystemSpec& spec, const Vector& d, double delta, AsymptoticRoute route) {
  try {
    return asymptotic_block_form(spec, d, delta, route);
  } catch (const ConstructionError&) {
    return std::nullopt;
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
}

Asymptotics compute_asymptotics(const SystemSpec& spec, double delta, int radius, int sphere_samples,
                                AsymptoticRoute route) {
  Asymptotics out;
  const auto points = lattice_points(spec.s, radius);
  std::vector<std::vector<int>> keys;
  for (const auto& p : points) {
    if (euclid(p) == 0.0) continue;
    auto key = primitive(p);
    if (!out.forms.count(key)) {
      out.forms.emplace(key, std::nullopt);
      keys.push_back(key);
    }
  }
  std::vector<std::optional<BlockForm>> built(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) { built[i] = try_form(spec, unit(keys[i]), delta, route); });
  for (std::size_t i = 0; i < keys.size(); ++i) out.forms[keys[i]] = std::move(built[i]);

  out.per_entry.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const double r = euclid(points[i]);
    if (r == 0.0) return;
    const auto& form = out.forms.at(primitive(points[i]));
    if (!form) return;
    try {
      out.per_entry[i] = asymptotic_symmetrizer(*form, r, delta);
    } catch (const ConstructionError&) {
    }
  });

  const auto dirs = sphere_directions(spec.s, sphere_samples);
  std::vector<std::optional<BlockForm>> sphere(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) { sphere[i] = try_form(spec, dirs[i], delta, route); });
  out.direction_thresholds.assign(dirs.size(), std::numeric_limits<double>::infinity());
  parallel_for(dirs.size(), [&](std::size_t i) {
    if (sphere[i]) out.direction_thresholds[i] = asymptotic_threshold(*sphere[i], delta);
  });
  for (auto& f : sphere) {
    if (f) {
      out.sphere_forms.push_back(std::move(*f));
    } else {
      out.sphere_degenerate = true;
    }
  }
  return out;
}

double cutoff_from(const Asymptotics& as, const std::vector<std::vector<int>>& points) {
  double c = 1.0;
  double max_r = 1.0;
  for (double t : as.direction_thresholds) c = std::max(c, std::ceil(t - 1.0));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = euclid(points[i]);
    max_r = std::max(max_r, r);
    if (r == 0.0) continue;
    const auto& a = as.per_entry[i];
    if (!a || !a->holds) c = std::max(c, std::ceil(r));
  }
  if (!std::isfinite(c)) c = std::ceil(max_r);
  return c;
}

void put(std::ostream& os, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

void put_matrix(std::ostream& os, const char* tag, const CMatrix& m) {
  os << tag;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << ' ';
      put(os, m(i, j).real());
      os << ' ';
      put(os, m(i, j).imag());
    }
  }
  os << '\n';
}

double get_double(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw Error(std::string("table: missing ") + what);
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(std::string("table: bad number for ") + what + " (" + tok + ")");
  }
  return v;
}

void expect(std::istream& is, const std::string& key) {
  std::string tok;
  if (!(is >> tok) || tok != key) throw Error("table: expected '" + key + "', found '" + tok + "'");
}

CMatrix get_matrix(std::istream& is, const char* tag, int n) {
  expect(is, tag);
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = get_double(is, tag);
      const double im = get_double(is, tag);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

}  // namespace

const char* route_name(AsymptoticRoute route) {
  return route == AsymptoticRoute::kSymmetric ? "symmetric" : "general";
}

BlockForm asymptotic_block_form(const SystemSpec& spec, const Vector& direction, double delta,
                                AsymptoticRoute route) {
  if (route == AsymptoticRoute::kSymmetric) return symmetric_block_form(spec, direction, delta);
  return choose_inner_transforms(block_diagonalize(spec, direction), delta);
}

std::map<std::vector<int>, LyapunovCertificate> build_lowfreq_table(const SystemSpec& spec, double cutoff,
                                                                    double delta, int radius) {
  std::vector<std::vector<int>> points;
  for (const auto& p : lattice_points(spec.s, radius)) {
    if (euclid(p) <= cutoff + 1.0) points.push_back(p);
  }
  std::vector<std::optional<LyapunovCertificate>> certs(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    Vector w(spec.s);
    for (int k = 0; k < spec.s; ++k) w[k] = points[i][static_cast<std::size_t>(k)];
    try {
      certs[i] = lyapunov_symmetrizer(full_symbol(spec, FrequencyVector(w)).value, delta);
    } catch (const PreconditionError& e) {
      std::ostringstream os;
      os << "no Lyapunov certificate at w = (" << w.transpose() << "): " << e.what();
      throw PreconditionError(os.str());
    }
  });
  std::map<std::vector<int>, LyapunovCertificate> out;
  for (std::size_t i = 0; i < points.size(); ++i) out.emplace(points[i], std::move(*certs[i]));
  return out;
}

double auto_cutoff(const SystemSpec& spec, double delta, int radius, int sphere_samples, AsymptoticRoute route) {
  const Asymptotics as = compute_asymptotics(spec, delta, radius, sphere_samples, route);
  return cutoff_from(as, lattice_points(spec.s, radius));
}

std::size_t SymmetrizerTable::slot(const std::vector<int>& omega) const {
  if (static_cast<int>(omega.size()) != s_) throw DimensionError("frequency dimension does not match the table");
  std::size_t idx = 0;
  for (int v : omega) {
    if (std::abs(v) > radius_) throw PreconditionError("frequency outside the symmetrizer table");
    idx = idx * static_cast<std::size_t>(2 * radius_ + 1) + static_cast<std::size_t>(v + radius_);
  }
  return idx;
}

const TableEntry& SymmetrizerTable::entry(const std::vector<int>& omega) const { return entries_[slot(omega)]; }

void SymmetrizerTable::compute_bounds() {
  K4_ = 1.0;
  for (auto& e : entries_) {
    const Vector ev = hermitian_eigenvalues(e.H);
    e.lambda_min = ev.minCoeff();
    e.lambda_max = ev.maxCoeff();
    if (!(e.lambda_min > 0.0)) {
      std::ostringstream os;
      os << "symmetrizer not positive definite at w = (";
      for (int v : e.omega) os << ' ' << v;
      os << " )";
      throw ConstructionError(os.str());
    }
    K4_ = std::max({K4_, e.lambda_max, 1.0 / e.lambda_min});
  }
  double violation = 0.0;
  for (const auto& e : entries_) {
    violation = std::max({violation, 1.0 / K4_ - e.lambda_min, e.lambda_max - K4_});
  }
  checks_.bound_violation = violation;
  checks_.property2 = violation <= 0.0;
}

SymmetrizerTable SymmetrizerTable::identity(int s, int n, int radius) {
  return from_function(s, n, radius, [n](const std::vector<int>&) { return CMatrix::Identity(n, n); });
}

SymmetrizerTable SymmetrizerTable::from_function(int s, int n, int radius,
                                                 const std::function<CMatrix(const std::vector<int>&)>& fn) {
  SymmetrizerTable t;
  t.s_ = s;
  t.n_ = n;
  t.radius_ = radius;
  for (const auto& p : lattice_points(s, radius)) {
    TableEntry e;
    e.omega = p;
    e.abs_omega = euclid(p);
    e.H = hermitian_part(fn(p));
    if (e.H.rows() != n || e.H.cols() != n) throw DimensionError("table function returned a matrix of wrong size");
    e.H0 = CMatrix::Zero(n, n);
    e.S = e.H;
    t.entries_.push_back(std::move(e));
  }
  t.compute_bounds();
  return t;
}

SymmetrizerTable assemble_symmetrizer(const SystemSpec& spec, const SymmetrizerOptions& opts) {
  spec.validate();
  const double delta = opts.delta;
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  if (opts.lattice_radius < 1) throw PreconditionError("lattice radius must be at least 1");
  const AsymptoticRoute route = opts.route.value_or(spec.constant_part_symmetric() ? AsymptoticRoute::kSymmetric
                                                                                   : AsymptoticRoute::kGeneral);
  const auto points = lattice_points(spec.s, opts.lattice_radius);
  const Asymptotics as = compute_asymptotics(spec, delta, opts.lattice_radius, opts.sphere_samples, route);
  const double cutoff = opts.cutoff ? *opts.cutoff : cutoff_from(as, points);
  if (!(cutoff > 0.0)) throw PreconditionError("cut-off radius must be positive");

  SymmetrizerTable t;
  t.s_ = spec.s;
  t.n_ = spec.n;
  t.radius_ = opts.lattice_radius;
  t.delta_ = delta;
  t.cutoff_ = cutoff;
  t.route_ = route;
  t.entries_.resize(points.size());
  const auto n = spec.n;

  std::vector<double> rel_residual(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    TableEntry& e = t.entries_[i];
    e.omega = points[i];
    e.abs_omega = euclid(points[i]);
    Vector w(spec.s);
    for (int k = 0; k < spec.s; ++k) w[k] = points[i][static_cast<std::size_t>(k)];
    const CMatrix symbol = full_symbol(spec, FrequencyVector(w)).value;
    const auto& asym = as.per_entry[i];
    e.asymptotic = asym.has_value();
    e.phi = e.asymptotic ? cutoff_phi(e.abs_omega, cutoff) : 0.0;
    e.H0 = CMatrix::Zero(n, n);
    e.S = CMatrix::Zero(n, n);
    if (e.phi > 0.0) {
      e.H0 = e.phi * asym->H0;
      e.S = e.phi * asym->S / e.abs_omega;
    }
    if (e.phi < 1.0) {
      try {
        e.S += (1.0 - e.phi) * lyapunov_symmetrizer(symbol, delta).H;
      } catch (const Error& err) {
        std::ostringstream os;
        os << "no Lyapunov certificate at w = (" << w.transpose() << "): " << err.what();
        throw ConstructionError(os.str());
      }
    }
    e.H0 = hermitian_part(e.H0);
    e.S = hermitian_part(e.S);
    e.H = hermitian_part(e.H0 + e.S);
    e.residual = lambda_max_hermitian(two_re(e.H * symbol) + delta * e.H);
    rel_residual[i] = relative_residual(e.H, symbol, delta);
  });
  t.compute_bounds();

  PropertyChecks& pc = t.checks_;
  const double tol = opts.tol;
  pc.lattice_residual = *std::max_element(rel_residual.begin(), rel_residual.end());

  // Property 3 over every direction that was constructed.
  auto re_h0p0 = [](const BlockForm& bf) {
    const CMatrix h0 = [&] {
      const CMatrix tinv = bf.T0.fullPivLu().inverse();
      return CMatrix(tinv.adjoint() * tinv);
    }();
    return spectral_norm(two_re(h0 * bf.principal)) / (spectral_norm(h0) * (1.0 + spectral_norm(bf.principal)));
  };
  pc.re_h0p0 = 0.0;
  for (const auto& [key, form] : as.forms) {
    if (form) pc.re_h0p0 = std::max(pc.re_h0p0, re_h0p0(*form));
  }
  for (const auto& bf : as.sphere_forms) pc.re_h0p0 = std::max(pc.re_h0p0, re_h0p0(bf));
  pc.property3 = pc.re_h0p0 <= tol;

  // Property 4 at large |w| and the block-diagonal decay.
  pc.asymptotic_residual = -std::numeric_limits<double>::infinity();
  pc.blockdiag_ratio = 0.0;
  const double scale = 1.0 + spectral_norm(spec.B0.cast<Complex>());
  for (const auto& bf : as.sphere_forms) {
    for (double r : {1e2, 1e3, 1e4}) {
      const AsymptoticSymbol a = asymptotic_symmetrizer(bf, r, delta);
      pc.asymptotic_residual = std::max(pc.asymptotic_residual, relative_residual(a.H, r * bf.principal + bf.B0, delta));
    }
    const double off1 = off_block_norm(bf, conjugated_symbol(bf, 100.0));
    const double off2 = off_block_norm(bf, conjugated_symbol(bf, 200.0));
    if (off1 > 1e-12 * scale) pc.blockdiag_ratio = std::max(pc.blockdiag_ratio, off2 / off1);
  }
  if (as.sphere_forms.empty()) pc.asymptotic_residual = std::numeric_limits<double>::infinity();
  pc.property4 = pc.lattice_residual <= tol && pc.asymptotic_residual <= tol;
  pc.blockdiag = pc.blockdiag_ratio <= 0.6 && !as.sphere_degenerate;

  // Property 5 on the entries where the asymptotic symbol is fully switched on.
  std::vector<double> smoothing;
  for (const auto& e : t.entries_) {
    if (e.phi >= 1.0) smoothing.push_back(spectral_norm(e.S) * e.abs_omega);
  }
  if (!smoothing.empty()) {
    pc.smoothing_sup = *std::max_element(smoothing.begin(), smoothing.end());
    auto mid = smoothing.begin() + static_cast<std::ptrdiff_t>(smoothing.size() / 2);
    std::nth_element(smoothing.begin(), mid, smoothing.end());
    pc.smoothing_median = *mid;
  }
  pc.property5 = pc.smoothing_sup <= 10.0 * pc.smoothing_median + tol;
  return t;
}

void SymmetrizerTable::write(std::ostream& os) const {
  os << "hypstab-symmetrizer-table 1\n";
  os << "s " << s_ << "\nn " << n_ << "\nradius " << radius_ << "\nroute " << route_name(route_) << "\ndelta ";
  put(os, delta_);
  os << "\ncutoff ";
  put(os, cutoff_);
  os << "\nK4 ";
  put(os, K4_);
  os << "\nentries " << entries_.size() << '\n';
  for (const auto& e : entries_) {
    os << "w";
    for (int v : e.omega) os << ' ' << v;
    os << " phi ";
    put(os, e.phi);
    os << " asymptotic " << (e.asymptotic ? 1 : 0) << " lambda_min ";
    put(os, e.lambda_min);
    os << " lambda_max ";
    put(os, e.lambda_max);
    os << " residual ";
    put(os, e.residual);
    os << '\n';
    put_matrix(os, "H", e.H);
    put_matrix(os, "H0", e.H0);
    put_matrix(os, "S", e.S);
  }
}

SymmetrizerTable SymmetrizerTable::read(std::istream& is) {
  SymmetrizerTable t;
  expect(is, "hypstab-symmetrizer-table");
  expect(is, "1");
  std::string route;
  std::size_t count = 0;
  expect(is, "s");
  is >> t.s_;
  expect(is, "n");
  is >> t.n_;
  expect(is, "radius");
  is >> t.radius_;
  expect(is, "route");
  is >> route;
  if (route != "symmetric" && route != "general") throw Error("table: unknown route");
  t.route_ = route == "symmetric" ? AsymptoticRoute::kSymmetric : AsymptoticRoute::kGeneral;
  expect(is, "delta");
  t.delta_ = get_double(is, "delta");
  expect(is, "cutoff");
  t.cutoff_ = get_double(is, "cutoff");
  expect(is, "K4");
  const double k4 = get_double(is, "K4");
  expect(is, "entries");
  is >> count;
  if (!is || t.s_ < 1 || t.s_ > 2 || t.n_ < 1 || t.radius_ < 0) throw Error("table: bad header");
  const auto points = lattice_points(t.s_, t.radius_);
  if (count != points.size()) throw Error("table: entry count does not match the radius");
  for (const auto& p : points) {
    TableEntry e;
    expect(is, "w");
    e.omega.resize(static_cast<std::size_t>(t.s_));
    for (int& v : e.omega) is >> v;
    if (e.omega != p) throw Error("table: entries out of lattice order");
    e.abs_omega = euclid(p);
    expect(is, "phi");
    e.phi = get_double(is, "phi");
    int asym = 0;
    expect(is, "asymptotic");
    is >> asym;
    e.asymptotic = asym != 0;
    expect(is, "lambda_min");
    e.lambda_min = get_double(is, "lambda_min");
    expect(is, "lambda_max");
    e.lambda_max = get_double(is, "lambda_max");
    expect(is, "residual");
    e.residual = get_double(is, "residual");
    e.H = get_matrix(is, "H", t.n_);
    e.H0 = get_matrix(is, "H0", t.n_);
    e.S = get_matrix(is, "S", t.n_);
    t.entries_.push_back(std::move(e));
  }
  t.compute_bounds();
  if (std::abs(t.K4_ - k4) > 1e-12 * k4) throw Error("table: stored K4 does not match the entries");
  return t;
}

}  // namespace hypstab
