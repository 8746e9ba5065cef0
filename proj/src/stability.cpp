#include "hypstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "hypstab/blockform.hpp"
#include "hypstab/error.hpp"
#include "hypstab/parallel.hpp"

namespace hypstab {

namespace {

struct PointSpectrum {
  double max_re = -std::numeric_limits<double>::infinity();
  Complex worst;
};

PointSpectrum spectrum_at(const SystemSpec& spec, const Vector& omega) {
  const CVector ev = eigenvalues(full_symbol(spec, FrequencyVector(omega)).value);
  PointSpectrum out;
  for (const Complex& z : ev) {
    if (z.real() > out.max_re) {
      out.max_re = z.real();
      out.worst = z;
    }
  }
  return out;
}

std::vector<Vector> integer_lattice(int s, int radius, bool skip_zero) {
  std::vector<Vector> out;
  for (const auto& p : lattice_points(s, radius)) {
    Vector w(s);
    bool zero = true;
    for (int k = 0; k < s; ++k) {
      w[k] = p[static_cast<std::size_t>(k)];
      zero = zero && p[static_cast<std::size_t>(k)] == 0;
    }
    if (zero && skip_zero) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Vector> real_grid(int s, int radius, double step, bool skip_zero) {
  const int m = static_cast<int>(std::floor(radius / step));
  std::vector<Vector> out;
  std::vector<int> idx(static_cast<std::size_t>(s), -m);
  while (true) {
    Vector w(s);
    bool zero = true;
    bool integral = true;
    for (int k = 0; k < s; ++k) {
      w[k] = idx[static_cast<std::size_t>(k)] * step;
      zero = zero && idx[static_cast<std::size_t>(k)] == 0;
      integral = integral && w[k] == std::round(w[k]);
    }
    if (!integral && !(zero && skip_zero)) out.push_back(w);
    int k = s - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == m) {
      idx[static_cast<std::size_t>(k)] = -m;
      --k;
    }
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
  }
  return out;
}

// Shared part of both conditions: the w != 0 (or all w) sweep and the asymptotic limit.
void sweep(const SystemSpec& spec, int radius, double delta, bool skip_zero, const ConditionOptions& opts,
           ConditionReport& rep) {
  std::vector<Vector> points = integer_lattice(spec.s, radius, skip_zero);
  if (opts.real_omega) {
    auto extra = real_grid(spec.s, radius, opts.real_step, skip_zero);
    points.insert(points.end(), extra.begin(), extra.end());
  }
  std::vector<PointSpectrum> spectra(points.size());
  parallel_for(points.size(), [&](std::size_t i) { spectra[i] = spectrum_at(spec, points[i]); });

  rep.lattice_abscissa = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> failing;
  for (std::size_t i = 0; i < points.size(); ++i) {
    rep.lattice_abscissa = std::max(rep.lattice_abscissa, spectra[i].max_re);
    if (spectra[i].max_re > -delta + opts.tol) failing.push_back(i);
  }
  // smallest frequencies first
  std::stable_sort(failing.begin(), failing.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].norm() < points[b].norm(); });
  if (static_cast<int>(failing.size()) > opts.max_witnesses) failing.resize(static_cast<std::size_t>(opts.max_witnesses));
  for (std::size_t i : failing) rep.witnesses.push_back({points[i], spectra[i].worst, "lattice"});

  const BlockAbscissa ba = asymptotic_block_abscissa(spec, opts.sphere_samples);
  rep.degenerate_directions = ba.degenerate;
  rep.asymptotic_certified = ba.degenerate.empty();
  double asym = ba.degenerate.size() == static_cast<std::size_t>(ba.directions)
                    ? -std::numeric_limits<double>::infinity()
                    : ba.abscissa;
  // Dense fallback along directions where the block form is unavailable.
  for (const Vector& d : ba.degenerate) {
    for (double r : {1e3, 1e4}) {
      const PointSpectrum ps = spectrum_at(spec, Vector(r * d));
      asym = std::max(asym, ps.max_re);
    }
  }
  rep.asymptotic_abscissa = asym;
  if (asym > -delta + opts.tol) {
    // Report the worst sampled direction.
    Vector worst_dir;
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vector& d : sphere_directions(spec.s, opts.sphere_samples)) {
      const PointSpectrum ps = spectrum_at(spec, Vector(1e4 * d));
      if (ps.max_re > worst) {
        worst = ps.max_re;
        worst_dir = d;
      }
    }
    rep.witnesses.push_back({worst_dir, Complex(asym, 0.0), "asymptotic direction (|w| -> infinity)"});
  }
  rep.cluster_gap = default_cluster_gap(spec.B0.cast<Complex>());
}

}  // namespace

HyperbolicityReport check_strong_hyperbolicity(const SystemSpec& spec, int sphere_samples, double tol,
                                               double K_max) {
  if (sphere_samples < 2) throw PreconditionError("sphere_samples must be at least 2");
  HyperbolicityReport rep;
  bool symmetric = true;
  for (const auto& a0 : spec.A0) {
    if ((a0 - a0.transpose()).cwiseAbs().maxCoeff() > 1e-12) symmetric = false;
  }
  bool ok = true;
  for (const Vector& d : sphere_directions(spec.s, sphere_samples)) {
    ++rep.directions;
    const Matrix a = direction_matrix(spec, d);
    if (symmetric) {
      rep.K = std::max(rep.K, 2.0);
      continue;
    }
    const CMatrix p = Complex(0.0, 1.0) * a.cast<Complex>();
    try {
      const ClusterResult cr = eigen_clusters(p);
      for (const auto& c : cr.clusters) rep.imag_defect = std::max(rep.imag_defect, std::abs(c.center.real()));
      if (!cr.complete()) {
        ok = false;
        std::ostringstream os;
        os << "no complete eigenvector basis along direction (" << d.transpose() << ")";
        rep.diagnostics.push_back(os.str());
        rep.K = std::numeric_limits<double>::infinity();
        continue;
      }
      const CMatrix t = cr.basis_matrix();
      Eigen::FullPivLU<CMatrix> lu(t);
      if (!lu.isInvertible()) {
        ok = false;
        rep.K = std::numeric_limits<double>::infinity();
        rep.diagnostics.push_back("singular eigenvector matrix");
        continue;
      }
      rep.K = std::max(rep.K, spectral_norm(t) + spectral_norm(lu.inverse()));
    } catch (const std::exception& e) {
      ok = false;
      rep.diagnostics.push_back(std::string("eigen-solver failure: ") + e.what());
    }
  }
  if (rep.imag_defect > tol) {
    ok = false;
    rep.diagnostics.push_back("eigenvalue off the imaginary axis");
  }
  if (!(rep.K <= K_max)) {
    ok = false;
    rep.diagnostics.push_back("eigenvector conditioning exceeds K_max");
  }
  rep.strongly_hyperbolic = ok;
  return rep;
}

ConditionReport check_eigenvalue_condition(const SystemSpec& spec, int lattice_radius, double delta,
                                           const ConditionOptions& opts) {
  if (lattice_radius < 1) throw PreconditionError("lattice radius must be at least 1");
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  ConditionReport rep;
  rep.lattice_radius = lattice_radius;
  rep.sphere_samples = opts.sphere_samples;
  sweep(spec, lattice_radius, delta, false, opts, rep);
  rep.delta_star = std::max(0.0, -std::max(rep.lattice_abscissa, rep.asymptotic_abscissa));
  rep.satisfied = rep.witnesses.empty();
  return rep;
}

ZeroSpectrum zero_spectrum(const Matrix& b0, double delta) {
  ZeroSpectrum out;
  const CMatrix b = b0.cast<Complex>();
  const double norm = spectral_norm(b);
  const double zero_tol = 1e-10 * norm;
  for (const Complex& z : eigenvalues(b)) {
    const double mag = std::abs(z);
    if (mag <= zero_tol) {
      ++out.r;
    } else if (mag < delta / 10.0) {
      out.indeterminate.push_back(z);
    } else {
      out.nonzero.push_back(z);
    }
  }
  out.null_basis = out.r > 0 ? nullspace(b, 1e-8 * (1.0 + norm)) : CMatrix(b.rows(), 0);
  out.semisimple = out.null_basis.cols() == out.r;
  return out;
}

ConditionReport check_relaxed_condition(const SystemSpec& spec, int lattice_radius, double delta,
                                        const std::vector<SamplePoint>& samples, const ConditionOptions& opts) {
  if (lattice_radius < 1) throw PreconditionError("lattice radius must be at least 1");
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  ConditionReport rep;
  rep.relaxed = true;
  rep.lattice_radius = lattice_radius;
  rep.sphere_samples = opts.sphere_samples;
  sweep(spec, lattice_radius, delta, true, opts, rep);

  const Vector zero = Vector::Zero(spec.s);
  const ZeroSpectrum zs = zero_spectrum(spec.B0, delta);
  rep.r = zs.r;
  rep.null_basis = zs.null_basis;
  double b0_abscissa = -std::numeric_limits<double>::infinity();
  for (const Complex& z : zs.nonzero) {
    b0_abscissa = std::max(b0_abscissa, z.real());
    if (z.real() > -delta + opts.tol) rep.witnesses.push_back({zero, z, "B0 eigenvalue neither damped nor zero"});
  }
  for (const Complex& z : zs.indeterminate) {
    rep.witnesses.push_back({zero, z, "B0 eigenvalue too close to zero to classify"});
  }
  if (!zs.semisimple) {
    rep.witnesses.push_back({zero, Complex(0.0, 0.0), "zero eigenvalue of B0 is defective"});
  }
  if (zs.r > 0 && zs.semisimple && !spec.B1.is_zero()) {
    double scale = 0.0;
    std::vector<Matrix> values;
    for (const auto& sp : samples) {
      values.push_back(eval_coefficient(spec.B1, sp.view()));
      scale = std::max(scale, values.back().cwiseAbs().maxCoeff());
    }
    const double tol = 1e-9 * (1.0 + scale);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double leak = (values[k].cast<Complex>() * zs.null_basis).cwiseAbs().maxCoeff();
      if (leak > tol) {
        std::ostringstream os;
        os << "B1 does not annihilate null(B0) at sample " << k << " (|B1 N| = " << leak << ")";
        rep.witnesses.push_back({zero, Complex(leak, 0.0), os.str()});
        break;
      }
    }
  }
  rep.delta_star = std::max(0.0, -std::max({rep.lattice_abscissa, rep.asymptotic_abscissa, b0_abscissa}));
  rep.satisfied = rep.witnesses.empty();
  return rep;
}

std::vector<MultiplicitySample> multiplicity_samples(const SystemSpec& spec, const SampleBox& box, int directions) {
  std::vector<MultiplicitySample> out;
  const auto points = sample_box(box, spec.s, spec.n, spec.eps);
  const auto dirs = sphere_directions(spec.s, directions);
  for (const auto& p : points) {
    for (const auto& d : dirs) out.push_back({p, d});
  }
  return out;
}

MultiplicityReport check_constant_multiplicity(const SystemSpec& spec, const std::vector<MultiplicitySample>& samples) {
  if (samples.empty()) throw PreconditionError("constant multiplicity check needs samples");
  MultiplicityReport rep;
  rep.constant = true;
  for (const auto& ms : samples) {
    ++rep.samples;
    const CMatrix p = frozen_perturbed_symbol(spec, ms.point.view(), ms.direction).value;
    const ClusterResult cr = eigen_clusters(p);
    const std::vector<int> sig = cr.signature();
    if (rep.samples == 1) rep.signature = sig;
    if (cr.ambiguous) {
      rep.indeterminate = true;
      rep.constant = false;
      rep.diagnostic = "eigenvalue clusters too close to separate at a sample";
      return rep;
    }
    if (!cr.complete()) {
      rep.constant = false;
      rep.diagnostic = "incomplete eigenvector set at a sample";
      return rep;
    }
    if (sig != rep.signature) {
      rep.constant = false;
      std::ostringstream os;
      os << "multiplicities change at sample " << rep.samples - 1 << " (u =";
      for (double v : ms.point.u) os << ' ' << v;
      os << ')';
      rep.diagnostic = os.str();
      return rep;
    }
  }
  return rep;
}

}  // namespace hypstab
