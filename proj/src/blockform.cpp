#include "hypstab/blockform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hypstab/error.hpp"
#include "hypstab/lyapunov.hpp"

namespace hypstab {

namespace {

constexpr Complex kI{0.0, 1.0};

// Recomputes Btilde and the first-order corrector from the current T0.
void refresh(BlockForm& bf) {
  const auto n = bf.T0.rows();
  Eigen::PartialPivLU<CMatrix> lu(bf.T0);
  bf.Btilde = lu.solve(bf.B0 * bf.T0);
  bf.T1 = CMatrix::Zero(n, n);
  for (int i = 0; i < bf.blocks(); ++i) {
    for (int j = 0; j < bf.blocks(); ++j) {
      if (i == j) continue;
      const Complex denom = bf.lambda[static_cast<std::size_t>(j)] - bf.lambda[static_cast<std::size_t>(i)];
      bf.T1.block(bf.offsets[static_cast<std::size_t>(i)], bf.offsets[static_cast<std::size_t>(j)],
                  bf.sizes[static_cast<std::size_t>(i)], bf.sizes[static_cast<std::size_t>(j)]) =
          bf.block(bf.Btilde, i, j) / denom;
    }
  }
}

CMatrix block_diagonal(const std::vector<CMatrix>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  CMatrix out = CMatrix::Zero(n, n);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

void set_outer(BlockForm& bf, std::vector<Complex> lambda, std::vector<CMatrix> bases) {
  bf.lambda = std::move(lambda);
  bf.sizes.clear();
  bf.offsets.clear();
  const auto n = bf.principal.rows();
  bf.T0_outer = CMatrix(n, n);
  int at = 0;
  for (const auto& b : bases) {
    bf.offsets.push_back(at);
    bf.sizes.push_back(static_cast<int>(b.cols()));
    bf.T0_outer.middleCols(at, b.cols()) = b;
    at += static_cast<int>(b.cols());
  }
  bf.T0j.clear();
  for (int sz : bf.sizes) bf.T0j.push_back(CMatrix::Identity(sz, sz));
  bf.T0 = bf.T0_outer;
  refresh(bf);
}

CMatrix hermitian_from_inverse(const CMatrix& t) {
  const CMatrix tinv = t.fullPivLu().inverse();
  return hermitian_part(tinv.adjoint() * tinv);
}

}  // namespace

CMatrix BlockForm::block(const CMatrix& m, int i, int j) const {
  return m.block(offsets[static_cast<std::size_t>(i)], offsets[static_cast<std::size_t>(j)],
                 sizes[static_cast<std::size_t>(i)], sizes[static_cast<std::size_t>(j)]);
}

CMatrix BlockForm::lambda_matrix() const {
  const auto n = principal.rows();
  CMatrix out = CMatrix::Zero(n, n);
  for (int j = 0; j < blocks(); ++j) {
    for (int k = 0; k < sizes[static_cast<std::size_t>(j)]; ++k) {
      const auto idx = offsets[static_cast<std::size_t>(j)] + k;
      out(idx, idx) = lambda[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

BlockForm block_diagonalize(const SystemSpec& spec, const Vector& direction) {
  BlockForm bf;
  bf.direction = direction;
  const Matrix a = direction_matrix(spec, direction);
  bf.principal = kI * a.cast<Complex>();
  bf.B0 = spec.B0.cast<Complex>();
  const double gap = default_cluster_gap(bf.principal);

  std::vector<Complex> lambda;
  std::vector<CMatrix> bases;
  bool symmetric = true;
  for (const auto& a0 : spec.A0) {
    if ((a0 - a0.transpose()).cwiseAbs().maxCoeff() > 1e-12) symmetric = false;
  }

  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const Vector& mu = es.eigenvalues();
    const Matrix& v = es.eigenvectors();
    const auto n = mu.size();
    // Ascending eigenvalues; walk from the top so Im(lambda) is descending.
    Eigen::Index hi = n - 1;
    double prev_low = std::numeric_limits<double>::infinity();
    while (hi >= 0) {
      Eigen::Index lo = hi;
      while (lo > 0 && mu[hi] - mu[lo - 1] <= gap) --lo;
      if (prev_low - mu[hi] < 10.0 * gap) {
        throw ConstructionError("eigenvalue clusters of P0(i omega') are too close to separate");
      }
      prev_low = mu[lo];
      double sum = 0.0;
      for (Eigen::Index k = lo; k <= hi; ++k) sum += mu[k];
      lambda.emplace_back(0.0, sum / static_cast<double>(hi - lo + 1));
      bases.push_back(canonical_basis(v.middleCols(lo, hi - lo + 1).cast<Complex>()));
      hi = lo - 1;
    }
    bf.unitary = true;
  } else {
    const ClusterResult cr = eigen_clusters(bf.principal, gap);
    if (cr.ambiguous) throw ConstructionError("eigenvalue clusters of P0(i omega') are too close to separate");
    if (!cr.complete()) throw ConstructionError("P0(i omega') has no complete set of eigenvectors");
    const double re_tol = 1e-8 * (1.0 + spectral_norm(bf.principal));
    for (const auto& c : cr.clusters) {
      if (std::abs(c.center.real()) > re_tol) {
        throw ConstructionError("P0(i omega') has an eigenvalue off the imaginary axis");
      }
      lambda.emplace_back(0.0, c.center.imag());
      bases.push_back(c.basis);
    }
  }
  set_outer(bf, std::move(lambda), std::move(bases));
  return bf;
}

BlockForm choose_inner_transforms(BlockForm bf, double delta) {
  const double target = 1.5 * delta;
  const CMatrix outer_b = bf.T0_outer.partialPivLu().solve(bf.B0 * bf.T0_outer);
  double certified = std::numeric_limits<double>::infinity();
  for (int j = 0; j < bf.blocks(); ++j) {
    const CMatrix bjj = bf.block(outer_b, j, j);
    const auto m = bjj.rows();
    CMatrix tj = CMatrix::Identity(m, m);
    if (lambda_max_hermitian(two_re(bjj)) > -target) {
      const double abscissa = spectral_abscissa(bjj);
      double rate = target;
      if (!(abscissa < -0.5 * target * (1.0 + 1e-9))) {
        if (!(abscissa < 0.0)) {
          throw ConstructionError("diagonal block has an eigenvalue with nonnegative real part");
        }
        rate = -2.0 * abscissa * (1.0 - 1e-3);
      }
      const LyapunovCertificate cert = lyapunov_symmetrizer(bjj, rate);
      // Only the shape of H_j matters; center its spectrum around 1.
      const CMatrix hj = cert.H / std::sqrt(cert.lambda_min * cert.lambda_max);
      Eigen::LLT<CMatrix> llt(hj);
      if (llt.info() != Eigen::Success) throw ConstructionError("Cholesky of block certificate failed");
      const CMatrix l = llt.matrixL();
      tj = l.adjoint().inverse();
    }
    const CMatrix conj_block = tj.inverse() * bjj * tj;
    certified = std::min(certified, -lambda_max_hermitian(two_re(conj_block)));
    bf.T0j[static_cast<std::size_t>(j)] = tj;
  }
  bf.inner_rate = certified;
  bf.inner_reduced = certified < target * (1.0 - 1e-9);
  bf.T0 = bf.T0_outer * block_diagonal(bf.T0j);
  refresh(bf);
  return bf;
}

CMatrix conjugated_symbol(const BlockForm& bf, double abs_omega) {
  const auto n = bf.T0.rows();
  const CMatrix sym = abs_omega * bf.principal + bf.B0;
  const CMatrix t = bf.T0 * (CMatrix::Identity(n, n) + bf.T1 / abs_omega);
  return t.fullPivLu().solve(sym * t);
}

double off_block_norm(const BlockForm& bf, const CMatrix& m) {
  double out = 0.0;
  for (int i = 0; i < bf.blocks(); ++i) {
    for (int j = 0; j < bf.blocks(); ++j) {
      if (i != j) out = std::max(out, bf.block(m, i, j).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

namespace {

CMatrix asymptotic_h(const BlockForm& bf, double abs_omega) {
  const auto n = bf.T0.rows();
  const CMatrix t = bf.T0 * (CMatrix::Identity(n, n) + bf.T1 / abs_omega);
  Eigen::FullPivLU<CMatrix> lu(t);
  if (!lu.isInvertible()) throw ConstructionError("T0 (I + T1/|w|) is singular");
  const CMatrix tinv = lu.inverse();
  return hermitian_part(tinv.adjoint() * tinv);
}

double residual_of(const BlockForm& bf, const CMatrix& h, double abs_omega, double delta) {
  const CMatrix sym = abs_omega * bf.principal + bf.B0;
  return lambda_max_hermitian(two_re(h * sym) + delta * h);
}

}  // namespace

double asymptotic_residual(const BlockForm& bf, double abs_omega, double delta) {
  return residual_of(bf, asymptotic_h(bf, abs_omega), abs_omega, delta);
}

double asymptotic_threshold(const BlockForm& bf, double delta) {
  auto holds = [&](double r) {
    try {
      return asymptotic_residual(bf, r, delta) <= 0.0;
    } catch (const ConstructionError&) {
      return false;
    }
  };
  if (holds(1.0)) return 1.0;
  double hi = 2.0;
  while (!holds(hi)) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  double lo = hi / 2.0;
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

AsymptoticSymbol asymptotic_symmetrizer(const BlockForm& bf, double abs_omega, double delta) {
  if (!(abs_omega > 0.0)) throw PreconditionError("asymptotic symbol needs |omega| > 0");
  AsymptoticSymbol out;
  out.abs_omega = abs_omega;
  out.H0 = hermitian_from_inverse(bf.T0);
  out.H = asymptotic_h(bf, abs_omega);
  out.S = hermitian_part(abs_omega * (out.H - out.H0));
  out.re_h0p0 = spectral_norm(two_re(out.H0 * bf.principal));
  out.residual = residual_of(bf, out.H, abs_omega, delta);
  out.holds = out.residual <= 0.0;
  out.threshold = out.holds ? abs_omega : asymptotic_threshold(bf, delta);
  return out;
}

BlockAbscissa asymptotic_block_abscissa(const SystemSpec& spec, int sphere_samples) {
  BlockAbscissa out;
  out.abscissa = -std::numeric_limits<double>::infinity();
  for (const Vector& d : sphere_directions(spec.s, sphere_samples)) {
    ++out.directions;
    try {
      const BlockForm bf = block_diagonalize(spec, d);
      for (int j = 0; j < bf.blocks(); ++j) {
        out.abscissa = std::max(out.abscissa, spectral_abscissa(bf.block(bf.Btilde, j, j)));
      }
    } catch (const ConstructionError&) {
      out.degenerate.push_back(d);
    }
  }
  if (static_cast<int>(out.degenerate.size()) == out.directions) {
    out.abscissa = std::numeric_limits<double>::infinity();
  }
  return out;
}

BlockForm symmetric_block_form(const SystemSpec& spec, const Vector& direction, double delta) {
  if (!spec.constant_part_symmetric()) {
    throw PreconditionError("symmetric construction requires symmetric A0 and B0");
  }
  BlockForm bf = block_diagonalize(spec, direction);
  // Unitarily diagonalize the Hermitian diagonal blocks of U^* B0 U.
  double rate = std::numeric_limits<double>::infinity();
  for (int j = 0; j < bf.blocks(); ++j) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(bf.block(bf.Btilde, j, j)));
    bf.T0j[static_cast<std::size_t>(j)] = es.eigenvectors();
    rate = std::min(rate, -2.0 * es.eigenvalues().maxCoeff());
  }
  bf.inner_rate = rate;
  bf.inner_reduced = rate < 1.5 * delta;
  bf.T0 = bf.T0_outer * block_diagonal(bf.T0j);
  refresh(bf);
  return bf;
}

SymmetricAsymptotic symmetric_asymptotic_symmetrizer(const SystemSpec& spec, const Vector& direction,
                                                     double abs_omega, double delta) {
  const BlockForm bf = symmetric_block_form(spec, direction, delta);
  const AsymptoticSymbol as = asymptotic_symmetrizer(bf, abs_omega, delta);
  SymmetricAsymptotic out;
  const auto n = as.H.rows();
  out.H = as.H;
  out.abs_omega = abs_omega;
  out.S = hermitian_part(abs_omega * (as.H - CMatrix::Identity(n, n)));
  out.deviation = spectral_norm(as.H - CMatrix::Identity(n, n)) * abs_omega;
  out.residual = as.residual;
  out.holds = as.holds;
  out.threshold = as.threshold;
  return out;
}

FrozenH1 frozen_h1(const SystemSpec& spec, const BlockForm& bf, const EvalPoint& at) {
  if (!(at.eps > 0.0)) throw PreconditionError("frozen_h1 requires eps > 0");
  const CMatrix p = frozen_perturbed_symbol(spec, at, bf.direction).value;
  const ClusterResult cr = eigen_clusters(p);
  if (static_cast<int>(cr.clusters.size()) != bf.blocks() || !cr.complete()) {
    throw ConstructionError("eigenvalue multiplicities of the perturbed symbol differ from the unperturbed ones");
  }
  // Match each unperturbed block to the nearest perturbed cluster of equal size.
  std::vector<int> match(static_cast<std::size_t>(bf.blocks()), -1);
  std::vector<bool> used(cr.clusters.size(), false);
  for (int j = 0; j < bf.blocks(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cr.clusters.size(); ++k) {
      if (used[k] || cr.clusters[k].multiplicity != bf.sizes[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(cr.clusters[k].center - bf.lambda[static_cast<std::size_t>(j)]);
      if (d < best) {
        best = d;
        match[static_cast<std::size_t>(j)] = static_cast<int>(k);
      }
    }
    if (match[static_cast<std::size_t>(j)] < 0) throw ConstructionError("eigenvalue crossing at frozen point");
    used[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] = true;
  }
  const auto n = p.rows();
  CMatrix w(n, n);
  for (int j = 0; j < bf.blocks(); ++j) {
    w.middleCols(bf.offsets[static_cast<std::size_t>(j)], bf.sizes[static_cast<std::size_t>(j)]) =
        cr.clusters[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])].basis;
  }
  const CMatrix winv = w.fullPivLu().inverse();
  CMatrix t(n, n);
  for (int j = 0; j < bf.blocks(); ++j) {
    const auto off = bf.offsets[static_cast<std::size_t>(j)];
    const auto sz = bf.sizes[static_cast<std::size_t>(j)];
    const CMatrix projector = w.middleCols(off, sz) * winv.middleRows(off, sz);
    t.middleCols(off, sz) = projector * bf.T0.middleCols(off, sz);
  }
  const CMatrix h0 = hermitian_from_inverse(bf.T0);
  const CMatrix h = hermitian_from_inverse(t);
  FrozenH1 out;
  out.H1 = hermitian_part((h - h0) / at.eps);
  out.residual = spectral_norm(two_re((h0 + at.eps * out.H1) * p));
  return out;
}

double cutoff_phi(double abs_omega, double cutoff) {
  if (!(cutoff > 0.0)) throw PreconditionError("cut-off radius must be positive");
  if (abs_omega <= cutoff) return 0.0;
  if (abs_omega >= cutoff + 1.0) return 1.0;
  const double s = abs_omega - cutoff;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

}  // namespace hypstab
