#include "hypstab/relaxed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypstab/error.hpp"

namespace hypstab {

namespace {

void fix_sign(Eigen::Ref<Vector> v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-8 * big) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

double interpolate(const std::vector<double>& t, const std::vector<double>& y, double at) {
  if (at <= t.front()) return y.front();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (at <= t[i]) {
      const double w = (at - t[i - 1]) / (t[i] - t[i - 1]);
      return (1.0 - w) * y[i - 1] + w * y[i];
    }
  }
  return y.back();
}

Vector u0_at(const RelaxedReport& rep, double at) {
  Vector out(rep.dec.r);
  for (int k = 0; k < rep.dec.r; ++k) {
    std::vector<double> y;
    for (const auto& u : rep.u0) y.push_back(u[k]);
    out[k] = interpolate(rep.energy.times, y, at);
  }
  return out;
}

std::vector<double> ratios(const std::vector<double>& inc) {
  std::vector<double> out;
  const double floor = 1e-13;
  for (std::size_t i = 1; i < inc.size(); ++i) {
    if (inc[i - 1] <= floor) {
      out.push_back(0.0);  // already converged to roundoff
    } else {
      out.push_back(inc[i] / inc[i - 1]);
    }
  }
  return out;
}

}  // namespace

RelaxedDecomposition block_transform(const Matrix& B0, double tol) {
  if (B0.rows() != B0.cols() || B0.rows() == 0) throw DimensionError("B0 must be square and non-empty");
  const auto n = B0.rows();
  Eigen::JacobiSVD<Matrix> svd(B0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double cut = tol * (1.0 + sigma[0]);
  Eigen::Index rank = 0;
  while (rank < n && sigma[rank] > cut) ++rank;
  RelaxedDecomposition dec;
  dec.r = static_cast<int>(n - rank);
  if (rank == n || rank == 0) {
    dec.S = Matrix::Identity(n, n);
  } else {
    dec.S.resize(n, n);
    dec.S.leftCols(rank) = svd.matrixU().leftCols(rank);
    dec.S.rightCols(n - rank) = svd.matrixV().rightCols(n - rank);
    for (Eigen::Index j = 0; j < n; ++j) fix_sign(dec.S.col(j));
  }

  Eigen::FullPivLU<Matrix> lu(dec.S);
  lu.setThreshold(1e-8);
  if (!lu.isInvertible()) throw ConstructionError("zero eigenvalue of B0 is defective");
  dec.S_inv = lu.inverse();
  const Matrix block = dec.S_inv * B0 * dec.S;
  dec.block_residual = dec.r > 0 ? block.rightCols(dec.r).cwiseAbs().maxCoeff() : 0.0;
  if (dec.r > 0 && rank > 0) {
    dec.block_residual = std::max(dec.block_residual, block.bottomLeftCorner(dec.r, rank).cwiseAbs().maxCoeff());
  }
  if (dec.block_residual > 1e3 * cut) {
    std::ostringstream os;
    os << "B0 does not reduce to block form (residual " << dec.block_residual << "); zero eigenvalue is defective";
    throw ConstructionError(os.str());
  }
  dec.B01 = block.topLeftCorner(rank, rank);
  if (rank > 0 && Eigen::FullPivLU<Matrix>(dec.B01).rank() < rank) throw ConstructionError("B01 is singular");
  dec.Q_basis = Matrix::Identity(n, n).rightCols(dec.r);
  dec.unitary = (dec.S.transpose() * dec.S - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12;
  return dec;
}

void verify_b1_structure(const SystemSpec& spec, const RelaxedDecomposition& dec,
                         const std::vector<SamplePoint>& samples) {
  if (dec.r == 0 || spec.B1.is_zero()) return;
  double scale = 0.0;
  std::vector<Matrix> values;
  for (const auto& sp : samples) {
    values.push_back(eval_coefficient(spec.B1, sp.view()));
    scale = std::max(scale, values.back().cwiseAbs().maxCoeff());
  }
  const double tol = 1e-9 * (1.0 + scale);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Matrix t = dec.S_inv * values[k] * dec.S;
    const double leak = t.rightCols(dec.r).cwiseAbs().maxCoeff();
    if (leak > tol) {
      std::ostringstream os;
      os << "B1 has nonzero trailing block column at sample " << k << " (x =";
      for (double x : samples[k].x) os << ' ' << x;
      os << ", |leak| = " << leak << ")";
      throw ConstructionError(os.str());
    }
  }
}

QSplit project_Q(const RelaxedDecomposition& dec, const GridFunction& u) {
  const auto n = static_cast<Eigen::Index>(u.n());
  if (dec.S.rows() != n) throw DimensionError("decomposition size differs from the grid function");
  CVector mean = CVector::Zero(n);
  for (std::size_t p = 0; p < u.points(); ++p) {
    for (Eigen::Index c = 0; c < n; ++c) mean[c] += u(p, static_cast<int>(c));
  }
  mean /= static_cast<double>(u.points());
  const CVector w = dec.S_inv.cast<Complex>() * mean;
  QSplit out;
  out.u0 = w.tail(dec.r).real();
  out.v = u;
  if (dec.r == 0) return out;
  const CVector embed = dec.S.rightCols(dec.r).cast<Complex>() * w.tail(dec.r);
  for (std::size_t p = 0; p < u.points(); ++p) {
    for (Eigen::Index c = 0; c < n; ++c) out.v(p, static_cast<int>(c)) -= embed[c];
  }
  return out;
}

RelaxedReport simulate_relaxed(const SystemSpec& spec, const GridFunction& f, const SimConfig& cfg,
                               const HOperator* op) {
  RelaxedReport rep;
  rep.dec = block_transform(spec.B0);
  rep.energy = simulate(spec, f, cfg, op, [&](double, const GridFunction& u) {
    QSplit q = project_Q(rep.dec, u);
    rep.v_norm.push_back(std::sqrt(q.v.l2_norm_sq()));
    rep.u0.push_back(std::move(q.u0));
  });
  try {
    rep.v_rate = fit_decay_rate(rep.energy.times, rep.v_norm);
  } catch (const PreconditionError&) {
    rep.v_rate = RateFit{};
  }
  const double t_end = rep.energy.times.back();
  for (const auto& u : rep.u0) rep.drift = std::max(rep.drift, (u - rep.u0.front()).norm());
  rep.drift_constant = spec.eps > 0.0 ? rep.drift / spec.eps : 0.0;
  if (rep.dec.r == 0) return rep;

  for (double t = 1.0; t <= t_end * (1.0 + 1e-12); t *= 2.0) rep.dyadic_times.push_back(t);
  std::vector<Vector> dyadic;
  for (double t : rep.dyadic_times) dyadic.push_back(u0_at(rep, t));
  for (std::size_t i = 1; i < dyadic.size(); ++i) rep.dyadic_increments.push_back((dyadic[i] - dyadic[i - 1]).norm());
  rep.dyadic_ratios = ratios(rep.dyadic_increments);

  Vector prev = u0_at(rep, 0.0);
  for (double t = 1.0; t <= t_end * (1.0 + 1e-12); t += 1.0) {
    Vector cur = u0_at(rep, t);
    rep.unit_increments.push_back((cur - prev).norm());
    prev = std::move(cur);
  }
  rep.unit_ratios = ratios(rep.unit_increments);

  rep.limit = dyadic.empty() ? rep.u0.back() : dyadic.back();
  if (dyadic.size() >= 3) {
    const Vector& x0 = dyadic[dyadic.size() - 3];
    const Vector& x1 = dyadic[dyadic.size() - 2];
    const Vector& x2 = dyadic.back();
    for (int k = 0; k < rep.dec.r; ++k) {
      const double d1 = x2[k] - x1[k], d0 = x1[k] - x0[k];
      const double den = d1 - d0;
      if (std::abs(den) > 1e-14 * (1.0 + std::abs(x2[k]))) rep.limit[k] = x2[k] - d1 * d1 / den;
    }
  }
  return rep;
}

void relaxed_columns(const RelaxedReport& rep, std::vector<std::string>& names,
                     std::vector<std::vector<double>>& columns) {
  names.push_back("v_norm");
  columns.push_back(rep.v_norm);
  for (int k = 0; k < rep.dec.r; ++k) {
    names.push_back("u0_" + std::to_string(k + 1));
    std::vector<double> col;
    for (const auto& u : rep.u0) col.push_back(u[k]);
    columns.push_back(std::move(col));
  }
}

}  // namespace hypstab
