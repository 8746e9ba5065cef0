#include "hypstab/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "hypstab/error.hpp"
#include "hypstab/expr.hpp"

namespace hypstab {

void SimConfig::validate() const {
  if (N < 4 || (N & (N - 1)) != 0) throw PreconditionError("N must be a power of two >= 4");
  if (dt < 0.0) throw PreconditionError("dt must be > 0 (or 0 for automatic)");
  if (!(T_final > 0.0)) throw PreconditionError("T_final must be positive");
  if (!(cfl_safety > 0.0)) throw PreconditionError("cfl_safety must be positive");
  if (sobolev_p < 0 || sobolev_p > N / 4) throw PreconditionError("Sobolev order p must lie in [0, N/4]");
  if (record_every < 1) throw PreconditionError("record_every must be >= 1");
  if (!(blowup_factor > 1.0)) throw PreconditionError("blowup_factor must exceed 1");
}

RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values, const FitWindow& window) {
  if (times.size() != values.size()) throw DimensionError("times and values differ in length");
  const auto m = times.size();
  const auto skip = static_cast<std::size_t>(std::ceil(window.skip * static_cast<double>(m)));
  const auto tail = static_cast<std::size_t>(std::floor(window.tail * static_cast<double>(m)));
  const std::size_t begin = std::max(skip, m - std::min(m, tail));
  if (m < begin + 8) throw PreconditionError("decay fit needs at least 8 samples in the window");
  double st = 0.0, sy = 0.0;
  const auto k = static_cast<double>(m - begin);
  for (std::size_t i = begin; i < m; ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw PreconditionError("decay fit needs positive finite values");
    }
    st += times[i];
    sy += std::log(values[i]);
  }
  const double tm = st / k, ym = sy / k;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = begin; i < m; ++i) {
    stt += (times[i] - tm) * (times[i] - tm);
    sty += (times[i] - tm) * (std::log(values[i]) - ym);
  }
  if (!(stt > 0.0)) throw PreconditionError("decay fit needs distinct times");
  RateFit fit;
  fit.slope = sty / stt;
  double ss = 0.0;
  for (std::size_t i = begin; i < m; ++i) {
    const double r = std::log(values[i]) - (ym + fit.slope * (times[i] - tm));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / k);
  fit.samples = static_cast<int>(m - begin);
  fit.valid = true;
  return fit;
}

GridFunction rhs(const SystemSpec& spec, const GridFunction& u, double t, bool dealiased) {
  if (u.s() != spec.s || u.n() != spec.n) throw DimensionError("grid function does not match the system");
  std::vector<GridFunction> du;
  for (int nu = 0; nu < spec.s; ++nu) du.push_back(spectral_derivative(u, nu));
  GridFunction out(u.s(), u.n(), u.N());
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto nn = static_cast<std::size_t>(n);
  const bool perturbed = spec.eps != 0.0;
  for (std::size_t p = 0; p < u.points(); ++p) {
    const auto x = u.coordinate(p);
    const auto state = u.real_at(p);
    const EvalPoint at{x, t, state, spec.eps};
    Vector acc = Vector::Zero(n);
    for (int nu = 0; nu < spec.s; ++nu) {
      Vector d(n);
      for (Eigen::Index c = 0; c < n; ++c) d[c] = du[static_cast<std::size_t>(nu)].values()[p * nn + static_cast<std::size_t>(c)].real();
      Matrix a = spec.A0[static_cast<std::size_t>(nu)];
      if (perturbed && !spec.A1[static_cast<std::size_t>(nu)].is_zero()) {
        a += spec.eps * eval_coefficient(spec.A1[static_cast<std::size_t>(nu)], at);
      }
      acc += a * d;
    }
    Matrix b = spec.B0;
    if (perturbed && !spec.B1.is_zero()) b += spec.eps * eval_coefficient(spec.B1, at);
    Vector v(n);
    for (Eigen::Index c = 0; c < n; ++c) v[c] = state[static_cast<std::size_t>(c)];
    acc += b * v;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!std::isfinite(acc[c])) throw EvalError("non-finite right-hand side");
      out(p, static_cast<int>(c)) = acc[c];
    }
  }
  if (dealiased) {
    out = dealias(out);
    out.drop_imaginary();
  }
  return out;
}

GridFunction step_rk4(const SystemSpec& spec, const GridFunction& u, double t, double dt, bool dealiased) {
  const GridFunction k1 = rhs(spec, u, t, dealiased);
  GridFunction y = u;
  y.axpy(0.5 * dt, k1);
  const GridFunction k2 = rhs(spec, y, t + 0.5 * dt, dealiased);
  y = u;
  y.axpy(0.5 * dt, k2);
  const GridFunction k3 = rhs(spec, y, t + 0.5 * dt, dealiased);
  y = u;
  y.axpy(dt, k3);
  const GridFunction k4 = rhs(spec, y, t + dt, dealiased);
  GridFunction out = u;
  out.axpy(dt / 6.0, k1);
  out.axpy(dt / 3.0, k2);
  out.axpy(dt / 3.0, k3);
  out.axpy(dt / 6.0, k4);
  return out;
}

namespace {

double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<SamplePoint> state_samples(const SystemSpec& spec, double u_max) {
  SampleBox box;
  box.u_max = std::max(u_max, 1e-12);
  box.count = 32;
  auto out = sample_box(box, spec.s, spec.n, 0.0);
  for (auto& p : out) p.eps = spec.eps;
  return out;
}

}  // namespace

double max_wave_speed(const SystemSpec& spec, double u_max) {
  double c = 0.0;
  const auto dirs = sphere_directions(spec.s, 16);
  const auto samples = state_samples(spec, u_max);
  for (const auto& d : dirs) {
    c = std::max(c, spectral_radius(direction_matrix(spec, d)));
    if (spec.eps == 0.0) continue;
    for (const auto& sp : samples) {
      c = std::max(c, spectral_radius(frozen_perturbed_symbol(spec, sp.view(), d).value.imag()));
    }
  }
  return c;
}

double choose_dt(const SystemSpec& spec, const SimConfig& cfg, double u_max) {
  if (cfg.dt > 0.0) return cfg.dt;
  const double dx = 2.0 * std::numbers::pi / cfg.N;
  double dt = std::numeric_limits<double>::infinity();
  const double c = max_wave_speed(spec, u_max);
  if (c > 0.0) dt = cfg.cfl_safety * dx / c;
  double rho = spectral_radius(spec.B0);
  if (spec.eps != 0.0 && !spec.B1.is_zero()) {
    for (const auto& sp : state_samples(spec, u_max)) {
      rho = std::max(rho, spectral_radius(spec.B0 + spec.eps * eval_coefficient(spec.B1, sp.view())));
    }
  }
  if (rho > 0.0) dt = std::min(dt, cfg.cfl_safety * 2.0 / rho);
  if (!std::isfinite(dt)) dt = cfg.T_final / 100.0;
  return dt;
}

EnergyReport simulate(const SystemSpec& spec, const GridFunction& f, const SimConfig& cfg, const HOperator* op,
                      const Observer& observer) {
  spec.validate();
  cfg.validate();
  if (f.s() != spec.s || f.n() != spec.n) throw DimensionError("initial data does not match the system");
  if (f.N() != cfg.N) throw DimensionError("initial data grid size differs from the configuration");
  EnergyReport rep;
  rep.dealiased = cfg.dealias.value_or(spec.has_perturbation());
  const double initial_max = f.max_norm();
  double dt = choose_dt(spec, cfg, initial_max);
  const auto steps = static_cast<int>(std::ceil(cfg.T_final / dt - 1e-9));
  dt = cfg.T_final / steps;
  rep.dt = dt;

  auto record = [&](double t, const GridFunction& u) {
    rep.times.push_back(t);
    const double l2sq = u.l2_norm_sq();
    rep.l2.push_back(std::sqrt(l2sq));
    rep.hnorm.push_back(op != nullptr ? h_norm_sq(*op, u, t) : l2sq);
    rep.sobolev.push_back(sobolev_norm_sq(u, cfg.sobolev_p));
    rep.maxnorm.push_back(u.max_norm());
    if (observer) observer(t, u);
  };

  GridFunction u = f;
  u.drop_imaginary();
  record(0.0, u);
  for (int k = 1; k <= steps; ++k) {
    const double t0 = (k - 1) * dt;
    bool bad = false;
    try {
      u = step_rk4(spec, u, t0, dt, rep.dealiased);
      u.drop_imaginary();
      const double mx = u.max_norm();
      bad = !std::isfinite(mx) || mx > cfg.blowup_factor * std::max(initial_max, 1e-300);
    } catch (const EvalError&) {
      bad = true;
    }
    rep.steps = k;
    if (bad) {
      rep.blowup = true;
      rep.blowup_time = k * dt;
      break;
    }
    if (k % cfg.record_every == 0 || k == steps) record(k * dt, u);
  }
  rep.final_state = u;

  auto try_fit = [&](const std::vector<double>& v) {
    try {
      return fit_decay_rate(rep.times, v);
    } catch (const PreconditionError&) {
      return RateFit{};
    }
  };
  rep.l2_rate = try_fit(rep.l2);
  rep.hnorm_rate = try_fit(rep.hnorm);
  rep.sobolev_rate = try_fit(rep.sobolev);
  rep.maxnorm_rate = try_fit(rep.maxnorm);

  rep.monotone_H = true;
  rep.contraction_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rep.hnorm.size(); ++i) {
    if (rep.hnorm[i] > rep.hnorm[i - 1]) rep.monotone_H = false;
    if (rep.hnorm[i] > 0.0 && rep.hnorm[i - 1] > 0.0) {
      const double rate = -(std::log(rep.hnorm[i]) - std::log(rep.hnorm[i - 1])) / (rep.times[i] - rep.times[i - 1]);
      rep.contraction_margin = std::min(rep.contraction_margin, rate);
    }
  }
  if (rep.hnorm.size() < 2) rep.contraction_margin = 0.0;
  return rep;
}

GridFunction initial_data(int s, int n, int N, const std::vector<std::string>& exprs) {
  if (static_cast<int>(exprs.size()) != n) throw DimensionError("need one initial-data expression per component");
  std::vector<Expr> parsed;
  for (const auto& e : exprs) parsed.push_back(parse_expr(e, VariableSet::space_only(s)));
  return GridFunction::sample(s, n, N, [&](std::span<const double> x) {
    CVector v(n);
    for (int c = 0; c < n; ++c) v[c] = parsed[static_cast<std::size_t>(c)].eval(EvalPoint{x, 0.0, {}, 0.0});
    return v;
  });
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const EnergyReport& rep, const std::vector<std::string>& extra_names,
               const std::vector<std::vector<double>>& extra_columns) {
  if (extra_names.size() != extra_columns.size()) throw DimensionError("extra column names and data differ");
  for (const auto& col : extra_columns) {
    if (col.size() != rep.times.size()) throw DimensionError("extra column length differs from the time series");
  }
  std::string line = "t,l2,hnorm,sobolev_p,maxnorm";
  for (const auto& name : extra_names) line += "," + name;
  os << line << '\n';
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    line = format_double(rep.times[i]) + "," + format_double(rep.l2[i]) + "," + format_double(rep.hnorm[i]) + "," +
           format_double(rep.sobolev[i]) + "," + format_double(rep.maxnorm[i]);
    for (const auto& col : extra_columns) line += "," + format_double(col[i]);
    os << line << '\n';
  }
}

}  // namespace hypstab
