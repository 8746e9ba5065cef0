#include "hypstab/pdo.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "hypstab/error.hpp"

namespace hypstab {

namespace {

std::vector<int> primitive(const std::vector<int>& omega) {
  int g = 0;
  for (int v : omega) g = std::gcd(g, std::abs(v));
  std::vector<int> out(omega);
  for (int& v : out) v /= g;
  return out;
}

GridFunction zero_like(const GridFunction& u) { return GridFunction(u.s(), u.n(), u.N()); }

}  // namespace

HOperator HOperator::constant(SymmetrizerTable table) {
  HOperator op;
  op.table_ = std::move(table);
  return op;
}

HOperator HOperator::frozen(SymmetrizerTable table, SystemSpec spec) {
  if (table.s() != spec.s || table.n() != spec.n) throw DimensionError("table and system dimensions differ");
  HOperator op;
  op.mode_ = Mode::kFrozen;
  op.table_ = std::move(table);
  op.spec_ = std::move(spec);
  return op;
}

void HOperator::check_shape(const GridFunction& u) const {
  if (u.s() != table_.s() || u.n() != table_.n()) throw DimensionError("grid function does not match the table");
  if (!table_.covers(u.N() / 2 - 1)) throw PreconditionError("symmetrizer table does not cover the grid lattice");
}

GridFunction HOperator::apply_constant(const GridFunction& u) const {
  check_shape(u);
  std::vector<Complex> c = u.fourier();
  const auto n = static_cast<Eigen::Index>(u.n());
  for (std::size_t m = 0; m < u.points(); ++m) {
    Eigen::Map<CVector> block(c.data() + m * static_cast<std::size_t>(n), n);
    if (u.nyquist(m)) {
      block.setZero();
    } else {
      block = table_.H(u.mode(m)) * block;
    }
  }
  return GridFunction::from_fourier(u.s(), u.n(), u.N(), std::move(c));
}

const std::vector<HOperator::DirectionGroup>& HOperator::groups_for(int N) const {
  std::lock_guard lock(*groups_mu_);
  auto it = groups_.find(N);
  if (it != groups_.end()) return it->second;
  std::vector<DirectionGroup> groups;
  std::map<std::vector<int>, std::size_t> index;
  const GridFunction shape(table_.s(), table_.n(), N);
  for (std::size_t m = 0; m < shape.points(); ++m) {
    if (shape.nyquist(m)) continue;
    const auto w = shape.mode(m);
    const TableEntry& e = table_.entry(w);
    if (!(e.phi > 0.0)) continue;
    const auto key = primitive(w);
    auto [slot, inserted] = index.emplace(key, groups.size());
    if (inserted) {
      Vector d(table_.s());
      for (int k = 0; k < table_.s(); ++k) d[k] = key[static_cast<std::size_t>(k)];
      d /= d.norm();
      groups.push_back({d, asymptotic_block_form(*spec_, d, table_.delta(), table_.route()), {}, {}});
    }
    groups[slot->second].modes.push_back(m);
    groups[slot->second].phi.push_back(e.phi);
  }
  return groups_.emplace(N, std::move(groups)).first->second;
}

std::vector<CMatrix> HOperator::frozen_h1_field(const DirectionGroup& g, const GridFunction& state, double t) const {
  std::vector<CMatrix> out(state.points());
  for (std::size_t p = 0; p < state.points(); ++p) {
    const auto x = state.coordinate(p);
    const auto u = state.real_at(p);
    out[p] = frozen_h1(*spec_, g.form, EvalPoint{x, t, u, spec_->eps}).H1;
  }
  return out;
}

GridFunction HOperator::apply(const GridFunction& u, double t, const GridFunction& state) const {
  GridFunction out = apply_constant(u);
  if (mode_ == Mode::kConstant || spec_->eps == 0.0) return out;
  if (!state.same_shape(u)) throw DimensionError("state and argument shapes differ");
  const auto n = static_cast<Eigen::Index>(u.n());
  const auto nn = static_cast<std::size_t>(n);
  const std::vector<Complex> uhat = u.fourier();
  GridFunction sym = zero_like(u);
  for (const DirectionGroup& g : groups_for(u.N())) {
    const std::vector<CMatrix> h1 = frozen_h1_field(g, state, t);
    // H11 u: restrict to the group, weight by phi, then multiply pointwise.
    std::vector<Complex> c(uhat.size(), Complex(0.0, 0.0));
    for (std::size_t k = 0; k < g.modes.size(); ++k) {
      for (std::size_t j = 0; j < nn; ++j) c[g.modes[k] * nn + j] = g.phi[k] * uhat[g.modes[k] * nn + j];
    }
    const GridFunction z = GridFunction::from_fourier(u.s(), u.n(), u.N(), std::move(c));
    // H11^* u: multiply pointwise by H1^* = H1, transform, restrict and weight.
    GridFunction w = zero_like(u);
    for (std::size_t p = 0; p < u.points(); ++p) {
      Eigen::Map<const CVector> zp(z.values().data() + p * nn, n);
      Eigen::Map<const CVector> up(u.values().data() + p * nn, n);
      Eigen::Map<CVector> sp(sym.values().data() + p * nn, n);
      Eigen::Map<CVector> wp(w.values().data() + p * nn, n);
      sp += h1[p] * zp;
      wp = h1[p].adjoint() * up;
    }
    const std::vector<Complex> what = w.fourier();
    std::vector<Complex> back(what.size(), Complex(0.0, 0.0));
    for (std::size_t k = 0; k < g.modes.size(); ++k) {
      for (std::size_t j = 0; j < nn; ++j) back[g.modes[k] * nn + j] = g.phi[k] * what[g.modes[k] * nn + j];
    }
    sym += GridFunction::from_fourier(u.s(), u.n(), u.N(), std::move(back));
  }
  out.axpy(0.5 * spec_->eps, sym);
  return out;
}

GridFunction apply_H(const HOperator& op, const GridFunction& u, double t) { return op.apply(u, t, u); }

Complex h_inner(const HOperator& op, const GridFunction& u, const GridFunction& v, double t,
                const GridFunction& state) {
  if (!u.same_shape(v)) throw DimensionError("grid shapes differ");
  return u.inner(op.apply(v, t, state));
}

Complex h_inner(const HOperator& op, const GridFunction& u, const GridFunction& v, double t) {
  return h_inner(op, u, v, t, zero_like(v));
}

Complex h_inner_fourier(const HOperator& op, const GridFunction& u, const GridFunction& v, double t,
                        const GridFunction& state) {
  if (!u.same_shape(v)) throw DimensionError("grid shapes differ");
  const std::vector<Complex> uhat = u.fourier();
  const auto n = static_cast<Eigen::Index>(u.n());
  const auto nn = static_cast<std::size_t>(n);
  Complex sum(0.0, 0.0);
  if (op.mode() == HOperator::Mode::kConstant) {
    const std::vector<Complex> vhat = v.fourier();
    for (std::size_t m = 0; m < u.points(); ++m) {
      if (u.nyquist(m)) continue;
      Eigen::Map<const CVector> a(uhat.data() + m * nn, n);
      Eigen::Map<const CVector> b(vhat.data() + m * nn, n);
      sum += a.dot(op.table().H(u.mode(m)) * b);
    }
  } else {
    const std::vector<Complex> hv = op.apply(v, t, state).fourier();
    for (std::size_t i = 0; i < uhat.size(); ++i) sum += std::conj(uhat[i]) * hv[i];
  }
  return sum * std::pow(2.0 * std::numbers::pi, u.s());
}

Complex h_inner_fourier(const HOperator& op, const GridFunction& u, const GridFunction& v, double t) {
  return h_inner_fourier(op, u, v, t, zero_like(v));
}

double h_norm_sq(const HOperator& op, const GridFunction& u, double t) {
  const double e = h_inner(op, u, u, t, u).real();
  if (e < -1e-12 * u.l2_norm_sq()) throw ConstructionError("negative H-norm: symmetrizer table is not positive");
  return e;
}

namespace {

Equivalence finish(Equivalence eq, const HOperator& op, double tol) {
  const double k4 = op.table().K4();
  eq.within_K4 = eq.c_low >= 1.0 / k4 - tol && eq.c_high <= k4 + tol;
  return eq;
}

}  // namespace

Equivalence verify_equivalence(const HOperator& op, int N, int probes, std::uint64_t seed, double tol) {
  const int s = op.table().s();
  const int n = op.table().n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Equivalence eq;
  eq.c_low = std::numeric_limits<double>::infinity();
  eq.c_high = 0.0;
  const GridFunction shape(s, n, N);
  for (int k = 0; k < probes; ++k) {
    std::vector<Complex> c(shape.values().size(), Complex(0.0, 0.0));
    for (std::size_t m = 0; m < shape.points(); ++m) {
      if (shape.nyquist(m)) continue;
      for (int j = 0; j < n; ++j) c[m * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = Complex(g(rng), g(rng));
    }
    const GridFunction u = GridFunction::from_fourier(s, n, N, std::move(c));
    const double ratio = h_inner(op, u, u, 0.0).real() / u.l2_norm_sq();
    eq.c_low = std::min(eq.c_low, ratio);
    eq.c_high = std::max(eq.c_high, ratio);
    ++eq.probes;
  }
  return finish(eq, op, tol);
}

Equivalence single_mode_equivalence(const HOperator& op, int N, double tol) {
  const int s = op.table().s();
  const int n = op.table().n();
  Equivalence eq;
  eq.c_low = std::numeric_limits<double>::infinity();
  eq.c_high = 0.0;
  const GridFunction shape(s, n, N);
  for (std::size_t m = 0; m < shape.points(); ++m) {
    if (shape.nyquist(m)) continue;
    // eigenvectors of H(w) make each probe ratio an eigenvalue
    Eigen::SelfAdjointEigenSolver<CMatrix> es(op.table().H(shape.mode(m)));
    for (int j = 0; j < n; ++j) {
      std::vector<Complex> c(shape.values().size(), Complex(0.0, 0.0));
      for (int i = 0; i < n; ++i) c[m * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = es.eigenvectors()(i, j);
      const GridFunction u = GridFunction::from_fourier(s, n, N, std::move(c));
      const double ratio = h_inner(op, u, u, 0.0).real() / u.l2_norm_sq();
      eq.c_low = std::min(eq.c_low, ratio);
      eq.c_high = std::max(eq.c_high, ratio);
      ++eq.probes;
    }
  }
  return finish(eq, op, tol);
}

}  // namespace hypstab
