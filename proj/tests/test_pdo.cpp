#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hypstab/error.hpp"
#include "hypstab/pdo.hpp"
#include "test_support.hpp"

using namespace hypstab;
using testing::mat;
using testing::spec1;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction trig_field(int N) {
  return GridFunction::sample(1, 2, N, [](std::span<const double> x) {
    CVector v(2);
    v[0] = std::sin(x[0]);
    v[1] = std::cos(2.0 * x[0]);
    return v;
  });
}

GridFunction random_band_limited(int n, int N, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  GridFunction u = GridFunction::sample(1, n, N, [&](std::span<const double> x) {
    CVector v(n);
    for (int j = 0; j < n; ++j) v[j] = g(rng) * std::sin(x[0] + j) + g(rng) * std::cos(3.0 * x[0]);
    return v;
  });
  return u;
}

SystemSpec nonnormal_spec(double eps) {
  SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 0.5, 0.5, -1}));
  spec.eps = eps;
  spec.A1 = {testing::coeff(spec, {{"0", "0.5*sin(x1)"}, {"0.5*sin(x1)", "0"}})};
  spec.B1 = CoefficientMatrix::zero(2, 2, spec.variables());
  return spec;
}

}  // namespace

TEST_CASE("identity table gives the identity operator") {
  const HOperator op = HOperator::constant(SymmetrizerTable::identity(1, 2, 16));
  const GridFunction u = trig_field(32);
  const GridFunction hu = apply_H(op, u, 0.0);
  double err = 0.0;
  for (std::size_t i = 0; i < u.values().size(); ++i) err = std::max(err, std::abs(hu.values()[i] - u.values()[i]));
  CHECK(err < 1e-14);
  CHECK(h_norm_sq(op, u, 0.0) == doctest::Approx(u.l2_norm_sq()).epsilon(1e-14));
}

TEST_CASE("constant multiplier on analytic modes") {
  // H(w) = diag(1 + w^2, 2): H u = (2 sin x, 2 cos 2x), (u, H u) = 2 pi + 2 pi
  const auto table = SymmetrizerTable::from_function(1, 2, 16, [](const std::vector<int>& w) {
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = 1.0 + w[0] * w[0];
    h(1, 1) = 2.0;
    return h;
  });
  const HOperator op = HOperator::constant(table);
  const GridFunction u = trig_field(32);
  const GridFunction hu = apply_H(op, u, 0.0);
  double err = 0.0;
  for (std::size_t p = 0; p < u.points(); ++p) {
    const double x = u.coordinate(p)[0];
    err = std::max(err, std::abs(hu(p, 0) - 2.0 * std::sin(x)));
    err = std::max(err, std::abs(hu(p, 1) - 2.0 * std::cos(2.0 * x)));
  }
  CHECK(err < 1e-13);
  CHECK(h_inner(op, u, u, 0.0).real() == doctest::Approx(4.0 * kPi).epsilon(1e-13));
  CHECK(std::abs(h_inner(op, u, u, 0.0) - h_inner_fourier(op, u, u, 0.0)) < 1e-12);
}

TEST_CASE("table must cover the grid") {
  const HOperator op = HOperator::constant(SymmetrizerTable::identity(1, 1, 4));
  CHECK_THROWS((void)apply_H(op, GridFunction(1, 1, 32), 0.0));
}

TEST_CASE("single-mode probes recover table eigenvalues") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double lo = 1e300, hi = 0.0;
  const auto table = SymmetrizerTable::from_function(1, 2, 16, [&](const std::vector<int>&) {
    CMatrix a(2, 2);
    for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = Complex(g(rng), g(rng));
    CMatrix h = a * a.adjoint() + 0.1 * CMatrix::Identity(2, 2);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    return h;
  });
  for (const auto& e : table.entries()) {
    if (std::abs(e.omega[0]) > 15) continue;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(e.H);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  const HOperator op = HOperator::constant(table);
  const Equivalence eq = single_mode_equivalence(op, 32);
  CHECK(eq.probes == 62);
  CHECK(std::abs(eq.c_low - lo) <= 1e-10 * hi);
  CHECK(std::abs(eq.c_high - hi) <= 1e-10 * hi);
  const Equivalence rnd = verify_equivalence(op, 32, 16, 5);
  CHECK(rnd.c_low >= lo - 1e-10);
  CHECK(rnd.c_high <= hi + 1e-10);
}

TEST_CASE("assembled table norm equivalence") {
  const SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-2, 0, 0, -1}));
  SymmetrizerOptions opts;
  opts.delta = 1.0;
  opts.lattice_radius = 32;
  const HOperator op = HOperator::constant(assemble_symmetrizer(spec, opts));
  const Equivalence eq = verify_equivalence(op, 64, 16, 9);
  CHECK(eq.within_K4);
  CHECK(single_mode_equivalence(op, 64).within_K4);
}

TEST_CASE("frozen mode reduces to constant mode at eps = 0") {
  SystemSpec spec = nonnormal_spec(0.0);
  SymmetrizerOptions opts;
  opts.delta = 0.5;
  opts.lattice_radius = 32;
  const SymmetrizerTable table = assemble_symmetrizer(spec, opts);
  const HOperator c = HOperator::constant(table);
  const HOperator f = HOperator::frozen(table, spec);
  const GridFunction u = random_band_limited(2, 32, 4);
  CHECK(std::abs(h_norm_sq(c, u, 0.0) - h_norm_sq(f, u, 0.0)) < 1e-12 * h_norm_sq(c, u, 0.0));
}

TEST_CASE("frozen operator is self-adjoint on the grid") {
  SystemSpec spec = nonnormal_spec(0.05);
  SymmetrizerOptions opts;
  opts.delta = 0.5;
  opts.lattice_radius = 32;
  const SymmetrizerTable table = assemble_symmetrizer(spec, opts);
  const HOperator op = HOperator::frozen(table, spec);
  const GridFunction u = random_band_limited(2, 32, 11);
  const GridFunction v = random_band_limited(2, 32, 12);
  const GridFunction state = random_band_limited(2, 32, 13);
  const Complex a = h_inner(op, u, v, 0.3, state);
  const Complex b = h_inner(op, v, u, 0.3, state);
  CHECK(std::abs(a - std::conj(b)) < 1e-11 * std::abs(a));
  // eps part is a small correction
  const HOperator c = HOperator::constant(table);
  const double rel = std::abs(h_norm_sq(op, u, 0.0) - h_norm_sq(c, u, 0.0)) / h_norm_sq(c, u, 0.0);
  CHECK(rel > 0.0);
  CHECK(rel < 0.2);
}
