#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hypstab/error.hpp"
#include "hypstab/parallel.hpp"
#include "hypstab/symmetrizer.hpp"
#include "test_support.hpp"

using namespace hypstab;
using testing::mat;
using testing::spec1;

namespace {

// Oracle: eigenvalue range of every stored matrix.
std::pair<double, double> eigen_range(const SymmetrizerTable& t) {
  double lo = 1e300, hi = 0.0;
  for (const auto& e : t.entries()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(e.H);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return {lo, hi};
}

double direct_residual(const SystemSpec& spec, const TableEntry& e, double delta) {
  const CMatrix m = Complex(0.0, e.omega[0]) * spec.A0[0].cast<Complex>() + spec.B0.cast<Complex>();
  const CMatrix x = e.H * m + m.adjoint() * e.H + delta * e.H;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (x + x.adjoint()));
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("scalar damped transport has the identity symbol") {
  const SystemSpec spec = spec1(mat(1, 1, {1}), mat(1, 1, {-1}));
  const auto low = build_lowfreq_table(spec, 2.0, 1.0, 8);
  CHECK(low.size() == 7);
  for (const auto& [w, cert] : low) CHECK(std::abs(cert.H(0, 0) - Complex(1.0, 0.0)) < 1e-14);

  SymmetrizerOptions opts;
  opts.delta = 1.0;
  opts.lattice_radius = 16;
  const SymmetrizerTable t = assemble_symmetrizer(spec, opts);
  CHECK(t.K4() == doctest::Approx(1.0));
  for (const auto& e : t.entries()) CHECK(std::abs(e.H(0, 0) - Complex(1.0, 0.0)) < 1e-13);
  CHECK(t.checks().all());
}

TEST_CASE("symmetric system table") {
  const SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-2, 0, 0, -1}));
  SymmetrizerOptions opts;
  opts.delta = 1.0;
  opts.lattice_radius = 32;
  const SymmetrizerTable t = assemble_symmetrizer(spec, opts);
  CHECK(t.route() == AsymptoticRoute::kSymmetric);
  const auto [lo, hi] = eigen_range(t);
  CHECK(lo >= 1.0 / t.K4() - 1e-12);
  CHECK(hi <= t.K4() + 1e-12);
  CHECK(std::isfinite(t.K4()));
  CHECK(t.checks().property2);
  CHECK(t.checks().property3);
  CHECK(t.checks().property4);
  CHECK(t.checks().property5);
  CHECK(t.checks().blockdiag);
  for (const auto& e : t.entries()) CHECK(direct_residual(spec, e, 1.0) <= 1e-9 * e.lambda_max);
}

TEST_CASE("non-normal damping table") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 10, 0, -1}));
  SymmetrizerOptions opts;
  opts.delta = 1.0;
  opts.lattice_radius = 24;
  const SymmetrizerTable t = assemble_symmetrizer(spec, opts);
  CHECK(t.route() == AsymptoticRoute::kGeneral);
  CHECK(std::isfinite(t.K4()));
  CHECK(t.K4() > 10.0);
  const auto [lo, hi] = eigen_range(t);
  CHECK(hi == doctest::Approx(t.K4()).epsilon(1e-12));
  CHECK(t.checks().all());
  for (const auto& e : t.entries()) CHECK(direct_residual(spec, e, 1.0) <= 1e-9 * e.lambda_max);
  // The cut-off switches the asymptotic symbol on inside the lattice.
  CHECK(t.cutoff() < 24.0);
  for (const auto& e : t.entries()) {
    if (e.abs_omega > t.cutoff()) CHECK(e.asymptotic);
  }
}

TEST_CASE("auto cut-off is the smallest admissible integer") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 0.9, 0.9, -1}));
  const double delta = 0.05;
  const double c = auto_cutoff(spec, delta, 32, 2, AsymptoticRoute::kSymmetric);
  for (double dir : {1.0, -1.0}) {
    const BlockForm bf = asymptotic_block_form(spec, testing::vec({dir}), delta, AsymptoticRoute::kSymmetric);
    for (int w = static_cast<int>(c) + 1; w <= 32; ++w) CHECK(asymptotic_residual(bf, w, delta) <= 0.0);
  }
  if (c > 1.0) {
    bool fails_below = false;
    for (double dir : {1.0, -1.0}) {
      const BlockForm bf = asymptotic_block_form(spec, testing::vec({dir}), delta, AsymptoticRoute::kSymmetric);
      fails_below = fails_below || asymptotic_residual(bf, c, delta) > 0.0 || asymptotic_threshold(bf, delta) > c;
    }
    CHECK(fails_below);
  }
}

TEST_CASE("random symmetric systems have certified tables") {
  std::mt19937 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 3;
    Matrix a = Matrix::Zero(n, n), r(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) r(i, j) = g(rng);
    }
    a = r + r.transpose();
    Matrix b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b(i, j) = g(rng);
    }
    b = (0.5 * (b + b.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    b -= (es.eigenvalues().maxCoeff() + 1.0) * Matrix::Identity(n, n);
    const SystemSpec spec = spec1(a, b);
    SymmetrizerOptions opts;
    opts.delta = 1.0;
    opts.lattice_radius = 16;
    const SymmetrizerTable t = assemble_symmetrizer(spec, opts);
    const auto [lo, hi] = eigen_range(t);
    CHECK(lo >= 1.0 / t.K4() - 1e-12);
    CHECK(hi <= t.K4() + 1e-12);
    CHECK(t.checks().property4);
  }
}

TEST_CASE("failing system cannot be certified") {
  const SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), Matrix::Zero(2, 2));
  SymmetrizerOptions opts;
  opts.lattice_radius = 4;
  CHECK_THROWS_AS((void)assemble_symmetrizer(spec, opts), ConstructionError);
  CHECK_THROWS_AS((void)build_lowfreq_table(spec, 2.0, 1.0, 4), PreconditionError);
}

TEST_CASE("serialization round trip") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 0.5, 0.5, -1}));
  SymmetrizerOptions opts;
  opts.delta = 0.4;
  opts.lattice_radius = 8;
  const SymmetrizerTable t = assemble_symmetrizer(spec, opts);
  std::stringstream ss;
  t.write(ss);
  const std::string text = ss.str();
  const SymmetrizerTable back = SymmetrizerTable::read(ss);
  CHECK(back.K4() == t.K4());
  CHECK(back.cutoff() == t.cutoff());
  REQUIRE(back.entries().size() == t.entries().size());
  for (std::size_t i = 0; i < t.entries().size(); ++i) CHECK(back.entries()[i].H == t.entries()[i].H);
  std::stringstream again;
  back.write(again);
  CHECK(again.str() == text);

  std::stringstream broken(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS((void)SymmetrizerTable::read(broken), Error);
}

TEST_CASE("parallel and serial builds are identical") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 10, 0, -1}));
  SymmetrizerOptions opts;
  opts.lattice_radius = 12;
  set_thread_count(1);
  std::stringstream a, b;
  assemble_symmetrizer(spec, opts).write(a);
  set_thread_count(4);
  assemble_symmetrizer(spec, opts).write(b);
  set_thread_count(1);
  CHECK(a.str() == b.str());
}

TEST_CASE("table factories and lookup") {
  const SymmetrizerTable id = SymmetrizerTable::identity(1, 2, 4);
  CHECK(id.K4() == 1.0);
  CHECK(id.H({-4}) == CMatrix::Identity(2, 2));
  CHECK_THROWS_AS((void)id.H({5}), PreconditionError);
  const SymmetrizerTable two = SymmetrizerTable::from_function(2, 1, 2, [](const std::vector<int>& w) {
    return CMatrix::Constant(1, 1, Complex(1.0 + w[0] * w[0] + w[1] * w[1], 0.0));
  });
  CHECK(two.H({2, -1})(0, 0).real() == 6.0);
  CHECK(two.K4() == 9.0);
  CHECK(two.entries().size() == 25);
}
