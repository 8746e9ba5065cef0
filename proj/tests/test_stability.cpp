#include <cmath>

#include "doctest.h"
#include "hypstab/stability.hpp"
#include "test_support.hpp"

using namespace hypstab;
using testing::mat;
using testing::spec1;
using testing::vec;

namespace {

// Oracle: dense eigenvalues of the full symbol.
double dense_abscissa(const SystemSpec& spec, double w) {
  const CMatrix m = Complex(0.0, w) * spec.A0[0].cast<Complex>() + spec.B0.cast<Complex>();
  Eigen::ComplexEigenSolver<CMatrix> es(m);
  double out = -1e300;
  for (const Complex& z : es.eigenvalues()) out = std::max(out, z.real());
  return out;
}

}  // namespace

TEST_CASE("strong hyperbolicity") {
  const auto sym = check_strong_hyperbolicity(spec1(mat(2, 2, {0, 1, 1, 0}), Matrix::Zero(2, 2)), 2);
  CHECK(sym.strongly_hyperbolic);
  CHECK(sym.K <= 2.0 + 1e-12);
  const auto jordan = check_strong_hyperbolicity(spec1(mat(2, 2, {0, 1, 0, 0}), Matrix::Zero(2, 2)), 2);
  CHECK_FALSE(jordan.strongly_hyperbolic);
  CHECK_FALSE(jordan.diagnostics.empty());
  const auto diag = check_strong_hyperbolicity(spec1(mat(2, 2, {1, 0, 0, -1}), Matrix::Zero(2, 2)), 2);
  CHECK(diag.strongly_hyperbolic);
  CHECK(diag.K == doctest::Approx(2.0));
  const auto elliptic = check_strong_hyperbolicity(spec1(mat(2, 2, {0, 1, -1, 0}), Matrix::Zero(2, 2)), 2);
  CHECK_FALSE(elliptic.strongly_hyperbolic);
  CHECK(elliptic.imag_defect == doctest::Approx(1.0));
  // Non-symmetric but diagonalizable: finite K above 2.
  const auto skewed = check_strong_hyperbolicity(spec1(mat(2, 2, {1, 5, 0, -1}), Matrix::Zero(2, 2)), 2);
  CHECK(skewed.strongly_hyperbolic);
  CHECK(skewed.K > 2.0);
}

TEST_CASE("eigenvalue condition") {
  const SystemSpec damped = spec1(mat(1, 1, {1}), mat(1, 1, {-1}));
  const auto rep = check_eigenvalue_condition(damped, 16, 1.0);
  CHECK(rep.satisfied);
  CHECK(rep.delta_star == doctest::Approx(1.0));
  CHECK(rep.witnesses.empty());

  const SystemSpec undamped = spec1(mat(2, 2, {0, 1, 1, 0}), Matrix::Zero(2, 2));
  const auto bad = check_eigenvalue_condition(undamped, 8, 0.5);
  CHECK_FALSE(bad.satisfied);
  REQUIRE_FALSE(bad.witnesses.empty());
  CHECK(bad.witnesses.front().omega[0] == 0.0);  // ordered by |w|
  bool zero_listed = false;
  for (const auto& w : bad.witnesses) zero_listed = zero_listed || w.omega[0] == 0.0;
  CHECK(zero_listed);
  CHECK(bad.delta_star == 0.0);

  const SystemSpec mixed = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-2, 0, 0, -1}));
  const auto m = check_eigenvalue_condition(mixed, 32, 0.9);
  CHECK(m.satisfied);
  CHECK(m.asymptotic_abscissa == doctest::Approx(-1.5));
  CHECK(dense_abscissa(mixed, 1e4) == doctest::Approx(-1.5).epsilon(1e-6));
  CHECK(m.delta_star == doctest::Approx(-dense_abscissa(mixed, 0.0)));
}

TEST_CASE("verdict is monotone in delta") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 0.5, 0.5, -1}));
  const auto at = check_eigenvalue_condition(spec, 16, 0.4);
  REQUIRE(at.satisfied);
  for (double d : {0.1, 0.2, 0.3}) CHECK(check_eigenvalue_condition(spec, 16, d).satisfied);
  CHECK(at.delta_star == doctest::Approx(0.5));
  CHECK_FALSE(check_eigenvalue_condition(spec, 16, 0.6).satisfied);
}

TEST_CASE("spectra at w and -w are conjugate") {
  const SystemSpec spec = spec1(mat(3, 3, {1, 2, 0, 0, -1, 1, 0, 0, 2}), mat(3, 3, {-3, 1, 0, 0, -2, 1, 1, 0, -4}));
  for (int w = 1; w <= 10; ++w) CHECK(dense_abscissa(spec, w) == doctest::Approx(dense_abscissa(spec, -w)));
  ConditionOptions half;
  const auto full = check_eigenvalue_condition(spec, 10, 0.1, half);
  SystemSpec mirrored = spec;
  mirrored.A0[0] = -spec.A0[0];
  const auto mir = check_eigenvalue_condition(mirrored, 10, 0.1, half);
  CHECK(full.delta_star == doctest::Approx(mir.delta_star));
}

TEST_CASE("real frequency sweep adds non-integer frequencies") {
  const SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), Matrix::Zero(2, 2));
  ConditionOptions opts;
  opts.real_omega = true;
  opts.real_step = 0.5;
  opts.max_witnesses = 1000;
  const auto rep = check_eigenvalue_condition(spec, 2, 0.1, opts);
  CHECK_FALSE(rep.satisfied);
  int fractional = 0;
  for (const auto& w : rep.witnesses) {
    if (w.note == "lattice" && w.omega[0] != std::round(w.omega[0])) ++fractional;
  }
  CHECK(fractional == 4);
  CHECK(check_eigenvalue_condition(spec1(mat(1, 1, {1}), mat(1, 1, {-1})), 4, 1.0, opts).satisfied);
}

TEST_CASE("relaxed condition") {
  SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-1, 0, 0, 0}));
  spec.eps = 0.05;
  spec.B1 = testing::coeff(spec, {{"cos(x1)", "0"}, {"0.5", "0"}});
  SampleBox box;
  const auto samples = sample_box(box, 1, 2, spec.eps);
  const auto rep = check_relaxed_condition(spec, 32, 0.2, samples);
  CHECK(rep.satisfied);
  CHECK(rep.r == 1);
  CHECK(rep.null_basis.cols() == 1);
  CHECK(rep.relaxed);
  // Oracle: lattice scan over w != 0.
  double worst = -1e300;
  for (int w = -32; w <= 32; ++w) {
    if (w != 0) worst = std::max(worst, dense_abscissa(spec, w));
  }
  worst = std::max(worst, -1.0);
  CHECK(rep.delta_star == doctest::Approx(std::min(-worst, -rep.asymptotic_abscissa)));
  CHECK(rep.asymptotic_abscissa == doctest::Approx(-0.5));

  SystemSpec leak = spec;
  leak.B1 = testing::coeff(spec, {{"1", "1"}, {"1", "1"}});
  const auto bad = check_relaxed_condition(leak, 32, 0.2, samples);
  CHECK_FALSE(bad.satisfied);

  SystemSpec defective = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {0, 1, 0, 0}));
  const auto def = check_relaxed_condition(defective, 8, 0.2, samples);
  CHECK_FALSE(def.satisfied);

  // With a nonsingular B0 the relaxed check coincides with the plain one.
  const SystemSpec plain = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-2, 0, 0, -1}));
  const auto a = check_relaxed_condition(plain, 16, 0.5, samples);
  const auto b = check_eigenvalue_condition(plain, 16, 0.5);
  CHECK(a.r == 0);
  CHECK(a.satisfied == b.satisfied);
  CHECK(a.delta_star == doctest::Approx(b.delta_star));

  const SystemSpec transport = spec1(mat(1, 1, {1}), mat(1, 1, {0}));
  CHECK_FALSE(check_relaxed_condition(transport, 8, 0.1, samples).satisfied);
}

TEST_CASE("zero spectrum classification") {
  const ZeroSpectrum z = zero_spectrum(mat(2, 2, {-1, 0, 0, 1e-3}), 1.0);
  CHECK(z.r == 0);
  CHECK(z.indeterminate.size() == 1);
  const ZeroSpectrum exact = zero_spectrum(mat(2, 2, {-1, 1, 0, 0}), 1.0);
  CHECK(exact.r == 1);
  CHECK(exact.semisimple);
}

TEST_CASE("constant multiplicity") {
  SampleBox box;
  box.count = 8;
  const SystemSpec diag = spec1(mat(2, 2, {1, 0, 0, -1}), -Matrix::Identity(2, 2));
  const auto r1 = check_constant_multiplicity(diag, multiplicity_samples(diag, box, 2));
  CHECK(r1.constant);
  CHECK(r1.signature == std::vector<int>{1, 1});

  const SystemSpec ident = spec1(Matrix::Identity(2, 2), -Matrix::Identity(2, 2));
  const auto r2 = check_constant_multiplicity(ident, multiplicity_samples(ident, box, 2));
  CHECK(r2.constant);
  CHECK(r2.signature == std::vector<int>{2});

  // Crossing: eigenvalues +-i(1 + u1) meet at u1 = -1.
  SystemSpec cross = diag;
  cross.eps = 1.0;
  cross.A1[0] = testing::coeff(cross, {{"u1", "0"}, {"0", "-u1"}});
  std::vector<MultiplicitySample> sweep;
  for (double u : {0.5, 0.0, -0.5, -1.0, -1.5}) {
    MultiplicitySample ms;
    ms.point.x = {0.0};
    ms.point.u = {u, 0.0};
    ms.point.eps = 1.0;
    ms.direction = vec({1.0});
    sweep.push_back(ms);
  }
  const auto r3 = check_constant_multiplicity(cross, sweep);
  CHECK_FALSE(r3.constant);
  // Oracle: direct eigenvalues at u1 = -1 coincide.
  const Matrix a = diag.A0[0] + mat(2, 2, {-1, 0, 0, 1});
  CHECK(a.norm() == 0.0);
}
