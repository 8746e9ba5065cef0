#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "hypstab/error.hpp"
#include "hypstab/simulator.hpp"
#include "test_support.hpp"

using namespace hypstab;
using testing::mat;
using testing::spec1;

namespace {

GridFunction one_mode(int N, int k) {
  return GridFunction::sample(1, 1, N, [k](std::span<const double> x) {
    CVector v(1);
    v[0] = std::cos(k * x[0]);
    return v;
  });
}

// Oracle: |exp(t M(w)) c|^2 summed over the modes of the initial data.
double exact_l2_sq(const SystemSpec& spec, const GridFunction& f, double t) {
  const auto c = f.fourier();
  const auto n = static_cast<Eigen::Index>(f.n());
  double sum = 0.0;
  for (std::size_t m = 0; m < f.points(); ++m) {
    const double w = f.mode(m)[0];
    const CMatrix sym = Complex(0.0, w) * spec.A0[0].cast<Complex>() + spec.B0.cast<Complex>();
    const CMatrix e = (t * sym).exp();
    CVector cm(n);
    for (Eigen::Index j = 0; j < n; ++j) cm[j] = c[m * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    sum += (e * cm).squaredNorm();
  }
  return sum * 2.0 * std::numbers::pi;
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.N = 48;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = SimConfig{};
  cfg.T_final = 0.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = SimConfig{};
  cfg.sobolev_p = 40;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}

TEST_CASE("RK4 step equals the truncated exponential series") {
  // u_t = a u_x + b u on a single mode is the scalar ODE with z = dt (i a k + b)
  const SystemSpec spec = spec1(mat(1, 1, {0.7}), mat(1, 1, {-1.3}));
  const int N = 16, k = 3;
  const double dt = 0.05;
  const GridFunction u = one_mode(N, k);
  const GridFunction next = step_rk4(spec, u, 0.0, dt, false);
  const Complex z = dt * Complex(-1.3, 0.7 * k);
  const Complex g = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
  // cos(kx) = Re e^{ikx} and the operator is real
  double err = 0.0;
  for (std::size_t p = 0; p < u.points(); ++p) {
    const Complex e = std::exp(Complex(0.0, k * u.coordinate(p)[0]));
    err = std::max(err, std::abs(next(p, 0) - (g * e).real()));
  }
  CHECK(err < 1e-14);

  const SystemSpec ode = spec1(mat(1, 1, {0.0}), mat(1, 1, {-2.0}));
  GridFunction c(1, 1, N);
  for (auto& v : c.values()) v = 1.0;
  const GridFunction c1 = step_rk4(ode, c, 0.0, 0.1, false);
  const double zz = -0.2;
  CHECK(c1(0, 0).real() == doctest::Approx(1.0 + zz + zz * zz / 2 + zz * zz * zz / 6 + zz * zz * zz * zz / 24).epsilon(1e-15));
}

TEST_CASE("decay fit") {
  std::vector<double> t, y;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    y.push_back(3.0 * std::exp(-0.7 * 0.1 * i));
  }
  const RateFit fit = fit_decay_rate(t, y);
  CHECK(fit.valid);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
  CHECK(fit.samples == 50);
  y[80] = 0.0;
  CHECK_THROWS_AS((void)fit_decay_rate(t, y), PreconditionError);
  CHECK_THROWS_AS((void)fit_decay_rate({0.0, 1.0}, {1.0, 0.5}), PreconditionError);
}

TEST_CASE("damped transport decays at the exact rate") {
  const SystemSpec spec = spec1(mat(1, 1, {1.0}), mat(1, 1, {-1.0}));
  SimConfig cfg;
  cfg.N = 32;
  cfg.T_final = 10.0;
  const EnergyReport rep = simulate(spec, one_mode(32, 2), cfg);
  CHECK_FALSE(rep.blowup);
  CHECK(rep.l2_rate.valid);
  CHECK(rep.l2_rate.slope == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(rep.hnorm_rate.slope == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(rep.monotone_H);
  CHECK(rep.times.back() == doctest::Approx(10.0));
}

TEST_CASE("constant coefficient run matches per-mode exponentials") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -1}), mat(2, 2, {-1, 0.5, 0.5, -1}));
  const GridFunction f = initial_data(1, 2, 32, {"sin(x1) + 0.5*cos(3*x1)", "cos(2*x1)"});
  SimConfig cfg;
  cfg.N = 32;
  cfg.T_final = 4.0;
  cfg.dt = 0.005;
  const EnergyReport rep = simulate(spec, f, cfg);
  for (std::size_t i = 0; i < rep.times.size(); i += 10) {
    const double exact = std::sqrt(exact_l2_sq(spec, f, rep.times[i]));
    CHECK(std::abs(rep.l2[i] - exact) <= 1e-7 * exact);
  }
}

TEST_CASE("grid refinement leaves the rate unchanged") {
  const SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-2, 0, 0, -1}));
  const std::vector<std::string> init = {"sin(x1)", "cos(2*x1)"};
  SimConfig cfg;
  cfg.T_final = 6.0;
  cfg.dt = 0.01;  // same sampling times on both grids
  cfg.N = 32;
  const EnergyReport a = simulate(spec, initial_data(1, 2, 32, init), cfg);
  cfg.N = 64;
  const EnergyReport b = simulate(spec, initial_data(1, 2, 64, init), cfg);
  CHECK(std::abs(a.l2_rate.slope - b.l2_rate.slope) < 1e-3);
}

TEST_CASE("growing system triggers the blowup flag") {
  const SystemSpec spec = spec1(mat(1, 1, {1.0}), mat(1, 1, {2.0}));
  SimConfig cfg;
  cfg.N = 16;
  cfg.T_final = 20.0;
  const EnergyReport rep = simulate(spec, one_mode(16, 1), cfg);
  CHECK(rep.blowup);
  CHECK(rep.blowup_time == doctest::Approx(std::log(1e6) / 2.0).epsilon(0.02));
}

TEST_CASE("nonlinear coefficient is evaluated pointwise") {
  SystemSpec spec = spec1(mat(1, 1, {0.0}), mat(1, 1, {-1.0}));
  spec.eps = 0.5;
  spec.A1 = {CoefficientMatrix::zero(1, 1, spec.variables())};
  spec.B1 = testing::coeff(spec, {{"u1"}});
  GridFunction u(1, 1, 8);
  for (auto& v : u.values()) v = 2.0;
  const GridFunction r = rhs(spec, u, 0.0, false);
  CHECK(r(3, 0).real() == doctest::Approx(-2.0 + 0.5 * 2.0 * 2.0));
}

TEST_CASE("automatic time step") {
  const SystemSpec spec = spec1(mat(1, 1, {4.0}), mat(1, 1, {-1.0}));
  SimConfig cfg;
  cfg.N = 64;
  const double dx = 2.0 * std::numbers::pi / 64;
  CHECK(choose_dt(spec, cfg, 1.0) == doctest::Approx(0.5 * dx / 4.0));
  cfg.dt = 0.01;
  CHECK(choose_dt(spec, cfg, 1.0) == 0.01);
  CHECK(max_wave_speed(spec1(mat(2, 2, {0, 3, 3, 0}), mat(2, 2, {-1, 0, 0, -1})), 1.0) == doctest::Approx(3.0));
}

TEST_CASE("csv output") {
  EnergyReport rep;
  rep.times = {0.0, 0.1};
  rep.l2 = {1.0, 0.5};
  rep.hnorm = {1.0, 0.25};
  rep.sobolev = {2.0, 1.0};
  rep.maxnorm = {1.0, 1.0 / 3.0};
  std::ostringstream os;
  write_csv(os, rep, {"v_norm"}, {{3.0, 4.0}});
  CHECK(os.str() ==
        "t,l2,hnorm,sobolev_p,maxnorm,v_norm\n"
        "0,1,1,2,1,3\n"
        "0.10000000000000001,0.5,0.25,1,0.33333333333333331,4\n");
  CHECK_THROWS_AS(write_csv(os, rep, {"x"}, {{1.0}}), DimensionError);
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
}

TEST_CASE("initial data parsing") {
  const GridFunction f = initial_data(2, 1, 8, {"sin(x1)*cos(x2)"});
  CHECK(f.s() == 2);
  CHECK(f(9, 0).real() == doctest::Approx(std::sin(f.coordinate(9)[0]) * std::cos(f.coordinate(9)[1])));
  CHECK_THROWS((void)initial_data(1, 1, 8, {"u1"}));
  CHECK_THROWS_AS((void)initial_data(1, 2, 8, {"1"}), DimensionError);
}
