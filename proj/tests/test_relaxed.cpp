#include <cmath>
#include <random>

#include "doctest.h"
#include "hypstab/error.hpp"
#include "hypstab/relaxed.hpp"
#include "test_support.hpp"

using namespace hypstab;
using testing::mat;
using testing::spec1;

TEST_CASE("block transform of a diagonal B0") {
  const RelaxedDecomposition d = block_transform(mat(2, 2, {-1, 0, 0, 0}));
  CHECK(d.r == 1);
  CHECK((d.S - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(d.unitary);
  CHECK(d.B01(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("block transform of a non-symmetric B0") {
  const Matrix b0 = mat(2, 2, {-1, 1, 0, 0});
  const RelaxedDecomposition d = block_transform(b0);
  CHECK(d.r == 1);
  // null vector (1, 1)
  CHECK(std::abs(d.S(0, 1) - d.S(1, 1)) < 1e-14);
  // oracle: direct similarity
  const Matrix t = d.S.inverse() * b0 * d.S;
  CHECK(std::abs(t(0, 1)) < 1e-14);
  CHECK(std::abs(t(1, 0)) < 1e-14);
  CHECK(std::abs(t(1, 1)) < 1e-14);
  CHECK(std::abs(t(0, 0) + 1.0) < 1e-14);
}

TEST_CASE("symmetric B0 gives a unitary transform") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Matrix q = Matrix::NullaryExpr(4, 4, [&]() { return g(rng); });
  q = Eigen::HouseholderQR<Matrix>(q).householderQ();
  const Matrix b0 = q * Vector(testing::vec({-1, -2, 0, 0})).asDiagonal() * q.transpose();
  const RelaxedDecomposition d = block_transform(b0);
  CHECK(d.r == 2);
  CHECK((d.S.transpose() * d.S - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(d.block_residual < 1e-12);
}

TEST_CASE("nonsingular and defective B0") {
  const RelaxedDecomposition d = block_transform(mat(2, 2, {-1, 3, 0, -2}));
  CHECK(d.r == 0);
  CHECK((d.S - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK_THROWS_AS((void)block_transform(mat(2, 2, {0, 1, 0, 0})), ConstructionError);
}

TEST_CASE("B1 structure check") {
  SystemSpec spec = spec1(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {-1, 0, 0, 0}));
  spec.eps = 0.05;
  spec.B1 = testing::coeff(spec, {{"cos(x1)", "0"}, {"0.5", "0"}});
  const auto samples = sample_box(SampleBox{}, 1, 2, 0.05);
  const RelaxedDecomposition d = block_transform(spec.B0);
  CHECK_NOTHROW(verify_b1_structure(spec, d, samples));
  spec.B1 = testing::coeff(spec, {{"1", "1"}, {"1", "1"}});
  CHECK_THROWS_AS(verify_b1_structure(spec, d, samples), ConstructionError);
}

TEST_CASE("projection Q") {
  const RelaxedDecomposition d = block_transform(mat(2, 2, {-1, 0, 0, 0}));
  GridFunction c(1, 2, 16);
  for (std::size_t p = 0; p < c.points(); ++p) {
    c(p, 0) = 3.0;
    c(p, 1) = -2.0;
  }
  QSplit q = project_Q(d, c);
  CHECK(q.u0[0] == doctest::Approx(-2.0));
  CHECK(q.v(5, 0).real() == doctest::Approx(3.0));
  CHECK(std::abs(q.v(5, 1)) < 1e-15);

  const GridFunction s = GridFunction::sample(1, 2, 16, [](std::span<const double> x) {
    CVector v(2);
    v[0] = 0.0;
    v[1] = std::sin(x[0]);
    return v;
  });
  q = project_Q(d, s);
  CHECK(std::abs(q.u0[0]) < 1e-15);

  // idempotence on a random field with a non-symmetric B0
  const RelaxedDecomposition e = block_transform(mat(2, 2, {-1, 1, 0, 0}));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  GridFunction u(1, 2, 16);
  for (auto& z : u.values()) z = g(rng);
  const QSplit once = project_Q(e, u);
  GridFunction qu = u;
  qu -= once.v;  // Q u
  const QSplit twice = project_Q(e, qu);
  CHECK((twice.u0 - once.u0).norm() < 1e-14);
  double err = 0.0;
  for (const auto& z : twice.v.values()) err = std::max(err, std::abs(z));
  CHECK(err < 1e-14);
}

TEST_CASE("decoupled means stay constant") {
  const SystemSpec spec = spec1(mat(2, 2, {1, 0, 0, -0.5}), mat(2, 2, {-1, 0, 0, 0}));
  const GridFunction f = initial_data(1, 2, 32, {"1 + sin(x1)", "0.75"});
  SimConfig cfg;
  cfg.N = 32;
  cfg.T_final = 8.0;
  const RelaxedReport rep = simulate_relaxed(spec, f, cfg);
  CHECK(rep.dec.r == 1);
  CHECK(rep.drift < 1e-14);
  CHECK(rep.limit[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(rep.v_rate.valid);
  CHECK(rep.v_rate.slope == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(rep.dyadic_times.size() == 4);
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  relaxed_columns(rep, names, cols);
  CHECK(names == std::vector<std::string>{"v_norm", "u0_1"});
  CHECK(cols[1].size() == rep.energy.times.size());
}
