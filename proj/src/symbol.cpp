#include "hypstab/symbol.hpp"

#include <cmath>
#include <numbers>

#include "hypstab/error.hpp"

namespace hypstab {

SystemSpec SystemSpec::constant(std::vector<Matrix> a0, Matrix b0, double delta) {
  SystemSpec spec;
  spec.s = static_cast<int>(a0.size());
  spec.n = static_cast<int>(b0.rows());
  spec.A0 = std::move(a0);
  spec.B0 = std::move(b0);
  spec.delta_candidate = delta;
  const VariableSet vars = spec.variables();
  for (int nu = 0; nu < spec.s; ++nu) spec.A1.push_back(CoefficientMatrix::zero(spec.n, spec.n, vars));
  spec.B1 = CoefficientMatrix::zero(spec.n, spec.n, vars);
  return spec;
}

void SystemSpec::validate() const {
  if (s < 1 || s > 2) throw PreconditionError("space dimension s must be 1 or 2");
  if (n < 1) throw PreconditionError("state dimension n must be positive");
  if (static_cast<int>(A0.size()) != s || static_cast<int>(A1.size()) != s) {
    throw DimensionError("A0 and A1 must each hold s = " + std::to_string(s) + " matrices");
  }
  auto square = [this](Eigen::Index r, Eigen::Index c, const char* what) {
    if (r != n || c != n) {
      throw DimensionError(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
    }
  };
  for (const auto& a : A0) square(a.rows(), a.cols(), "A0");
  square(B0.rows(), B0.cols(), "B0");
  for (const auto& a : A1) square(a.rows(), a.cols(), "A1");
  square(B1.rows(), B1.cols(), "B1");
  if (!(eps >= 0.0)) throw PreconditionError("eps must be >= 0");
  if (!(delta_candidate > 0.0)) throw PreconditionError("delta must be > 0");
}

bool SystemSpec::has_perturbation() const {
  if (eps == 0.0) return false;
  for (const auto& a : A1) {
    if (!a.is_zero()) return true;
  }
  return !B1.is_zero();
}

bool SystemSpec::constant_part_symmetric(double tol) const {
  for (const auto& a : A0) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return (B0 - B0.transpose()).cwiseAbs().maxCoeff() <= tol;
}

FrequencyVector::FrequencyVector(Vector omega) : omega_(std::move(omega)), norm_(omega_.norm()) {}

FrequencyVector FrequencyVector::integer(std::span<const int> omega) {
  Vector v(static_cast<Eigen::Index>(omega.size()));
  for (std::size_t i = 0; i < omega.size(); ++i) v[static_cast<Eigen::Index>(i)] = omega[i];
  return FrequencyVector(std::move(v));
}

FrequencyVector FrequencyVector::of(std::initializer_list<double> omega) {
  Vector v(static_cast<Eigen::Index>(omega.size()));
  Eigen::Index i = 0;
  for (double w : omega) v[i++] = w;
  return FrequencyVector(std::move(v));
}

Vector FrequencyVector::direction() const {
  if (is_zero()) throw PreconditionError("direction of the zero frequency is undefined");
  return omega_ / norm_;
}

Matrix direction_matrix(const SystemSpec& spec, const Vector& direction) {
  if (direction.size() != spec.s) throw DimensionError("frequency has wrong dimension");
  Matrix a = Matrix::Zero(spec.n, spec.n);
  for (int nu = 0; nu < spec.s; ++nu) a += spec.A0[static_cast<std::size_t>(nu)] * direction[nu];
  return a;
}

SymbolMatrix principal_symbol(const SystemSpec& spec, const FrequencyVector& freq) {
  const Matrix a = direction_matrix(spec, freq.omega());
  return {freq, Complex(0.0, 1.0) * a.cast<Complex>()};
}

SymbolMatrix full_symbol(const SystemSpec& spec, const FrequencyVector& freq) {
  SymbolMatrix p = principal_symbol(spec, freq);
  p.value += spec.B0.cast<Complex>();
  return p;
}

SymbolMatrix frozen_perturbed_symbol(const SystemSpec& spec, const EvalPoint& at, const Vector& direction) {
  Matrix a = direction_matrix(spec, direction);
  if (at.eps != 0.0) {
    for (int nu = 0; nu < spec.s; ++nu) {
      const auto& coeff = spec.A1[static_cast<std::size_t>(nu)];
      if (!coeff.is_zero()) a += at.eps * eval_coefficient(coeff, at) * direction[nu];
    }
  }
  return {FrequencyVector(direction), Complex(0.0, 1.0) * a.cast<Complex>()};
}

SymbolMatrix frozen_perturbed_symbol(const SystemSpec& spec, std::span<const double> x, double t,
                                     std::span<const double> u, const Vector& direction) {
  return frozen_perturbed_symbol(spec, EvalPoint{x, t, u, spec.eps}, direction);
}

std::vector<Vector> sphere_directions(int s, int count) {
  std::vector<Vector> out;
  if (s == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    return out;
  }
  if (s != 2) throw PreconditionError("sphere sampling supports s = 1 or 2");
  if (count < 2) throw PreconditionError("need at least two sphere samples");
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / count;
    Vector d(2);
    d << std::cos(theta), std::sin(theta);
    out.push_back(d);
  }
  return out;
}

std::vector<std::vector<int>> lattice_points(int s, int radius) {
  std::vector<std::vector<int>> out;
  if (s == 1) {
    for (int a = -radius; a <= radius; ++a) out.push_back({a});
  } else if (s == 2) {
    for (int a = -radius; a <= radius; ++a) {
      for (int b = -radius; b <= radius; ++b) out.push_back({a, b});
    }
  } else {
    throw PreconditionError("lattice supports s = 1 or 2");
  }
  return out;
}

}  // namespace hypstab
