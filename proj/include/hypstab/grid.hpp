#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hypstab/linalg.hpp"

namespace hypstab {

/// n-vector field sampled on N^s uniform points of [0, 2pi)^s. Values are stored point-major:
/// value(p, c) lives at index p * n + c, with point index p = i1 * N + i2 for s = 2.
class GridFunction {
 public:
  GridFunction() = default;
  /// Zero field. N must be a power of two >= 4.
  GridFunction(int s, int n, int N);

  /// Samples fn(x) -> n values at every grid point.
  [[nodiscard]] static GridFunction sample(int s, int n, int N,
                                           const std::function<CVector(std::span<const double>)>& fn);

  [[nodiscard]] int s() const { return s_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int N() const { return N_; }
  [[nodiscard]] std::size_t points() const { return points_; }

  [[nodiscard]] Complex& operator()(std::size_t point, int comp) { return values_[point * n_ + comp]; }
  [[nodiscard]] Complex operator()(std::size_t point, int comp) const { return values_[point * n_ + comp]; }
  [[nodiscard]] std::vector<Complex>& values() { return values_; }
  [[nodiscard]] const std::vector<Complex>& values() const { return values_; }

  /// Grid coordinates of a point index.
  [[nodiscard]] std::vector<double> coordinate(std::size_t point) const;
  /// Real parts of the components at a point.
  [[nodiscard]] std::vector<double> real_at(std::size_t point) const;

  [[nodiscard]] bool same_shape(const GridFunction& other) const;
  /// Largest |Im| relative to the largest |value|.
  [[nodiscard]] double imag_fraction() const;
  void drop_imaginary();

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double a);
  /// this += a * o.
  void axpy(double a, const GridFunction& o);

  /// Fourier coefficients u(w) = N^{-s} sum_x u(x) e^{-i<w,x>}, stored in FFT order with the
  /// same point-major layout (mode index in place of point index).
  [[nodiscard]] std::vector<Complex> fourier() const;
  /// Inverse of fourier(): sum_w c(w) e^{i<w,x>}.
  [[nodiscard]] static GridFunction from_fourier(int s, int n, int N, std::vector<Complex> coeffs);

  /// Integer wavenumber of FFT index k (k <= N/2 maps to k, else k - N).
  [[nodiscard]] int wavenumber(int k) const { return k <= N_ / 2 ? k : k - N_; }
  /// Wavenumbers of a mode index.
  [[nodiscard]] std::vector<int> mode(std::size_t index) const;
  /// True for modes outside the centered lattice |w|_inf <= N/2 - 1 (the Nyquist row).
  [[nodiscard]] bool nyquist(std::size_t index) const;

  /// Trapezoidal (2pi/N)^s sum |u|^2.
  [[nodiscard]] double l2_norm_sq() const;
  [[nodiscard]] double max_norm() const;
  /// Trapezoidal (u, v) = (2pi/N)^s sum <u(x), v(x)>, conjugate-linear in u.
  [[nodiscard]] Complex inner(const GridFunction& v) const;

 private:
  int s_ = 1;
  int n_ = 1;
  int N_ = 0;
  std::size_t points_ = 0;
  std::vector<Complex> values_;
};

/// Multiplies each coefficient by i w_axis (Nyquist zeroed) and transforms back.
[[nodiscard]] GridFunction spectral_derivative(const GridFunction& u, int axis);

/// Zeroes all modes with |w_nu| > N/3 for some nu (the 2/3 rule) and the Nyquist row.
[[nodiscard]] GridFunction dealias(const GridFunction& u);

/// Sum over |j| <= p of |D^j u|^2, evaluated on the Fourier side.
[[nodiscard]] double sobolev_norm_sq(const GridFunction& u, int p);

}  // namespace hypstab
