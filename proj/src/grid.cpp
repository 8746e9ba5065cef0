#include "hypstab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "hypstab/error.hpp"

namespace hypstab {

namespace {

// Plans are shared between threads; creation is serialized, execution on new arrays is not.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int s, int n, int N, int sign) {
    std::lock_guard lock(mu_);
    const auto key = std::make_tuple(s, n, N, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = static_cast<std::size_t>(n);
    for (int d = 0; d < s; ++d) total *= static_cast<std::size_t>(N);
    std::vector<Complex> scratch(total);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    int dims[2] = {N, N};
    fftw_plan plan = fftw_plan_many_dft(s, dims, n, data, nullptr, n, 1, data, nullptr, n, 1, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw Error("FFTW plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

void execute(std::vector<Complex>& data, int s, int n, int N, int sign) {
  fftw_plan plan = PlanCache::instance().get(s, n, N, sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

bool power_of_two(int v) { return v >= 4 && (v & (v - 1)) == 0; }

}  // namespace

GridFunction::GridFunction(int s, int n, int N) : s_(s), n_(n), N_(N) {
  if (s < 1 || s > 2) throw PreconditionError("grid dimension s must be 1 or 2");
  if (n < 1) throw PreconditionError("grid needs at least one component");
  if (!power_of_two(N)) throw PreconditionError("N must be a power of two >= 4");
  points_ = s == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * static_cast<std::size_t>(N);
  values_.assign(points_ * static_cast<std::size_t>(n), Complex(0.0, 0.0));
}

GridFunction GridFunction::sample(int s, int n, int N, const std::function<CVector(std::span<const double>)>& fn) {
  GridFunction g(s, n, N);
  for (std::size_t p = 0; p < g.points_; ++p) {
    const auto x = g.coordinate(p);
    const CVector v = fn(x);
    if (v.size() != n) throw DimensionError("sampled function returned the wrong number of components");
    for (int c = 0; c < n; ++c) g(p, c) = v[c];
  }
  return g;
}

std::vector<double> GridFunction::coordinate(std::size_t point) const {
  const double h = 2.0 * std::numbers::pi / N_;
  if (s_ == 1) return {h * static_cast<double>(point)};
  return {h * static_cast<double>(point / static_cast<std::size_t>(N_)),
          h * static_cast<double>(point % static_cast<std::size_t>(N_))};
}

std::vector<double> GridFunction::real_at(std::size_t point) const {
  std::vector<double> out(static_cast<std::size_t>(n_));
  for (int c = 0; c < n_; ++c) out[static_cast<std::size_t>(c)] = (*this)(point, c).real();
  return out;
}

bool GridFunction::same_shape(const GridFunction& other) const {
  return s_ == other.s_ && n_ == other.n_ && N_ == other.N_;
}

double GridFunction::imag_fraction() const {
  double im = 0.0, mag = 0.0;
  for (const Complex& z : values_) {
    im = std::max(im, std::abs(z.imag()));
    mag = std::max(mag, std::abs(z));
  }
  return mag == 0.0 ? 0.0 : im / mag;
}

void GridFunction::drop_imaginary() {
  for (Complex& z : values_) z = Complex(z.real(), 0.0);
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (!same_shape(o)) throw DimensionError("grid shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  if (!same_shape(o)) throw DimensionError("grid shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double a) {
  for (Complex& z : values_) z *= a;
  return *this;
}

void GridFunction::axpy(double a, const GridFunction& o) {
  if (!same_shape(o)) throw DimensionError("grid shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * o.values_[i];
}

std::vector<Complex> GridFunction::fourier() const {
  std::vector<Complex> c(values_);
  execute(c, s_, n_, N_, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(points_);
  for (Complex& z : c) z *= scale;
  return c;
}

GridFunction GridFunction::from_fourier(int s, int n, int N, std::vector<Complex> coeffs) {
  GridFunction g(s, n, N);
  if (coeffs.size() != g.values_.size()) throw DimensionError("coefficient array has the wrong size");
  execute(coeffs, s, n, N, FFTW_BACKWARD);
  g.values_ = std::move(coeffs);
  return g;
}

std::vector<int> GridFunction::mode(std::size_t index) const {
  if (s_ == 1) return {wavenumber(static_cast<int>(index))};
  return {wavenumber(static_cast<int>(index / static_cast<std::size_t>(N_))),
          wavenumber(static_cast<int>(index % static_cast<std::size_t>(N_)))};
}

bool GridFunction::nyquist(std::size_t index) const {
  for (int w : mode(index)) {
    if (w == N_ / 2) return true;
  }
  return false;
}

double GridFunction::l2_norm_sq() const {
  double sum = 0.0;
  for (const Complex& z : values_) sum += std::norm(z);
  return sum * std::pow(2.0 * std::numbers::pi / N_, s_);
}

double GridFunction::max_norm() const {
  double out = 0.0;
  for (const Complex& z : values_) out = std::max(out, std::abs(z));
  return out;
}

Complex GridFunction::inner(const GridFunction& v) const {
  if (!same_shape(v)) throw DimensionError("grid shapes differ");
  Complex sum(0.0, 0.0);
  for (std::size_t i = 0; i < values_.size(); ++i) sum += std::conj(values_[i]) * v.values_[i];
  return sum * std::pow(2.0 * std::numbers::pi / N_, s_);
}

GridFunction spectral_derivative(const GridFunction& u, int axis) {
  if (axis < 0 || axis >= u.s()) throw DimensionError("derivative axis out of range");
  std::vector<Complex> c = u.fourier();
  const auto n = static_cast<std::size_t>(u.n());
  for (std::size_t m = 0; m < u.points(); ++m) {
    const Complex factor = u.nyquist(m) ? Complex(0.0, 0.0) : Complex(0.0, u.mode(m)[static_cast<std::size_t>(axis)]);
    for (std::size_t k = 0; k < n; ++k) c[m * n + k] *= factor;
  }
  return GridFunction::from_fourier(u.s(), u.n(), u.N(), std::move(c));
}

GridFunction dealias(const GridFunction& u) {
  std::vector<Complex> c = u.fourier();
  const auto n = static_cast<std::size_t>(u.n());
  for (std::size_t m = 0; m < u.points(); ++m) {
    bool keep = !u.nyquist(m);
    for (int w : u.mode(m)) keep = keep && 3 * std::abs(w) <= u.N();
    if (!keep) {
      for (std::size_t k = 0; k < n; ++k) c[m * n + k] = 0.0;
    }
  }
  return GridFunction::from_fourier(u.s(), u.n(), u.N(), std::move(c));
}

double sobolev_norm_sq(const GridFunction& u, int p) {
  if (p < 0) throw PreconditionError("Sobolev order must be >= 0");
  const std::vector<Complex> c = u.fourier();
  const auto n = static_cast<std::size_t>(u.n());
  double sum = 0.0;
  for (std::size_t m = 0; m < u.points(); ++m) {
    const auto w = u.mode(m);
    // sum over multi-indices |j| <= p of prod w_nu^(2 j_nu)
    double weight = 0.0;
    if (u.s() == 1) {
      const double w2 = static_cast<double>(w[0]) * w[0];
      double term = 1.0;
      for (int j = 0; j <= p; ++j, term *= w2) weight += term;
    } else {
      const double a2 = static_cast<double>(w[0]) * w[0];
      const double b2 = static_cast<double>(w[1]) * w[1];
      double ta = 1.0;
      for (int j1 = 0; j1 <= p; ++j1, ta *= a2) {
        double tb = 1.0;
        for (int j2 = 0; j1 + j2 <= p; ++j2, tb *= b2) weight += ta * tb;
      }
    }
    double mag = 0.0;
    for (std::size_t k = 0; k < n; ++k) mag += std::norm(c[m * n + k]);
    sum += weight * mag;
  }
  return sum * std::pow(2.0 * std::numbers::pi, u.s());
}

}  // namespace hypstab
