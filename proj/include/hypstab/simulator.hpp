#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hypstab/grid.hpp"
#include "hypstab/pdo.hpp"
#include "hypstab/symbol.hpp"

namespace hypstab {

struct SimConfig {
  int N = 64;
  double dt = 0.0;  // 0 selects cfl_safety * dx / (max wave speed), capped by the damping scale
  double T_final = 10.0;
  double cfl_safety = 0.5;
  std::optional<bool> dealias;  // default: on when eps > 0
  int sobolev_p = 2;
  int record_every = 1;
  double blowup_factor = 1e6;

  /// Throws PreconditionError on invalid settings.
  void validate() const;
};

/// Slope of log(value) by least squares with its RMS residual.
struct RateFit {
  double slope = 0.0;
  double residual = 0.0;
  int samples = 0;
  bool valid = false;
};

/// Which part of a series enters the fit: the last `tail` fraction, never the first `skip` fraction.
struct FitWindow {
  double skip = 0.1;
  double tail = 0.5;
};

/// Least-squares slope of log(values). Requires >= 8 samples in the window and positive values
/// there (PreconditionError otherwise).
[[nodiscard]] RateFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                                     const FitWindow& window = {});

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> l2;       // |u|
  std::vector<double> hnorm;    // (u, H u); H = I without an operator
  std::vector<double> sobolev;  // |u|_p^2
  std::vector<double> maxnorm;
  RateFit l2_rate;
  RateFit hnorm_rate;
  RateFit sobolev_rate;
  RateFit maxnorm_rate;
  bool monotone_H = false;           // (u, H u) non-increasing at every recorded step
  double contraction_margin = 0.0;   // min over samples of -d/dt log (u, H u)
  bool blowup = false;
  double blowup_time = 0.0;
  double dt = 0.0;
  int steps = 0;
  bool dealiased = false;
  GridFunction final_state;
};

/// Called at t = 0 and at every recorded step.
using Observer = std::function<void(double t, const GridFunction& u)>;

/// sum_nu (A0 + eps A1) du/dx_nu + (B0 + eps B1) u with spectral derivatives and pointwise
/// coefficients; the 2/3 rule is applied to the result when `dealiased`.
[[nodiscard]] GridFunction rhs(const SystemSpec& spec, const GridFunction& u, double t, bool dealiased = false);

/// Classical four-stage Runge-Kutta step.
[[nodiscard]] GridFunction step_rk4(const SystemSpec& spec, const GridFunction& u, double t, double dt,
                                    bool dealiased = false);

/// Largest |eigenvalue| of sum_nu (A0 + eps A1) w'_nu over sampled states and directions.
[[nodiscard]] double max_wave_speed(const SystemSpec& spec, double u_max);

/// Time step from the configuration (explicit dt, or the CFL and damping limits).
[[nodiscard]] double choose_dt(const SystemSpec& spec, const SimConfig& cfg, double u_max);

/// Integrates u_t = P u on [0, T_final], recording monitors. Blowup (max-norm above
/// blowup_factor times the initial value, or NaN) stops the run with the flag set.
[[nodiscard]] EnergyReport simulate(const SystemSpec& spec, const GridFunction& f, const SimConfig& cfg,
                                    const HOperator* op = nullptr, const Observer& observer = {});

/// Samples initial data from expression strings in x1..xs (one per component).
[[nodiscard]] GridFunction initial_data(int s, int n, int N, const std::vector<std::string>& exprs);

/// CSV: t,l2,hnorm,sobolev_p,maxnorm[,extra columns]; LF line ends, 17 significant digits.
/// Extra columns must have one value per recorded time.
void write_csv(std::ostream& os, const EnergyReport& rep, const std::vector<std::string>& extra_names = {},
               const std::vector<std::vector<double>>& extra_columns = {});

/// 17 significant digits, '.' decimal point, independent of the locale.
[[nodiscard]] std::string format_double(double v);

}  // namespace hypstab
