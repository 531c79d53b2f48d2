#include "oposim/pump.hpp"

#include <algorithm>

namespace oposim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

OpoConfig OpoConfig::from_power(double t1_sq, double r2_sq, double tau, int samples_per_tau) {
  if (t1_sq < 0.0 || t1_sq > 1.0 || r2_sq < 0.0 || r2_sq > 1.0)
    throw ConfigError("power coefficients must lie in [0, 1]");
  OpoConfig config;
  config.t1 = std::sqrt(t1_sq);
  config.r1 = std::sqrt(1.0 - t1_sq);
  config.r2 = std::sqrt(r2_sq);
  config.t2 = std::sqrt(1.0 - r2_sq);
  config.tau = tau;
  config.samples_per_tau = samples_per_tau;
  config.validate();
  return config;
}

void OpoConfig::validate() const {
  if (std::abs(t1 * t1 + r1 * r1 - 1.0) > 1e-12)
    throw ConfigError("opo: t1^2 + r1^2 differs from 1");
  if (std::abs(t2 * t2 + r2 * r2 - 1.0) > 1e-12)
    throw ConfigError("opo: t2^2 + r2^2 differs from 1");
  if (!(tau > 0.0)) throw ConfigError("opo: round trip time must be positive");
  if (samples_per_tau < 4) throw ConfigError("opo: need at least 4 samples per round trip");
}

PumpProfile PumpProfile::gaussian_pulse(double s, double tp) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("pump: s must be nonnegative");
  if (!(tp > 0.0)) throw ConfigError("pump: pulse width must be positive");
  PumpProfile p;
  p.kind_ = Kind::gaussian_pulse;
  p.s_ = s;
  p.tp_ = tp;
  return p;
}

PumpProfile PumpProfile::constant_cw(double z) {
  if (!(z >= 0.0) || !std::isfinite(z)) throw ConfigError("pump: z must be nonnegative");
  PumpProfile p;
  p.kind_ = Kind::constant_cw;
  p.zc_ = z;
  return p;
}

PumpProfile PumpProfile::tabulated(std::vector<double> z, double t0, double dt) {
  if (z.empty()) throw ConfigError("pump: empty table");
  if (!(dt > 0.0)) throw ConfigError("pump: table step must be positive");
  for (double v : z)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("pump: z samples must be nonnegative");
  PumpProfile p;
  p.kind_ = Kind::tabulated;
  p.table_ = std::move(z);
  p.table_t0_ = t0;
  p.table_dt_ = dt;
  return p;
}

double PumpProfile::cw_z() const {
  if (kind_ != Kind::constant_cw) throw ConfigError("pump: not a cw profile");
  return zc_;
}

double PumpProfile::z(double t, double tau) const {
  switch (kind_) {
    case Kind::gaussian_pulse:
      return 2.0 * s_ * std::sqrt(tau) / (std::pow(kPi, 0.25) * std::sqrt(tp_)) *
             std::exp(-t * t / (2.0 * tp_ * tp_));
    case Kind::constant_cw:
      return zc_;
    case Kind::tabulated: {
      const double u = (t - table_t0_) / table_dt_;
      const int i = static_cast<int>(std::floor(u));
      if (i < 0 || i >= static_cast<int>(table_.size())) return 0.0;
      return table_[i];
    }
  }
  return 0.0;
}

double PumpProfile::z_max(double tau) const {
  switch (kind_) {
    case Kind::gaussian_pulse:
      return z(0.0, tau);
    case Kind::constant_cw:
      return zc_;
    case Kind::tabulated:
      return *std::max_element(table_.begin(), table_.end());
  }
  return 0.0;
}

SimulationWindow SimulationWindow::make(double t_start, double t_end, const OpoConfig& config) {
  if (!(t_end > t_start)) throw ConfigError("window: empty time span");
  SimulationWindow w;
  w.dt = config.dt();
  w.t_start = t_start;
  w.size = static_cast<int>(std::ceil((t_end - t_start) / w.dt - 1e-9));
  w.samples_per_tau = config.samples_per_tau;
  if (w.size < config.samples_per_tau)
    throw ConfigError("window: shorter than one round trip");
  return w;
}

int SimulationWindow::cell(double t) const {
  const int i = static_cast<int>(std::floor((t - t_start) / dt));
  if (i < 0 || i >= size) throw ConfigError("time outside the simulation window");
  return i;
}

SimulationWindow default_pulsed_window(const OpoConfig& config, const PumpProfile& pump,
                                       double two_kappa) {
  if (pump.is_cw()) throw ConfigError("default_pulsed_window needs a pulsed pump");
  double tp = config.tau;  // tabulated fallback scale
  if (pump.kind() == PumpProfile::Kind::gaussian_pulse) tp = pump.pulse_tp();
  const double filter_tail = two_kappa > 0.0 ? 5.0 / two_kappa : 0.0;
  const double t_start = -4.0 * tp - 2.0 * config.tau;
  const double t_end = 4.0 * tp + 15.0 * config.cavity_lifetime() + filter_tail;
  return SimulationWindow::make(t_start, t_end, config);
}

}
