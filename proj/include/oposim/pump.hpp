#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oposim/errors.hpp"

namespace oposim {

// Ring-cavity OPO parameters. BS1 is the output coupler, BS2 models the
// intracavity loss placed between the crystal and BS1.
struct OpoConfig {
  double t1 = 0.0;  // field coefficients, t^2 + r^2 = 1 per splitter
  double r1 = 0.0;
  double t2 = 0.0;
  double r2 = 0.0;
  double tau = 2.7e-9;     // round trip time, seconds
  int samples_per_tau = 8; // M; grid step dt = tau / M

  static OpoConfig from_power(double t1_sq, double r2_sq, double tau = 2.7e-9,
                              int samples_per_tau = 8);

  void validate() const;

  double dt() const { return tau / samples_per_tau; }
  // Round-trip survival amplitude of the circulating field.
  double loop_gain() const { return r1 * t2; }
  // Mean photon lifetime in the cavity, tau / (t1^2 + r2^2).
  double cavity_lifetime() const { return tau / (t1 * t1 + r2 * r2); }
};

// Per-round-trip squeezing parameter z(t). Defined on the whole real axis;
// tabulated profiles are zero outside their samples.
class PumpProfile {
 public:
  enum class Kind { gaussian_pulse, constant_cw, tabulated };

  // z(t) = 2 s sqrt(tau) / (pi^{1/4} sqrt(tp)) exp(-t^2 / 2 tp^2), peak at t = 0.
  static PumpProfile gaussian_pulse(double s, double tp);
  static PumpProfile constant_cw(double z);
  static PumpProfile tabulated(std::vector<double> z, double t0, double dt);

  Kind kind() const { return kind_; }
  bool is_cw() const { return kind_ == Kind::constant_cw; }
  double cw_z() const;
  double pulse_s() const { return s_; }
  double pulse_tp() const { return tp_; }

  double z(double t, double tau) const;
  // Largest z over the profile (threshold diagnostics).
  double z_max(double tau) const;

 private:
  PumpProfile() = default;

  Kind kind_ = Kind::constant_cw;
  double s_ = 0.0, tp_ = 0.0;  // gaussian
  double zc_ = 0.0;            // cw
  std::vector<double> table_;  // tabulated
  double table_t0_ = 0.0, table_dt_ = 0.0;
};

// Uniform time grid; samples are cell centers t_i = t_start + (i + 1/2) dt,
// and tau is an integer multiple of dt by construction.
struct SimulationWindow {
  double t_start = 0.0;
  double dt = 0.0;
  int size = 0;
  int samples_per_tau = 0;

  static SimulationWindow make(double t_start, double t_end, const OpoConfig& config);

  double time(int i) const { return t_start + (i + 0.5) * dt; }
  double t_end() const { return t_start + size * dt; }
  double duration() const { return size * dt; }
  // Grid cell containing time t; throws if outside the window.
  int cell(double t) const;
};

// Pulsed-run window sizing: pump support plus OPO and filter ring-down.
// two_kappa may be zero when no filter is present.
SimulationWindow default_pulsed_window(const OpoConfig& config, const PumpProfile& pump,
                                       double two_kappa);

}
