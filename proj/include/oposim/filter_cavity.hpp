#pragma once

#include <Eigen/Dense>

#include "oposim/errors.hpp"
#include "oposim/opo_engine.hpp"

namespace oposim {

// Trigger-arm filter cavity locked to the degenerate frequency. The default
// operating mode is the Lorentzian (small-coupling) limit; the exact comb
// response exists for validation.
struct FilterConfig {
  enum class Mode { lorentzian, exact };

  Mode mode = Mode::lorentzian;
  double kappa1 = 0.0;  // t1^2 / tau_f, s^-1
  double kappa2 = 0.0;

  // exact-mode parameters
  double exact_t1 = 0.0;
  double exact_t2 = 0.0;
  double exact_tau = 0.0;  // filter round trip time, seconds

  static FilterConfig lorentzian(double kappa1, double kappa2);
  // kappa1 = kappa2 = two_kappa / 2 (optimal symmetric coupling).
  static FilterConfig symmetric(double two_kappa);
  static FilterConfig exact(double t1, double t2, double tau_f);

  void validate() const;

  double bandwidth() const { return kappa1 + kappa2; }
  // Mean photon delay, the first moment of the intensity response.
  double mean_photon_delay() const { return 1.0 / (kappa1 + kappa2); }
};

// Back-propagate a post-filter mode onto the filter input:
// h_a(t) = integral_t^inf h(t') sqrt(k1 k2) exp(-(k1+k2)(t'-t)/2) dt'.
// The input is treated as piecewise constant on grid cells and the output is
// the exact cell average, so the sweep is exact for lattice modes. The result
// is not normalized; the missing norm is vacuum.
ModeFunction backpropagate_mode(const FilterConfig& filter, const ModeFunction& h, double dt);

// Lorentzian power transmission 4 k1 k2 / ((k1+k2)^2 + 4 omega^2) at detuning
// omega from resonance.
double transmission_lorentzian(const FilterConfig& filter, double omega);

// Exact-mode comb response (signal part only):
// out(t) = t1 t2 sum_n (r1 r2)^n in(t - (n + 1/4) tau_f).
// Requires tau_f and tau_f/4 to be multiples of the grid step.
Eigen::VectorXd exact_time_response(const FilterConfig& filter, const Eigen::VectorXd& input,
                                    double dt);

// Adjoint of exact_time_response, mapping a post-filter mode onto the input.
Eigen::VectorXd exact_backpropagate(const FilterConfig& filter, const Eigen::VectorXd& h,
                                    double dt);

}
