#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "oposim/gaussian_state.hpp"
#include "oposim/pump.hpp"

namespace oposim {

// Real, discretized temporal mode amplitude on the simulation grid, in units
// of 1/sqrt(second); unit norm means sum h_i^2 dt = 1.
struct ModeFunction {
  Eigen::VectorXd amplitude;

  double norm_squared(double dt) const { return amplitude.squaredNorm() * dt; }
  // Discrete segment weights h_i sqrt(dt).
  Eigen::VectorXd weights(double dt) const { return amplitude * std::sqrt(dt); }
};

ModeFunction normalized(Eigen::VectorXd amplitude, double dt);

// Two-time correlation comb of the OPO output on a grid. Correlations exist
// only at lags that are integer multiples of tau:
//   number(q, i)    = <b^dag(t_i) b(t_i - q tau)>
//   anomalous(q, i) = <b(t_i) b(t_i - q tau)>      (real pump convention)
// stored for q = 0..max_lag; opposite lags follow from symmetry of the
// correlation functions.
struct CorrelationKernels {
  SimulationWindow window;
  int max_lag = 0;
  Eigen::MatrixXd number;
  Eigen::MatrixXd anomalous;
  bool transient_gain_warning = false;

  // <b^dag_i b_j> for grid cells i, j; zero off the comb.
  double number_at(int i, int j) const;
  double anomalous_at(int i, int j) const;
};

// Delta-comb kernels for an arbitrary pump, from the double geometric sums
// over round trips with weights (r1 t2)^{q+2m} and sinh/cosh of partial pump
// sums. Sums are truncated once a term falls below eps_trunc of the running
// total. Throws PhysicsError for a CW pump at or above threshold.
CorrelationKernels kernel_pulsed(const OpoConfig& config, const PumpProfile& pump,
                                 const SimulationWindow& window, double eps_trunc = 1e-12);

// Closed-form CW kernel coefficients per lag q (time independent).
struct CwKernels {
  double tau = 0.0;
  std::vector<double> number;
  std::vector<double> anomalous;

  // Photon flux in the degenerate cavity mode, number[0] / tau.
  double degenerate_flux() const { return number.empty() ? 0.0 : number[0] / tau; }
  CorrelationKernels to_window(const SimulationWindow& window) const;
};

CwKernels kernel_cw(const OpoConfig& config, double z, double eps_trunc = 1e-12);

// CW output spectrum evaluated at the given angular frequencies (relative to
// the degenerate frequency). Maxima sit at omega tau = 2 pi n.
Eigen::VectorXd spectrum_cw(const OpoConfig& config, double z, const Eigen::VectorXd& omega);

// Frequency-domain Bogoliubov response of the CW OPO:
// b(w0+w) = G1 a(w0+w) + g1 a^dag(w0-w) + G2 v(w0+w) + g2 v^dag(w0-w).
struct FrequencyResponse {
  std::complex<double> G1, g1, G2, g2;

  double bogoliubov_residual() const {
    return std::norm(G1) + std::norm(G2) - std::norm(g1) - std::norm(g2) - 1.0;
  }
};

FrequencyResponse frequency_response(const OpoConfig& config, double z, double omega);

// Mean photon number and anomalous moment of a single collective mode.
struct ModeMoments {
  double n = 0.0;
  double m = 0.0;

  // Quadrature variances in V-units (vacuum = 1).
  double var_plus() const { return 1.0 + 2.0 * n + 2.0 * m; }
  double var_minus() const { return 1.0 + 2.0 * n - 2.0 * m; }
};

ModeMoments mode_moments(const CorrelationKernels& kernels, const ModeFunction& h);

// Discrete kernel matrices over the grid, N_ij = <b^dag_i b_j> and
// M_ij = <b_i b_j> (both symmetric, K x K).
Eigen::MatrixXd number_matrix(const CorrelationKernels& kernels);
Eigen::MatrixXd anomalous_matrix(const CorrelationKernels& kernels);

// Most squeezed (sign = -1) or anti-squeezed (sign = +1) temporal mode of the
// output: smallest eigenpair of I + 2N +- 2M, variance in V-units.
struct EigenmodeResult {
  double lambda = 1.0;
  ModeFunction mode;
  bool degenerate = false;
};

EigenmodeResult squeezing_eigenmode(const CorrelationKernels& kernels, int sign);

// Schroedinger-picture propagation of the discretized ring cavity. Returns
// the covariance of the emitted output segments, labeled output/i on the
// window grid. CW pumps start from the intracavity steady state unless
// cw_steady_state_init is cleared, in which case the cavity starts in vacuum
// (finite switch-on history).
struct PropagateOptions {
  bool keep_cavity = false;
  bool cw_steady_state_init = true;
};

struct PropagateResult {
  CovarianceState state;
  SimulationWindow window;
  bool transient_gain_warning = false;
};

PropagateResult propagate(const OpoConfig& config, const PumpProfile& pump,
                          const SimulationWindow& window, const PropagateOptions& options = {});

// (N, M) kernel matrices recovered from a propagated output covariance.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> kernel_matrices_from_state(
    const CovarianceState& state);

}
