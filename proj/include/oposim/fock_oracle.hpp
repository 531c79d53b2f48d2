#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "oposim/errors.hpp"

namespace oposim {

// Small truncated-Fock-space density matrix simulator. Used as an independent
// oracle for the covariance-matrix code paths; not built for performance.
// Quadrature conventions match gaussian_state.hpp (vacuum covariance = I).

enum class GaussianKind { squeeze, two_mode_squeeze, beamsplitter, loss };

struct GaussianOp {
  GaussianKind kind = GaussianKind::squeeze;
  int mode_a = 0;
  int mode_b = 1;   // ignored by single-mode ops
  double value = 0.0;  // z, r, field transmission t, or eta
};

class FockDensity {
 public:
  static FockDensity vacuum(std::vector<int> dims);

  int mode_count() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  const Eigen::MatrixXcd& rho() const { return rho_; }

  double trace() const { return rho_.trace().real(); }
  // Population in the top quarter of any mode's ladder; truncation diagnostic.
  double top_band_mass() const;

  // x-antisqueezing by e^{z}, matching squeeze_map.
  FockDensity squeeze(int mode, double z, double trunc_budget = 1e-6) const;
  // <a1 a2> = cosh(r) sinh(r) > 0 on vacuum, matching the covariance example.
  FockDensity two_mode_squeeze(int mode_a, int mode_b, double r, double trunc_budget = 1e-6) const;
  // b = t a1 + i r a2, matching beamsplitter_map.
  FockDensity beamsplitter(int mode_a, int mode_b, double t, double trunc_budget = 1e-6) const;
  // Real rotation b = cos(theta) a1 + sin(theta) a2.
  FockDensity real_mixer(int mode_a, int mode_b, double theta, double trunc_budget = 1e-6) const;
  // Photon loss with power transmittance eta (exact Kraus form).
  FockDensity loss(int mode, double eta) const;

  // a rho a^dag / tr, the annihilation-operator detection model.
  FockDensity subtract_photon(int mode) const;

  FockDensity partial_trace_keep(const std::vector<int>& modes) const;

  double mean_photon(int mode) const;
  // Wigner function at the origin of one mode (other modes traced out first).
  double wigner_origin(int mode) const;

  std::complex<double> moment_number(int mode_j, int mode_k) const;     // <a_j^dag a_k>
  std::complex<double> moment_anomalous(int mode_j, int mode_k) const;  // <a_j a_k>

  // Covariance matrix in the V-convention over all modes.
  Eigen::MatrixXd covariance() const;

  FockDensity(std::vector<int> dims, Eigen::MatrixXcd rho);

 private:
  std::vector<int> dims_;
  Eigen::MatrixXcd rho_;
};

FockDensity apply_gaussian(const FockDensity& state, const GaussianOp& op,
                           double trunc_budget = 1e-6);

}
