#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "oposim/errors.hpp"

namespace oposim {

// Quadrature convention: mode i occupies rows/cols (2i, 2i+1) = (x_i, p_i),
// x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2), and the covariance is
// V = <y y^T> + (<y y^T>)^T so that the vacuum is the identity matrix.

enum class ModeKind { input, cavity, vacuum, output, filter, lost };

std::string to_string(ModeKind kind);

struct ModeLabel {
  ModeKind kind = ModeKind::vacuum;
  int time_index = 0;

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
};

struct ModeLabelLess {
  bool operator()(const ModeLabel& a, const ModeLabel& b) const {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.time_index < b.time_index;
  }
};

// Linear quadrature map y -> S y acting on a listed subset of modes.
struct SymplecticMap {
  Eigen::MatrixXd s;

  int mode_count() const { return static_cast<int>(s.rows()) / 2; }
};

// Standard symplectic form on n modes, block diag of [[0,1],[-1,0]].
Eigen::MatrixXd symplectic_form(int modes);

// Max-norm of S Omega S^T - Omega; zero for exactly symplectic maps.
double symplectic_residual(const SymplecticMap& map);

// Single-mode phase-space rotation by theta (multiplication of a by e^{i theta}).
SymplecticMap rotation_map(double theta);

// Single-mode squeezer with gain e^{z} on x and e^{-z} on p.
SymplecticMap squeeze_map(double z);

// Two-mode map from a complex 2x2 mode-space unitary u:
// (b1, b2)^T = u (a1, a2)^T, each entry w acting as Re(w) I + Im(w) R(pi/2).
SymplecticMap mode_mixer(const Eigen::Matrix2cd& u);

// Beam splitter b = t m1 + i r m2, m2' = i r m1 + t m2; the i phases are
// realized as pi/2 phase-space rotations on the reflected amplitudes.
SymplecticMap beamsplitter_map(double t, double r);

class CovarianceState {
 public:
  CovarianceState() = default;
  CovarianceState(Eigen::MatrixXd v, std::vector<ModeLabel> labels);

  int mode_count() const { return static_cast<int>(labels_.size()); }
  const Eigen::MatrixXd& matrix() const { return v_; }
  const std::vector<ModeLabel>& labels() const { return labels_; }

  // Index of a label; throws ConfigError if absent.
  int index_of(const ModeLabel& label) const;
  bool contains(const ModeLabel& label) const;

  Eigen::Matrix2d block(int mode) const { return v_.block<2, 2>(2 * mode, 2 * mode); }

  // Sorted time indices of all modes of the given kind.
  std::vector<int> time_indices(ModeKind kind) const;

 private:
  Eigen::MatrixXd v_;
  std::vector<ModeLabel> labels_;
};

// All-vacuum state; throws on duplicate labels or n < 1.
CovarianceState make_vacuum(int modes, std::vector<ModeLabel> labels);

// V -> S V S^T on the listed target modes (in map port order).
CovarianceState apply_map(const CovarianceState& state, const SymplecticMap& map,
                          const std::vector<ModeLabel>& targets);

// Pure loss with power transmittance eta on one mode: block -> eta B + (1-eta) I,
// cross covariances scaled by sqrt(eta).
CovarianceState loss_map(const CovarianceState& state, const ModeLabel& target, double eta);

// Remove the listed modes (partial trace).
CovarianceState discard_modes(const CovarianceState& state, const std::vector<ModeLabel>& targets);

// Covariance of (trigger, signal) collective modes built from per-output-mode
// weight vectors, ordered by output time index. Quadratures (1,2) = trigger,
// (3,4) = signal. Weights are the d_i sqrt(dt) coefficients; the signal vector
// must have unit norm, the trigger norm may be below one with the shortfall
// padded by vacuum.
struct JointModePair {
  Eigen::Matrix4d v;
};

JointModePair extract_joint(const CovarianceState& state, const Eigen::VectorXd& trigger_weights,
                            const Eigen::VectorXd& signal_weights);

// Wigner function at the phase-space origin of the signal mode conditioned on
// a photon detection in the trigger mode:
//   W = [V33 V44 (V11+V22-2) - V33 V24^2 - V44 V13^2]
//       / [pi (V33 V44)^{3/2} (V11+V22-2)].
// Throws PhysicsError when the trigger mode carries no photons.
double wigner_origin_conditional(const JointModePair& joint);

// Mean photon number of a single-mode block: (V11 + V22 - 2)/4.
double mean_photon(const Eigen::Matrix2d& block);

// Smallest eigenvalue of V + i Omega; >= -tol for a physical state.
double physicality_margin(const Eigen::MatrixXd& v);

// Smallest modulus among eigenvalues of Omega^{-1} V; >= 1 for physical states.
double symplectic_eigenvalue_min(const Eigen::MatrixXd& v);

bool is_physical(const Eigen::MatrixXd& v, double tol = 1e-9);

}
