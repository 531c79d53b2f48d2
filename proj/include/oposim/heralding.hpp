#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "oposim/filter_cavity.hpp"
#include "oposim/opo_engine.hpp"
#include "oposim/pump.hpp"

namespace oposim {

// Chain order: OPO output -> tap beam splitter (R to the trigger arm) ->
// filter -> lumped trigger efficiency; signal arm = transmitted (1-R) fraction
// with propagation efficiency eta_s.
struct DetectionChain {
  double tap_r = 0.05;
  double eta_t = 0.07;
  double eta_s = 0.70;
  FilterConfig filter = FilterConfig::symmetric(5.63e8);

  void validate() const;
};

// Acceptance interval of duration T; the trigger mode width equals one grid
// cell. For pulsed pumps the window position is either fixed (offset from the
// pump peak) or scanned to maximize the success probability.
struct TriggerWindow {
  double duration = 0.0;
  double offset = 0.0;
  bool auto_offset = true;
};

struct HeraldScenario {
  enum class Engine { kernels, propagate };

  OpoConfig opo;
  PumpProfile pump = PumpProfile::constant_cw(0.0);
  DetectionChain chain;
  TriggerWindow window;
  Engine engine = Engine::kernels;

  SimulationWindow simulation_window() const;
};

struct TriggerOutcome {
  double time = 0.0;
  double p = 0.0;
  double w = 0.0;
};

struct HeraldResult {
  double w = 0.0;  // probability-weighted Wigner value at the origin
  double p = 0.0;  // total trigger probability
  std::vector<TriggerOutcome> per_trigger;
  ModeFunction mode;
  double window_start = 0.0;  // left edge of the first trigger cell
  long iterations = 0;
  bool converged = true;
  bool low_flux_violation = false;  // P > 0.01: double detections not negligible
};

struct OptimizeOptions {
  long max_iterations = 100000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency
  bool include_random_seed = true;
};

// Precomputed tables for one scenario; shared by evaluation and optimization.
class HeraldEngine {
 public:
  explicit HeraldEngine(const HeraldScenario& scenario);

  const SimulationWindow& grid() const { return window_; }
  const HeraldScenario& scenario() const { return scenario_; }
  int trigger_count() const { return trigger_count_; }
  int trigger_start_cell() const { return start_cell_; }
  bool transient_gain_warning() const { return transient_warning_; }

  // Success probability of one trigger cell (photon number of the effective
  // trigger mode).
  double trigger_photon(int cell) const;

  // OPO-side weight vector of trigger index i in [0, trigger_count), scaled
  // by sqrt(R eta_t) and clipped to the grid.
  Eigen::VectorXd trigger_mode_effective(int index) const;
  // Signal weights sqrt((1-R) eta_s) h on the grid.
  Eigen::VectorXd signal_mode_effective(const ModeFunction& h) const;

  HeraldResult evaluate(const ModeFunction& h) const;
  // Wigner value at the origin of mode h without conditioning.
  double unconditional_wigner(const ModeFunction& h) const;

  ModeFunction candidate_th() const;
  ModeFunction candidate_cah() const;
  ModeFunction candidate_eigenmode() const;
  ModeFunction candidate_spike_comb() const;

  HeraldResult optimize(const OptimizeOptions& options = {}) const;

  // Recompute (W, P) with the trigger rectangles remixed by an orthogonal
  // matrix; the result must match evaluate() for any basis choice.
  std::pair<double, double> rebased_objective(const ModeFunction& h,
                                              const Eigen::MatrixXd& u) const;

  const Eigen::MatrixXd& number_kernel() const { return n_; }
  const Eigen::MatrixXd& anomalous_kernel() const { return m_; }

 private:
  struct TriggerVector {
    int start = 0;
    Eigen::VectorXd values;  // weights on cells [start, start + size)
  };

  TriggerVector trigger_vector(int cell) const;
  double quadratic_form(const TriggerVector& g, const Eigen::MatrixXd& mat) const;
  struct Objective;

  HeraldScenario scenario_;
  SimulationWindow window_;
  Eigen::MatrixXd n_, m_;            // kernel matrices
  Eigen::MatrixXd a_plus_, a_minus_; // I-free quadratic forms 2N +- 2M
  std::vector<double> cell_photon_;  // n_i for every grid cell
  double sigma_s_ = 1.0;             // sqrt((1-R) eta_s)
  double trig_scale_ = 1.0;          // sqrt(R eta_t)
  int start_cell_ = 0;
  int trigger_count_ = 0;
  bool transient_warning_ = false;
};

// Convenience wrappers constructing a fresh engine.
HeraldResult evaluate(const HeraldScenario& scenario, const ModeFunction& h);
ModeFunction candidate_th(const HeraldScenario& scenario);
ModeFunction candidate_cah(const HeraldScenario& scenario);
HeraldResult optimize_mode(const HeraldScenario& scenario, const OptimizeOptions& options = {});
std::pair<double, double> basis_invariance_check(const HeraldScenario& scenario,
                                                 const ModeFunction& h, const Eigen::MatrixXd& u);

// Root-find the CW squeezing parameter giving the target photon flux in the
// degenerate mode (paper's calibration of z).
double calibrate_cw_z(const OpoConfig& config, double target_flux);

}
