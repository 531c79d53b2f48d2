#include "oposim/heralding.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <thread>

namespace oposim {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double conditional_wigner(double x, double y, double b_plus, double b_minus, double d) {
  const double xy = x * y;
  return (xy * d - x * b_minus * b_minus - y * b_plus * b_plus) /
         (kPi * std::pow(xy, 1.5) * d);
}

}  // namespace

void DetectionChain::validate() const {
  if (tap_r < 0.0 || tap_r > 1.0) throw ConfigError("tap reflectance must lie in [0, 1]");
  if (eta_t < 0.0 || eta_t > 1.0) throw ConfigError("trigger efficiency must lie in [0, 1]");
  if (eta_s < 0.0 || eta_s > 1.0) throw ConfigError("signal efficiency must lie in [0, 1]");
  filter.validate();
}

SimulationWindow HeraldScenario::simulation_window() const {
  if (pump.is_cw()) {
    const double margin = 5.0 * opo.cavity_lifetime() + 5.0 / chain.filter.bandwidth() +
                          2.0 * opo.tau;
    return SimulationWindow::make(-margin, window.duration + margin, opo);
  }
  return default_pulsed_window(opo, pump, chain.filter.bandwidth());
}

HeraldEngine::HeraldEngine(const HeraldScenario& scenario)
    : scenario_(scenario), window_(scenario.simulation_window()) {
  scenario_.opo.validate();
  scenario_.chain.validate();

  if (scenario_.engine == HeraldScenario::Engine::kernels) {
    CorrelationKernels kernels =
        scenario_.pump.is_cw()
            ? kernel_cw(scenario_.opo, scenario_.pump.cw_z()).to_window(window_)
            : kernel_pulsed(scenario_.opo, scenario_.pump, window_);
    n_ = number_matrix(kernels);
    m_ = anomalous_matrix(kernels);
    transient_warning_ = kernels.transient_gain_warning;
  } else {
    PropagateResult run = propagate(scenario_.opo, scenario_.pump, window_);
    std::tie(n_, m_) = kernel_matrices_from_state(run.state);
    transient_warning_ = run.transient_gain_warning;
  }
  a_plus_ = 2.0 * (n_ + m_);
  a_minus_ = 2.0 * (n_ - m_);

  sigma_s_ = std::sqrt((1.0 - scenario_.chain.tap_r) * scenario_.chain.eta_s);
  trig_scale_ = std::sqrt(scenario_.chain.tap_r * scenario_.chain.eta_t);

  const int k = window_.size;
  cell_photon_.resize(k);
  for (int c = 0; c < k; ++c) {
    const TriggerVector g = trigger_vector(c);
    cell_photon_[c] = quadratic_form(g, n_);
  }

  trigger_count_ = static_cast<int>(std::lround(scenario_.window.duration / window_.dt));
  if (trigger_count_ < 1) throw ConfigError("trigger window shorter than one grid cell");
  if (trigger_count_ > k) throw ConfigError("trigger window exceeds the simulation window");

  if (scenario_.pump.is_cw()) {
    start_cell_ = window_.cell(0.0);
  } else if (scenario_.window.auto_offset) {
    // Paper's rule: place the acceptance interval to maximize the success
    // probability.
    double best = -1.0;
    int best_start = 0;
    double run = 0.0;
    for (int c = 0; c < trigger_count_; ++c) run += cell_photon_[c];
    for (int start = 0; start + trigger_count_ <= k; ++start) {
      if (run > best * (1.0 + 1e-12)) {
        best = run;
        best_start = start;
      }
      if (start + trigger_count_ < k)
        run += cell_photon_[start + trigger_count_] - cell_photon_[start];
    }
    start_cell_ = best_start;
  } else {
    const double t0 = scenario_.window.offset;
    start_cell_ = static_cast<int>(std::lround((t0 - window_.t_start) / window_.dt));
    start_cell_ = std::clamp(start_cell_, 0, k - trigger_count_);
  }
}

HeraldEngine::TriggerVector HeraldEngine::trigger_vector(int cell) const {
  const FilterConfig& filter = scenario_.chain.filter;
  TriggerVector out;
  if (filter.mode == FilterConfig::Mode::lorentzian) {
    const double gamma = 0.5 * filter.bandwidth();
    const double a = gamma * window_.dt;
    const double decay = std::exp(-a);
    const double cell_avg = (1.0 - decay) / a;
    const double gain = std::sqrt(filter.kappa1 * filter.kappa2) / gamma;

    int len = 2 + static_cast<int>(std::ceil(-std::log(1e-12) / a));
    len = std::min(len, cell + 1);
    out.start = cell - len + 1;
    out.values.resize(len);
    out.values(len - 1) = trig_scale_ * gain * (1.0 - cell_avg);
    double tail = trig_scale_ * gain * (1.0 - decay) * cell_avg;
    for (int d = 1; d < len; ++d) {
      out.values(len - 1 - d) = tail;
      tail *= decay;
    }
  } else {
    Eigen::VectorXd rect = Eigen::VectorXd::Zero(window_.size);
    rect(cell) = 1.0 / std::sqrt(window_.dt);
    Eigen::VectorXd amp = exact_backpropagate(filter, rect, window_.dt);
    out.start = 0;
    out.values = trig_scale_ * std::sqrt(window_.dt) * amp.head(cell + 1);
  }
  return out;
}

double HeraldEngine::quadratic_form(const TriggerVector& g, const Eigen::MatrixXd& mat) const {
  const int len = static_cast<int>(g.values.size());
  return g.values.dot(mat.block(g.start, g.start, len, len) * g.values);
}

double HeraldEngine::trigger_photon(int cell) const {
  if (cell < 0 || cell >= window_.size) throw ConfigError("trigger cell outside the window");
  return cell_photon_[cell];
}

Eigen::VectorXd HeraldEngine::trigger_mode_effective(int index) const {
  if (index < 0 || index >= trigger_count_) throw ConfigError("trigger index outside the window");
  const TriggerVector g = trigger_vector(start_cell_ + index);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(window_.size);
  full.segment(g.start, g.values.size()) = g.values;
  return full;
}

Eigen::VectorXd HeraldEngine::signal_mode_effective(const ModeFunction& h) const {
  if (h.amplitude.size() != window_.size)
    throw ConfigError("mode function does not match the grid");
  return sigma_s_ * h.weights(window_.dt);
}

// Shared evaluation core: the conditional Wigner value of every trigger needs
// only V33, V44 of the (lossy) signal mode and its cross covariances with the
// trigger mode.
struct HeraldEngine::Objective {
  const HeraldEngine* eng;
  std::vector<TriggerVector> triggers;
  std::vector<double> photon;  // n_i per trigger
  double p_total = 0.0;

  explicit Objective(const HeraldEngine& engine) : eng(&engine) {
    Kahan p;
    for (int i = 0; i < engine.trigger_count_; ++i) {
      triggers.push_back(engine.trigger_vector(engine.start_cell_ + i));
      photon.push_back(engine.cell_photon_[engine.start_cell_ + i]);
      p.add(photon.back());
    }
    p_total = p.sum;
  }

  // Mean conditional Wigner value; optionally its gradient with respect to
  // the discrete mode weights and the per-trigger values.
  double eval(const Eigen::VectorXd& u, Eigen::VectorXd* grad,
              std::vector<double>* per_trigger_w = nullptr) const {
    const double ss = eng->sigma_s_;
    const double ss2 = ss * ss;
    const Eigen::VectorXd ap = eng->a_plus_ * u;
    const Eigen::VectorXd am = eng->a_minus_ * u;
    const double x = 1.0 + ss2 * u.dot(ap);
    const double y = 1.0 + ss2 * u.dot(am);
    if (x <= 0.0 || y <= 0.0) throw PhysicsError("signal variance collapsed below vacuum");

    const double rx = 1.0 / x, ry = 1.0 / y;
    const double sxy = std::sqrt(x * y);

    Kahan wp;
    double dx_acc = 0.0, dy_acc = 0.0;
    Eigen::VectorXd wp_plus, wp_minus;
    if (grad) {
      wp_plus = Eigen::VectorXd::Zero(u.size());
      wp_minus = Eigen::VectorXd::Zero(u.size());
    }
    if (per_trigger_w) per_trigger_w->assign(triggers.size(), 0.0);

    for (size_t i = 0; i < triggers.size(); ++i) {
      const double n_i = photon[i];
      if (n_i <= 0.0) continue;
      const double p_i = n_i / p_total;
      const TriggerVector& g = triggers[i];
      const int len = static_cast<int>(g.values.size());
      const double gu = g.values.dot(u.segment(g.start, len));
      const double b_plus = ss * (gu + g.values.dot(ap.segment(g.start, len)));
      const double b_minus = ss * (gu + g.values.dot(am.segment(g.start, len)));
      const double d = 4.0 * n_i;

      const double w_i = conditional_wigner(x, y, b_plus, b_minus, d);
      wp.add(p_i * w_i);
      if (per_trigger_w) (*per_trigger_w)[i] = w_i;

      if (grad) {
        const double inv_sxy = 1.0 / sxy;
        const double dw_dx =
            (-0.5 * inv_sxy * rx +
             (0.5 * b_minus * b_minus * rx * ry + 1.5 * b_plus * b_plus * rx * rx) * inv_sxy / d) /
            kPi;
        const double dw_dy =
            (-0.5 * inv_sxy * ry +
             (0.5 * b_plus * b_plus * rx * ry + 1.5 * b_minus * b_minus * ry * ry) * inv_sxy / d) /
            kPi;
        const double dw_dbp = -2.0 * b_plus * rx * inv_sxy / (kPi * d);
        const double dw_dbm = -2.0 * b_minus * ry * inv_sxy / (kPi * d);
        dx_acc += p_i * dw_dx;
        dy_acc += p_i * dw_dy;
        wp_plus.segment(g.start, len) += (p_i * dw_dbp) * g.values;
        wp_minus.segment(g.start, len) += (p_i * dw_dbm) * g.values;
      }
    }

    if (grad) {
      *grad = (2.0 * ss2 * dx_acc) * ap + (2.0 * ss2 * dy_acc) * am;
      *grad += ss * (wp_plus + eng->a_plus_ * wp_plus);
      *grad += ss * (wp_minus + eng->a_minus_ * wp_minus);
    }
    return wp.sum;
  }
};

HeraldResult HeraldEngine::evaluate(const ModeFunction& h) const {
  if (h.amplitude.size() != window_.size)
    throw ConfigError("mode function does not match the grid");
  if (std::abs(h.norm_squared(window_.dt) - 1.0) > 1e-9)
    throw ConfigError("mode function must have unit norm");

  Objective obj(*this);
  if (obj.p_total <= 0.0) throw PhysicsError("zero trigger probability: conditioning undefined");

  const Eigen::VectorXd u = h.weights(window_.dt);
  std::vector<double> per_w;
  const double w = obj.eval(u, nullptr, &per_w);

  HeraldResult result;
  result.w = w;
  result.p = obj.p_total;
  result.mode = h;
  result.window_start = window_.time(start_cell_) - 0.5 * window_.dt;
  result.low_flux_violation = result.p > 0.01;
  result.per_trigger.reserve(obj.triggers.size());
  for (size_t i = 0; i < obj.triggers.size(); ++i)
    result.per_trigger.push_back(
        {window_.time(start_cell_ + static_cast<int>(i)), obj.photon[i], per_w[i]});
  return result;
}

double HeraldEngine::unconditional_wigner(const ModeFunction& h) const {
  const Eigen::VectorXd u = h.weights(window_.dt);
  const double ss2 = sigma_s_ * sigma_s_;
  const double x = 1.0 + ss2 * u.dot(a_plus_ * u);
  const double y = 1.0 + ss2 * u.dot(a_minus_ * u);
  return 1.0 / (kPi * std::sqrt(x * y));
}

ModeFunction HeraldEngine::candidate_th() const {
  if (scenario_.pump.is_cw()) throw ConfigError("candidate_th needs a pulsed pump");
  const double gamma =
      (scenario_.opo.t1 * scenario_.opo.t1 + scenario_.opo.r2 * scenario_.opo.r2) /
      (2.0 * scenario_.opo.tau);
  const double decay = std::exp(-gamma * window_.dt);
  const double cell_avg = (1.0 - decay) / (gamma * window_.dt);

  Eigen::VectorXd amp(window_.size);
  double edge = 0.0;
  for (int i = 0; i < window_.size; ++i) {
    const double src = scenario_.pump.z(window_.time(i), scenario_.opo.tau) / gamma;
    amp(i) = edge * cell_avg + src * (1.0 - cell_avg);
    edge = edge * decay + src * (1.0 - decay);
  }
  return normalized(std::move(amp), window_.dt);
}

ModeFunction HeraldEngine::candidate_cah() const {
  if (scenario_.pump.is_cw()) throw ConfigError("candidate_cah needs a pulsed pump");
  Eigen::VectorXd amp(window_.size);
  for (int i = 0; i < window_.size; ++i) amp(i) = std::sqrt(std::max(0.0, n_(i, i)));
  return normalized(std::move(amp), window_.dt);
}

ModeFunction HeraldEngine::candidate_eigenmode() const {
  Eigen::MatrixXd kernel =
      Eigen::MatrixXd::Identity(window_.size, window_.size) + a_minus_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kernel);
  Eigen::VectorXd u = solver.eigenvectors().col(0);
  int imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u(imax) < 0.0) u = -u;
  return ModeFunction{u / std::sqrt(window_.dt)};
}

ModeFunction HeraldEngine::candidate_spike_comb() const {
  Eigen::VectorXd envelope(window_.size);
  for (int i = 0; i < window_.size; ++i) envelope(i) = std::sqrt(std::max(0.0, n_(i, i)));
  int peak = 0;
  envelope.maxCoeff(&peak);
  Eigen::VectorXd amp = Eigen::VectorXd::Zero(window_.size);
  for (int i = peak % window_.samples_per_tau; i < window_.size; i += window_.samples_per_tau)
    amp(i) = envelope(i);
  if (amp.maxCoeff() <= 0.0) amp(peak) = 1.0;
  return normalized(std::move(amp), window_.dt);
}

namespace {

struct LocalMinimum {
  Eigen::VectorXd u;
  double value = 0.0;
  long iterations = 0;
  bool converged = false;
};

}  // namespace

HeraldResult HeraldEngine::optimize(const OptimizeOptions& options) const {
  Objective obj(*this);
  if (obj.p_total <= 0.0) throw PhysicsError("zero trigger probability: conditioning undefined");

  std::vector<ModeFunction> seeds;
  if (!scenario_.pump.is_cw()) {
    seeds.push_back(candidate_th());
    seeds.push_back(candidate_cah());
  } else {
    // Two-sided exponential around the trigger window center.
    const double gamma =
        (scenario_.opo.t1 * scenario_.opo.t1 + scenario_.opo.r2 * scenario_.opo.r2) /
        (2.0 * scenario_.opo.tau);
    const double center =
        window_.time(start_cell_) + 0.5 * scenario_.window.duration;
    Eigen::VectorXd amp(window_.size);
    for (int i = 0; i < window_.size; ++i)
      amp(i) = std::exp(-gamma * std::abs(window_.time(i) - center));
    seeds.push_back(normalized(std::move(amp), window_.dt));
  }
  seeds.push_back(candidate_eigenmode());
  seeds.push_back(candidate_spike_comb());
  if (options.include_random_seed) {
    std::mt19937_64 rng(options.seed + 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> normal;
    Eigen::VectorXd amp(window_.size);
    for (int i = 0; i < window_.size; ++i) amp(i) = normal(rng);
    // Smooth over one round trip to stay in the physical band.
    for (int pass = 0; pass < 3; ++pass) {
      Eigen::VectorXd next = amp;
      const int half = window_.samples_per_tau / 2;
      for (int i = 0; i < window_.size; ++i) {
        double acc = 0.0;
        int count = 0;
        for (int j = std::max(0, i - half); j <= std::min(window_.size - 1, i + half); ++j) {
          acc += amp(j);
          ++count;
        }
        next(i) = acc / count;
      }
      amp = next;
    }
    seeds.push_back(normalized(std::move(amp), window_.dt));
  }

  auto minimize = [&](const ModeFunction& seed) {
    LocalMinimum best;
    Eigen::VectorXd u = seed.weights(window_.dt);
    u.normalize();
    Eigen::VectorXd grad(u.size());
    double value = obj.eval(u, &grad);
    double step = 0.1;
    long iter = 0;
    int quiet = 0;
    bool converged = false;
    while (iter < options.max_iterations) {
      ++iter;
      Eigen::VectorXd direction = -(grad - u.dot(grad) * u);
      const double dnorm = direction.norm();
      if (dnorm < 1e-16) {
        converged = true;
        break;
      }
      Eigen::VectorXd trial = (u + step * direction).normalized();
      const double trial_value = obj.eval(trial, nullptr);
      if (trial_value <= value - 1e-4 * step * dnorm * dnorm) {
        const double change = value - trial_value;
        u = trial;
        value = obj.eval(u, &grad);
        step = std::min(step * 1.3, 1e3);
        quiet = change < options.tol ? quiet + 1 : 0;
        if (quiet >= 5) {
          converged = true;
          break;
        }
      } else {
        step *= 0.5;
        if (step < 1e-18) {
          converged = true;
          break;
        }
      }
    }
    best.u = u;
    best.value = value;
    best.iterations = iter;
    best.converged = converged;
    return best;
  };

  int workers = options.workers > 0 ? options.workers
                                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, workers);

  std::vector<LocalMinimum> results(seeds.size());
  if (workers == 1 || seeds.size() == 1) {
    for (size_t i = 0; i < seeds.size(); ++i) results[i] = minimize(seeds[i]);
  } else {
    std::vector<std::future<LocalMinimum>> futures;
    for (size_t i = 0; i < seeds.size(); ++i)
      futures.push_back(std::async(std::launch::async, minimize, seeds[i]));
    for (size_t i = 0; i < seeds.size(); ++i) results[i] = futures[i].get();
  }

  size_t winner = 0;
  for (size_t i = 1; i < results.size(); ++i)
    if (results[i].value < results[winner].value) winner = i;

  Eigen::VectorXd u = results[winner].u;
  int imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u(imax) < 0.0) u = -u;

  HeraldResult result = evaluate(ModeFunction{u / std::sqrt(window_.dt)});
  result.iterations = results[winner].iterations;
  result.converged = results[winner].converged;
  return result;
}

std::pair<double, double> HeraldEngine::rebased_objective(const ModeFunction& h,
                                                          const Eigen::MatrixXd& u_mix) const {
  const int n = trigger_count_;
  if (u_mix.rows() != n || u_mix.cols() != n)
    throw ConfigError("rebasing matrix must match the trigger count");
  if ((u_mix.transpose() * u_mix - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw ConfigError("rebasing matrix is not orthogonal");

  const Eigen::VectorXd u = h.weights(window_.dt);
  const double ss = sigma_s_;
  const Eigen::VectorXd ap = a_plus_ * u;
  const Eigen::VectorXd am = a_minus_ * u;
  const double x = 1.0 + ss * ss * u.dot(ap);
  const double y = 1.0 + ss * ss * u.dot(am);

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(window_.size, n);
  for (int i = 0; i < n; ++i) {
    const TriggerVector g = trigger_vector(start_cell_ + i);
    basis.col(i).segment(g.start, g.values.size()) = g.values;
  }
  const Eigen::MatrixXd mixed = basis * u_mix.transpose();

  Kahan p, wp;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g = mixed.col(i);
    const double n_i = g.dot(n_ * g);
    if (n_i <= 0.0) continue;
    const double b_plus = ss * (g.dot(u) + g.dot(ap));
    const double b_minus = ss * (g.dot(u) + g.dot(am));
    const double w_i = conditional_wigner(x, y, b_plus, b_minus, 4.0 * n_i);
    p.add(n_i);
    wp.add(n_i * w_i);
  }
  if (p.sum <= 0.0) throw PhysicsError("zero trigger probability: conditioning undefined");
  return {wp.sum / p.sum, p.sum};
}

HeraldResult evaluate(const HeraldScenario& scenario, const ModeFunction& h) {
  return HeraldEngine(scenario).evaluate(h);
}

ModeFunction candidate_th(const HeraldScenario& scenario) {
  return HeraldEngine(scenario).candidate_th();
}

ModeFunction candidate_cah(const HeraldScenario& scenario) {
  return HeraldEngine(scenario).candidate_cah();
}

HeraldResult optimize_mode(const HeraldScenario& scenario, const OptimizeOptions& options) {
  return HeraldEngine(scenario).optimize(options);
}

std::pair<double, double> basis_invariance_check(const HeraldScenario& scenario,
                                                 const ModeFunction& h,
                                                 const Eigen::MatrixXd& u) {
  return HeraldEngine(scenario).rebased_objective(h, u);
}

double calibrate_cw_z(const OpoConfig& config, double target_flux) {
  config.validate();
  if (!(target_flux > 0.0)) throw ConfigError("target flux must be positive");
  const double x = config.loop_gain();
  if (!(x < 1.0) || x <= 0.0) throw ConfigError("cw calibration needs 0 < r1 t2 < 1");

  const double z_hi = 0.999 * std::log(1.0 / x);
  if (kernel_cw(config, z_hi).degenerate_flux() < target_flux)
    throw PhysicsError("target flux unreachable below threshold");

  double lo = 0.0, hi = z_hi;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (kernel_cw(config, mid).degenerate_flux() < target_flux)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}
