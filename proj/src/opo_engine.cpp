#include "oposim/opo_engine.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace oposim {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_cw_threshold(const OpoConfig& config, double z) {
  if (config.loop_gain() * std::exp(z) >= 1.0)
    throw PhysicsError("cw pump at or above threshold: r1 t2 e^z >= 1");
}

// Partial sums of z along one tau comb, extended before the window so that
// geometric tails are fully resolved.
struct CombPrefix {
  int lead;                  // number of pre-window comb points
  std::vector<double> sum;   // sum[j] = sum of z over comb points 0..j-1 (shifted by lead)

  // Z_n(t) = sum_{k=1}^{n+1} z(t - k tau) for the comb point at index ell
  // (grid cell i = residue + ell * M). Valid for n + 1 <= ell + lead.
  double z_sum(int ell, int n) const {
    const int hi = ell + lead;       // exclusive upper comb point
    const int lo = hi - (n + 1);
    return sum[hi] - sum[lo];
  }
};

}  // namespace

ModeFunction normalized(Eigen::VectorXd amplitude, double dt) {
  const double norm = amplitude.norm() * std::sqrt(dt);
  if (!(norm > 0.0)) throw PhysicsError("mode function has zero norm");
  return ModeFunction{amplitude / norm};
}

double CorrelationKernels::number_at(int i, int j) const {
  if (i < j) std::swap(i, j);
  const int gap = i - j;
  if (gap % window.samples_per_tau != 0) return 0.0;
  const int q = gap / window.samples_per_tau;
  if (q > max_lag) return 0.0;
  return number(q, i);
}

double CorrelationKernels::anomalous_at(int i, int j) const {
  if (i < j) std::swap(i, j);
  const int gap = i - j;
  if (gap % window.samples_per_tau != 0) return 0.0;
  const int q = gap / window.samples_per_tau;
  if (q > max_lag) return 0.0;
  return anomalous(q, i);
}

CorrelationKernels kernel_pulsed(const OpoConfig& config, const PumpProfile& pump,
                                 const SimulationWindow& window, double eps_trunc) {
  config.validate();
  if (eps_trunc <= 0.0) throw ConfigError("kernel truncation must be positive");
  if (pump.is_cw()) check_cw_threshold(config, pump.cw_z());

  const int m_per_tau = window.samples_per_tau;
  const int k = window.size;
  const double x = config.loop_gain();
  const double prefactor =
      config.t1 * config.t1 * config.t2 * config.t2 * (1.0 - x * x);

  // Tail decay per extra round trip; z -> z_floor far before the window.
  const double z_floor = pump.is_cw() ? pump.cw_z() : 0.0;
  const double decay = x * x * std::exp(2.0 * z_floor);
  int sum_cap = 1;
  if (x > 0.0) {
    if (decay >= 1.0) throw PhysicsError("kernel sums diverge: pump gain exceeds loss");
    sum_cap = std::min(100000, static_cast<int>(std::ceil(std::log(eps_trunc) / std::log(decay))) + 2);
  }

  const int window_passes = (k - 1) / m_per_tau;
  int max_lag = 0;
  if (x > 0.0)
    max_lag = std::min(window_passes,
                       static_cast<int>(std::ceil(std::log(eps_trunc) / std::log(x))) + 1);

  CorrelationKernels out;
  out.window = window;
  out.max_lag = max_lag;
  out.number = Eigen::MatrixXd::Zero(max_lag + 1, k);
  out.anomalous = Eigen::MatrixXd::Zero(max_lag + 1, k);
  out.transient_gain_warning = x * std::exp(pump.z_max(config.tau)) >= 1.0;

  const int lead = sum_cap + max_lag + 2;
  for (int residue = 0; residue < m_per_tau; ++residue) {
    const int passes = (k - residue + m_per_tau - 1) / m_per_tau;
    CombPrefix prefix;
    prefix.lead = lead;
    prefix.sum.assign(lead + passes + 1, 0.0);
    for (int j = 0; j < lead + passes; ++j) {
      const double t = window.time(residue) + (j - lead) * config.tau;
      prefix.sum[j + 1] = prefix.sum[j] + pump.z(t, config.tau);
    }

    for (int ell = 0; ell * m_per_tau + residue < k; ++ell) {
      const int i = residue + ell * m_per_tau;
      // All partial sums visible from this cell stay below z_reach, so
      // cosh(2 z_reach) bounds every remaining sinh/cosh product.
      const double z_reach = prefix.sum[ell + lead] - prefix.sum.front();
      const double tail_bound = std::cosh(2.0 * z_reach);
      for (int q = 0; q <= std::min(max_lag, ell); ++q) {
        double num = 0.0, ano = 0.0;
        double weight = (q == 0) ? 1.0 : std::pow(x, q);
        if (weight == 0.0 && q > 0) break;
        for (int m = 0; m < sum_cap; ++m) {
          const double z_late = prefix.z_sum(ell, q + m);        // Z_{q+m}(t_i)
          const double z_early = prefix.z_sum(ell - q, m);       // Z_m(t_i - q tau)
          const double s_early = std::sinh(z_early);
          num += weight * std::sinh(z_late) * s_early;
          ano += weight * std::cosh(z_late) * s_early;
          weight *= x * x;
          const double scale = std::max(std::abs(num), std::abs(ano));
          if (weight * tail_bound < std::max(eps_trunc * scale, 1e-30)) break;
        }
        out.number(q, i) = prefactor * num;
        out.anomalous(q, i) = prefactor * ano;
      }
    }
  }
  return out;
}

CwKernels kernel_cw(const OpoConfig& config, double z, double eps_trunc) {
  config.validate();
  if (!(z >= 0.0) || !std::isfinite(z)) throw ConfigError("cw z must be nonnegative");
  check_cw_threshold(config, z);

  const double x = config.loop_gain();
  const double pref = config.t1 * config.t1 * config.t2 * config.t2 / 4.0;
  const double a = (1.0 - x * x) / (1.0 - x * x * std::exp(2.0 * z));
  const double b = (1.0 - x * x) / (1.0 - x * x * std::exp(-2.0 * z));

  CwKernels out;
  out.tau = config.tau;
  const double ratio = x * std::exp(z);
  int q_max = 0;
  if (x > 0.0 && z > 0.0)
    q_max = static_cast<int>(std::ceil(std::log(eps_trunc) / std::log(ratio))) + 1;
  else if (x > 0.0)
    q_max = static_cast<int>(std::ceil(std::log(eps_trunc) / std::log(x))) + 1;

  for (int q = 0; q <= q_max; ++q) {
    const double xq = (q == 0) ? 1.0 : std::pow(x, q);
    const double gain = a * std::exp((2.0 + q) * z);
    const double anti = b * std::exp(-(2.0 + q) * z);
    out.number.push_back(pref * xq * (gain + anti - std::exp(q * z) - std::exp(-q * z)));
    out.anomalous.push_back(pref * xq * (gain - anti - std::exp(q * z) + std::exp(-q * z)));
    if (q > 0 && std::abs(out.number.back()) < eps_trunc * std::abs(out.number.front())) break;
  }
  return out;
}

CorrelationKernels CwKernels::to_window(const SimulationWindow& window) const {
  CorrelationKernels out;
  out.window = window;
  out.max_lag = std::min(static_cast<int>(number.size()) - 1,
                         (window.size - 1) / window.samples_per_tau);
  out.number = Eigen::MatrixXd::Zero(out.max_lag + 1, window.size);
  out.anomalous = Eigen::MatrixXd::Zero(out.max_lag + 1, window.size);
  for (int q = 0; q <= out.max_lag; ++q) {
    out.number.row(q).setConstant(number[q]);
    out.anomalous.row(q).setConstant(anomalous[q]);
    // Entries whose earlier partner falls before the window never enter
    // comb sums, but keep them stationary for clarity.
  }
  return out;
}

Eigen::VectorXd spectrum_cw(const OpoConfig& config, double z, const Eigen::VectorXd& omega) {
  config.validate();
  check_cw_threshold(config, z);
  const double x = config.loop_gain();
  const double num =
      config.t1 * config.t1 * config.t2 * config.t2 * (1.0 - x * x) * std::sinh(z) * std::sinh(z);
  Eigen::VectorXd out(omega.size());
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const double wt = omega(i) * config.tau;
    const double den = 1.0 + std::pow(x, 4) + 4.0 * x * x * std::cosh(z) * std::cosh(z) +
                       2.0 * x * (x * std::cos(2.0 * wt) -
                                  2.0 * (1.0 + x * x) * std::cosh(z) * std::cos(wt));
    out(i) = num / den;
  }
  return out;
}

FrequencyResponse frequency_response(const OpoConfig& config, double z, double omega) {
  config.validate();
  check_cw_threshold(config, z);
  const std::complex<double> i1(0.0, 1.0);
  const double x = config.loop_gain();
  const std::complex<double> phase = std::exp(i1 * omega * config.tau);
  const std::complex<double> gp = std::exp(z) * phase / (1.0 - x * std::exp(z) * phase);
  const std::complex<double> gm = std::exp(-z) * phase / (1.0 - x * std::exp(-z) * phase);

  FrequencyResponse r;
  const double t1 = config.t1, r1 = config.r1, t2 = config.t2, r2 = config.r2;
  r.G1 = i1 * (r1 - 0.5 * t1 * t1 * t2 * (gp + gm));
  r.G2 = i1 * (t1 * r2 + 0.5 * t1 * r1 * t2 * r2 * (gp + gm));
  r.g1 = -0.5 * t1 * t1 * t2 * (gp - gm);
  r.g2 = 0.5 * t1 * r1 * t2 * r2 * (gp - gm);
  return r;
}

ModeMoments mode_moments(const CorrelationKernels& kernels, const ModeFunction& h) {
  const int k = kernels.window.size;
  if (h.amplitude.size() != k)
    throw ConfigError("mode function does not match the kernel window");
  if (std::abs(h.norm_squared(kernels.window.dt) - 1.0) > 1e-9)
    throw ConfigError("mode function must have unit norm");

  const Eigen::VectorXd u = h.weights(kernels.window.dt);
  const int m_per_tau = kernels.window.samples_per_tau;
  ModeMoments mom;
  for (int q = 0; q <= kernels.max_lag; ++q) {
    double sn = 0.0, sm = 0.0;
    for (int i = q * m_per_tau; i < k; ++i) {
      const double pair = u(i) * u(i - q * m_per_tau);
      sn += pair * kernels.number(q, i);
      sm += pair * kernels.anomalous(q, i);
    }
    const double mult = (q == 0) ? 1.0 : 2.0;
    mom.n += mult * sn;
    mom.m += mult * sm;
  }
  return mom;
}

namespace {

Eigen::MatrixXd comb_matrix(const CorrelationKernels& kernels, const Eigen::MatrixXd& rows) {
  const int k = kernels.window.size;
  const int m_per_tau = kernels.window.samples_per_tau;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (int q = 0; q <= kernels.max_lag; ++q) {
    for (int i = q * m_per_tau; i < k; ++i) {
      const int j = i - q * m_per_tau;
      out(i, j) = rows(q, i);
      out(j, i) = rows(q, i);
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd number_matrix(const CorrelationKernels& kernels) {
  return comb_matrix(kernels, kernels.number);
}

Eigen::MatrixXd anomalous_matrix(const CorrelationKernels& kernels) {
  return comb_matrix(kernels, kernels.anomalous);
}

EigenmodeResult squeezing_eigenmode(const CorrelationKernels& kernels, int sign) {
  if (sign != 1 && sign != -1) throw ConfigError("eigenmode sign must be +1 or -1");
  const int k = kernels.window.size;
  if (k < 2) throw ConfigError("window too small for an eigenmode");

  Eigen::MatrixXd kernel = Eigen::MatrixXd::Identity(k, k);
  kernel += 2.0 * number_matrix(kernels);
  kernel += (2.0 * sign) * anomalous_matrix(kernels);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kernel);
  EigenmodeResult out;
  out.lambda = solver.eigenvalues()(0);
  const double gap = solver.eigenvalues()(1) - solver.eigenvalues()(0);
  out.degenerate = gap < 1e-10 * std::max(1.0, std::abs(out.lambda));
  Eigen::VectorXd u = solver.eigenvectors().col(0);
  // Deterministic sign: largest-magnitude entry positive.
  int imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u(imax) < 0.0) u = -u;
  out.mode = ModeFunction{u / std::sqrt(kernels.window.dt)};
  return out;
}

namespace {

// In-place covariance updates for the propagation loop; all maps used there
// are real mode mixers, so x and p components never couple.

void scale_mode(Eigen::MatrixXd& v, int mode, double sx, double sp) {
  v.row(2 * mode) *= sx;
  v.row(2 * mode + 1) *= sp;
  v.col(2 * mode) *= sx;
  v.col(2 * mode + 1) *= sp;
}

// (m1, m2) -> (a m1 + b m2, c m1 + d m2) with a real 2x2 mode mixer.
void mix_modes(Eigen::MatrixXd& v, int m1, int m2, double a, double b, double c, double d) {
  for (int off = 0; off < 2; ++off) {
    const int r1 = 2 * m1 + off, r2 = 2 * m2 + off;
    Eigen::RowVectorXd tmp = a * v.row(r1) + b * v.row(r2);
    v.row(r2) = c * v.row(r1) + d * v.row(r2);
    v.row(r1) = tmp;
  }
  for (int off = 0; off < 2; ++off) {
    const int c1 = 2 * m1 + off, c2 = 2 * m2 + off;
    Eigen::VectorXd tmp = a * v.col(c1) + b * v.col(c2);
    v.col(c2) = c * v.col(c1) + d * v.col(c2);
    v.col(c1) = tmp;
  }
}

void reset_to_vacuum(Eigen::MatrixXd& v, int mode) {
  v.middleRows<2>(2 * mode).setZero();
  v.middleCols<2>(2 * mode).setZero();
  v(2 * mode, 2 * mode) = 1.0;
  v(2 * mode + 1, 2 * mode + 1) = 1.0;
}

}  // namespace

PropagateResult propagate(const OpoConfig& config, const PumpProfile& pump,
                          const SimulationWindow& window, const PropagateOptions& options) {
  config.validate();
  if (window.samples_per_tau != config.samples_per_tau)
    throw ConfigError("window grid does not match the opo configuration");
  if (pump.is_cw()) check_cw_threshold(config, pump.cw_z());
  if (pump.kind() == PumpProfile::Kind::gaussian_pulse) {
    if (window.t_start > -pump.pulse_tp() || window.t_end() < pump.pulse_tp())
      throw ConfigError("window too short to contain the pump support");
  }

  const int k = window.size;
  const int m_per_tau = config.samples_per_tau;
  const int ring0 = k;          // ring slots [k, k + m_per_tau)
  const int work = k + m_per_tau;
  const int n_modes = k + m_per_tau + 1;
  const double x = config.loop_gain();

  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes);

  const bool steady_init = pump.is_cw() && options.cw_steady_state_init;
  if (steady_init) {
    // Post-squeeze intracavity fixed point per segment.
    const double z = pump.cw_z();
    const double vx = (1.0 - x * x) * std::exp(2.0 * z) / (1.0 - x * x * std::exp(2.0 * z));
    const double vp = (1.0 - x * x) * std::exp(-2.0 * z) / (1.0 - x * x * std::exp(-2.0 * z));
    for (int r = 0; r < m_per_tau; ++r) {
      v(2 * (ring0 + r), 2 * (ring0 + r)) = vx;
      v(2 * (ring0 + r) + 1, 2 * (ring0 + r) + 1) = vp;
    }
  }

  for (int i = 0; i < k; ++i) {
    const int ring = ring0 + i % m_per_tau;
    reset_to_vacuum(v, work);

    if (i < m_per_tau && !steady_init) {
      // Segments already circulating at the window start missed their
      // creation-time squeeze; apply it with z at the BS1 exit time.
      const double z = pump.z(window.time(i) - config.tau, config.tau);
      if (z != 0.0) scale_mode(v, ring, std::exp(z), std::exp(-z));
    }

    // BS2 with a fresh vacuum, then BS1 against the (vacuum) output slot.
    // The mirror phases of the ring are absorbed into real mixers chosen so
    // that successive squeezings add in phase and the output reproduces the
    // analytic delta-comb kernels.
    mix_modes(v, ring, work, -config.t2, config.r2, config.r2, config.t2);
    mix_modes(v, ring, i, -config.r1, config.t1, config.t1, config.r1);

    const double z = pump.z(window.time(i), config.tau);
    if (z != 0.0) scale_mode(v, ring, std::exp(z), std::exp(-z));
  }

  const int kept = options.keep_cavity ? k + m_per_tau : k;
  std::vector<ModeLabel> labels;
  labels.reserve(kept);
  for (int i = 0; i < k; ++i) labels.push_back({ModeKind::output, i});
  if (options.keep_cavity)
    for (int r = 0; r < m_per_tau; ++r) labels.push_back({ModeKind::cavity, r});

  PropagateResult result{
      CovarianceState(v.topLeftCorner(2 * kept, 2 * kept), std::move(labels)), window,
      x * std::exp(pump.z_max(config.tau)) >= 1.0};
  return result;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> kernel_matrices_from_state(
    const CovarianceState& state) {
  std::vector<int> outputs;
  for (int i = 0; i < state.mode_count(); ++i)
    if (state.labels()[i].kind == ModeKind::output) outputs.push_back(i);
  std::sort(outputs.begin(), outputs.end(), [&](int a, int b) {
    return state.labels()[a].time_index < state.labels()[b].time_index;
  });

  const int k = static_cast<int>(outputs.size());
  Eigen::MatrixXd n(k, k), m(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double vxx = state.matrix()(2 * outputs[a], 2 * outputs[b]);
      const double vpp = state.matrix()(2 * outputs[a] + 1, 2 * outputs[b] + 1);
      const double delta = (a == b) ? 1.0 : 0.0;
      n(a, b) = (vxx + vpp - 2.0 * delta) / 4.0;
      m(a, b) = (vxx - vpp) / 4.0;
    }
  }
  return {std::move(n), std::move(m)};
}

}
