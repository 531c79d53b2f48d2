#include "oposim/filter_cavity.hpp"

#include <cmath>

namespace oposim {

FilterConfig FilterConfig::lorentzian(double kappa1, double kappa2) {
  FilterConfig f;
  f.mode = Mode::lorentzian;
  f.kappa1 = kappa1;
  f.kappa2 = kappa2;
  f.validate();
  return f;
}

FilterConfig FilterConfig::symmetric(double two_kappa) {
  return lorentzian(0.5 * two_kappa, 0.5 * two_kappa);
}

FilterConfig FilterConfig::exact(double t1, double t2, double tau_f) {
  FilterConfig f;
  f.mode = Mode::exact;
  f.exact_t1 = t1;
  f.exact_t2 = t2;
  f.exact_tau = tau_f;
  f.kappa1 = t1 * t1 / tau_f;
  f.kappa2 = t2 * t2 / tau_f;
  f.validate();
  return f;
}

void FilterConfig::validate() const {
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0)) throw ConfigError("filter rates must be positive");
  if (mode == Mode::exact) {
    if (exact_t1 <= 0.0 || exact_t1 > 1.0 || exact_t2 <= 0.0 || exact_t2 > 1.0)
      throw ConfigError("filter field transmissions must lie in (0, 1]");
    if (!(exact_tau > 0.0)) throw ConfigError("filter round trip time must be positive");
  }
}

ModeFunction backpropagate_mode(const FilterConfig& filter, const ModeFunction& h, double dt) {
  filter.validate();
  const double gamma = 0.5 * (filter.kappa1 + filter.kappa2);
  const double gain = std::sqrt(filter.kappa1 * filter.kappa2) / gamma;
  const double decay = std::exp(-gamma * dt);
  const double cell_avg = (1.0 - decay) / (gamma * dt);

  const Eigen::Index k = h.amplitude.size();
  ModeFunction out;
  out.amplitude.resize(k);
  // Sweep right to left carrying the exact cell-edge value; within a cell of
  // constant h the response integrates in closed form.
  double edge = 0.0;  // h_a at the right edge of the current cell
  for (Eigen::Index i = k - 1; i >= 0; --i) {
    const double src = gain * h.amplitude(i);
    out.amplitude(i) = edge * cell_avg + src * (1.0 - cell_avg);
    edge = edge * decay + src * (1.0 - decay);
  }
  return out;
}

double transmission_lorentzian(const FilterConfig& filter, double omega) {
  filter.validate();
  const double sum = filter.kappa1 + filter.kappa2;
  return 4.0 * filter.kappa1 * filter.kappa2 / (sum * sum + 4.0 * omega * omega);
}

namespace {

// Grid layout of the exact comb: full round trips and the quarter-trip lead.
struct CombSteps {
  int round_trip;
  int quarter;
};

CombSteps comb_steps(const FilterConfig& filter, double dt) {
  if (filter.mode != FilterConfig::Mode::exact)
    throw ConfigError("exact filter response requires exact mode");
  const double steps = filter.exact_tau / dt;
  const double quarter = steps / 4.0;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps ||
      std::abs(quarter - std::round(quarter)) > 1e-9 * std::max(1.0, quarter))
    throw ConfigError("filter round trip (and tau_f/4) must be grid multiples");
  return {static_cast<int>(std::round(steps)), static_cast<int>(std::round(quarter))};
}

}  // namespace

Eigen::VectorXd exact_time_response(const FilterConfig& filter, const Eigen::VectorXd& input,
                                    double dt) {
  const CombSteps steps = comb_steps(filter, dt);
  const double r1 = std::sqrt(1.0 - filter.exact_t1 * filter.exact_t1);
  const double r2 = std::sqrt(1.0 - filter.exact_t2 * filter.exact_t2);
  const double echo = r1 * r2;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(input.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double weight = filter.exact_t1 * filter.exact_t2;
    for (Eigen::Index j = i - steps.quarter; j >= 0; j -= steps.round_trip) {
      out(i) += weight * input(j);
      weight *= echo;
      if (weight < 1e-18) break;
    }
  }
  return out;
}

Eigen::VectorXd exact_backpropagate(const FilterConfig& filter, const Eigen::VectorXd& h,
                                    double dt) {
  const CombSteps steps = comb_steps(filter, dt);
  const double r1 = std::sqrt(1.0 - filter.exact_t1 * filter.exact_t1);
  const double r2 = std::sqrt(1.0 - filter.exact_t2 * filter.exact_t2);
  const double echo = r1 * r2;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(h.size());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    double weight = filter.exact_t1 * filter.exact_t2;
    for (Eigen::Index i = j + steps.quarter; i < h.size(); i += steps.round_trip) {
      out(j) += weight * h(i);
      weight *= echo;
      if (weight < 1e-18) break;
    }
  }
  return out;
}

}
