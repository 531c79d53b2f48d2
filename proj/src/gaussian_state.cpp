#include "oposim/gaussian_state.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

namespace oposim {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix2d rotation_block(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

}  // namespace

std::string to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::input: return "input";
    case ModeKind::cavity: return "cavity";
    case ModeKind::vacuum: return "vacuum";
    case ModeKind::output: return "output";
    case ModeKind::filter: return "filter";
    case ModeKind::lost: return "lost";
  }
  return "?";
}

Eigen::MatrixXd symplectic_form(int modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  return omega;
}

double symplectic_residual(const SymplecticMap& map) {
  const int n = map.mode_count();
  if (2 * n != map.s.rows() || map.s.rows() != map.s.cols())
    throw ConfigError("symplectic map must be square with even dimension");
  const Eigen::MatrixXd omega = symplectic_form(n);
  return (map.s * omega * map.s.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMap rotation_map(double theta) {
  if (!std::isfinite(theta)) throw ConfigError("rotation angle must be finite");
  return SymplecticMap{rotation_block(theta)};
}

SymplecticMap squeeze_map(double z) {
  if (!std::isfinite(z)) throw ConfigError("squeezing parameter must be finite");
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  s(0, 0) = std::exp(z);
  s(1, 1) = std::exp(-z);
  return SymplecticMap{s};
}

SymplecticMap mode_mixer(const Eigen::Matrix2cd& u) {
  if ((u * u.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("mode mixer matrix is not unitary");
  Eigen::MatrixXd s(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const std::complex<double> w = u(i, j);
      // w a = |w| e^{i arg w} a: scaled phase-space rotation.
      s.block<2, 2>(2 * i, 2 * j) << w.real(), -w.imag(), w.imag(), w.real();
    }
  }
  return SymplecticMap{std::move(s)};
}

SymplecticMap beamsplitter_map(double t, double r) {
  if (std::abs(t * t + r * r - 1.0) > 1e-12)
    throw ConfigError("beam splitter coefficients violate t^2 + r^2 = 1");
  if (t < 0.0 || t > 1.0 || r < 0.0 || r > 1.0)
    throw ConfigError("beam splitter coefficients must lie in [0, 1]");
  Eigen::Matrix2cd u;
  u << std::complex<double>(t, 0.0), std::complex<double>(0.0, r),
      std::complex<double>(0.0, r), std::complex<double>(t, 0.0);
  return mode_mixer(u);
}

CovarianceState::CovarianceState(Eigen::MatrixXd v, std::vector<ModeLabel> labels)
    : v_(std::move(v)), labels_(std::move(labels)) {
  if (v_.rows() != v_.cols() || v_.rows() != 2 * static_cast<Eigen::Index>(labels_.size()))
    throw ConfigError("covariance dimension does not match label count");
}

int CovarianceState::index_of(const ModeLabel& label) const {
  for (size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  throw ConfigError("unknown mode label " + to_string(label.kind) + "/" +
                    std::to_string(label.time_index));
}

bool CovarianceState::contains(const ModeLabel& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::vector<int> CovarianceState::time_indices(ModeKind kind) const {
  std::vector<int> out;
  for (const auto& label : labels_)
    if (label.kind == kind) out.push_back(label.time_index);
  std::sort(out.begin(), out.end());
  return out;
}

CovarianceState make_vacuum(int modes, std::vector<ModeLabel> labels) {
  if (modes < 1) throw ConfigError("vacuum state needs at least one mode");
  if (static_cast<int>(labels.size()) != modes)
    throw ConfigError("label count does not match mode count");
  std::set<ModeLabel, ModeLabelLess> unique(labels.begin(), labels.end());
  if (static_cast<int>(unique.size()) != modes) throw ConfigError("duplicate mode labels");
  return CovarianceState(Eigen::MatrixXd::Identity(2 * modes, 2 * modes), std::move(labels));
}

CovarianceState apply_map(const CovarianceState& state, const SymplecticMap& map,
                          const std::vector<ModeLabel>& targets) {
  const int k = map.mode_count();
  if (static_cast<int>(targets.size()) != k)
    throw ConfigError("target count does not match map dimension");

  std::vector<int> rows(2 * k);
  for (int i = 0; i < k; ++i) {
    const int mode = state.index_of(targets[i]);
    rows[2 * i] = 2 * mode;
    rows[2 * i + 1] = 2 * mode + 1;
  }

  Eigen::MatrixXd v = state.matrix();
  const Eigen::Index n = v.rows();

  // V(sel,:) <- S V(sel,:), then V(:,sel) <- V(:,sel) S^T.
  Eigen::MatrixXd slice(2 * k, n);
  for (int i = 0; i < 2 * k; ++i) slice.row(i) = v.row(rows[i]);
  slice = map.s * slice;
  for (int i = 0; i < 2 * k; ++i) v.row(rows[i]) = slice.row(i);

  Eigen::MatrixXd cols(n, 2 * k);
  for (int i = 0; i < 2 * k; ++i) cols.col(i) = v.col(rows[i]);
  cols = cols * map.s.transpose();
  for (int i = 0; i < 2 * k; ++i) v.col(rows[i]) = cols.col(i);

  return CovarianceState(std::move(v), state.labels());
}

CovarianceState loss_map(const CovarianceState& state, const ModeLabel& target, double eta) {
  if (eta < 0.0 || eta > 1.0) throw ConfigError("loss transmittance must lie in [0, 1]");
  const int mode = state.index_of(target);
  Eigen::MatrixXd v = state.matrix();
  const double root = std::sqrt(eta);
  v.middleRows<2>(2 * mode) *= root;
  v.middleCols<2>(2 * mode) *= root;
  v.block<2, 2>(2 * mode, 2 * mode) += (1.0 - eta) * Eigen::Matrix2d::Identity();
  return CovarianceState(std::move(v), state.labels());
}

CovarianceState discard_modes(const CovarianceState& state, const std::vector<ModeLabel>& targets) {
  std::vector<bool> drop(state.mode_count(), false);
  for (const auto& label : targets) drop[state.index_of(label)] = true;

  std::vector<int> keep;
  std::vector<ModeLabel> labels;
  for (int i = 0; i < state.mode_count(); ++i) {
    if (!drop[i]) {
      keep.push_back(i);
      labels.push_back(state.labels()[i]);
    }
  }

  const int m = static_cast<int>(keep.size());
  Eigen::MatrixXd v(2 * m, 2 * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      v.block<2, 2>(2 * i, 2 * j) = state.matrix().block<2, 2>(2 * keep[i], 2 * keep[j]);
  return CovarianceState(std::move(v), std::move(labels));
}

JointModePair extract_joint(const CovarianceState& state, const Eigen::VectorXd& trigger_weights,
                            const Eigen::VectorXd& signal_weights) {
  std::vector<int> output_modes;
  for (int i = 0; i < state.mode_count(); ++i)
    if (state.labels()[i].kind == ModeKind::output) output_modes.push_back(i);
  std::sort(output_modes.begin(), output_modes.end(), [&](int a, int b) {
    return state.labels()[a].time_index < state.labels()[b].time_index;
  });

  const int m = static_cast<int>(output_modes.size());
  if (m == 0) throw ConfigError("state has no output modes");
  if (trigger_weights.size() != m || signal_weights.size() != m)
    throw ConfigError("weight vectors must cover the output modes exactly");

  const double trigger_norm2 = trigger_weights.squaredNorm();
  const double signal_norm2 = signal_weights.squaredNorm();
  if (trigger_norm2 > 1.0 + 1e-9) throw ConfigError("trigger weights exceed unit norm");
  if (std::abs(signal_norm2 - 1.0) > 1e-9) throw ConfigError("signal weights must have unit norm");

  // Collective quadratures are real combinations of segment quadratures:
  // rows (x_g, p_g, x_h, p_h).
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, state.matrix().rows());
  for (int j = 0; j < m; ++j) {
    const int col = 2 * output_modes[j];
    e(0, col) = trigger_weights(j);
    e(1, col + 1) = trigger_weights(j);
    e(2, col) = signal_weights(j);
    e(3, col + 1) = signal_weights(j);
  }

  JointModePair joint;
  joint.v = e * state.matrix() * e.transpose();
  const double trigger_pad = std::max(0.0, 1.0 - trigger_norm2);
  const double signal_pad = std::max(0.0, 1.0 - signal_norm2);
  joint.v(0, 0) += trigger_pad;
  joint.v(1, 1) += trigger_pad;
  joint.v(2, 2) += signal_pad;
  joint.v(3, 3) += signal_pad;
  return joint;
}

double wigner_origin_conditional(const JointModePair& joint) {
  const Eigen::Matrix4d& v = joint.v;
  const double trigger_excess = v(0, 0) + v(1, 1) - 2.0;
  if (trigger_excess <= 1e-12)
    throw PhysicsError("zero trigger probability: conditioning undefined");
  const double v33 = v(2, 2);
  const double v44 = v(3, 3);
  const double v13 = v(0, 2);
  const double v24 = v(1, 3);
  const double num =
      v33 * v44 * trigger_excess - v33 * v24 * v24 - v44 * v13 * v13;
  const double den = kPi * std::pow(v33 * v44, 1.5) * trigger_excess;
  return num / den;
}

double mean_photon(const Eigen::Matrix2d& block) {
  return (block(0, 0) + block(1, 1) - 2.0) / 4.0;
}

double physicality_margin(const Eigen::MatrixXd& v) {
  const int n = static_cast<int>(v.rows()) / 2;
  Eigen::MatrixXcd h = v.cast<std::complex<double>>();
  h += std::complex<double>(0.0, 1.0) * symplectic_form(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double symplectic_eigenvalue_min(const Eigen::MatrixXd& v) {
  const int n = static_cast<int>(v.rows()) / 2;
  const Eigen::MatrixXd omega = symplectic_form(n);
  // Omega^{-1} = Omega^T = -Omega.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(omega.transpose() * v, false);
  return solver.eigenvalues().cwiseAbs().minCoeff();
}

bool is_physical(const Eigen::MatrixXd& v, double tol) {
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff()))
    return false;
  return physicality_margin(v) >= -tol;
}

}
