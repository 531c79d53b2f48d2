#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oposim/gaussian_state.hpp"

using namespace oposim;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<ModeLabel> output_labels(int n) {
  std::vector<ModeLabel> labels;
  for (int i = 0; i < n; ++i) labels.push_back({ModeKind::output, i});
  return labels;
}

// Random pure-state covariance from a few squeezers and beam splitters.
CovarianceState random_physical_state(int modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> squeeze(-0.6, 0.6);
  std::uniform_real_distribution<double> trans(0.1, 0.9);
  CovarianceState state = make_vacuum(modes, output_labels(modes));
  for (int round = 0; round < 3; ++round) {
    for (int m = 0; m < modes; ++m) {
      state = apply_map(state, rotation_map(angle(rng)), {{ModeKind::output, m}});
      state = apply_map(state, squeeze_map(squeeze(rng)), {{ModeKind::output, m}});
    }
    for (int m = 0; m + 1 < modes; ++m) {
      const double t = std::sqrt(trans(rng));
      state = apply_map(state, beamsplitter_map(t, std::sqrt(1.0 - t * t)),
                        {{ModeKind::output, m}, {ModeKind::output, m + 1}});
    }
  }
  return state;
}

}  // namespace

TEST_CASE("vacuum construction") {
  CHECK(make_vacuum(1, output_labels(1)).matrix().isApprox(Eigen::MatrixXd::Identity(2, 2)));

  const CovarianceState v3 = make_vacuum(3, output_labels(3));
  CHECK(v3.matrix().isApprox(Eigen::MatrixXd::Identity(6, 6)));
  CHECK(is_physical(v3.matrix()));
  CHECK(symplectic_eigenvalue_min(v3.matrix()) == doctest::Approx(1.0));

  CHECK_THROWS_AS(make_vacuum(0, {}), ConfigError);
  auto dup = output_labels(2);
  dup[1] = dup[0];
  CHECK_THROWS_AS(make_vacuum(2, dup), ConfigError);
}

TEST_CASE("squeeze map basics") {
  CHECK(squeeze_map(0.0).s.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  for (double z : {-0.7, 0.05, 1.2}) {
    const SymplecticMap s = squeeze_map(z);
    CHECK(symplectic_residual(s) < 1e-12);
    CHECK(s.s.determinant() == doctest::Approx(1.0));
  }
  // Anti-squeezed quadrature is x.
  CovarianceState state = make_vacuum(1, output_labels(1));
  state = apply_map(state, squeeze_map(0.05), {{ModeKind::output, 0}});
  CHECK(state.matrix()(0, 0) == doctest::Approx(std::exp(0.1)));
  CHECK(state.matrix()(1, 1) == doctest::Approx(std::exp(-0.1)));
  CHECK_THROWS_AS(squeeze_map(std::nan("")), ConfigError);
}

TEST_CASE("squeezes compose additively in phase") {
  CovarianceState state = make_vacuum(1, output_labels(1));
  state = apply_map(state, squeeze_map(0.3), {{ModeKind::output, 0}});
  state = apply_map(state, squeeze_map(-0.1), {{ModeKind::output, 0}});
  CovarianceState direct = make_vacuum(1, output_labels(1));
  direct = apply_map(direct, squeeze_map(0.2), {{ModeKind::output, 0}});
  CHECK(state.matrix().isApprox(direct.matrix(), 1e-12));
}

TEST_CASE("beam splitter map") {
  CHECK_THROWS_AS(beamsplitter_map(0.9, 0.9), ConfigError);

  // r = 0: identity on both modes.
  CHECK(beamsplitter_map(1.0, 0.0).s.isApprox(Eigen::MatrixXd::Identity(4, 4)));

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const SymplecticMap bs = beamsplitter_map(inv_sqrt2, inv_sqrt2);
  CHECK(symplectic_residual(bs) < 1e-12);

  // Applying the map and its conjugate (reflected phases reversed) restores
  // the input covariance.
  Eigen::Matrix2cd u;
  u << inv_sqrt2, std::complex<double>(0.0, -inv_sqrt2), std::complex<double>(0.0, -inv_sqrt2),
      inv_sqrt2;
  const SymplecticMap conj = mode_mixer(u);
  std::mt19937_64 rng(7);
  CovarianceState state = random_physical_state(2, rng);
  CovarianceState round =
      apply_map(apply_map(state, bs, output_labels(2)), conj, output_labels(2));
  CHECK((round.matrix() - state.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("beam splitter splits photon number as t^2 : r^2") {
  const double t_sq = 0.127;
  const double t = std::sqrt(t_sq), r = std::sqrt(1.0 - t_sq);
  CovarianceState state = make_vacuum(2, output_labels(2));
  state = apply_map(state, squeeze_map(0.2), {{ModeKind::output, 1}});
  const double n_total = mean_photon(state.block(1));

  state = apply_map(state, beamsplitter_map(t, r), {{ModeKind::output, 1}, {ModeKind::output, 0}});
  // Port order (m1, m2) -> (t m1 + i r m2, i r m1 + t m2): the squeezed mode
  // sat in port 1, so port 1 keeps the t^2 share.
  CHECK(mean_photon(state.block(1)) == doctest::Approx(t_sq * n_total));
  CHECK(mean_photon(state.block(0)) == doctest::Approx((1.0 - t_sq) * n_total));
}

TEST_CASE("loss map") {
  std::mt19937_64 rng(11);
  CovarianceState state = random_physical_state(2, rng);

  CHECK(loss_map(state, {ModeKind::output, 0}, 1.0).matrix().isApprox(state.matrix(), 1e-14));

  const CovarianceState dark = loss_map(state, {ModeKind::output, 0}, 0.0);
  CHECK(dark.block(0).isApprox(Eigen::Matrix2d::Identity(), 1e-14));
  CHECK(dark.matrix().block<2, 2>(0, 2).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(loss_map(state, {ModeKind::output, 0}, 1.5), ConfigError);
}

TEST_CASE("loss equals beam splitter against a discarded vacuum") {
  const double eta = 0.7;
  CovarianceState state = make_vacuum(2, output_labels(2));
  state = apply_map(state, squeeze_map(0.4), {{ModeKind::output, 0}});
  state = apply_map(state, beamsplitter_map(0.6, 0.8),
                    {{ModeKind::output, 0}, {ModeKind::output, 1}});

  const CovarianceState direct = loss_map(state, {ModeKind::output, 0}, eta);

  std::vector<ModeLabel> labels = output_labels(2);
  labels.push_back({ModeKind::vacuum, 0});
  Eigen::MatrixXd big = Eigen::MatrixXd::Identity(6, 6);
  big.topLeftCorner(4, 4) = state.matrix();
  CovarianceState ancilla(big, labels);
  ancilla = apply_map(ancilla, beamsplitter_map(std::sqrt(eta), std::sqrt(1.0 - eta)),
                      {{ModeKind::output, 0}, {ModeKind::vacuum, 0}});
  const CovarianceState reduced = discard_modes(ancilla, {{ModeKind::vacuum, 0}});

  CHECK((direct.matrix() - reduced.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("discard modes") {
  CovarianceState state = make_vacuum(2, output_labels(2));
  state = apply_map(state, squeeze_map(0.5), {{ModeKind::output, 1}});
  const CovarianceState kept = discard_modes(state, {{ModeKind::output, 0}});
  CHECK(kept.mode_count() == 1);
  CHECK(kept.block(0)(0, 0) == doctest::Approx(std::exp(1.0)));

  // Two-mode squeezed state: tracing one arm leaves a thermal state.
  const double r = 0.35;
  CovarianceState tms = make_vacuum(2, output_labels(2));
  tms = apply_map(tms, squeeze_map(-r), {{ModeKind::output, 0}});
  tms = apply_map(tms, squeeze_map(r), {{ModeKind::output, 1}});
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd real_bs;
  real_bs << inv_sqrt2, inv_sqrt2, -inv_sqrt2, inv_sqrt2;
  tms = apply_map(tms, mode_mixer(real_bs), output_labels(2));
  const CovarianceState arm = discard_modes(tms, {{ModeKind::output, 0}});
  CHECK(arm.block(0)(0, 0) == doctest::Approx(std::cosh(2.0 * r)));
  CHECK(arm.block(0)(1, 1) == doctest::Approx(std::cosh(2.0 * r)));

  CHECK(discard_modes(state, output_labels(2)).mode_count() == 0);
  CHECK_THROWS_AS(discard_modes(state, {{ModeKind::cavity, 5}}), ConfigError);
}

TEST_CASE("random symplectic chains preserve physicality") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const CovarianceState state = random_physical_state(3, rng);
    CHECK(is_physical(state.matrix(), 1e-9));
    CHECK(symplectic_eigenvalue_min(state.matrix()) > 1.0 - 1e-9);
    // Pure chains keep det V = 1.
    CHECK(std::abs(state.matrix().determinant() - 1.0) < 1e-9);
  }
}

TEST_CASE("extract joint basics") {
  const int n = 4;
  CovarianceState state = make_vacuum(n, output_labels(n));

  Eigen::VectorXd trig = Eigen::VectorXd::Zero(n), sig = Eigen::VectorXd::Zero(n);
  trig(0) = 0.5;
  sig(2) = 1.0;
  const JointModePair joint = extract_joint(state, trig, sig);
  CHECK(joint.v.isApprox(Eigen::Matrix4d::Identity(), 1e-12));

  Eigen::VectorXd bad = sig * 0.9;
  CHECK_THROWS_AS(extract_joint(state, trig, bad), ConfigError);
  CHECK_THROWS_AS(extract_joint(state, sig * 2.0, sig), ConfigError);
}

TEST_CASE("extract joint with equal trigger and signal obeys Cauchy-Schwarz") {
  std::mt19937_64 rng(5);
  const CovarianceState state = random_physical_state(3, rng);
  Eigen::VectorXd h(3);
  h << 0.6, -0.64, 0.48;
  h.normalize();
  const JointModePair joint = extract_joint(state, h, h);
  CHECK(joint.v(0, 2) * joint.v(0, 2) <= joint.v(0, 0) * joint.v(2, 2) + 1e-12);
  CHECK(joint.v(0, 0) == doctest::Approx(joint.v(2, 2)));
}

TEST_CASE("two-mode squeezed joint covariance and conditional Wigner value") {
  const double r = 0.3;
  const double c = std::cosh(2.0 * r), s = std::sinh(2.0 * r);

  // Build the two-mode squeezed covariance from opposite squeezers and a
  // real 50/50 mixer, with trigger = arm 0 and signal = arm 1.
  CovarianceState state = make_vacuum(2, output_labels(2));
  state = apply_map(state, squeeze_map(-r), {{ModeKind::output, 0}});
  state = apply_map(state, squeeze_map(r), {{ModeKind::output, 1}});
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd real_bs;
  real_bs << inv_sqrt2, inv_sqrt2, -inv_sqrt2, inv_sqrt2;
  state = apply_map(state, mode_mixer(real_bs), output_labels(2));

  Eigen::VectorXd trig(2), sig(2);
  trig << 1.0, 0.0;
  sig << 0.0, 1.0;
  const JointModePair joint = extract_joint(state, trig, sig);

  Eigen::Matrix4d expected;
  expected << c, 0, s, 0, 0, c, 0, -s, s, 0, c, 0, 0, -s, 0, c;
  CHECK((joint.v - expected).cwiseAbs().maxCoeff() < 1e-12);

  const double w = wigner_origin_conditional(joint);
  CHECK(w == doctest::Approx(-1.0 / (kPi * c * c)));
}

TEST_CASE("conditional Wigner edge cases") {
  JointModePair thermal;
  thermal.v = Eigen::Vector4d(3.0, 3.0, 1.0, 1.0).asDiagonal();
  CHECK(wigner_origin_conditional(thermal) == doctest::Approx(1.0 / kPi));

  JointModePair vac;
  vac.v = Eigen::Matrix4d::Identity();
  CHECK_THROWS_AS(wigner_origin_conditional(vac), PhysicsError);
}

TEST_CASE("conditional Wigner value stays within the parity bounds") {
  std::mt19937_64 rng(99);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const CovarianceState state = random_physical_state(2, rng);
    // Random real-structure pair: strip the x-p cross blocks the formula
    // assumes away by rebuilding from moments.
    Eigen::Matrix4d v = state.matrix();
    v(0, 1) = v(1, 0) = v(2, 3) = v(3, 2) = 0.0;
    v(0, 3) = v(3, 0) = v(1, 2) = v(2, 1) = 0.0;
    if (!is_physical(v, 1e-9)) continue;
    JointModePair joint{v};
    if (v(0, 0) + v(1, 1) - 2.0 <= 1e-9) continue;
    const double w = wigner_origin_conditional(joint);
    CHECK(w <= 1.0 / kPi + 1e-9);
    CHECK(w >= -1.0 / kPi - 1e-9);
    ++tested;
  }
  CHECK(tested > 50);
}

TEST_CASE("mean photon") {
  CHECK(mean_photon(Eigen::Matrix2d::Identity()) == doctest::Approx(0.0));
  CHECK(mean_photon(3.0 * Eigen::Matrix2d::Identity()) == doctest::Approx(1.0));
  const double z = 0.4;
  Eigen::Matrix2d squeezed = Eigen::Vector2d(std::exp(2 * z), std::exp(-2 * z)).asDiagonal();
  CHECK(mean_photon(squeezed) == doctest::Approx(std::sinh(z) * std::sinh(z)));
}

TEST_CASE("apply map errors") {
  CovarianceState state = make_vacuum(2, output_labels(2));
  CHECK_THROWS_AS(apply_map(state, squeeze_map(0.1), {{ModeKind::cavity, 0}}), ConfigError);
  CHECK_THROWS_AS(
      apply_map(state, squeeze_map(0.1), {{ModeKind::output, 0}, {ModeKind::output, 1}}),
      ConfigError);
}
