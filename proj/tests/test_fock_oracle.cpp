#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oposim/fock_oracle.hpp"
#include "oposim/gaussian_state.hpp"

using namespace oposim;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<ModeLabel> output_labels(int n) {
  std::vector<ModeLabel> labels;
  for (int i = 0; i < n; ++i) labels.push_back({ModeKind::output, i});
  return labels;
}

}  // namespace

TEST_CASE("squeeze on vacuum matches the covariance map to 1e-6") {
  const double z = 0.05;
  FockDensity state = FockDensity::vacuum({21}).squeeze(0, z);
  CHECK(state.trace() == doctest::Approx(1.0).epsilon(1e-10));
  const Eigen::MatrixXd v = state.covariance();
  CHECK(std::abs(v(0, 0) - std::exp(2.0 * z)) < 1e-6);
  CHECK(std::abs(v(1, 1) - std::exp(-2.0 * z)) < 1e-6);
  CHECK(std::abs(v(0, 1)) < 1e-8);

  CHECK(FockDensity::vacuum({8}).squeeze(0, 0.0).rho().isApprox(
      FockDensity::vacuum({8}).rho(), 1e-14));
}

TEST_CASE("two-mode squeezed vacuum has geometric Schmidt weights") {
  const double r = 0.3;
  const double lambda = std::tanh(r);
  FockDensity state = FockDensity::vacuum({14, 14}).two_mode_squeeze(0, 1, r);
  for (int n = 0; n < 6; ++n) {
    const int idx = n * 14 + n;
    const double expected = (1.0 - lambda * lambda) * std::pow(lambda, 2 * n);
    CHECK(state.rho()(idx, idx).real() == doctest::Approx(expected).epsilon(1e-8));
  }
  // <a1 a2> = cosh(r) sinh(r), the positive-correlation convention.
  CHECK(state.moment_anomalous(0, 1).real() ==
        doctest::Approx(std::cosh(r) * std::sinh(r)).epsilon(1e-8));
}

TEST_CASE("balanced beam splitter splits a single photon evenly") {
  FockDensity one = FockDensity::vacuum({4, 4});
  // |1,0>
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(16, 16);
  rho(4, 4) = 1.0;
  one = FockDensity({4, 4}, rho);
  FockDensity split = one.beamsplitter(0, 1, 1.0 / std::sqrt(2.0));
  CHECK(split.mean_photon(0) == doctest::Approx(0.5));
  CHECK(split.mean_photon(1) == doctest::Approx(0.5));
}

TEST_CASE("loss map agrees with the covariance loss map") {
  const double z = 0.3, eta = 0.6;
  FockDensity state = FockDensity::vacuum({24}).squeeze(0, z).loss(0, eta);
  CHECK(state.trace() == doctest::Approx(1.0).epsilon(1e-12));

  CovarianceState g = make_vacuum(1, output_labels(1));
  g = apply_map(g, squeeze_map(z), {{ModeKind::output, 0}});
  g = loss_map(g, {ModeKind::output, 0}, eta);
  CHECK((state.covariance() - g.matrix()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("photon subtraction basics") {
  // |1> -> |0>
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(5, 5);
  rho(1, 1) = 1.0;
  FockDensity one({5}, rho);
  FockDensity sub = one.subtract_photon(0);
  CHECK(sub.rho()(0, 0).real() == doctest::Approx(1.0));

  // Squeezed vacuum (even superposition) becomes odd-only.
  FockDensity squeezed = FockDensity::vacuum({24}).squeeze(0, 0.3).subtract_photon(0);
  double even = 0.0, odd = 0.0;
  for (int n = 0; n < 24; ++n) {
    const double p = squeezed.rho()(n, n).real();
    (n % 2 == 0 ? even : odd) += p;
  }
  CHECK(even < 1e-10);
  CHECK(odd == doctest::Approx(1.0).epsilon(1e-8));

  CHECK_THROWS_AS(FockDensity::vacuum({4}).subtract_photon(0), PhysicsError);
}

TEST_CASE("wigner origin reference values") {
  CHECK(FockDensity::vacuum({6}).wigner_origin(0) == doctest::Approx(1.0 / kPi));

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(6, 6);
  rho(1, 1) = 1.0;
  CHECK(FockDensity({6}, rho).wigner_origin(0) == doctest::Approx(-1.0 / kPi));

  // Thermal state with nbar = 1: W(0,0) = 1/(pi (2 nbar + 1)).
  Eigen::MatrixXcd thermal = Eigen::MatrixXcd::Zero(40, 40);
  for (int n = 0; n < 40; ++n) thermal(n, n) = 0.5 * std::pow(0.5, n);
  CHECK(FockDensity({40}, thermal).wigner_origin(0) == doctest::Approx(1.0 / (3.0 * kPi)));
}

TEST_CASE("heralded arm of a two-mode squeezed state") {
  const double r = 0.25;
  FockDensity state = FockDensity::vacuum({16, 16}).two_mode_squeeze(0, 1, r);
  FockDensity heralded = state.subtract_photon(0).partial_trace_keep({1});
  const double expected = -1.0 / (kPi * std::cosh(2.0 * r) * std::cosh(2.0 * r));
  CHECK(heralded.wigner_origin(0) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("conditional Wigner formula matches the oracle on random states") {
  std::mt19937_64 rng(421);
  std::uniform_real_distribution<double> zdist(-0.35, 0.35);
  std::uniform_real_distribution<double> rdist(0.1, 0.35);
  std::uniform_real_distribution<double> adist(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> edist(0.4, 1.0);

  int done = 0;
  for (int trial = 0; trial < 12; ++trial) {
    FockDensity state = FockDensity::vacuum({14, 14});
    state = state.two_mode_squeeze(0, 1, rdist(rng));
    state = state.squeeze(0, zdist(rng));
    state = state.squeeze(1, zdist(rng));
    state = state.real_mixer(0, 1, adist(rng));
    state = state.loss(0, edist(rng));
    state = state.loss(1, edist(rng));
    if (state.mean_photon(0) < 1e-6) continue;

    const Eigen::MatrixXd v = state.covariance();
    JointModePair joint;
    joint.v = v;
    const double w_formula = wigner_origin_conditional(joint);
    const double w_oracle = state.subtract_photon(0).partial_trace_keep({1}).wigner_origin(0);
    CHECK(std::abs(w_formula - w_oracle) < 1e-5);
    ++done;
  }
  CHECK(done >= 10);
}

TEST_CASE("averaged subtraction is basis independent at the Fock level") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> adist(0.0, 2.0 * kPi);
  FockDensity state = FockDensity::vacuum({10, 10});
  state = state.two_mode_squeeze(0, 1, 0.25);
  state = state.squeeze(0, 0.15);
  state = state.loss(1, 0.8);

  auto averaged = [](const FockDensity& s) {
    // sum_i a_i rho a_i^dag over the two modes, unnormalized.
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(s.rho().rows(), s.rho().cols());
    for (int m = 0; m < 2; ++m) {
      FockDensity sub = s.subtract_photon(m);
      acc += sub.rho() * s.mean_photon(m);
    }
    return acc;
  };

  const Eigen::MatrixXcd plain = averaged(state);
  for (int trial = 0; trial < 4; ++trial) {
    const double theta = adist(rng);
    const Eigen::MatrixXcd mixed = averaged(state.real_mixer(0, 1, theta));
    // Rotate back before comparing; the input is unnormalized, so relax the
    // truncation budget.
    FockDensity rotated(state.dims(), mixed);
    const Eigen::MatrixXcd back = rotated.real_mixer(0, 1, -theta, 1.0).rho();
    CHECK((back - plain).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("truncation budget enforcement") {
  CHECK_THROWS_AS(FockDensity::vacuum({4}).squeeze(0, 1.2), PhysicsError);
}

TEST_CASE("apply_gaussian dispatcher") {
  FockDensity state = FockDensity::vacuum({12, 12});
  GaussianOp op;
  op.kind = GaussianKind::two_mode_squeeze;
  op.value = 0.2;
  state = apply_gaussian(state, op);
  CHECK(state.mean_photon(0) == doctest::Approx(std::sinh(0.2) * std::sinh(0.2)).epsilon(1e-8));
}
