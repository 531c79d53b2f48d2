#include "oposim/fock_oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numeric>

namespace oposim {

namespace {

constexpr double kPi = 3.14159265358979323846;

int total_dim(const std::vector<int>& dims) {
  int d = 1;
  for (int x : dims) d *= x;
  return d;
}

// Occupation of one mode in the flattened row-major product index.
struct Indexer {
  std::vector<int> dims;
  std::vector<int> strides;

  explicit Indexer(const std::vector<int>& d) : dims(d), strides(d.size()) {
    int s = 1;
    for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
      strides[i] = s;
      s *= d[i];
    }
  }

  int occupation(int index, int mode) const { return (index / strides[mode]) % dims[mode]; }
  int shift(int index, int mode, int delta) const { return index + delta * strides[mode]; }
};

// Lift a single-mode operator to the product space.
Eigen::MatrixXcd lift_one(const Eigen::MatrixXcd& op, int mode, const std::vector<int>& dims) {
  const Indexer ix(dims);
  const int d = total_dim(dims);
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const int ni = ix.occupation(i, mode);
    const int base = i - ni * ix.strides[mode];
    for (int nj = 0; nj < dims[mode]; ++nj) {
      if (op(ni, nj) != std::complex<double>(0.0, 0.0))
        full(i, base + nj * ix.strides[mode]) += op(ni, nj);
    }
  }
  return full;
}

// Two-mode unitary built blockwise from a conserved ladder label. `states`
// lists, per block, the flattened basis indices along which the generator is
// tridiagonal with super/sub elements given by `coupling` (anti-Hermitian when
// phase = 1, or times i for the passive i-phase convention).
struct TwoModeBlocks {
  std::vector<std::vector<int>> blocks;         // flattened indices per block
  std::vector<std::vector<double>> couplings;   // length = block size - 1
};

Eigen::MatrixXcd block_exponential(const TwoModeBlocks& tm, std::complex<double> phase, int dim) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (size_t b = 0; b < tm.blocks.size(); ++b) {
    const auto& idx = tm.blocks[b];
    const int n = static_cast<int>(idx.size());
    if (n == 1) continue;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
      g(k + 1, k) = phase * tm.couplings[b][k];
      g(k, k + 1) = -std::conj(phase * tm.couplings[b][k]);
    }
    Eigen::MatrixXcd ub = g.exp();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) u(idx[i], idx[j]) = ub(i, j);
  }
  return u;
}

}  // namespace

FockDensity::FockDensity(std::vector<int> dims, Eigen::MatrixXcd rho)
    : dims_(std::move(dims)), rho_(std::move(rho)) {
  if (dims_.empty()) throw ConfigError("fock state needs at least one mode");
  if (rho_.rows() != total_dim(dims_) || rho_.cols() != rho_.rows())
    throw ConfigError("density matrix dimension mismatch");
}

FockDensity FockDensity::vacuum(std::vector<int> dims) {
  for (int d : dims)
    if (d < 2) throw ConfigError("mode cutoff must be at least 2");
  const int d = total_dim(dims);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  rho(0, 0) = 1.0;
  return FockDensity(std::move(dims), std::move(rho));
}

double FockDensity::top_band_mass() const {
  const Indexer ix(dims_);
  double mass = 0.0;
  for (int i = 0; i < rho_.rows(); ++i) {
    for (int m = 0; m < mode_count(); ++m) {
      if (ix.occupation(i, m) >= (3 * (dims_[m] - 1)) / 4) {
        mass += rho_(i, i).real();
        break;
      }
    }
  }
  return mass;
}

FockDensity FockDensity::squeeze(int mode, double z, double trunc_budget) const {
  const int d = dims_[mode];
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  // exp[(z/2)(a^dag^2 - a^2)]: a -> cosh(z) a + sinh(z) a^dag.
  Eigen::MatrixXcd g = 0.5 * z * (a.adjoint() * a.adjoint() - a * a);
  Eigen::MatrixXcd u = lift_one(g.exp(), mode, dims_);
  FockDensity out(dims_, u * rho_ * u.adjoint());
  if (out.top_band_mass() > trunc_budget)
    throw PhysicsError("fock truncation loss exceeds budget in squeeze");
  return out;
}

FockDensity FockDensity::two_mode_squeeze(int mode_a, int mode_b, double r,
                                          double trunc_budget) const {
  const Indexer ix(dims_);
  const int d = total_dim(dims_);
  // exp[r(a^dag b^dag - a b)] conserves n_a - n_b; walk each diagonal chain.
  TwoModeBlocks tm;
  for (int i = 0; i < d; ++i) {
    const int na = ix.occupation(i, mode_a);
    const int nb = ix.occupation(i, mode_b);
    if (na != 0 && nb != 0) continue;  // chain starts at the ladder bottom
    std::vector<int> chain;
    std::vector<double> coup;
    int j = i;
    int ka = na, kb = nb;
    while (ka < dims_[mode_a] && kb < dims_[mode_b]) {
      chain.push_back(j);
      if (ka + 1 < dims_[mode_a] && kb + 1 < dims_[mode_b])
        coup.push_back(r * std::sqrt(static_cast<double>((ka + 1) * (kb + 1))));
      j = ix.shift(ix.shift(j, mode_a, 1), mode_b, 1);
      ++ka;
      ++kb;
    }
    tm.blocks.push_back(std::move(chain));
    tm.couplings.push_back(std::move(coup));
  }
  Eigen::MatrixXcd u = block_exponential(tm, std::complex<double>(1.0, 0.0), d);
  FockDensity out(dims_, u * rho_ * u.adjoint());
  if (out.top_band_mass() > trunc_budget)
    throw PhysicsError("fock truncation loss exceeds budget in two-mode squeeze");
  return out;
}

namespace {

// Chains of constant total photon number for passive two-mode mixers.
TwoModeBlocks mixer_blocks(const std::vector<int>& dims, int mode_a, int mode_b, double theta) {
  const Indexer ix(dims);
  const int d = total_dim(dims);
  TwoModeBlocks tm;
  for (int i = 0; i < d; ++i) {
    const int na = ix.occupation(i, mode_a);
    const int nb = ix.occupation(i, mode_b);
    if (na != 0) continue;  // chain starts at n_a = 0, walks a up / b down
    std::vector<int> chain;
    std::vector<double> coup;
    int j = i;
    int ka = 0, kb = nb;
    while (ka < dims[mode_a] && kb >= 0) {
      chain.push_back(j);
      if (ka + 1 < dims[mode_a] && kb - 1 >= 0)
        coup.push_back(theta * std::sqrt(static_cast<double>((ka + 1) * kb)));
      j = ix.shift(ix.shift(j, mode_a, 1), mode_b, -1);
      ++ka;
      --kb;
    }
    tm.blocks.push_back(std::move(chain));
    tm.couplings.push_back(std::move(coup));
  }
  return tm;
}

}  // namespace

FockDensity FockDensity::beamsplitter(int mode_a, int mode_b, double t, double trunc_budget) const {
  if (t < 0.0 || t > 1.0) throw ConfigError("beam splitter transmission must lie in [0, 1]");
  const double theta = std::acos(t);
  // exp[i theta (a^dag b + b^dag a)]: a -> t a + i r b.
  TwoModeBlocks tm = mixer_blocks(dims_, mode_a, mode_b, theta);
  Eigen::MatrixXcd u = block_exponential(tm, std::complex<double>(0.0, 1.0), total_dim(dims_));
  // i-phase generator is Hermitian-symmetric along chains; block_exponential
  // fills g(k+1,k) = i c, g(k,k+1) = -conj(i c) = i c, as required.
  FockDensity out(dims_, u * rho_ * u.adjoint());
  if (out.top_band_mass() > trunc_budget)
    throw PhysicsError("fock truncation loss exceeds budget in beamsplitter");
  return out;
}

FockDensity FockDensity::real_mixer(int mode_a, int mode_b, double theta,
                                    double trunc_budget) const {
  // exp[theta (a^dag b - b^dag a)]: a -> cos(theta) a + sin(theta) b.
  TwoModeBlocks tm = mixer_blocks(dims_, mode_a, mode_b, theta);
  Eigen::MatrixXcd u = block_exponential(tm, std::complex<double>(1.0, 0.0), total_dim(dims_));
  FockDensity out(dims_, u * rho_ * u.adjoint());
  if (out.top_band_mass() > trunc_budget)
    throw PhysicsError("fock truncation loss exceeds budget in real mixer");
  return out;
}

FockDensity FockDensity::loss(int mode, double eta) const {
  if (eta < 0.0 || eta > 1.0) throw ConfigError("loss transmittance must lie in [0, 1]");
  const Indexer ix(dims_);
  const int d = total_dim(dims_);
  const int cutoff = dims_[mode];
  // Kraus operators K_k = sum_n sqrt(C(n,k) eta^{n-k} (1-eta)^k) |n-k><n|.
  std::vector<std::vector<double>> kraus(cutoff, std::vector<double>(cutoff, 0.0));
  for (int n = 0; n < cutoff; ++n) {
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      kraus[k][n] = std::sqrt(binom * std::pow(eta, n - k) * std::pow(1.0 - eta, k));
      binom *= static_cast<double>(n - k) / (k + 1);
    }
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < cutoff; ++k) {
    if (k > 0 && eta == 1.0) break;
    for (int i = 0; i < d; ++i) {
      const int ni = ix.occupation(i, mode) + k;
      if (ni >= cutoff) continue;
      const int si = ix.shift(i, mode, k);
      for (int j = 0; j < d; ++j) {
        const int nj = ix.occupation(j, mode) + k;
        if (nj >= cutoff) continue;
        out(i, j) += kraus[k][ni] * kraus[k][nj] * rho_(si, ix.shift(j, mode, k));
      }
    }
  }
  return FockDensity(dims_, std::move(out));
}

FockDensity FockDensity::subtract_photon(int mode) const {
  if (mean_photon(mode) <= 1e-12)
    throw PhysicsError("cannot subtract a photon from a vacuum mode");
  const Indexer ix(dims_);
  const int d = total_dim(dims_);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const int ni = ix.occupation(i, mode);
    if (ni + 1 >= dims_[mode]) continue;
    for (int j = 0; j < d; ++j) {
      const int nj = ix.occupation(j, mode);
      if (nj + 1 >= dims_[mode]) continue;
      out(i, j) = std::sqrt(static_cast<double>((ni + 1) * (nj + 1))) *
                  rho_(ix.shift(i, mode, 1), ix.shift(j, mode, 1));
    }
  }
  const double norm = out.trace().real();
  return FockDensity(dims_, out / norm);
}

FockDensity FockDensity::partial_trace_keep(const std::vector<int>& modes) const {
  std::vector<bool> keep(mode_count(), false);
  for (int m : modes) keep[m] = true;

  std::vector<int> kept_dims;
  for (int m = 0; m < mode_count(); ++m)
    if (keep[m]) kept_dims.push_back(dims_[m]);
  if (kept_dims.empty()) throw ConfigError("partial trace must keep at least one mode");

  const Indexer ix(dims_);
  const Indexer kx(kept_dims);
  const int d = total_dim(dims_);
  const int dk = total_dim(kept_dims);

  auto project = [&](int index) {
    int out = 0, slot = 0;
    for (int m = 0; m < mode_count(); ++m)
      if (keep[m]) out += ix.occupation(index, m) * kx.strides[slot++];
    return out;
  };
  auto environment = [&](int index) {
    int out = 0, s = 1;
    for (int m = mode_count() - 1; m >= 0; --m) {
      if (!keep[m]) {
        out += ix.occupation(index, m) * s;
        s *= dims_[m];
      }
    }
    return out;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (environment(i) == environment(j)) out(project(i), project(j)) += rho_(i, j);
  return FockDensity(std::move(kept_dims), std::move(out));
}

double FockDensity::mean_photon(int mode) const {
  const Indexer ix(dims_);
  double n = 0.0;
  for (int i = 0; i < rho_.rows(); ++i) n += ix.occupation(i, mode) * rho_(i, i).real();
  return n;
}

double FockDensity::wigner_origin(int mode) const {
  FockDensity reduced = mode_count() == 1 ? *this : partial_trace_keep({mode});
  double parity = 0.0;
  for (int n = 0; n < reduced.dims()[0]; ++n)
    parity += (n % 2 == 0 ? 1.0 : -1.0) * reduced.rho()(n, n).real();
  return parity / kPi;
}

std::complex<double> FockDensity::moment_number(int mode_j, int mode_k) const {
  const Indexer ix(dims_);
  std::complex<double> acc = 0.0;
  //tr(rho a_j^dag a_k) = sum_i sqrt(n_k(i)) sqrt(n_j(i - e_k) + 1) rho(i - e_k + e_j, i)
  for (int i = 0; i < rho_.rows(); ++i) {
    const int nk = ix.occupation(i, mode_k);
    if (nk == 0) continue;
    int j = ix.shift(i, mode_k, -1);
    const int njj = ix.occupation(j, mode_j);
    if (njj + 1 >= dims_[mode_j]) continue;
    acc += std::sqrt(static_cast<double>(nk) * (njj + 1)) * rho_(ix.shift(j, mode_j, 1), i);
  }
  return acc;
}

std::complex<double> FockDensity::moment_anomalous(int mode_j, int mode_k) const {
  const Indexer ix(dims_);
  std::complex<double> acc = 0.0;
  // tr(rho a_j a_k) = sum_i sqrt(n_k(i) n_j(i - e_k)) rho(i - e_k - e_j, i)
  for (int i = 0; i < rho_.rows(); ++i) {
    const int nk = ix.occupation(i, mode_k);
    if (nk == 0) continue;
    int j = ix.shift(i, mode_k, -1);
    const int njj = ix.occupation(j, mode_j);
    if (njj == 0) continue;
    acc += std::sqrt(static_cast<double>(nk) * njj) * rho_(ix.shift(j, mode_j, -1), i);
  }
  return acc;
}

Eigen::MatrixXd FockDensity::covariance() const {
  const int m = mode_count();
  Eigen::MatrixXd v(2 * m, 2 * m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const std::complex<double> n = moment_number(j, k);
      const std::complex<double> mm = moment_anomalous(j, k);
      const double delta = (j == k) ? 1.0 : 0.0;
      v(2 * j, 2 * k) = delta + 2.0 * n.real() + 2.0 * mm.real();
      v(2 * j + 1, 2 * k + 1) = delta + 2.0 * n.real() - 2.0 * mm.real();
      v(2 * j, 2 * k + 1) = 2.0 * mm.imag() + 2.0 * n.imag();
      v(2 * j + 1, 2 * k) = 2.0 * mm.imag() - 2.0 * n.imag();
    }
  }
  return v;
}

FockDensity apply_gaussian(const FockDensity& state, const GaussianOp& op, double trunc_budget) {
  switch (op.kind) {
    case GaussianKind::squeeze:
      return state.squeeze(op.mode_a, op.value, trunc_budget);
    case GaussianKind::two_mode_squeeze:
      return state.two_mode_squeeze(op.mode_a, op.mode_b, op.value, trunc_budget);
    case GaussianKind::beamsplitter:
      return state.beamsplitter(op.mode_a, op.mode_b, op.value, trunc_budget);
    case GaussianKind::loss:
      return state.loss(op.mode_a, op.value);
  }
  throw ConfigError("unknown gaussian op");
}

}
