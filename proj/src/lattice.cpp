#include "edgesync/lattice.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

constexpr double kSymmetryTol = 1e-12;

// Uniform double in [0, 1) from the top 53 bits; unlike
// std::uniform_real_distribution this is identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::DiagonalAAH: return "DiagonalAAH";
    case Variant::OffDiagonalAAH: return "OffDiagonalAAH";
    case Variant::FourBand: return "FourBand";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  if (name == "DiagonalAAH") return Variant::DiagonalAAH;
  if (name == "OffDiagonalAAH") return Variant::OffDiagonalAAH;
  if (name == "FourBand") return Variant::FourBand;
  throw ConfigError("model.variant: unknown variant '" + name + "'");
}

void validate(const ModelSpec& s) {
  require(s.n_sites >= 2, "model.N: need at least 2 sites");
  for (double x : {s.g, s.v, s.lambda, s.phi_v, s.phi_lambda, s.g1, s.g2, s.g3,
                   s.disorder_amplitude})
    require(std::isfinite(x), "model: parameters must be finite");
  require(s.disorder_amplitude >= 0.0, "model.disorder_amplitude: W must be >= 0");
  if (s.variant == Variant::FourBand) {
    require(s.g1 != 0.0, "model.g1: must be nonzero");
    return;
  }
  require(s.g != 0.0, "model.g: must be nonzero");
  require(s.alpha_q >= 2, "model.alpha_q: need q >= 2");
  require(s.alpha_p >= 1, "model.alpha_p: need p >= 1");
  require(std::gcd(s.alpha_p, s.alpha_q) == 1, "model.alpha: p and q must be co-prime");
  require(s.phi_v > -std::numbers::pi && s.phi_v <= std::numbers::pi,
          "model.phi_V: must lie in (-pi, pi]");
  if (s.variant == Variant::DiagonalAAH)
    require(s.lambda == 0.0, "model.lambda: DiagonalAAH requires lambda = 0");
  if (s.variant == Variant::OffDiagonalAAH)
    require(s.v == 0.0, "model.v: OffDiagonalAAH requires v = 0");
}

int unit_cell_size(const ModelSpec& spec) {
  return spec.variant == Variant::FourBand ? 4 : spec.alpha_q;
}

double bond_coefficient(const ModelSpec& s, int j) {
  if (s.variant == Variant::FourBand) {
    const double pattern[4] = {s.g1, s.g2, -s.g2, -s.g1};
    return pattern[(j - 1) % 4];
  }
  const double alpha = static_cast<double>(s.alpha_p) / s.alpha_q;
  return s.g * (1.0 + s.lambda * std::cos(2.0 * std::numbers::pi * alpha * j + s.phi_lambda));
}

double onsite_energy(const ModelSpec& s, int j) {
  if (s.variant == Variant::FourBand) return 0.0;
  const double alpha = static_cast<double>(s.alpha_p) / s.alpha_q;
  return s.v * s.g * std::cos(2.0 * std::numbers::pi * alpha * j + s.phi_v);
}

HamiltonianMatrix::HamiltonianMatrix(Eigen::MatrixXd h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols()) throw ConfigError("hamiltonian: matrix must be square");
  if (h_.rows() == 0) throw ConfigError("hamiltonian: empty matrix");
  if (!(h_ - h_.transpose()).isZero(0.0)) throw ConfigError("hamiltonian: matrix must be symmetric");
  if (!h_.allFinite()) throw ConfigError("hamiltonian: non-finite entries");
  rows_.resize(h_.rows());
  for (int i = 0; i < h_.rows(); ++i)
    for (int k = 0; k < h_.cols(); ++k)
      if (h_(i, k) != 0.0) rows_[i].emplace_back(k, h_(i, k));
}

int HamiltonianMatrix::bandwidth() const {
  int bw = 0;
  for (int i = 0; i < size(); ++i)
    for (const auto& [k, value] : rows_[i]) bw = std::max(bw, std::abs(i - k));
  return bw;
}

std::vector<double> HamiltonianMatrix::bonds() const {
  std::vector<double> out;
  for (int j = 0; j + 1 < size(); ++j) out.push_back(h_(j, j + 1));
  return out;
}

double HamiltonianMatrix::norm2() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

HamiltonianMatrix build_hamiltonian(const ModelSpec& spec) {
  validate(spec);
  const int n = spec.n_sites;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 1; j <= n; ++j) h(j - 1, j - 1) = onsite_energy(spec, j);

  std::mt19937_64 rng(spec.disorder_seed);
  for (int j = 1; j <= n - 1; ++j) {
    double bond = bond_coefficient(spec, j);
    // Boundary bonds stay clean so the edge modes are untouched.
    if (spec.disorder_amplitude > 0.0 && j > 1 && j < n - 1) {
      const double w = spec.disorder_amplitude * (2.0 * unit_uniform(rng) - 1.0);
      bond *= 1.0 + w;
    }
    h(j - 1, j) = bond;
    h(j, j - 1) = bond;
  }
  if (spec.g3 != 0.0) {
    for (int j = 1; j + 2 <= n; ++j) {
      h(j - 1, j + 1) = spec.g3;
      h(j + 1, j - 1) = spec.g3;
    }
  }
  return HamiltonianMatrix(std::move(h));
}

HamiltonianMatrix uniform_chain(int n_sites, double g) {
  if (n_sites < 1) throw ConfigError("uniform_chain: need at least one site");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_sites, n_sites);
  for (int j = 0; j + 1 < n_sites; ++j) h(j, j + 1) = h(j + 1, j) = g;
  return HamiltonianMatrix(std::move(h));
}

bool check_chiral(const HamiltonianMatrix& hm) {
  const auto& h = hm.matrix();
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j)
      if ((i + j) % 2 == 0 && std::abs(h(i, j)) > kSymmetryTol) return false;
  return true;
}

bool check_reflection(const HamiltonianMatrix& hm, bool signed_reflection) {
  const auto& h = hm.matrix();
  const int n = static_cast<int>(h.rows());
  // Entry (a, b) of R h R (1-based a, b) is s(a, b) * h_{N+1-a, N+1-b}, where
  // s = 1 for R and s = (-1)^{N+1-a+b} for R'.
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      double sign = 1.0;
      if (signed_reflection && ((n + 1 - a + b) % 2 != 0)) sign = -1.0;
      const double reflected = sign * h(n - a, n - b);
      if (std::abs(reflected - h(a - 1, b - 1)) > kSymmetryTol) return false;
    }
  }
  return true;
}

}  // namespace edgesync
