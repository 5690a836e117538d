#pragma once

// Single-particle tight-binding Hamiltonians for generalized
// Aubry-Andre-Harper chains and the period-4 four-band chain.
//
// Sites are 1-based at every interface: bond j couples sites j and j+1,
// j = 1..N-1. Energies are in units of the base hopping (g, or g1 for the
// four-band chain).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace edgesync {

enum class Variant { DiagonalAAH, OffDiagonalAAH, FourBand };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ModelSpec {
  Variant variant = Variant::DiagonalAAH;
  int n_sites = 2;
  double g = 1.0;       ///< base hopping
  double v = 0.0;       ///< on-site amplitude V/g
  double lambda = 0.0;  ///< hopping modulation amplitude
  int alpha_p = 1;
  int alpha_q = 3;
  double phi_v = 0.0;       ///< radians, (-pi, pi]
  double phi_lambda = 0.0;  ///< radians
  double g1 = 1.0;
  double g2 = 0.0;
  double g3 = 0.0;                  ///< next-nearest-neighbour hopping
  double disorder_amplitude = 0.0;  ///< W, multiplicative bond disorder half-width
  std::uint64_t disorder_seed = 0;
};

/// Throws ConfigError naming the first violated constraint.
void validate(const ModelSpec& spec);

/// Number of sites in one unit cell (q for the AAH variants, 4 for FourBand).
int unit_cell_size(const ModelSpec& spec);

/// Clean (disorder-free) nearest-neighbour hopping of bond j, 1-based.
double bond_coefficient(const ModelSpec& spec, int j);

/// Clean on-site energy of site j, 1-based.
double onsite_energy(const ModelSpec& spec, int j);

/// Real symmetric single-particle Hamiltonian.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix() = default;
  /// Throws ConfigError if `h` is not square and exactly symmetric.
  explicit HamiltonianMatrix(Eigen::MatrixXd h);

  int size() const { return static_cast<int>(h_.rows()); }
  const Eigen::MatrixXd& matrix() const { return h_; }
  /// Largest |i-j| with a nonzero entry.
  int bandwidth() const;
  /// h_{j,j+1} for j = 1..N-1.
  std::vector<double> bonds() const;
  /// Spectral norm.
  double norm2() const;

  /// Nonzero entries per row, for banded products.
  const std::vector<std::vector<std::pair<int, double>>>& rows() const { return rows_; }

 private:
  Eigen::MatrixXd h_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

HamiltonianMatrix build_hamiltonian(const ModelSpec& spec);

/// Uniform chain with hopping g and no on-site potential (any N >= 1).
HamiltonianMatrix uniform_chain(int n_sites, double g = 1.0);

/// Gamma h Gamma = -h with Gamma = diag((-1)^j), to 1e-12.
bool check_chiral(const HamiltonianMatrix& h);

/// R h R = h with R the anti-diagonal permutation; with `signed_reflection`
/// R'_{ij} = (-1)^j delta_{i,N+1-j} is used instead. Tolerance 1e-12.
bool check_reflection(const HamiltonianMatrix& h, bool signed_reflection);

}  // namespace edgesync
