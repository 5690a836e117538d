#pragma once

// Diagonalization, closed-form edge energies, and edge-state detection.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "edgesync/lattice.hpp"
#include "json.hpp"

namespace edgesync {

struct EigenSystem {
  Eigen::VectorXd energies;  ///< ascending
  Eigen::MatrixXd states;    ///< orthonormal columns u_{j,n}
};

/// Dense symmetric diagonalization. Each column is signed so that its first
/// entry with |u| > 1e-12 is positive.
EigenSystem eigensystem(const HamiltonianMatrix& h);

struct EdgeEnergyPair {
  double mu1;
  double mu2;
};

/// Closed-form edge energies of the diagonal AAH chain (q = 3), units of g.
EdgeEnergyPair edge_energies_diagonal(double v, double phi_v);

/// Edge-state pairs of the off-diagonal AAH chain (q = 4). Each engaged side
/// carries a pair at +/- the stored positive energy.
struct OffDiagonalEdges {
  std::optional<double> left;
  std::optional<double> right;
};

OffDiagonalEdges edge_energies_offdiagonal(double lambda, double phi_lambda);

/// epsilon* = sqrt(2 + lambda^2 - 2 lambda), the phi_lambda = 0 degeneracy.
double degenerate_edge_energy(double lambda);

struct FourBandEdge {
  double energy;  ///< sqrt(g1^2 + g2^2)
  bool is_edge;   ///< |g2/g1| < 1
};

FourBandEdge edge_energy_fourband(double g1, double g2);

/// Bulk band extents [lo, hi] from the Bloch Hamiltonian of one unit cell,
/// sampled on `k_points` momenta in [-pi, pi). Disorder is ignored.
std::vector<std::pair<double, double>> bulk_bands(const ModelSpec& spec, int k_points = 256);

enum class EdgeSide { Left, Right };
enum class GapLabel { BottomGap, MidGap, TopGap };

std::string to_string(EdgeSide s);
std::string to_string(GapLabel g);

/// One localized edge state. For a cluster of several in-gap eigenvectors in
/// the same gap the state is a rotation inside that eigenspace.
struct EdgeState {
  int index;  ///< eigenvector index (0-based) with the largest component
  double energy;
  EdgeSide side;
  double edge_weight;  ///< weight on the `window` sites at `side`
  GapLabel gap_label;
  int cluster;  ///< index into EdgeStateReport::clusters
  Eigen::VectorXd amplitudes;
};

/// All in-gap eigenvectors sharing a gap.
struct EdgeCluster {
  GapLabel gap_label;
  std::vector<int> indices;
  double weight_left;   ///< trace of the left-window projector on the eigenspace
  double weight_right;
};

struct EdgeStateReport {
  int window = 0;
  std::vector<EdgeState> states;
  std::vector<EdgeCluster> clusters;

  /// Union of eigenvector indices of clusters hosting a reported state,
  /// ascending.
  std::vector<int> protected_indices() const;
};

/// Detects edge states: eigenvectors sitting at least 1e-6 (energy units)
/// inside a bulk gap are grouped per gap, each group is rotated to its most
/// edge-localized basis, and rotated states with more than half their weight
/// on the `window` outermost sites of one side are reported.
/// Requires N >= 2 * window.
EdgeStateReport identify_edge_states(const EigenSystem& es,
                                     const std::vector<std::pair<double, double>>& bands,
                                     int window);

/// Convenience: bands from `spec`, window = unit cell size.
EdgeStateReport identify_edge_states(const ModelSpec& spec, const EigenSystem& es);

/// States carry energy, side, gap label and edge weight; amplitudes are omitted.
nlohmann::json to_json(const EdgeStateReport& r);

inline constexpr double kEdgeWeightThreshold = 0.5;
inline constexpr double kGapTolerance = 1e-6;

}  // namespace edgesync
