#pragma once

// Correlation-space Liouvillian: d vec(C)/dt = M vec(C) (column stacking),
// its spectrum, and the classification of modes into stationary,
// synchronization and relaxing modes.

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "edgesync/dynamics.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/single_particle.hpp"

namespace edgesync {

/// Largest N^2 diagonalized without an explicit opt-in.
inline constexpr std::size_t kDefaultSuperoperatorCap = 4096;

class Superoperator {
 public:
  Superoperator(HamiltonianMatrix h, DissipationSpec d);

  int n_sites() const { return h_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(n_sites()) * n_sites(); }
  const HamiltonianMatrix& hamiltonian() const { return h_; }
  const DissipationSpec& dissipation() const { return d_; }
  const Eigen::MatrixXd& damping() const { return damping_; }

  /// M acting on a matrix; identical to lindblad_rhs.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& c) const;

  /// Dense N^2 x N^2 matrix:
  ///   i(I (x) h^T - h (x) I) - (gamma/2) sum_s (I (x) E_s + E_s (x) I - 2 E_s (x) E_s)
  /// (the last term only for dephasing).
  Eigen::MatrixXcd dense() const;

 private:
  HamiltonianMatrix h_;
  DissipationSpec d_;
  Eigen::MatrixXd damping_;
};

Superoperator build_superoperator(const HamiltonianMatrix& h, const DissipationSpec& d);

/// Column-stacked vec(C).
Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& c);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, int n);

enum class ModeClass { Stationary, Sync, Relaxing };
std::string to_string(ModeClass c);

struct LiouvillianMode {
  std::complex<double> eigenvalue;
  ModeClass mode_class;
  double overlap;  ///< ||P R P||_F^2 for the unit-norm right eigenoperator R
  int sector;      ///< index of the symmetry sector it was found in
};

/// Projection of the initial condition onto the synchronization modes at one
/// entry (i, j) of C (0-based).
struct SyncProjection {
  int i;
  int j;
  std::complex<double> positive;  ///< sum over Sync modes with Im > 0 of c_k R_k(i, j)
  std::complex<double> negative;  ///< same for Im < 0
  /// For a population (i == j): oscillation amplitude 2 |positive|.
  double amplitude() const { return std::abs(positive) + std::abs(negative); }
};

struct LiouvillianReport {
  std::vector<LiouvillianMode> modes;
  double r_decay = 0.0;     ///< min |Re| over Sync modes
  double r_relax = 0.0;     ///< min |Re| over Relaxing modes
  double omega_sync = 0.0;  ///< |Im| of the slowest-decaying Sync mode
  double omega_sync_hint = 0.0;
  int n_stationary = 0;
  int n_sync = 0;
  int n_relaxing = 0;
  double max_real_part = 0.0;
  std::string symmetry = "none";
  std::vector<int> protected_indices;
  std::vector<SyncProjection> projections;
};

struct SpectrumOptions {
  bool allow_large = false;
  /// Split by a reflection symmetry of h and the dissipation sites when one
  /// exists.
  bool use_symmetry = true;
  /// When set, SyncProjection entries are computed for `probes`.
  const CorrelationMatrix* initial = nullptr;
  std::vector<std::pair<int, int>> probes;
};

/// Classification (P projects onto the protected single-particle states,
/// overlap = ||P R P||_F^2 of the unit-norm right eigenoperator R):
///   Sync        overlap > 0.5 and ||Im| - hint| < 0.1 hint
///   Stationary  overlap > 0.5 and |Im| < 0.1 hint, or |lambda| < 1e-8 ||h||_2
///   Relaxing    everything else
/// Throws ClassificationError when no Sync mode exists and CapabilityError
/// above the size cap.
LiouvillianReport spectrum_and_classify(const Superoperator& m, const EigenSystem& es,
                                        const std::vector<int>& protected_indices,
                                        double omega_sync_hint, const SpectrumOptions& options = {});

/// Eigenvalues only, through the same reduced real representation.
/// CapabilityError above the size cap unless allow_large.
Eigen::VectorXcd superoperator_eigenvalues(const Superoperator& m, bool use_symmetry = true,
                                           bool allow_large = false);

nlohmann::json to_json(const LiouvillianReport& r, bool include_modes = true);

}  // namespace edgesync
