#pragma once

// Exact many-body reference for small chains: the full density matrix in the
// 2^N occupation basis, evolved under the Lindblad master equation. Used as
// ground truth for the correlation-matrix machinery.

#include <complex>
#include <string>
#include <vector>

#include "edgesync/dynamics.hpp"
#include "edgesync/lattice.hpp"

namespace edgesync {

inline constexpr int kOracleMaxSites = 8;

/// Same channels and sampling as evolve(), from the many-body density matrix
/// of the product state. Throws CapabilityError for N > kOracleMaxSites.
///
/// Both the Hamiltonian and the jump operators (n_s or c_s) map
/// particle-number-diagonal blocks of rho onto themselves, and two-point
/// functions only read those blocks, so only they are propagated. The
/// propagator over each sample interval is a Taylor series of exp(dt L)
/// with sub-steps of norm <= 1, summed to machine precision.
TimeSeries exact_oracle_evolve(const ProductStateSpec& state, const HamiltonianMatrix& h,
                               const DissipationSpec& d, double t_max, double dt,
                               const std::vector<std::string>& channels);

/// <c_i^dag c_j> of the many-body product state, evaluated with explicit
/// fermionic operators on the 2^N state vector (0-based i, j).
std::complex<double> product_state_two_point(const ProductStateSpec& state, int i, int j);

}  // namespace edgesync
