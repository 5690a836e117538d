#pragma once

// Correlation-matrix dynamics C_ij = <c_i^dag c_j> under a quadratic
// Hamiltonian with local dephasing (J_s = n_s) or loss (J_s = c_s).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "edgesync/lattice.hpp"

namespace edgesync {

enum class JumpType { Dephasing, Loss };

std::string to_string(JumpType j);
JumpType jump_type_from_string(const std::string& name);

struct DissipationSpec {
  JumpType jump_type = JumpType::Dephasing;
  std::vector<int> sites;  ///< 1-based, ascending, unique
  double gamma = 0.0;
};

/// Throws ConfigError if sites are out of range or gamma < 0.
void validate(const DissipationSpec& d, int n_sites);

/// Named dissipation site sets:
///   CenterTwo  {floor(N/2), floor(N/2)+1}
///   CenterFive {(N-3)/2, ..., (N+5)/2}, N odd
///   BulkHalf   {(N+3)/4, ..., (3N+1)/4}, N = 1 mod 4
std::vector<int> site_preset(const std::string& name, int n_sites);

/// Product state prod_j (cos theta_j + e^{i phi_j} sin theta_j c_j^dag)|0>,
/// operators ordered with j = 1 leftmost.
struct ProductStateSpec {
  std::vector<double> theta;
  std::vector<double> phi;

  int size() const { return static_cast<int>(theta.size()); }
};

void validate(const ProductStateSpec& p);

ProductStateSpec vacuum_state(int n_sites);
/// |+0...0+>
ProductStateSpec plus_ends_state(int n_sites);
/// |10...0+>
ProductStateSpec one_plus_state(int n_sites);
/// theta_j uniform in [0, pi), phi_j uniform in [0, 2 pi).
ProductStateSpec random_product_state(int n_sites, std::uint64_t seed);

using CorrelationMatrix = Eigen::MatrixXcd;

/// Exact two-point function of a product state, including the parity string
/// prod_{i<k<j} (1 - 2 sin^2 theta_k).
CorrelationMatrix initial_correlation(const ProductStateSpec& spec);

/// max |C - C^dag|
double hermiticity_violation(const CorrelationMatrix& c);

/// dC/dt = i(h^T C - C h^T) - D o C, with D_ij = (gamma/2)(1_{i in S} + 1_{j in S})
/// minus gamma 1_{i in S} on the diagonal for dephasing.
Eigen::MatrixXcd lindblad_rhs(const CorrelationMatrix& c, const HamiltonianMatrix& h,
                              const DissipationSpec& d);

/// Entrywise damping matrix D of the dissipator.
Eigen::MatrixXd damping_matrix(const DissipationSpec& d, int n_sites);

/// Observable extracted from C at each sample.
/// Names: "n_<j>", "n_N", "n_mid", "ReC_<i>_<j>", "ImC_<i>_<j>", "ReC_1N",
/// "ImC_1N", "N_tot". Site indices are 1-based.
struct Channel {
  enum class Kind { Population, RealPart, ImagPart, Total };
  std::string name;
  Kind kind;
  int i = 0;  ///< 0-based
  int j = 0;

  double evaluate(const CorrelationMatrix& c) const;
};

Channel parse_channel(const std::string& name, int n_sites);
std::vector<Channel> parse_channels(const std::vector<std::string>& names, int n_sites);

/// Uniformly sampled observable traces. NaN marks an undefined sample.
struct TimeSeries {
  std::vector<double> t;
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return t.size(); }
  double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  bool has(const std::string& name) const;
  /// Throws std::out_of_range for an unknown channel.
  const std::vector<double>& channel(const std::string& name) const;
  void add_channel(std::string name, std::vector<double> values);
};

struct EvolveOptions {
  /// RK4 step cap is step_constant / (||h||_2 + gamma).
  double step_constant = 0.005;
  /// Dump full C every K samples into TimeSeries::metadata["snapshots"]; 0 = off.
  int snapshot_every = 0;
  /// Check the spectrum of C every K samples; 0 = off.
  int spectrum_check_every = 10;
};

/// Fixed-step classical RK4. C is re-symmetrized at every sample; metadata
/// records the step, the largest Hermiticity violation, particle-number drift
/// and the extreme eigenvalues of C seen at checked samples.
TimeSeries evolve(const CorrelationMatrix& c0, const HamiltonianMatrix& h,
                  const DissipationSpec& d, double t_max, double dt,
                  const std::vector<std::string>& channels, const EvolveOptions& options = {});

/// evolve() plus the state at the last sample.
struct EvolveResult {
  TimeSeries series;
  CorrelationMatrix final_state;
};

EvolveResult evolve_with_state(const CorrelationMatrix& c0, const HamiltonianMatrix& h,
                               const DissipationSpec& d, double t_max, double dt,
                               const std::vector<std::string>& channels,
                               const EvolveOptions& options = {});

/// Number of samples k = 0..K with K = round(t_max / dt).
int sample_count(double t_max, double dt);

}  // namespace edgesync
