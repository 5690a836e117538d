#pragma once

// JSON run configurations: scenarios, sweeps and the robustness suite.
// Parsing expands presets (site sets, initial states) so the resolved
// document records exactly what was simulated.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgesync/dynamics.hpp"
#include "edgesync/fits.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/metrics.hpp"
#include "json.hpp"

namespace edgesync {

/// A metric value given either as a number or as a rule resolved at run time.
struct MetricSetting {
  enum class Kind { Auto, Value, QuarterPeriod, MinusQuarterPeriod };
  Kind kind = Kind::Auto;
  double value = 0.0;
};

struct MetricSpec {
  std::string first = "n_1";   ///< Pearson pair
  std::string second = "n_N";
  std::string frequency_channel;  ///< defaults to `first`
  MetricSetting window;       ///< Auto: two periods of omega_hint
  MetricSetting t_transient;  ///< Auto: 3/r_relax, else t_max/2
  MetricSetting tau;          ///< Auto: 0
};

struct InitialStateSpec {
  std::string preset = "Custom";  ///< Vacuum, PlusEnds, OnePlus, Random, Custom
  std::uint64_t seed = 0;
  ProductStateSpec state;
};

struct ScenarioConfig {
  std::string name;
  ModelSpec model;
  DissipationSpec dissipation;
  std::string site_preset;  ///< empty when sites are listed explicitly
  InitialStateSpec initial;
  double t_max = 0.0;
  double dt = 0.0;
  std::vector<std::string> channels;
  MetricSpec metrics;
  std::optional<double> omega_hint;  ///< overrides the closed-form value
  bool liouvillian = true;           ///< skipped above the size cap unless allow_large
  std::string output;
};

/// Throws ConfigError naming the offending field.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

/// Re-resolves presets for a new chain length.
void set_chain_length(ScenarioConfig& c, int n_sites);

/// Closed-form synchronization frequency for the model: |mu1 - mu2| (diagonal),
/// 2 eps (off-diagonal), 2 sqrt(g1^2 + g2^2) (four-band). Throws ConfigError
/// when the model has no edge pair.
double closed_form_omega(const ModelSpec& m);

/// Sites per unit cell and offset: N = cell * l + offset.
struct ChainLength {
  int cell = 4;
  int offset = 1;
  int n_sites(int l) const { return cell * l + offset; }
};

struct FitRequest {
  std::string kind;      ///< exponential, powerlaw, crossover
  std::string quantity;  ///< CSV column
  std::vector<double> l_range;  ///< optional [lo, hi]
  Residual residual = Residual::Relative;
};

struct SweepConfig {
  std::string name;
  ScenarioConfig base;
  std::vector<int> l_values;
  std::vector<double> gamma_values;
  std::string task = "rates";  ///< rates, amplitude-frequency
  ChainLength chain;
  std::vector<FitRequest> fits;
  std::string output;
};

SweepConfig parse_sweep(const nlohmann::json& j, const std::string& base_dir = ".");
SweepConfig load_sweep(const std::string& path);
nlohmann::json to_json(const SweepConfig& c);

struct RobustnessCase {
  std::string name;
  double g3 = 0.0;
  double disorder_amplitude = 0.0;
  std::uint64_t disorder_seed = 0;
  std::optional<std::uint64_t> random_state_seed;
};

struct RobustnessConfig {
  ScenarioConfig base;
  std::vector<RobustnessCase> cases;
  double threshold = 0.99;
  std::string output;
};

RobustnessConfig parse_robustness(const nlohmann::json& j, const std::string& base_dir = ".");
RobustnessConfig load_robustness(const std::string& path);
nlohmann::json to_json(const RobustnessConfig& c);

/// Reads a JSON document; ConfigError on I/O or syntax errors.
nlohmann::json read_json(const std::string& path);

/// SHA-256 of the canonical serialization, hex encoded.
std::string config_hash(const nlohmann::json& j);

}  // namespace edgesync
