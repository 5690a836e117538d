#pragma once

// Scenario runs, parameter sweeps and the robustness suite, with their file
// outputs (CSV traces and tables, JSON summaries).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgesync/config.hpp"
#include "edgesync/dynamics.hpp"
#include "edgesync/liouvillian.hpp"
#include "json.hpp"

namespace edgesync {

struct RunOptions {
  int workers = 0;  ///< 0 = available parallelism
  bool allow_large = false;
  bool write = true;  ///< false: compute only
  std::optional<std::string> output;  ///< overrides the config's directory
};

struct ScenarioResult {
  ScenarioConfig config;  ///< metric settings resolved to numbers
  TimeSeries series;
  TimeSeries pearson;
  std::optional<LiouvillianReport> liouvillian;
  nlohmann::json metrics;
  std::string directory;
};

/// Writes config.json, timeseries.csv, timeseries.meta.json, metrics.json and,
/// when the spectrum is computed, liouvillian.json.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Spectrum and classification only (the `liouvillian` subcommand).
LiouvillianReport scenario_liouvillian(const ScenarioConfig& cfg, bool allow_large);

struct SweepRow {
  int l = 0;
  int n_sites = 0;
  double gamma = 0.0;
  std::map<std::string, double> values;
};

struct SweepFailure {
  int l = 0;
  int n_sites = 0;
  double gamma = 0.0;
  std::string error;
};

struct SweepResult {
  std::vector<std::string> columns;  ///< quantities after l, N, gamma
  std::vector<SweepRow> rows;
  std::vector<SweepFailure> failures;
  nlohmann::json fits = nlohmann::json::array();
  std::string directory;
};

/// Quantities per grid point:
///   rates                r_decay, r_relax, omega_sync, amplitude (n_1 sync
///                        amplitude from the spectral projection of the
///                        initial state), amplitude_N
///   amplitude-frequency  omega, omega_uncertainty, amplitude, peak_to_trough
/// Writes sweep.csv, fits.json, failures.json and config.json.
SweepResult run_sweep(const SweepConfig& cfg, const RunOptions& options = {});

/// Fits requested quantities per gamma. Rows with non-positive or missing
/// values are skipped.
nlohmann::json run_fits(const std::vector<SweepRow>& rows, const std::vector<FitRequest>& fits);

struct RobustnessRun {
  std::string case_name;
  double gamma = 0.0;
  double r_min = 0.0;   ///< post-transient minimum of r
  double r_mean = 0.0;
  std::optional<double> omega;
  std::string error;
  std::string directory;
};

struct RobustnessReport {
  std::vector<RobustnessRun> runs;
  nlohmann::json summary;
  std::string directory;
};

/// The base scenario with one case's modifications applied.
ScenarioConfig robustness_case(const RobustnessConfig& cfg, const RobustnessCase& rc);

/// Each case runs with the base gamma and with gamma = 0 over the same
/// post-transient window. Writes robustness.json.
RobustnessReport run_robustness(const RobustnessConfig& cfg, const RunOptions& options = {});

/// CSV helpers. Numbers use the shortest round-trip form; NaN is an empty field.
std::string format_number(double v);
void write_timeseries_csv(const std::string& path, const TimeSeries& ts,
                          const std::vector<std::pair<std::string, const TimeSeries*>>& extra = {});
void write_sweep_csv(const std::string& path, const SweepResult& r);
void write_json(const std::string& path, const nlohmann::json& j);

/// Reads a sweep CSV back (the `fit` subcommand).
std::vector<SweepRow> read_sweep_csv(const std::string& path);

}  // namespace edgesync
