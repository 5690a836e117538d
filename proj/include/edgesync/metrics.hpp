#pragma once

// Synchronization measures on sampled traces: sliding-window Pearson
// coefficient, dominant oscillation frequency and steady amplitude.

#include <string>
#include <vector>

#include "edgesync/dynamics.hpp"
#include "json.hpp"

namespace edgesync {

struct MetricConfig {
  double window = 0.0;       ///< sliding window length (1/g)
  double t_transient = 0.0;  ///< analysis starts here
  double tau = 0.0;          ///< shift applied to the second series
};

/// Throws ConfigError unless window > 0 and t_transient >= 0.
void validate(const MetricConfig& cfg);

/// r(t) over [t, t + window] between f(.) and h(. + tau). h is shifted by linear
/// interpolation. Output stops where the window or the shift leaves the grid;
/// windows with zero variance give NaN. Channel name "r".
TimeSeries pearson(const std::vector<double>& t, const std::vector<double>& f,
                   const std::vector<double>& h, const MetricConfig& cfg);

/// Mean, minimum and maximum of the defined r samples with t >= t_from.
struct PearsonSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean_abs = 0.0;
  int samples = 0;
  int gaps = 0;
};

PearsonSummary summarize_pearson(const TimeSeries& r, double t_from);

struct FrequencyEstimate {
  double omega = 0.0;
  double uncertainty = 0.0;  ///< standard error of the sinusoid fit
  double offset = 0.0;       ///< a in a + b cos(omega t + phase)
  double amplitude = 0.0;    ///< b >= 0
  double phase = 0.0;
  double peak_ratio = 0.0;   ///< dominant spectral peak over the spectral median
  bool multi_peak = false;   ///< a second peak carries >= 10% of the dominant power
  double secondary_omega = 0.0;  ///< 0 (null in JSON) unless multi_peak
  double periods = 0.0;      ///< oscillation periods in the analysed segment
};

/// Hann-tapered spectrum of the mean-subtracted segment t >= t_transient,
/// refined by a least-squares fit of a + b cos(omega t + phase).
/// Throws NoOscillationError when the dominant peak is below 5x the spectral
/// median, and ConfigError when the segment holds fewer than 10 periods.
FrequencyEstimate extract_frequency(const std::vector<double>& t, const std::vector<double>& f,
                                    const MetricConfig& cfg);

struct AmplitudeEstimate {
  double amplitude = 0.0;       ///< fit value b
  double peak_to_trough = 0.0;  ///< half the mean excursion over the last 5 periods
  double omega = 0.0;
};

AmplitudeEstimate extract_amplitude(const std::vector<double>& t, const std::vector<double>& f,
                                    const MetricConfig& cfg);

nlohmann::json to_json(const FrequencyEstimate& f);
nlohmann::json to_json(const AmplitudeEstimate& a);
nlohmann::json to_json(const PearsonSummary& p);

}  // namespace edgesync
