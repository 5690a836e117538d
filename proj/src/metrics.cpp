#include "edgesync/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <fftw3.h>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// FFTW's planner is not thread-safe.
std::mutex fftw_planner_mutex;

double uniform_step(const std::vector<double>& t) {
  if (t.size() < 2) throw ConfigError("time grid needs at least two samples");
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ConfigError("time grid must be increasing");
  const double tol = 1e-6 * dt;
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs(t[k] - t[0] - k * dt) > tol * static_cast<double>(k + 1))
      throw ConfigError("time grid is not uniform");
  return dt;
}

void check_lengths(const std::vector<double>& t, const std::vector<double>& f) {
  if (t.size() != f.size()) throw DimensionError("channel length differs from the time grid");
  for (double v : f)
    if (!std::isfinite(v)) throw ConfigError("channel contains non-finite samples");
}

struct Segment {
  std::vector<double> t;
  std::vector<double> f;
  double dt;
};

Segment post_transient(const std::vector<double>& t, const std::vector<double>& f, const MetricConfig& cfg) {
  validate(cfg);
  check_lengths(t, f);
  const double dt = uniform_step(t);
  Segment s{{}, {}, dt};
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= cfg.t_transient - 1e-9 * dt) {
      s.t.push_back(t[k]);
      s.f.push_back(f[k]);
    }
  if (s.t.size() < 32) throw ConfigError("fewer than 32 samples after t_transient");
  return s;
}

// Linear least squares of f on [1, cos w t, sin w t] with t centred.
struct SinusoidFit {
  double a, p, q, rss;
};

SinusoidFit fit_sinusoid(const std::vector<double>& tc, const std::vector<double>& f, double omega) {
  const Eigen::Index n = static_cast<Eigen::Index>(tc.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(omega * tc[k]);
    x(k, 2) = std::sin(omega * tc[k]);
    y(k) = f[k];
  }
  const Eigen::Vector3d c = x.colPivHouseholderQr().solve(y);
  return {c(0), c(1), c(2), (x * c - y).squaredNorm()};
}

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

void validate(const MetricConfig& cfg) {
  if (!(cfg.window > 0.0) || !std::isfinite(cfg.window)) throw ConfigError("metrics.window must be > 0");
  if (!(cfg.t_transient >= 0.0) || !std::isfinite(cfg.t_transient))
    throw ConfigError("metrics.t_transient must be >= 0");
  if (!std::isfinite(cfg.tau)) throw ConfigError("metrics.tau must be finite");
}

TimeSeries pearson(const std::vector<double>& t, const std::vector<double>& f,
                   const std::vector<double>& h, const MetricConfig& cfg) {
  validate(cfg);
  check_lengths(t, f);
  check_lengths(t, h);
  const double dt = uniform_step(t);
  const long n = static_cast<long>(t.size());
  const long w = std::lround(cfg.window / dt);
  if (w + 1 < 16) throw ConfigError("pearson window spans fewer than 16 samples");
  const double shift = cfg.tau / dt;

  auto shifted = [&](long i) {
    const double x = static_cast<double>(i) + shift;
    long i0 = static_cast<long>(std::floor(x));
    double frac = x - static_cast<double>(i0);
    if (i0 == n - 1) {
      i0 = n - 2;
      frac = 1.0;
    }
    return (1.0 - frac) * h[i0] + frac * h[i0 + 1];
  };
  const double eps = 1e-9;
  const long first = std::max(0L, static_cast<long>(std::ceil(-shift - eps)));

  TimeSeries out;
  out.names = {"r"};
  out.channels.assign(1, {});
  std::vector<double> hs(w + 1);
  for (long k = first; k + w < n && static_cast<double>(k + w) + shift <= static_cast<double>(n - 1) + eps; ++k) {
    double mf = 0.0, mh = 0.0;
    for (long i = 0; i <= w; ++i) {
      hs[i] = shifted(k + i);
      mf += f[k + i];
      mh += hs[i];
    }
    mf /= static_cast<double>(w + 1);
    mh /= static_cast<double>(w + 1);
    double sff = 0.0, shh = 0.0, sfh = 0.0;
    for (long i = 0; i <= w; ++i) {
      const double df = f[k + i] - mf, dh = hs[i] - mh;
      sff += df * df;
      shh += dh * dh;
      sfh += df * dh;
    }
    const double m = static_cast<double>(w + 1);
    const bool flat_f = sff == 0.0 || sff / m <= 1e-26 * mf * mf;
    const bool flat_h = shh == 0.0 || shh / m <= 1e-26 * mh * mh;
    const double r = (flat_f || flat_h) ? kNaN : std::clamp(sfh / std::sqrt(sff * shh), -1.0, 1.0);
    out.t.push_back(t[k]);
    out.channels[0].push_back(r);
  }
  out.metadata["window"] = cfg.window;
  out.metadata["tau"] = cfg.tau;
  out.metadata["window_samples"] = w + 1;
  return out;
}

PearsonSummary summarize_pearson(const TimeSeries& r, double t_from) {
  PearsonSummary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  const auto& v = r.channels.at(0);
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    if (r.t[k] < t_from) continue;
    if (std::isnan(v[k])) {
      ++s.gaps;
      continue;
    }
    ++s.samples;
    s.mean += v[k];
    s.mean_abs += std::abs(v[k]);
    s.min = std::min(s.min, v[k]);
    s.max = std::max(s.max, v[k]);
  }
  if (s.samples == 0) return {kNaN, kNaN, kNaN, kNaN, 0, s.gaps};
  s.mean /= s.samples;
  s.mean_abs /= s.samples;
  return s;
}

FrequencyEstimate extract_frequency(const std::vector<double>& t, const std::vector<double>& f,
                                    const MetricConfig& cfg) {
  const Segment seg = post_transient(t, f, cfg);
  const std::size_t n = seg.t.size();
  double mean = 0.0;
  for (double v : seg.f) mean += v;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double v : seg.f) spread = std::max(spread, std::abs(v - mean));
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean)))
    throw NoOscillationError("series is constant after the transient");

  const std::size_t m = next_pow2(4 * n);
  std::vector<double> buffer(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double hann = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / static_cast<double>(n - 1)));
    buffer[k] = (seg.f[k] - mean) * hann;
  }
  std::vector<fftw_complex> spectrum(m / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), buffer.data(), spectrum.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  std::vector<double> power(m / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k)
    power[k] = spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1];

  // Bins closer to DC than a few main-lobe widths are trend, not oscillation.
  const std::size_t lobe = (m + n - 1) / n;
  const std::size_t lowest = 3 * lobe;
  if (lowest + 2 >= power.size()) throw NoOscillationError("segment too short for a spectral estimate");
  std::size_t peak = lowest;
  for (std::size_t k = lowest; k < power.size(); ++k)
    if (power[k] > power[peak]) peak = k;
  std::vector<double> sorted(power.begin() + 1, power.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  FrequencyEstimate est;
  est.peak_ratio = median > 0.0 ? power[peak] / median : std::numeric_limits<double>::infinity();
  if (!(est.peak_ratio > 5.0))
    throw NoOscillationError("no spectral peak above 5x the median (ratio " + std::to_string(est.peak_ratio) + ")");

  const double df = 2.0 * std::numbers::pi / (static_cast<double>(m) * seg.dt);
  double secondary = 0.0;
  for (std::size_t k = lowest; k + 1 < power.size(); ++k) {
    if (k + 3 * lobe > peak && k < peak + 3 * lobe) continue;
    if (power[k] > power[k - 1] && power[k] >= power[k + 1] && power[k] > secondary) {
      secondary = power[k];
      est.secondary_omega = df * static_cast<double>(k);
    }
  }
  est.multi_peak = secondary >= 0.1 * power[peak];
  if (!est.multi_peak) est.secondary_omega = 0.0;

  const double t_centre = 0.5 * (seg.t.front() + seg.t.back());
  std::vector<double> tc(n);
  for (std::size_t k = 0; k < n; ++k) tc[k] = seg.t[k] - t_centre;
  const double omega0 = df * static_cast<double>(peak);
  const double bin = 2.0 * std::numbers::pi / (static_cast<double>(n) * seg.dt);
  auto rss = [&](double w) { return fit_sinusoid(tc, seg.f, w).rss; };
  double lo = std::max(omega0 - bin, 0.5 * omega0), hi = omega0 + bin;
  double best = omega0, best_rss = rss(omega0);
  for (int k = 0; k <= 40; ++k) {
    const double w = lo + (hi - lo) * k / 40.0;
    const double r = rss(w);
    if (r < best_rss) {
      best_rss = r;
      best = w;
    }
  }
  const double step = (hi - lo) / 40.0;
  std::uintmax_t iterations = 200;
  const double omega = boost::math::tools::brent_find_minima(rss, std::max(lo, best - step),
                                                             std::min(hi, best + step), 52, iterations)
                           .first;

  const SinusoidFit fit = fit_sinusoid(tc, seg.f, omega);
  est.omega = omega;
  est.offset = fit.a;
  est.amplitude = std::hypot(fit.p, fit.q);
  est.phase = std::remainder(std::atan2(-fit.q, fit.p) - omega * t_centre, 2.0 * std::numbers::pi);
  est.periods = omega * (seg.t.back() - seg.t.front()) / (2.0 * std::numbers::pi);

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 4);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = std::cos(omega * tc[k]), s = std::sin(omega * tc[k]);
    jac.row(static_cast<Eigen::Index>(k)) << 1.0, c, s, tc[k] * (fit.q * c - fit.p * s);
  }
  const Eigen::Matrix4d normal = jac.transpose() * jac;
  const double sigma2 = fit.rss / static_cast<double>(n - 4);
  const Eigen::Matrix4d cov = sigma2 * normal.inverse();
  est.uncertainty = std::sqrt(std::max(0.0, cov(3, 3)));

  if (est.periods < 10.0)
    throw ConfigError("segment after t_transient holds " + std::to_string(est.periods) +
                      " periods; at least 10 are required");
  return est;
}

AmplitudeEstimate extract_amplitude(const std::vector<double>& t, const std::vector<double>& f,
                                    const MetricConfig& cfg) {
  const FrequencyEstimate freq = extract_frequency(t, f, cfg);
  const Segment seg = post_transient(t, f, cfg);
  const double period = 2.0 * std::numbers::pi / freq.omega;
  const double end = seg.t.back();
  double sum = 0.0;
  int count = 0;
  for (int p = 0; p < 5; ++p) {
    const double hi = end - p * period, lo = hi - period;
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < seg.t.size(); ++k)
      if (seg.t[k] > lo && seg.t[k] <= hi) {
        mx = std::max(mx, seg.f[k]);
        mn = std::min(mn, seg.f[k]);
      }
    if (mx >= mn) {
      sum += 0.5 * (mx - mn);
      ++count;
    }
  }
  return {freq.amplitude, count ? sum / count : kNaN, freq.omega};
}

nlohmann::json to_json(const FrequencyEstimate& f) {
  return {{"omega", f.omega},
          {"uncertainty", f.uncertainty},
          {"offset", f.offset},
          {"amplitude", f.amplitude},
          {"phase", f.phase},
          {"peak_ratio", f.peak_ratio},
          {"multi_peak", f.multi_peak},
          {"secondary_omega", f.multi_peak ? nlohmann::json(f.secondary_omega) : nlohmann::json(nullptr)},
          {"periods", f.periods}};
}

nlohmann::json to_json(const AmplitudeEstimate& a) {
  return {{"amplitude", a.amplitude}, {"peak_to_trough", a.peak_to_trough}, {"omega", a.omega}};
}

nlohmann::json to_json(const PearsonSummary& p) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return {{"mean", number(p.mean)}, {"min", number(p.min)},           {"max", number(p.max)},
          {"mean_abs", number(p.mean_abs)}, {"samples", p.samples}, {"gaps", p.gaps}};
}

}  // namespace edgesync
