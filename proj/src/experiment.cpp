#include "edgesync/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "edgesync/errors.hpp"
#include "edgesync/fits.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/metrics.hpp"
#include "edgesync/single_particle.hpp"

namespace edgesync {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSyncThreshold = 0.99;
constexpr double kFinalFraction = 0.2;

json maybe_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::optional<double> scenario_omega(const ScenarioConfig& c) {
  if (c.omega_hint) return c.omega_hint;
  try {
    return closed_form_omega(c.model);
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}

bool within_cap(int n, bool allow_large) {
  return allow_large || static_cast<std::size_t>(n) * n <= kDefaultSuperoperatorCap;
}

LiouvillianReport classify(const ScenarioConfig& c, const HamiltonianMatrix& h, double omega, bool allow_large,
                           const CorrelationMatrix* c0, std::vector<std::pair<int, int>> probes) {
  const EigenSystem es = eigensystem(h);
  const EdgeStateReport edges = identify_edge_states(c.model, es);
  const Superoperator m(h, c.dissipation);
  SpectrumOptions opt;
  opt.allow_large = allow_large;
  opt.initial = c0;
  opt.probes = std::move(probes);
  return spectrum_and_classify(m, es, edges.protected_indices(), omega, opt);
}

std::vector<std::string> evolved_channels(const ScenarioConfig& c) {
  std::vector<std::string> out = c.channels;
  for (const auto& extra : {c.metrics.first, c.metrics.second, c.metrics.frequency_channel})
    if (std::find(out.begin(), out.end(), extra) == out.end()) out.push_back(extra);
  return out;
}

json frequency_match(const ModelSpec& m, const json& frequency) {
  const auto mu = edge_energies_diagonal(m.v, m.phi_v);
  const double base = std::abs(mu.mu1 - mu.mu2);
  json out{{"candidates", {{{"name", "abs_mu1_minus_mu2"}, {"omega", base}},
                           {{"name", "twice_abs_mu1_minus_mu2"}, {"omega", 2.0 * base}}}},
           {"tolerance", 0.01}};
  if (!frequency.contains("omega")) {
    out["matched"] = nullptr;
    return out;
  }
  const double w = frequency["omega"].get<double>();
  std::vector<std::string> hits;
  for (auto& c : out["candidates"]) {
    const double err = std::abs(w - c["omega"].get<double>()) / c["omega"].get<double>();
    c["relative_error"] = err;
    if (err < 0.01) hits.push_back(c["name"].get<std::string>());
  }
  out["matches"] = hits;
  out["matched"] = hits.size() == 1 ? json(hits[0]) : json(nullptr);
  return out;
}

json run_metric(auto&& fn) {
  try {
    return to_json(fn());
  } catch (const NumericalError& e) {
    return {{"error", e.what()}};
  } catch (const ConfigError& e) {
    return {{"error", e.what()}};
  }
}

fs::path prepare_directory(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("output: cannot create '" + dir + "': " + ec.message());
  return p;
}

template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n = std::min<std::size_t>(count, workers > 0 ? static_cast<std::size_t>(workers) : hw);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) fn(k);
  };
  if (n <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

void write_timeseries_csv(const std::string& path, const TimeSeries& ts,
                          const std::vector<std::pair<std::string, const TimeSeries*>>& extra) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot write '" + path + "'");
  std::vector<long> offsets;
  for (const auto& e : extra) {
    const auto& s = *e.second;
    offsets.push_back(s.size() == 0 || ts.size() < 2 ? 0 : std::lround((s.t[0] - ts.t[0]) / ts.dt()));
  }
  out << "t";
  for (const auto& n : ts.names) out << "," << n;
  for (const auto& e : extra) out << "," << e.first;
  out << "\n";
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out << format_number(ts.t[k]);
    for (const auto& c : ts.channels) out << "," << format_number(c[k]);
    for (std::size_t e = 0; e < extra.size(); ++e) {
      out << ",";
      const auto& s = *extra[e].second;
      const long i = static_cast<long>(k) - offsets[e];
      if (i >= 0 && i < static_cast<long>(s.size())) out << format_number(s.channels[0][i]);
    }
    out << "\n";
  }
}

void write_sweep_csv(const std::string& path, const SweepResult& r) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot write '" + path + "'");
  out << "l,N,gamma";
  for (const auto& c : r.columns) out << "," << c;
  out << "\n";
  for (const auto& row : r.rows) {
    out << row.l << "," << row.n_sites << "," << format_number(row.gamma);
    for (const auto& c : r.columns) {
      const auto it = row.values.find(c);
      out << "," << (it == row.values.end() ? "" : format_number(it->second));
    }
    out << "\n";
  }
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "l" || header[1] != "N" || header[2] != "gamma")
    throw ConfigError(path + ": header must start with l,N,gamma");
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw ConfigError(path + ": row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(header.size()));
    auto parse = [&](const std::string& s, std::size_t col) {
      if (s.empty()) return kNaN;
      double v;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(path + ": row " + std::to_string(line_no) + ", column " + header[col] + ": bad number '" +
                          s + "'");
      return v;
    };
    SweepRow row;
    row.l = static_cast<int>(parse(fields[0], 0));
    row.n_sites = static_cast<int>(parse(fields[1], 1));
    row.gamma = parse(fields[2], 2);
    for (std::size_t c = 3; c < header.size(); ++c) row.values[header[c]] = parse(fields[c], c);
    rows.push_back(row);
  }
  return rows;
}

LiouvillianReport scenario_liouvillian(const ScenarioConfig& cfg, bool allow_large) {
  const auto omega = scenario_omega(cfg);
  if (!omega) throw ConfigError("omega_hint: the model has no closed-form synchronization frequency; set omega_hint");
  const HamiltonianMatrix h = build_hamiltonian(cfg.model);
  const CorrelationMatrix c0 = initial_correlation(cfg.initial.state);
  const int n = cfg.model.n_sites;
  return classify(cfg, h, *omega, allow_large, &c0, {{0, 0}, {n - 1, n - 1}, {0, n - 1}});
}

ScenarioResult run_scenario(const ScenarioConfig& input, const RunOptions& options) {
  ScenarioResult res;
  res.config = input;
  ScenarioConfig& cfg = res.config;
  const int n = cfg.model.n_sites;
  const HamiltonianMatrix h = build_hamiltonian(cfg.model);
  const CorrelationMatrix c0 = initial_correlation(cfg.initial.state);
  const auto omega = scenario_omega(cfg);

  json liouvillian_summary;
  if (!cfg.liouvillian) {
    liouvillian_summary = {{"skipped", "disabled in config"}};
  } else if (!omega) {
    liouvillian_summary = {{"skipped", "no synchronization frequency for this model"}};
  } else if (!within_cap(n, options.allow_large)) {
    liouvillian_summary = {{"skipped", "N^2 exceeds " + std::to_string(kDefaultSuperoperatorCap)}};
  } else {
    try {
      res.liouvillian = classify(cfg, h, *omega, options.allow_large, &c0, {{0, 0}, {n - 1, n - 1}, {0, n - 1}});
      const auto& r = *res.liouvillian;
      liouvillian_summary = {{"r_decay", maybe_number(r.r_decay)},
                             {"r_relax", maybe_number(r.r_relax)},
                             {"omega_sync", maybe_number(r.omega_sync)},
                             {"max_real_part", maybe_number(r.max_real_part)},
                             {"sync_amplitude_n_1", r.projections[0].amplitude()},
                             {"sync_amplitude_n_N", r.projections[1].amplitude()}};
    } catch (const ClassificationError& e) {
      liouvillian_summary = {{"error", e.what()}};
    }
  }

  res.series = evolve(c0, h, cfg.dissipation, cfg.t_max, cfg.dt, evolved_channels(cfg));
  const double t_end = res.series.t.back();

  // Metric settings resolved to numbers.
  MetricConfig mc;
  std::string transient_rule = "config";
  if (cfg.metrics.window.kind == MetricSetting::Kind::Value) {
    mc.window = cfg.metrics.window.value;
  } else {
    if (!omega) throw ConfigError("metrics.window: 'auto' needs a synchronization frequency; set a value");
    mc.window = 2.0 * 2.0 * std::numbers::pi / *omega;
  }
  if (cfg.metrics.t_transient.kind == MetricSetting::Kind::Value) {
    mc.t_transient = cfg.metrics.t_transient.value;
  } else if (res.liouvillian && std::isfinite(res.liouvillian->r_relax) && res.liouvillian->r_relax > 0.0) {
    mc.t_transient = 3.0 / res.liouvillian->r_relax;
    transient_rule = "3/r_relax";
    if (mc.t_transient > 0.8 * t_end) {
      mc.t_transient = 0.8 * t_end;
      transient_rule = "3/r_relax clipped to 0.8 t_max";
    }
  } else {
    mc.t_transient = 0.5 * t_end;
    transient_rule = "t_max/2";
  }
  switch (cfg.metrics.tau.kind) {
    case MetricSetting::Kind::Auto: mc.tau = 0.0; break;
    case MetricSetting::Kind::Value: mc.tau = cfg.metrics.tau.value; break;
    case MetricSetting::Kind::QuarterPeriod:
    case MetricSetting::Kind::MinusQuarterPeriod:
      if (!omega) throw ConfigError("metrics.tau: quarter period needs a synchronization frequency");
      mc.tau = (cfg.metrics.tau.kind == MetricSetting::Kind::QuarterPeriod ? 1.0 : -1.0) * std::numbers::pi /
               (2.0 * *omega);
      break;
  }
  validate(mc);
  cfg.metrics.window = {MetricSetting::Kind::Value, mc.window};
  cfg.metrics.t_transient = {MetricSetting::Kind::Value, mc.t_transient};
  cfg.metrics.tau = {MetricSetting::Kind::Value, mc.tau};

  const auto& t = res.series.t;
  res.pearson = pearson(t, res.series.channel(cfg.metrics.first), res.series.channel(cfg.metrics.second), mc);
  const PearsonSummary post = summarize_pearson(res.pearson, mc.t_transient);
  const PearsonSummary final_span = summarize_pearson(res.pearson, (1.0 - kFinalFraction) * t_end);

  // Lag scan over one period: a constant phase offset still locks the pair.
  json locking = nullptr;
  if (omega) {
    const double period = 2.0 * std::numbers::pi / *omega;
    constexpr int kLags = 24;
    PearsonSummary best{kNaN, kNaN, kNaN, kNaN, 0, 0};
    double best_tau = kNaN;
    for (int k = -kLags / 2; k < kLags / 2; ++k) {
      MetricConfig lagged = mc;
      lagged.tau = period * k / kLags;
      const auto r = pearson(t, res.series.channel(cfg.metrics.first), res.series.channel(cfg.metrics.second), lagged);
      const auto span = summarize_pearson(r, (1.0 - kFinalFraction) * t_end);
      if (span.samples > 0 && !(span.min <= best.min)) {
        best = span;
        best_tau = lagged.tau;
      }
    }
    locking = {{"lags", kLags}, {"best_tau", maybe_number(best_tau)}, {"final", to_json(best)}};
  }

  const auto& fch = res.series.channel(cfg.metrics.frequency_channel);
  const json frequency = run_metric([&] { return extract_frequency(t, fch, mc); });
  const json amplitude = run_metric([&] { return extract_amplitude(t, fch, mc); });

  const json resolved = to_json(cfg);
  const std::string hash = config_hash(resolved);
  json& m = res.metrics;
  m["name"] = cfg.name;
  m["config_hash"] = hash;
  m["omega_hint"] = omega ? json(*omega) : json(nullptr);
  m["metric_config"] = {{"window", mc.window},
                        {"t_transient", mc.t_transient},
                        {"t_transient_rule", transient_rule},
                        {"tau", mc.tau}};
  m["pearson"] = {{"pair", {cfg.metrics.first, cfg.metrics.second}},
                  {"post_transient", to_json(post)},
                  {"final_fraction", kFinalFraction},
                  {"final", to_json(final_span)}};
  m["phase_locking"] = locking;
  m["synchronized"] = final_span.samples > 0 && final_span.min > kSyncThreshold;
  m["frequency_channel"] = cfg.metrics.frequency_channel;
  m["frequency"] = frequency;
  m["amplitude"] = amplitude;
  if (cfg.model.variant == Variant::DiagonalAAH) m["frequency_match"] = frequency_match(cfg.model, frequency);
  json theory = json::object();
  if (omega) theory["omega"] = *omega;
  if (cfg.model.variant == Variant::FourBand) {
    const double ratio = cfg.model.g2 / cfg.model.g1;
    theory["amplitude_n_1"] = 0.5 * std::pow(1.0 - ratio * ratio, 2);
  }
  m["theory"] = theory;
  const auto& meta = res.series.metadata;
  m["invariants"] = {{"max_hermiticity_violation", meta.value("max_hermiticity_violation", json(nullptr))},
                     {"max_trace_drift", meta.value("max_trace_drift", json(nullptr))},
                     {"max_trace_increase", meta.value("max_trace_increase", json(nullptr))},
                     {"min_eigenvalue", meta.value("min_eigenvalue", json(nullptr))},
                     {"max_eigenvalue", meta.value("max_eigenvalue", json(nullptr))}};
  m["liouvillian"] = liouvillian_summary;

  if (options.write) {
    const fs::path dir = prepare_directory(options.output.value_or(cfg.output));
    res.directory = dir.string();
    json cfg_out = resolved;
    cfg_out["config_hash"] = hash;
    write_json((dir / "config.json").string(), cfg_out);
    write_timeseries_csv((dir / "timeseries.csv").string(), res.series, {{"r", &res.pearson}});
    json meta_out = meta;
    meta_out["channels"] = res.series.names;
    meta_out["config_hash"] = hash;
    write_json((dir / "timeseries.meta.json").string(), meta_out);
    write_json((dir / "metrics.json").string(), m);
    if (res.liouvillian) write_json((dir / "liouvillian.json").string(), to_json(*res.liouvillian));
  }
  return res;
}

json run_fits(const std::vector<SweepRow>& rows, const std::vector<FitRequest>& fits) {
  json out = json::array();
  for (const auto& req : fits) {
    std::vector<double> gammas;
    for (const auto& r : rows)
      if (std::find(gammas.begin(), gammas.end(), r.gamma) == gammas.end()) gammas.push_back(r.gamma);
    for (double g : gammas) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : rows) {
        if (r.gamma != g) continue;
        const auto it = r.values.find(req.quantity);
        if (it == r.values.end() || !std::isfinite(it->second) || !(it->second > 0.0)) continue;
        if (!req.l_range.empty() && (r.l < req.l_range[0] || r.l > req.l_range[1])) continue;
        pts.emplace_back(r.l, it->second);
      }
      std::sort(pts.begin(), pts.end());
      std::vector<double> l, y;
      for (const auto& [a, b] : pts) {
        l.push_back(a);
        y.push_back(b);
      }
      json entry{{"kind", req.kind}, {"quantity", req.quantity}, {"gamma", g}};
      if (!req.l_range.empty()) entry["l_range"] = req.l_range;
      FitOptions opt;
      opt.residual = req.residual;
      try {
        if (req.kind == "exponential")
          entry["result"] = to_json(fit_exponential(l, y, opt));
        else if (req.kind == "powerlaw")
          entry["result"] = to_json(fit_powerlaw(l, y, opt));
        else
          entry["result"] = to_json(detect_crossover(l, y, opt));
      } catch (const std::invalid_argument& e) {
        entry["error"] = e.what();
      }
      out.push_back(entry);
    }
  }
  return out;
}

SweepResult run_sweep(const SweepConfig& cfg, const RunOptions& options) {
  SweepResult res;
  if (cfg.task == "rates")
    res.columns = {"r_decay", "r_relax", "omega_sync", "amplitude", "amplitude_N"};
  else
    res.columns = {"omega", "omega_uncertainty", "amplitude", "peak_to_trough"};

  struct Point {
    int l;
    double gamma;
  };
  std::vector<Point> points;
  for (double g : cfg.gamma_values)
    for (int l : cfg.l_values) points.push_back({l, g});

  std::vector<std::optional<SweepRow>> rows(points.size());
  std::vector<std::string> errors(points.size());
  parallel_for(points.size(), options.workers, [&](std::size_t k) {
    const Point p = points[k];
    const int n = cfg.chain.n_sites(p.l);
    try {
      ScenarioConfig c = cfg.base;
      set_chain_length(c, n);
      c.dissipation.gamma = p.gamma;
      SweepRow row{p.l, n, p.gamma, {}};
      if (cfg.task == "rates") {
        const auto omega = scenario_omega(c);
        if (!omega) throw ConfigError("omega_hint: no synchronization frequency for this model");
        const HamiltonianMatrix h = build_hamiltonian(c.model);
        const CorrelationMatrix c0 = initial_correlation(c.initial.state);
        const auto r = classify(c, h, *omega, options.allow_large, &c0, {{0, 0}, {n - 1, n - 1}});
        row.values = {{"r_decay", r.r_decay},
                      {"r_relax", r.r_relax},
                      {"omega_sync", r.omega_sync},
                      {"amplitude", r.projections[0].amplitude()},
                      {"amplitude_N", r.projections[1].amplitude()}};
      } else {
        RunOptions inner = options;
        inner.write = false;
        const auto s = run_scenario(c, inner);
        const auto& f = s.metrics["frequency"];
        const auto& a = s.metrics["amplitude"];
        if (f.contains("error")) throw NumericalError(f["error"].get<std::string>());
        row.values = {{"omega", f["omega"].get<double>()},
                      {"omega_uncertainty", f["uncertainty"].get<double>()},
                      {"amplitude", a.contains("amplitude") ? a["amplitude"].get<double>() : kNaN},
                      {"peak_to_trough", a.contains("peak_to_trough") && a["peak_to_trough"].is_number()
                                             ? a["peak_to_trough"].get<double>()
                                             : kNaN}};
      }
      rows[k] = row;
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (rows[k])
      res.rows.push_back(*rows[k]);
    else
      res.failures.push_back({points[k].l, cfg.chain.n_sites(points[k].l), points[k].gamma, errors[k]});
  }
  res.fits = run_fits(res.rows, cfg.fits);

  if (options.write) {
    const fs::path dir = prepare_directory(options.output.value_or(cfg.output));
    res.directory = dir.string();
    const json resolved = to_json(cfg);
    json cfg_out = resolved;
    cfg_out["config_hash"] = config_hash(resolved);
    write_json((dir / "config.json").string(), cfg_out);
    write_sweep_csv((dir / "sweep.csv").string(), res);
    write_json((dir / "fits.json").string(), {{"config_hash", cfg_out["config_hash"]}, {"fits", res.fits}});
    json failures = json::array();
    for (const auto& f : res.failures)
      failures.push_back({{"l", f.l}, {"N", f.n_sites}, {"gamma", f.gamma}, {"error", f.error}});
    write_json((dir / "failures.json").string(), failures);
  }
  return res;
}

ScenarioConfig robustness_case(const RobustnessConfig& cfg, const RobustnessCase& rc) {
  ScenarioConfig c = cfg.base;
  c.name = cfg.base.name + "_" + rc.name;
  c.model.g3 = rc.g3;
  c.model.disorder_amplitude = rc.disorder_amplitude;
  c.model.disorder_seed = rc.disorder_seed;
  if (rc.random_state_seed) {
    c.initial.preset = "Random";
    c.initial.seed = *rc.random_state_seed;
  }
  set_chain_length(c, c.model.n_sites);
  return c;
}

RobustnessReport run_robustness(const RobustnessConfig& cfg, const RunOptions& options) {
  RobustnessReport rep;
  const fs::path root(options.output.value_or(cfg.output));
  json cases = json::array();
  for (const auto& rc : cfg.cases) {
    const ScenarioConfig c = robustness_case(cfg, rc);

    auto run = [&](ScenarioConfig sc, const std::string& label) {
      RunOptions inner = options;
      inner.output = (root / rc.name / label).string();
      RobustnessRun out;
      out.case_name = rc.name;
      out.gamma = sc.dissipation.gamma;
      out.directory = inner.output.value();
      const auto s = run_scenario(sc, inner);
      const auto& post = s.metrics["pearson"]["post_transient"];
      out.r_min = post["min"].is_number() ? post["min"].get<double>() : kNaN;
      out.r_mean = post["mean"].is_number() ? post["mean"].get<double>() : kNaN;
      if (s.metrics["frequency"].contains("omega")) out.omega = s.metrics["frequency"]["omega"].get<double>();
      else out.error = s.metrics["frequency"]["error"].get<std::string>();
      return std::pair{out, s};
    };
    auto [dissipative, scenario] = run(c, "dissipative");
    ScenarioConfig control = scenario.config;
    control.name = c.name + "_control";
    control.dissipation.gamma = 0.0;
    auto [ctrl, ctrl_scenario] = run(control, "control");

    auto run_json = [](const RobustnessRun& r, const ScenarioResult& sr) {
      json j{{"gamma", r.gamma}, {"r_min", maybe_number(r.r_min)}, {"r_mean", maybe_number(r.r_mean)},
             {"directory", r.directory}};
      j["omega"] = r.omega ? json(*r.omega) : json(nullptr);
      if (!r.error.empty()) j["frequency_error"] = r.error;
      j["phase_locking"] = sr.metrics["phase_locking"];
      j["invariants"] = sr.metrics["invariants"];
      j["liouvillian"] = sr.metrics["liouvillian"];
      return j;
    };
    const bool synced = dissipative.r_min > cfg.threshold;
    const bool control_synced = ctrl.r_min > cfg.threshold;
    cases.push_back({{"name", rc.name},
                     {"g3", rc.g3},
                     {"disorder_amplitude", rc.disorder_amplitude},
                     {"random_state_seed", rc.random_state_seed ? json(*rc.random_state_seed) : json(nullptr)},
                     {"t_transient", scenario.metrics["metric_config"]["t_transient"]},
                     {"dissipative", run_json(dissipative, scenario)},
                     {"control", run_json(ctrl, ctrl_scenario)},
                     {"synchronized", synced},
                     {"control_synchronized", control_synced},
                     {"pass", synced && !control_synced}});
    rep.runs.push_back(dissipative);
    rep.runs.push_back(ctrl);
  }
  rep.summary = {{"threshold", cfg.threshold}, {"pair", {cfg.base.metrics.first, cfg.base.metrics.second}},
                 {"cases", cases}};
  if (options.write) {
    const fs::path dir = prepare_directory(root.string());
    rep.directory = dir.string();
    const json resolved = to_json(cfg);
    rep.summary["config_hash"] = config_hash(resolved);
    write_json((dir / "config.json").string(), resolved);
    write_json((dir / "robustness.json").string(), rep.summary);
  }
  return rep;
}

}  // namespace edgesync
