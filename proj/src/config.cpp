#include "edgesync/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "edgesync/errors.hpp"
#include "edgesync/single_particle.hpp"

namespace edgesync {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field + ": " + message);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(where + "." + k, "unknown field");
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

std::uint64_t seed_value(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

// Numbers or strings such as "pi/2", "-3pi/4", "0.25*pi".
double angle(const json& j, const std::string& field) {
  if (j.is_number()) return number(j, field);
  if (!j.is_string()) fail(field, "expected a number or an expression in pi");
  static const std::regex re(R"(^\s*([+-]?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$)");
  std::smatch m;
  const std::string s = j.get<std::string>();
  if (!std::regex_match(s, m, re)) fail(field, "cannot parse angle '" + s + "'");
  double v = std::numbers::pi;
  if (m[2].length() > 0) v *= std::stod(m[2]);
  if (m[3].length() > 0) v /= std::stod(m[3]);
  if (m[1] == "-") v = -v;
  return v;
}

ModelSpec parse_model(const json& j) {
  allow_keys(j, "model", {"variant", "n_sites", "g", "v", "lambda", "alpha", "phi_v", "phi_lambda", "g1", "g2",
                          "g3", "disorder_amplitude", "disorder_seed"});
  ModelSpec m;
  if (!j.contains("variant")) fail("model.variant", "missing");
  m.variant = variant_from_string(text(j["variant"], "model.variant"));
  if (!j.contains("n_sites")) fail("model.n_sites", "missing");
  m.n_sites = integer(j["n_sites"], "model.n_sites");
  if (j.contains("g")) m.g = number(j["g"], "model.g");
  if (j.contains("v")) m.v = number(j["v"], "model.v");
  if (j.contains("lambda")) m.lambda = number(j["lambda"], "model.lambda");
  if (j.contains("alpha")) {
    const auto& a = j["alpha"];
    if (!a.is_array() || a.size() != 2) fail("model.alpha", "expected [p, q]");
    m.alpha_p = integer(a[0], "model.alpha[0]");
    m.alpha_q = integer(a[1], "model.alpha[1]");
  } else if (m.variant == Variant::OffDiagonalAAH) {
    m.alpha_q = 4;
  }
  if (j.contains("phi_v")) m.phi_v = angle(j["phi_v"], "model.phi_v");
  if (j.contains("phi_lambda")) m.phi_lambda = angle(j["phi_lambda"], "model.phi_lambda");
  if (j.contains("g1")) m.g1 = number(j["g1"], "model.g1");
  if (j.contains("g2")) m.g2 = number(j["g2"], "model.g2");
  if (j.contains("g3")) m.g3 = number(j["g3"], "model.g3");
  if (j.contains("disorder_amplitude")) m.disorder_amplitude = number(j["disorder_amplitude"], "model.disorder_amplitude");
  if (j.contains("disorder_seed")) m.disorder_seed = seed_value(j["disorder_seed"], "model.disorder_seed");
  validate(m);
  return m;
}

json model_json(const ModelSpec& m) {
  return {{"variant", to_string(m.variant)},
          {"n_sites", m.n_sites},
          {"g", m.g},
          {"v", m.v},
          {"lambda", m.lambda},
          {"alpha", {m.alpha_p, m.alpha_q}},
          {"phi_v", m.phi_v},
          {"phi_lambda", m.phi_lambda},
          {"g1", m.g1},
          {"g2", m.g2},
          {"g3", m.g3},
          {"disorder_amplitude", m.disorder_amplitude},
          {"disorder_seed", m.disorder_seed}};
}

void resolve_initial(InitialStateSpec& s, int n) {
  if (s.preset == "Vacuum")
    s.state = vacuum_state(n);
  else if (s.preset == "PlusEnds")
    s.state = plus_ends_state(n);
  else if (s.preset == "OnePlus")
    s.state = one_plus_state(n);
  else if (s.preset == "Random")
    s.state = random_product_state(n, s.seed);
  else if (s.preset != "Custom")
    fail("initial_state.preset", "unknown preset '" + s.preset + "'");
  if (s.state.size() != n) fail("initial_state", "needs one angle per site");
  try {
    validate(s.state);
  } catch (const ConfigError& e) {
    fail("initial_state", e.what());
  }
}

InitialStateSpec parse_initial(const json& j, int n) {
  InitialStateSpec s;
  if (j.is_string()) {
    s.preset = j.get<std::string>();
  } else {
    allow_keys(j, "initial_state", {"preset", "seed", "theta", "phi"});
    if (j.contains("preset")) s.preset = text(j["preset"], "initial_state.preset");
    if (j.contains("seed")) s.seed = seed_value(j["seed"], "initial_state.seed");
    if (s.preset == "Custom") {
      if (!j.contains("theta") || !j.contains("phi")) fail("initial_state", "custom states need theta and phi");
      for (const auto& v : j["theta"]) s.state.theta.push_back(angle(v, "initial_state.theta"));
      for (const auto& v : j["phi"]) s.state.phi.push_back(angle(v, "initial_state.phi"));
    }
  }
  resolve_initial(s, n);
  return s;
}

MetricSetting parse_setting(const json& j, const std::string& field, bool allow_quarter) {
  MetricSetting s;
  if (j.is_string()) {
    const std::string v = j.get<std::string>();
    if (v == "auto") return s;
    if (allow_quarter && v == "quarter_period") {
      s.kind = MetricSetting::Kind::QuarterPeriod;
      return s;
    }
    if (allow_quarter && v == "-quarter_period") {
      s.kind = MetricSetting::Kind::MinusQuarterPeriod;
      return s;
    }
    fail(field, "unknown setting '" + v + "'");
  }
  s.kind = MetricSetting::Kind::Value;
  s.value = number(j, field);
  return s;
}

json setting_json(const MetricSetting& s) {
  switch (s.kind) {
    case MetricSetting::Kind::Auto: return "auto";
    case MetricSetting::Kind::Value: return s.value;
    case MetricSetting::Kind::QuarterPeriod: return "quarter_period";
    case MetricSetting::Kind::MinusQuarterPeriod: return "-quarter_period";
  }
  return "auto";
}

MetricSpec parse_metrics(const json& j, int n) {
  allow_keys(j, "metrics", {"pair", "frequency_channel", "window", "t_transient", "tau"});
  MetricSpec m;
  if (j.contains("pair")) {
    const auto& p = j["pair"];
    if (!p.is_array() || p.size() != 2) fail("metrics.pair", "expected two channel names");
    m.first = text(p[0], "metrics.pair[0]");
    m.second = text(p[1], "metrics.pair[1]");
  }
  m.frequency_channel = j.contains("frequency_channel") ? text(j["frequency_channel"], "metrics.frequency_channel") : m.first;
  for (const auto& c : {m.first, m.second, m.frequency_channel}) {
    try {
      parse_channel(c, n);
    } catch (const ConfigError& e) {
      fail("metrics", e.what());
    }
  }
  if (j.contains("window")) m.window = parse_setting(j["window"], "metrics.window", false);
  if (j.contains("t_transient")) m.t_transient = parse_setting(j["t_transient"], "metrics.t_transient", false);
  if (j.contains("tau")) m.tau = parse_setting(j["tau"], "metrics.tau", true);
  if (m.window.kind == MetricSetting::Kind::Value && !(m.window.value > 0.0)) fail("metrics.window", "must be > 0");
  if (m.t_transient.kind == MetricSetting::Kind::Value && !(m.t_transient.value >= 0.0))
    fail("metrics.t_transient", "must be >= 0");
  return m;
}

void resolve_sites(ScenarioConfig& c) {
  if (!c.site_preset.empty()) c.dissipation.sites = site_preset(c.site_preset, c.model.n_sites);
  try {
    validate(c.dissipation, c.model.n_sites);
  } catch (const ConfigError& e) {
    fail("dissipation", e.what());
  }
}

std::vector<int> int_axis(const json& j, const std::string& field) {
  std::vector<int> out;
  if (j.is_object()) {
    allow_keys(j, field, {"from", "to", "step"});
    const int from = integer(j.at("from"), field + ".from"), to = integer(j.at("to"), field + ".to");
    const int step = j.contains("step") ? integer(j["step"], field + ".step") : 1;
    if (step <= 0) fail(field + ".step", "must be positive");
    for (int l = from; l <= to; l += step) out.push_back(l);
  } else if (j.is_array()) {
    for (const auto& v : j) out.push_back(integer(v, field));
  } else {
    fail(field, "expected a list or {from, to}");
  }
  if (out.empty()) fail(field, "axis is empty");
  return out;
}

std::vector<double> real_axis(const json& j, const std::string& field) {
  std::vector<double> out;
  if (j.is_object()) {
    allow_keys(j, field, {"from", "to", "count"});
    const double from = number(j.at("from"), field + ".from"), to = number(j.at("to"), field + ".to");
    const int count = integer(j.at("count"), field + ".count");
    if (count < 1) fail(field + ".count", "must be >= 1");
    for (int k = 0; k < count; ++k) out.push_back(count == 1 ? from : from + (to - from) * k / (count - 1));
  } else if (j.is_array()) {
    for (const auto& v : j) out.push_back(number(v, field));
  } else {
    fail(field, "expected a list or {from, to, count}");
  }
  if (out.empty()) fail(field, "axis is empty");
  return out;
}

// `base` is either an inline scenario or a path relative to the referring file.
ScenarioConfig base_scenario(const json& j, const std::string& base_dir, const std::string& field) {
  if (j.is_string()) {
    std::filesystem::path p(j.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_scenario(p.string());
  }
  try {
    return parse_scenario(j);
  } catch (const ConfigError& e) {
    fail(field, e.what());
  }
}

}  // namespace

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ScenarioConfig parse_scenario(const json& j) {
  allow_keys(j, "scenario", {"name", "model", "dissipation", "initial_state", "t_max", "dt", "channels", "metrics",
                             "omega_hint", "liouvillian", "output", "config_hash"});
  ScenarioConfig c;
  c.name = j.contains("name") ? text(j["name"], "name") : "scenario";
  if (!j.contains("model")) fail("model", "missing");
  c.model = parse_model(j["model"]);
  const int n = c.model.n_sites;

  if (!j.contains("dissipation")) fail("dissipation", "missing");
  const auto& d = j["dissipation"];
  allow_keys(d, "dissipation", {"jump_type", "sites", "site_preset", "gamma"});
  c.dissipation.jump_type =
      jump_type_from_string(d.contains("jump_type") ? text(d["jump_type"], "dissipation.jump_type") : "Dephasing");
  c.dissipation.gamma = d.contains("gamma") ? number(d["gamma"], "dissipation.gamma") : 0.0;
  if (d.contains("site_preset")) c.site_preset = text(d["site_preset"], "dissipation.site_preset");
  if (d.contains("sites")) {
    if (d["sites"].is_string()) {
      c.site_preset = d["sites"].get<std::string>();
    } else if (c.site_preset.empty()) {
      for (const auto& s : d["sites"]) c.dissipation.sites.push_back(integer(s, "dissipation.sites"));
    }
  }
  resolve_sites(c);

  c.initial = parse_initial(j.contains("initial_state") ? j["initial_state"] : json("Vacuum"), n);
  if (!j.contains("t_max")) fail("t_max", "missing");
  if (!j.contains("dt")) fail("dt", "missing");
  c.t_max = number(j["t_max"], "t_max");
  c.dt = number(j["dt"], "dt");
  if (!(c.dt > 0.0)) fail("dt", "must be > 0");
  if (!(c.t_max >= c.dt)) fail("t_max", "must be >= dt");
  if (j.contains("channels")) {
    for (const auto& ch : j["channels"]) c.channels.push_back(text(ch, "channels"));
  } else {
    c.channels = {"n_1", "n_mid", "n_N"};
  }
  if (c.channels.empty()) fail("channels", "empty channel list");
  try {
    parse_channels(c.channels, n);
  } catch (const ConfigError& e) {
    fail("channels", e.what());
  }
  c.metrics = parse_metrics(j.contains("metrics") ? j["metrics"] : json::object(), n);
  if (j.contains("omega_hint") && !j["omega_hint"].is_null()) {
    c.omega_hint = number(j["omega_hint"], "omega_hint");
    if (!(*c.omega_hint > 0.0)) fail("omega_hint", "must be > 0");
  }
  if (j.contains("liouvillian")) {
    if (!j["liouvillian"].is_boolean()) fail("liouvillian", "expected true or false");
    c.liouvillian = j["liouvillian"].get<bool>();
  }
  c.output = j.contains("output") ? text(j["output"], "output") : "runs/" + c.name;
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  try {
    return parse_scenario(read_json(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const ScenarioConfig& c) {
  json d{{"jump_type", to_string(c.dissipation.jump_type)},
         {"sites", c.dissipation.sites},
         {"gamma", c.dissipation.gamma}};
  if (!c.site_preset.empty()) d["site_preset"] = c.site_preset;
  json init{{"preset", c.initial.preset},
            {"seed", c.initial.seed},
            {"theta", c.initial.state.theta},
            {"phi", c.initial.state.phi}};
  json j{{"name", c.name},
         {"model", model_json(c.model)},
         {"dissipation", d},
         {"initial_state", init},
         {"t_max", c.t_max},
         {"dt", c.dt},
         {"channels", c.channels},
         {"metrics",
          {{"pair", {c.metrics.first, c.metrics.second}},
           {"frequency_channel", c.metrics.frequency_channel},
           {"window", setting_json(c.metrics.window)},
           {"t_transient", setting_json(c.metrics.t_transient)},
           {"tau", setting_json(c.metrics.tau)}}},
         {"omega_hint", c.omega_hint ? json(*c.omega_hint) : json(nullptr)},
         {"liouvillian", c.liouvillian},
         {"output", c.output}};
  return j;
}

void set_chain_length(ScenarioConfig& c, int n) {
  c.model.n_sites = n;
  validate(c.model);
  resolve_sites(c);
  if (c.initial.preset == "Custom") fail("initial_state", "custom states cannot be resized");
  resolve_initial(c.initial, n);
}

double closed_form_omega(const ModelSpec& m) {
  switch (m.variant) {
    case Variant::DiagonalAAH: {
      const auto mu = edge_energies_diagonal(m.v, m.phi_v);
      return std::abs(mu.mu1 - mu.mu2);
    }
    case Variant::OffDiagonalAAH: {
      const auto e = edge_energies_offdiagonal(m.lambda, m.phi_lambda);
      if (e.left) return 2.0 * m.g * *e.left;
      if (e.right) return 2.0 * m.g * *e.right;
      throw ConfigError("model: no off-diagonal edge pair at this phase");
    }
    case Variant::FourBand: {
      const auto e = edge_energy_fourband(m.g1, m.g2);
      if (!e.is_edge) throw ConfigError("model: |g2/g1| >= 1 has no four-band edge states");
      return 2.0 * e.energy;
    }
  }
  throw ConfigError("model: unknown variant");
}

SweepConfig parse_sweep(const json& j, const std::string& base_dir) {
  allow_keys(j, "sweep", {"name", "base", "l", "gamma", "task", "chain", "fits", "output"});
  SweepConfig s;
  s.name = j.contains("name") ? text(j["name"], "name") : "sweep";
  if (!j.contains("base")) fail("base", "missing");
  s.base = base_scenario(j["base"], base_dir, "base");
  if (!j.contains("l")) fail("l", "missing");
  s.l_values = int_axis(j["l"], "l");
  s.gamma_values = j.contains("gamma") ? real_axis(j["gamma"], "gamma") : std::vector<double>{s.base.dissipation.gamma};
  for (double g : s.gamma_values)
    if (!(g >= 0.0)) fail("gamma", "must be >= 0");
  if (j.contains("task")) s.task = text(j["task"], "task");
  if (s.task != "rates" && s.task != "amplitude-frequency") fail("task", "expected rates or amplitude-frequency");
  switch (s.base.model.variant) {
    case Variant::FourBand: s.chain = {4, 1}; break;
    case Variant::DiagonalAAH: s.chain = {s.base.model.alpha_q, -1}; break;
    case Variant::OffDiagonalAAH: s.chain = {s.base.model.alpha_q, 0}; break;
  }
  if (j.contains("chain")) {
    allow_keys(j["chain"], "chain", {"cell", "offset"});
    if (j["chain"].contains("cell")) s.chain.cell = integer(j["chain"]["cell"], "chain.cell");
    if (j["chain"].contains("offset")) s.chain.offset = integer(j["chain"]["offset"], "chain.offset");
  }
  if (s.chain.cell < 1) fail("chain.cell", "must be >= 1");
  for (int l : s.l_values)
    if (s.chain.n_sites(l) < 2) fail("l", "gives fewer than 2 sites");
  if (j.contains("fits")) {
    for (const auto& f : j["fits"]) {
      allow_keys(f, "fits[]", {"kind", "quantity", "l_range", "residual"});
      FitRequest r;
      r.kind = text(f.at("kind"), "fits[].kind");
      if (r.kind != "exponential" && r.kind != "powerlaw" && r.kind != "crossover")
        fail("fits[].kind", "expected exponential, powerlaw or crossover");
      r.quantity = text(f.at("quantity"), "fits[].quantity");
      if (f.contains("l_range")) {
        for (const auto& v : f["l_range"]) r.l_range.push_back(number(v, "fits[].l_range"));
        if (r.l_range.size() != 2) fail("fits[].l_range", "expected [lo, hi]");
      }
      if (f.contains("residual")) r.residual = residual_from_string(text(f["residual"], "fits[].residual"));
      s.fits.push_back(r);
    }
  }
  s.output = j.contains("output") ? text(j["output"], "output") : "runs/" + s.name;
  return s;
}

SweepConfig load_sweep(const std::string& path) {
  try {
    return parse_sweep(read_json(path), std::filesystem::path(path).parent_path().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const SweepConfig& s) {
  json fits = json::array();
  for (const auto& f : s.fits) {
    json r{{"kind", f.kind}, {"quantity", f.quantity}, {"residual", to_string(f.residual)}};
    if (!f.l_range.empty()) r["l_range"] = f.l_range;
    fits.push_back(r);
  }
  return {{"name", s.name},
          {"base", to_json(s.base)},
          {"l", s.l_values},
          {"gamma", s.gamma_values},
          {"task", s.task},
          {"chain", {{"cell", s.chain.cell}, {"offset", s.chain.offset}}},
          {"fits", fits},
          {"output", s.output}};
}

RobustnessConfig parse_robustness(const json& j, const std::string& base_dir) {
  allow_keys(j, "robustness", {"base", "cases", "threshold", "output"});
  RobustnessConfig r;
  if (!j.contains("base")) fail("base", "missing");
  r.base = base_scenario(j["base"], base_dir, "base");
  if (j.contains("threshold")) r.threshold = number(j["threshold"], "threshold");
  if (!j.contains("cases") || !j["cases"].is_array() || j["cases"].empty()) fail("cases", "expected a non-empty list");
  for (const auto& c : j["cases"]) {
    allow_keys(c, "cases[]", {"name", "g3", "disorder_amplitude", "disorder_seed", "random_state_seed"});
    RobustnessCase rc;
    rc.name = text(c.at("name"), "cases[].name");
    if (c.contains("g3")) rc.g3 = number(c["g3"], "cases[].g3");
    if (c.contains("disorder_amplitude")) rc.disorder_amplitude = number(c["disorder_amplitude"], "cases[].disorder_amplitude");
    if (!(rc.disorder_amplitude >= 0.0)) fail("cases[].disorder_amplitude", "must be >= 0");
    if (c.contains("disorder_seed")) rc.disorder_seed = seed_value(c["disorder_seed"], "cases[].disorder_seed");
    if (c.contains("random_state_seed")) rc.random_state_seed = seed_value(c["random_state_seed"], "cases[].random_state_seed");
    r.cases.push_back(rc);
  }
  r.output = j.contains("output") ? text(j["output"], "output") : "runs/robustness";
  return r;
}

RobustnessConfig load_robustness(const std::string& path) {
  try {
    return parse_robustness(read_json(path), std::filesystem::path(path).parent_path().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const RobustnessConfig& r) {
  json cases = json::array();
  for (const auto& c : r.cases) {
    json j{{"name", c.name}, {"g3", c.g3}, {"disorder_amplitude", c.disorder_amplitude}, {"disorder_seed", c.disorder_seed}};
    if (c.random_state_seed) j["random_state_seed"] = *c.random_state_seed;
    cases.push_back(j);
  }
  return {{"base", to_json(r.base)}, {"cases", cases}, {"threshold", r.threshold}, {"output", r.output}};
}

std::string config_hash(const json& j) {
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

}  // namespace edgesync
