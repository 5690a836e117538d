#include "edgesync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

using cd = std::complex<double>;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<int> site_range(int first, int last) {
  std::vector<int> out;
  for (int s = first; s <= last; ++s) out.push_back(s);
  return out;
}

// Parses a positive 1-based site token; "N" is the last site.
int parse_site(const std::string& token, int n_sites, const std::string& channel) {
  if (token == "N") return n_sites;
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || value < 1 || value > n_sites)
    throw ConfigError("channels: bad site '" + token + "' in '" + channel + "'");
  return value;
}

}  // namespace

std::string to_string(JumpType j) { return j == JumpType::Dephasing ? "Dephasing" : "Loss"; }

JumpType jump_type_from_string(const std::string& name) {
  if (name == "Dephasing") return JumpType::Dephasing;
  if (name == "Loss") return JumpType::Loss;
  throw ConfigError("dissipation.jump_type: unknown jump type '" + name + "'");
}

void validate(const DissipationSpec& d, int n_sites) {
  if (!(d.gamma >= 0.0) || !std::isfinite(d.gamma))
    throw ConfigError("dissipation.gamma: must be finite and >= 0");
  for (std::size_t k = 0; k < d.sites.size(); ++k) {
    if (d.sites[k] < 1 || d.sites[k] > n_sites)
      throw ConfigError("dissipation.sites: site " + std::to_string(d.sites[k]) +
                        " outside 1.." + std::to_string(n_sites));
    if (k > 0 && d.sites[k] <= d.sites[k - 1])
      throw ConfigError("dissipation.sites: must be strictly ascending");
  }
}

std::vector<int> site_preset(const std::string& name, int n) {
  if (name == "CenterTwo") {
    if (n < 2) throw ConfigError("dissipation.preset: CenterTwo needs N >= 2");
    return {n / 2, n / 2 + 1};
  }
  if (name == "CenterFive") {
    if (n % 2 == 0 || n < 5) throw ConfigError("dissipation.preset: CenterFive needs odd N >= 5");
    return site_range((n - 3) / 2, (n + 5) / 2);
  }
  if (name == "BulkHalf") {
    if (n % 4 != 1 || n < 5) throw ConfigError("dissipation.preset: BulkHalf needs N = 1 mod 4");
    return site_range((n + 3) / 4, (3 * n + 1) / 4);
  }
  if (name == "None") return {};
  throw ConfigError("dissipation.preset: unknown preset '" + name + "'");
}

void validate(const ProductStateSpec& p) {
  if (p.theta.size() != p.phi.size() || p.theta.empty())
    throw ConfigError("initial_state: theta and phi must be non-empty and equally long");
  for (std::size_t j = 0; j < p.theta.size(); ++j) {
    if (!(p.theta[j] >= 0.0 && p.theta[j] < std::numbers::pi))
      throw ConfigError("initial_state.theta: must lie in [0, pi)");
    if (!(p.phi[j] >= 0.0 && p.phi[j] < 2.0 * std::numbers::pi))
      throw ConfigError("initial_state.phi: must lie in [0, 2 pi)");
  }
}

ProductStateSpec vacuum_state(int n) {
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

ProductStateSpec plus_ends_state(int n) {
  auto s = vacuum_state(n);
  s.theta.front() = std::numbers::pi / 4.0;
  s.theta.back() = std::numbers::pi / 4.0;
  return s;
}

ProductStateSpec one_plus_state(int n) {
  auto s = vacuum_state(n);
  s.theta.back() = std::numbers::pi / 4.0;
  s.theta.front() = std::numbers::pi / 2.0;
  return s;
}

ProductStateSpec random_product_state(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ProductStateSpec s;
  for (int j = 0; j < n; ++j) {
    s.theta.push_back(std::numbers::pi * unit_uniform(rng));
    s.phi.push_back(2.0 * std::numbers::pi * unit_uniform(rng));
  }
  return s;
}

CorrelationMatrix initial_correlation(const ProductStateSpec& spec) {
  validate(spec);
  const int n = spec.size();
  std::vector<cd> coherence(n);  // <c_j> of the single-site factor
  std::vector<double> parity(n);
  for (int j = 0; j < n; ++j) {
    const double s = std::sin(spec.theta[j]);
    const double c = std::cos(spec.theta[j]);
    coherence[j] = std::polar(c * s, spec.phi[j]);
    parity[j] = 1.0 - 2.0 * s * s;
  }
  CorrelationMatrix out = CorrelationMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = std::sin(spec.theta[i]);
    out(i, i) = s * s;
    double string = 1.0;
    for (int j = i + 1; j < n; ++j) {
      out(i, j) = std::conj(coherence[i]) * coherence[j] * string;
      out(j, i) = std::conj(out(i, j));
      string *= parity[j];
    }
  }
  return out;
}

double hermiticity_violation(const CorrelationMatrix& c) {
  return (c - c.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd damping_matrix(const DissipationSpec& d, int n) {
  Eigen::VectorXd on = Eigen::VectorXd::Zero(n);
  for (int s : d.sites) on(s - 1) = 1.0;
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = 0.5 * d.gamma * (on(i) + on(j));
  if (d.jump_type == JumpType::Dephasing)
    for (int i = 0; i < n; ++i) out(i, i) = 0.0;
  return out;
}

namespace {

// i(hC - Ch) - D o C with banded h (h symmetric, so h^T = h).
void rhs_into(const CorrelationMatrix& c, const HamiltonianMatrix& h, const Eigen::MatrixXd& damp,
              Eigen::MatrixXcd& out, bool hermitian) {
  const int n = h.size();
  const auto& rows = h.rows();
  out.resize(n, n);
  // Hermitian input: upper triangle, then mirror.
  for (int col = 0; col < n; ++col) {
    for (int r = 0; r <= (hermitian ? col : n - 1); ++r) {
      cd hc = 0.0;
      for (const auto& [k, v] : rows[r]) hc += v * c(k, col);
      cd ch = 0.0;
      for (const auto& [k, v] : rows[col]) ch += c(r, k) * v;
      const cd comm = hc - ch;
      out(r, col) = cd(-comm.imag(), comm.real()) - damp(r, col) * c(r, col);
    }
  }
  if (!hermitian) return;
  for (int col = 0; col < n; ++col) {
    out(col, col) = out(col, col).real();
    for (int r = col + 1; r < n; ++r) out(r, col) = std::conj(out(col, r));
  }
}

void check_dims(const CorrelationMatrix& c, const HamiltonianMatrix& h, const DissipationSpec& d) {
  if (c.rows() != h.size() || c.cols() != h.size())
    throw DimensionError("correlation matrix is " + std::to_string(c.rows()) + "x" +
                         std::to_string(c.cols()) + ", hamiltonian has " +
                         std::to_string(h.size()) + " sites");
  for (int s : d.sites)
    if (s < 1 || s > h.size())
      throw DimensionError("dissipation site " + std::to_string(s) + " outside the chain");
}

}  // namespace

Eigen::MatrixXcd lindblad_rhs(const CorrelationMatrix& c, const HamiltonianMatrix& h,
                              const DissipationSpec& d) {
  check_dims(c, h, d);
  Eigen::MatrixXcd out;
  rhs_into(c, h, damping_matrix(d, h.size()), out, false);
  return out;
}

double Channel::evaluate(const CorrelationMatrix& c) const {
  switch (kind) {
    case Kind::Population: return c(i, i).real();
    case Kind::RealPart: return c(i, j).real();
    case Kind::ImagPart: return c(i, j).imag();
    case Kind::Total: return c.trace().real();
  }
  return 0.0;
}

Channel parse_channel(const std::string& name, int n) {
  Channel ch;
  ch.name = name;
  if (name == "N_tot") {
    ch.kind = Channel::Kind::Total;
    return ch;
  }
  if (name == "n_mid") {
    ch.kind = Channel::Kind::Population;
    ch.i = ch.j = (n + 1) / 2 - 1;
    return ch;
  }
  if (name.rfind("n_", 0) == 0) {
    ch.kind = Channel::Kind::Population;
    ch.i = ch.j = parse_site(name.substr(2), n, name) - 1;
    return ch;
  }
  for (const auto& [prefix, kind] :
       {std::pair{std::string("ReC_"), Channel::Kind::RealPart},
        std::pair{std::string("ImC_"), Channel::Kind::ImagPart}}) {
    if (name.rfind(prefix, 0) != 0) continue;
    ch.kind = kind;
    const std::string rest = name.substr(prefix.size());
    if (rest == "1N") {
      ch.i = 0;
      ch.j = n - 1;
      return ch;
    }
    const auto split = rest.find('_');
    if (split == std::string::npos) throw ConfigError("channels: malformed '" + name + "'");
    ch.i = parse_site(rest.substr(0, split), n, name) - 1;
    ch.j = parse_site(rest.substr(split + 1), n, name) - 1;
    return ch;
  }
  throw ConfigError("channels: unknown channel '" + name + "'");
}

std::vector<Channel> parse_channels(const std::vector<std::string>& names, int n) {
  std::vector<Channel> out;
  for (const auto& name : names) out.push_back(parse_channel(name, n));
  return out;
}

bool TimeSeries::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("time series has no channel '" + name + "'");
  return channels[static_cast<std::size_t>(it - names.begin())];
}

void TimeSeries::add_channel(std::string name, std::vector<double> values) {
  names.push_back(std::move(name));
  channels.push_back(std::move(values));
}

int sample_count(double t_max, double dt) {
  return static_cast<int>(std::llround(t_max / dt));
}

EvolveResult evolve_with_state(const CorrelationMatrix& c0, const HamiltonianMatrix& h,
                               const DissipationSpec& d, double t_max, double dt,
                               const std::vector<std::string>& channel_names,
                               const EvolveOptions& options) {
  check_dims(c0, h, d);
  validate(d, h.size());
  if (!(dt > 0.0)) throw ConfigError("dt: must be > 0");
  if (!(t_max >= dt)) throw ConfigError("t_max: must be >= dt");

  const int n = h.size();
  const auto channels = parse_channels(channel_names, n);
  const double rate = h.norm2() + d.gamma;
  const double cap = rate > 0.0 ? options.step_constant / rate : dt;
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / cap - 1e-12)));
  const double step = dt / substeps;
  const int samples = sample_count(t_max, dt);
  const Eigen::MatrixXd damp = damping_matrix(d, n);

  TimeSeries ts;
  ts.names = channel_names;
  ts.channels.assign(channels.size(), {});
  ts.t.reserve(samples + 1);
  for (auto& c : ts.channels) c.reserve(samples + 1);

  CorrelationMatrix c = c0;
  double max_violation = hermiticity_violation(c);
  c = 0.5 * (c + c.adjoint()).eval();
  const double trace0 = c.trace().real();
  double max_trace_drift = 0.0;
  double max_trace_increase = 0.0;
  double min_eig = INFINITY, max_eig = -INFINITY;
  nlohmann::json snapshots = nlohmann::json::array();

  auto record = [&](int k) {
    const double t = k * dt;
    ts.t.push_back(t);
    for (std::size_t q = 0; q < channels.size(); ++q) ts.channels[q].push_back(channels[q].evaluate(c));
    max_trace_drift = std::max(max_trace_drift, std::abs(c.trace().real() - trace0));
    if (options.spectrum_check_every > 0 &&
        (k % options.spectrum_check_every == 0 || k == samples)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
    }
    if (options.snapshot_every > 0 && k % options.snapshot_every == 0) {
      nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
      for (int i = 0; i < n; ++i) {
        std::vector<double> rr(n), ii(n);
        for (int j = 0; j < n; ++j) {
          rr[j] = c(i, j).real();
          ii[j] = c(i, j).imag();
        }
        re.push_back(rr);
        im.push_back(ii);
      }
      snapshots.push_back({{"t", t}, {"re", re}, {"im", im}});
    }
  };

  record(0);
  Eigen::MatrixXcd k1, k2, k3, k4, tmp;
  for (int k = 1; k <= samples; ++k) {
    const double previous_trace = c.trace().real();
    for (int s = 0; s < substeps; ++s) {
      rhs_into(c, h, damp, k1, true);
      tmp = c + (0.5 * step) * k1;
      rhs_into(tmp, h, damp, k2, true);
      tmp = c + (0.5 * step) * k2;
      rhs_into(tmp, h, damp, k3, true);
      tmp = c + step * k3;
      rhs_into(tmp, h, damp, k4, true);
      c += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!c.allFinite())
      throw IntegrationError("evolve: non-finite correlation matrix at t = " +
                                 std::to_string(k * dt),
                             k * dt);
    max_violation = std::max(max_violation, hermiticity_violation(c));
    c = 0.5 * (c + c.adjoint()).eval();
    max_trace_increase = std::max(max_trace_increase, c.trace().real() - previous_trace);
    record(k);
  }

  ts.metadata["dt"] = dt;
  ts.metadata["t_max"] = samples * dt;
  ts.metadata["integrator"] = {{"method", "rk4"},
                               {"dt_int", step},
                               {"substeps", substeps},
                               {"step_constant", options.step_constant}};
  ts.metadata["max_hermiticity_violation"] = max_violation;
  ts.metadata["max_trace_drift"] = max_trace_drift;
  ts.metadata["max_trace_increase"] = max_trace_increase;
  if (std::isfinite(min_eig)) {
    ts.metadata["min_eigenvalue"] = min_eig;
    ts.metadata["max_eigenvalue"] = max_eig;
  }
  if (options.snapshot_every > 0) ts.metadata["snapshots"] = std::move(snapshots);
  return {std::move(ts), std::move(c)};
}

TimeSeries evolve(const CorrelationMatrix& c0, const HamiltonianMatrix& h, const DissipationSpec& d,
                  double t_max, double dt, const std::vector<std::string>& channels,
                  const EvolveOptions& options) {
  return evolve_with_state(c0, h, d, t_max, dt, channels, options).series;
}

}  // namespace edgesync
