#include "edgesync/many_body.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

using cd = std::complex<double>;
using Mask = std::uint32_t;

// Sign of moving a fermion operator past the occupied sites below `site`.
double jw_sign(Mask m, int site) {
  return (std::popcount(m & ((Mask{1} << site) - 1)) % 2 == 0) ? 1.0 : -1.0;
}

// c_i^dag c_j |m>; returns false if the result vanishes.
bool hop(Mask m, int i, int j, Mask& out, double& sign) {
  if (!(m >> j & 1)) return false;
  const double s1 = jw_sign(m, j);
  const Mask mid = m ^ (Mask{1} << j);
  if (mid >> i & 1) return false;
  sign = s1 * jw_sign(mid, i);
  out = mid | (Mask{1} << i);
  return true;
}

std::vector<cd> product_state_vector(const ProductStateSpec& p) {
  const int n = p.size();
  std::vector<cd> psi(std::size_t{1} << n);
  for (Mask m = 0; m < psi.size(); ++m) {
    cd amp = 1.0;
    for (int j = 0; j < n; ++j)
      amp *= (m >> j & 1) ? std::polar(std::sin(p.theta[j]), p.phi[j]) : cd(std::cos(p.theta[j]));
    psi[m] = amp;
  }
  return psi;
}

// Particle-number sectors of the occupation basis.
struct Sectors {
  std::vector<std::vector<Mask>> states;  // per particle number
  std::vector<int> position;              // mask -> index within its sector
};

Sectors make_sectors(int n) {
  Sectors s;
  s.states.resize(n + 1);
  s.position.resize(std::size_t{1} << n);
  for (Mask m = 0; m < (Mask{1} << n); ++m) {
    auto& sector = s.states[std::popcount(m)];
    s.position[m] = static_cast<int>(sector.size());
    sector.push_back(m);
  }
  return s;
}

// Matrix of c_i^dag c_j restricted to one sector.
Eigen::MatrixXd sector_operator(const Sectors& s, int count, int i, int j) {
  const auto& states = s.states[count];
  const int dim = static_cast<int>(states.size());
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    Mask out;
    double sign;
    if (hop(states[b], i, j, out, sign)) op(s.position[out], b) += sign;
  }
  return op;
}

// c_s as a map from sector count+1 to sector count.
Eigen::MatrixXd annihilator(const Sectors& s, int count, int site) {
  const auto& from = s.states[count + 1];
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(s.states[count].size(), from.size());
  for (std::size_t b = 0; b < from.size(); ++b) {
    const Mask m = from[b];
    if (!(m >> site & 1)) continue;
    op(s.position[m ^ (Mask{1} << site)], b) = jw_sign(m, site);
  }
  return op;
}

class BlockLindbladian {
 public:
  BlockLindbladian(const HamiltonianMatrix& h, const DissipationSpec& d)
      : n_(h.size()), sectors_(make_sectors(n_)), dissipation_(d) {
    const auto& hm = h.matrix();
    for (int count = 0; count <= n_; ++count) {
      const auto& states = sectors_.states[count];
      const int dim = static_cast<int>(states.size());
      Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(dim, dim);
      for (int b = 0; b < dim; ++b) {
        for (int i = 0; i < n_; ++i) {
          for (int j = 0; j < n_; ++j) {
            if (hm(i, j) == 0.0) continue;
            Mask out;
            double sign;
            if (hop(states[b], i, j, out, sign)) hs(sectors_.position[out], b) += hm(i, j) * sign;
          }
        }
      }
      hamiltonian_.push_back(hs);

      // Entrywise factor of the diagonal part of the dissipator.
      Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(dim, dim);
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
          double f = 0.0;
          for (int s : d.sites) {
            const double na = states[a] >> (s - 1) & 1;
            const double nb = states[b] >> (s - 1) & 1;
            f += d.jump_type == JumpType::Dephasing ? -0.5 * (na - nb) * (na - nb)
                                                    : -0.5 * (na + nb);
          }
          diag(a, b) = d.gamma * f;
        }
      }
      local_.push_back(diag);
    }
    if (d.jump_type == JumpType::Loss) {
      jumps_.resize(n_);
      for (int count = 0; count < n_; ++count)
        for (int s : d.sites) jumps_[count].push_back(annihilator(sectors_, count, s - 1));
    }
  }

  const Sectors& sectors() const { return sectors_; }

  std::vector<Eigen::MatrixXcd> apply(const std::vector<Eigen::MatrixXcd>& rho) const {
    std::vector<Eigen::MatrixXcd> out(rho.size());
    const cd minus_i(0.0, -1.0);
    for (int count = 0; count <= n_; ++count) {
      const auto& h = hamiltonian_[count];
      out[count] = minus_i * (h * rho[count] - rho[count] * h);
      out[count] += local_[count].cwiseProduct(rho[count]);
      if (!jumps_.empty() && count < n_) {
        for (const auto& c : jumps_[count])
          out[count] += dissipation_.gamma * (c * rho[count + 1] * c.transpose());
      }
    }
    return out;
  }

  // Upper bound on the generator norm, for Taylor sub-stepping.
  double norm_bound(const HamiltonianMatrix& h) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix(), Eigen::EigenvaluesOnly);
    return 2.0 * es.eigenvalues().cwiseAbs().sum() +
           2.0 * dissipation_.gamma * static_cast<double>(dissipation_.sites.size());
  }

 private:
  int n_;
  Sectors sectors_;
  DissipationSpec dissipation_;
  std::vector<Eigen::MatrixXd> hamiltonian_;
  std::vector<Eigen::MatrixXd> local_;
  std::vector<std::vector<Eigen::MatrixXd>> jumps_;
};

double max_abs(const std::vector<Eigen::MatrixXcd>& blocks) {
  double m = 0.0;
  for (const auto& b : blocks)
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

std::complex<double> product_state_two_point(const ProductStateSpec& state, int i, int j) {
  const auto psi = product_state_vector(state);
  cd sum = 0.0;
  for (Mask m = 0; m < psi.size(); ++m) {
    Mask out;
    double sign;
    if (hop(m, i, j, out, sign)) sum += std::conj(psi[out]) * sign * psi[m];
  }
  return sum;
}

TimeSeries exact_oracle_evolve(const ProductStateSpec& state, const HamiltonianMatrix& h,
                               const DissipationSpec& d, double t_max, double dt,
                               const std::vector<std::string>& channel_names) {
  const int n = h.size();
  if (n > kOracleMaxSites)
    throw CapabilityError("exact_oracle_evolve: N = " + std::to_string(n) + " exceeds " +
                          std::to_string(kOracleMaxSites) + " sites");
  validate(state);
  if (state.size() != n) throw DimensionError("exact_oracle_evolve: state and hamiltonian sizes differ");
  validate(d, n);
  if (!(dt > 0.0) || !(t_max >= dt)) throw ConfigError("exact_oracle_evolve: need dt > 0, t_max >= dt");

  const BlockLindbladian lindbladian(h, d);
  const auto& sectors = lindbladian.sectors();
  const auto psi = product_state_vector(state);

  std::vector<Eigen::MatrixXcd> rho(n + 1);
  for (int count = 0; count <= n; ++count) {
    const auto& states = sectors.states[count];
    const int dim = static_cast<int>(states.size());
    rho[count].resize(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) rho[count](a, b) = psi[states[a]] * std::conj(psi[states[b]]);
  }

  const auto channels = parse_channels(channel_names, n);
  // <c_i^dag c_j> = sum over sectors of Tr(O rho) with O the sector matrix.
  std::vector<std::vector<Eigen::MatrixXd>> observables;
  for (const auto& ch : channels) {
    std::vector<Eigen::MatrixXd> per_sector;
    if (ch.kind != Channel::Kind::Total)
      for (int count = 0; count <= n; ++count)
        per_sector.push_back(sector_operator(sectors, count, ch.i, ch.j));
    observables.push_back(std::move(per_sector));
  }
  auto measure = [&](std::size_t q) {
    const auto& ch = channels[q];
    cd value = 0.0;
    for (int count = 0; count <= n; ++count) {
      if (ch.kind == Channel::Kind::Total)
        value += static_cast<double>(count) * rho[count].trace();
      else
        value += (observables[q][count].cast<cd>() * rho[count]).trace();
    }
    return ch.kind == Channel::Kind::ImagPart ? value.imag() : value.real();
  };

  TimeSeries ts;
  ts.names = channel_names;
  ts.channels.assign(channels.size(), {});
  const int samples = sample_count(t_max, dt);
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt * lindbladian.norm_bound(h))));
  const double step = dt / substeps;

  auto record = [&](int k) {
    ts.t.push_back(k * dt);
    for (std::size_t q = 0; q < channels.size(); ++q) ts.channels[q].push_back(measure(q));
  };

  record(0);
  int max_terms = 0;
  for (int k = 1; k <= samples; ++k) {
    for (int s = 0; s < substeps; ++s) {
      std::vector<Eigen::MatrixXcd> term = rho;
      const double scale = std::max(max_abs(rho), 1e-300);
      for (int order = 1; order < 60; ++order) {
        term = lindbladian.apply(term);
        for (auto& b : term) b *= step / order;
        for (int count = 0; count <= n; ++count) rho[count] += term[count];
        if (max_abs(term) < 1e-18 * scale) {
          max_terms = std::max(max_terms, order);
          break;
        }
      }
    }
    record(k);
  }
  ts.metadata["dt"] = dt;
  ts.metadata["t_max"] = samples * dt;
  ts.metadata["integrator"] = {{"method", "taylor"}, {"substeps", substeps}, {"max_terms", max_terms}};
  return ts;
}

}  // namespace edgesync
