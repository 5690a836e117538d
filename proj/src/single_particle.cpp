#include "edgesync/single_particle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "edgesync/errors.hpp"

namespace edgesync {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_phase(double phi) {
  double x = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (x <= -kPi) x += 2.0 * kPi;
  return x;
}

// Which gap an energy sits in: number of bands lying fully below it, or -1
// if it is inside (or within tolerance of) a band.
int gap_index(double e, const std::vector<std::pair<double, double>>& bands) {
  int below = 0;
  for (const auto& [lo, hi] : bands) {
    if (e > lo - kGapTolerance && e < hi + kGapTolerance) return -1;
    if (hi < e) ++below;
  }
  return below;
}

GapLabel label_for(int gap, int n_bands) {
  if (gap <= 1) return GapLabel::BottomGap;
  if (gap >= n_bands - 1) return GapLabel::TopGap;
  return GapLabel::MidGap;
}

}  // namespace

std::string to_string(EdgeSide s) { return s == EdgeSide::Left ? "Left" : "Right"; }

std::string to_string(GapLabel g) {
  switch (g) {
    case GapLabel::BottomGap: return "BottomGap";
    case GapLabel::MidGap: return "MidGap";
    case GapLabel::TopGap: return "TopGap";
  }
  return "?";
}

EigenSystem eigensystem(const HamiltonianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("eigensystem: diagonalization failed");
  EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
  for (int n = 0; n < es.states.cols(); ++n) {
    for (int j = 0; j < es.states.rows(); ++j) {
      const double u = es.states(j, n);
      if (std::abs(u) > 1e-12) {
        if (u < 0) es.states.col(n) *= -1.0;
        break;
      }
    }
  }
  return es;
}

EdgeEnergyPair edge_energies_diagonal(double v, double phi_v) {
  const double shift = -v * std::cos(phi_v) / 2.0;
  const double s = std::sin(phi_v);
  const double root = std::sqrt(1.0 + 3.0 * v * v * s * s / 4.0);
  return {shift - root, shift + root};
}

OffDiagonalEdges edge_energies_offdiagonal(double lambda, double phi_lambda) {
  const double phi = wrap_phase(phi_lambda);
  const double base = 2.0 + lambda * lambda;
  const double c = 2.0 * std::numbers::sqrt2 * lambda;
  OffDiagonalEdges out;
  if (phi > -3.0 * kPi / 4.0 && phi < kPi / 4.0)
    out.left = std::sqrt(base - c * std::sin(phi + kPi / 4.0));
  if (phi > -kPi / 4.0 && phi < 3.0 * kPi / 4.0)
    out.right = std::sqrt(base + c * std::sin(phi - kPi / 4.0));
  return out;
}

double degenerate_edge_energy(double lambda) {
  return std::sqrt(2.0 + lambda * lambda - 2.0 * lambda);
}

FourBandEdge edge_energy_fourband(double g1, double g2) {
  return {std::hypot(g1, g2), std::abs(g2 / g1) < 1.0};
}

std::vector<std::pair<double, double>> bulk_bands(const ModelSpec& spec, int k_points) {
  const int q = unit_cell_size(spec);
  std::vector<double> lo(q, INFINITY), hi(q, -INFINITY);
  using cd = std::complex<double>;
  for (int m = 0; m < k_points; ++m) {
    const double k = -kPi + 2.0 * kPi * m / k_points;
    Eigen::MatrixXcd hk = Eigen::MatrixXcd::Zero(q, q);
    auto add_hop = [&](int a, int offset, double t) {
      // site a (0-based in cell 0) to site a + offset, possibly in a later cell
      const int target = a + offset;
      const int b = target % q;
      const int cell = target / q;
      const cd phase = std::polar(1.0, k * cell);
      hk(b, a) += t * phase;
      hk(a, b) += t * std::conj(phase);
    };
    for (int a = 0; a < q; ++a) {
      hk(a, a) += onsite_energy(spec, a + 1);
      add_hop(a, 1, bond_coefficient(spec, a + 1));
      if (spec.g3 != 0.0) add_hop(a, 2, spec.g3);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hk, Eigen::EigenvaluesOnly);
    for (int b = 0; b < q; ++b) {
      lo[b] = std::min(lo[b], solver.eigenvalues()(b));
      hi[b] = std::max(hi[b], solver.eigenvalues()(b));
    }
  }
  std::vector<std::pair<double, double>> bands;
  for (int b = 0; b < q; ++b) bands.emplace_back(lo[b], hi[b]);
  return bands;
}

std::vector<int> EdgeStateReport::protected_indices() const {
  std::vector<int> out;
  std::vector<bool> used(clusters.size(), false);
  for (const auto& s : states) used[s.cluster] = true;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    if (used[c]) out.insert(out.end(), clusters[c].indices.begin(), clusters[c].indices.end());
  std::sort(out.begin(), out.end());
  return out;
}

EdgeStateReport identify_edge_states(const EigenSystem& es,
                                     const std::vector<std::pair<double, double>>& bands,
                                     int window) {
  const int n = static_cast<int>(es.states.rows());
  if (window < 1 || n < 2 * window)
    throw ConfigError("identify_edge_states: need N >= 2 * window");
  EdgeStateReport report;
  report.window = window;

  std::map<int, std::vector<int>> by_gap;
  for (int i = 0; i < es.energies.size(); ++i) {
    const int gap = gap_index(es.energies(i), bands);
    if (gap >= 0) by_gap[gap].push_back(i);
  }

  for (const auto& [gap, indices] : by_gap) {
    const int d = static_cast<int>(indices.size());
    Eigen::MatrixXd uc(n, d);
    Eigen::VectorXd ec(d);
    for (int c = 0; c < d; ++c) {
      uc.col(c) = es.states.col(indices[c]);
      ec(c) = es.energies(indices[c]);
    }
    const Eigen::MatrixXd wl = uc.topRows(window).transpose() * uc.topRows(window);
    const Eigen::MatrixXd wr = uc.bottomRows(window).transpose() * uc.bottomRows(window);

    EdgeCluster cluster{label_for(gap, static_cast<int>(bands.size())), indices, wl.trace(),
                        wr.trace()};
    const int cluster_id = static_cast<int>(report.clusters.size());
    report.clusters.push_back(cluster);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rot(wl - wr);
    for (int c = 0; c < d; ++c) {
      const Eigen::VectorXd v = rot.eigenvectors().col(c);
      const double left = v.dot(wl * v);
      const double right = v.dot(wr * v);
      const double weight = std::max(left, right);
      if (weight <= kEdgeWeightThreshold) continue;
      int dominant = 0;
      v.cwiseAbs().maxCoeff(&dominant);
      EdgeState state;
      state.index = indices[dominant];
      state.energy = v.cwiseProduct(v).dot(ec);
      state.side = left >= right ? EdgeSide::Left : EdgeSide::Right;
      state.edge_weight = weight;
      state.gap_label = cluster.gap_label;
      state.cluster = cluster_id;
      state.amplitudes = uc * v;
      report.states.push_back(std::move(state));
    }
  }
  std::sort(report.states.begin(), report.states.end(),
            [](const EdgeState& a, const EdgeState& b) { return a.energy < b.energy; });
  return report;
}

EdgeStateReport identify_edge_states(const ModelSpec& spec, const EigenSystem& es) {
  return identify_edge_states(es, bulk_bands(spec), unit_cell_size(spec));
}

nlohmann::json to_json(const EdgeStateReport& r) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : r.states)
    states.push_back({{"index", s.index},
                      {"energy", s.energy},
                      {"side", to_string(s.side)},
                      {"edge_weight", s.edge_weight},
                      {"gap_label", to_string(s.gap_label)},
                      {"cluster", s.cluster}});
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.clusters)
    clusters.push_back({{"gap_label", to_string(c.gap_label)},
                        {"indices", c.indices},
                        {"weight_left", c.weight_left},
                        {"weight_right", c.weight_right}});
  return {{"window", r.window}, {"states", states}, {"clusters", clusters},
          {"protected_indices", r.protected_indices()}};
}

}  // namespace edgesync
