// Acceptance run: evaluates every primary criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.
//
//   acceptance [--scenarios DIR] [--report FILE] [--expect-fail 7,8,9] [--only 2,3]
//
// Exit status is 0 when every outcome equals its expectation (PASS unless
// listed in --expect-fail), 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgesync/config.hpp"
#include "edgesync/dynamics.hpp"
#include "edgesync/experiment.hpp"
#include "edgesync/fits.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/liouvillian.hpp"
#include "edgesync/many_body.hpp"
#include "edgesync/single_particle.hpp"

using namespace edgesync;
using nlohmann::json;
constexpr double pi = std::numbers::pi;

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[x] ") + std::move(note));
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double num(const json& j, double fallback = NAN) { return j.is_number() ? j.get<double>() : fallback; }

// Shared state: runs reused across criteria.
struct Context {
  std::string dir;
  RunOptions quiet;
  std::map<std::string, ScenarioResult> scenarios;
  std::map<std::string, SweepResult> sweeps;
  std::optional<RobustnessReport> robustness;
  RobustnessConfig robustness_config;

  ScenarioResult& scenario(const std::string& name) {
    auto it = scenarios.find(name);
    if (it == scenarios.end()) it = scenarios.emplace(name, run_scenario(load_scenario(dir + "/" + name + ".json"), quiet)).first;
    return it->second;
  }
  SweepResult& sweep(const std::string& name) {
    auto it = sweeps.find(name);
    if (it == sweeps.end()) it = sweeps.emplace(name, run_sweep(load_sweep(dir + "/" + name + ".json"), quiet)).first;
    return it->second;
  }
};

std::pair<std::vector<double>, std::vector<double>> column(const SweepResult& s, double gamma,
                                                           const std::string& q, int lo, int hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : s.rows)
    if (r.gamma == gamma && r.l >= lo && r.l <= hi) pts.emplace_back(r.l, r.values.at(q));
  std::sort(pts.begin(), pts.end());
  std::vector<double> l, y;
  for (const auto& [a, b] : pts) {
    l.push_back(a);
    y.push_back(b);
  }
  return {l, y};
}

std::vector<double> gammas(const SweepResult& s) {
  std::set<double> g;
  for (const auto& r : s.rows) g.insert(r.gamma);
  return {g.begin(), g.end()};
}

Verdict oracle(Context&) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + static_cast<int>(rng() % 4);
    ModelSpec m;
    m.n_sites = n;
    switch (k % 3) {
      case 0: m.variant = Variant::DiagonalAAH; m.v = 2.0 * u(rng); m.phi_v = pi * (2.0 * u(rng) - 1.0) * 0.999; break;
      case 1: m.variant = Variant::OffDiagonalAAH; m.lambda = u(rng); m.phi_lambda = pi * (2.0 * u(rng) - 1.0) * 0.999; break;
      default: m.variant = Variant::FourBand; m.g2 = u(rng); break;
    }
    const auto h = build_hamiltonian(m);
    DissipationSpec d;
    d.jump_type = rng() % 2 ? JumpType::Loss : JumpType::Dephasing;
    d.gamma = 3.0 * u(rng);
    for (int s = 1; s <= n; ++s)
      if (u(rng) < 0.5) d.sites.push_back(s);
    if (d.sites.empty()) d.sites.push_back(1 + static_cast<int>(rng() % n));
    const auto spec = random_product_state(n, rng());
    std::vector<std::string> ch;
    for (int i = 1; i <= n; ++i) {
      ch.push_back("n_" + std::to_string(i));
      for (int j = i + 1; j <= n; ++j) {
        ch.push_back("ReC_" + std::to_string(i) + "_" + std::to_string(j));
        ch.push_back("ImC_" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
    const auto a = evolve(initial_correlation(spec), h, d, 10.0, 0.1, ch);
    const auto b = exact_oracle_evolve(spec, h, d, 10.0, 0.1, ch);
    for (std::size_t c = 0; c < ch.size(); ++c)
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.channels[c][i] - b.channels[c][i]));
  }
  const double elapsed = seconds_since(t0);
  v.check(worst < 1e-8, fmt("max deviation %.3g (< 1e-8)", worst));
  v.check(elapsed < 120.0, fmt("runtime %.1f s (< 120 s)", elapsed));
  return v;
}

Verdict edge_energies(Context&) {
  Verdict v;
  double worst_diag = 0.0;
  bool sides = true;
  for (double phi : {pi / 4, pi / 2, 3 * pi / 4}) {
    ModelSpec m;
    m.n_sites = 59;
    m.v = 0.7;
    m.phi_v = phi;
    const auto rep = identify_edge_states(m, eigensystem(build_hamiltonian(m)));
    const auto mu = edge_energies_diagonal(0.7, phi);
    for (const auto& [target, side] : {std::pair{mu.mu1, EdgeSide::Left}, std::pair{mu.mu2, EdgeSide::Right}}) {
      double best = INFINITY;
      const EdgeState* hit = nullptr;
      for (const auto& s : rep.states)
        if (std::abs(s.energy - target) < best) {
          best = std::abs(s.energy - target);
          hit = &s;
        }
      worst_diag = std::max(worst_diag, best);
      sides = sides && hit && hit->side == side;
    }
  }
  v.check(worst_diag < 1e-4, fmt("diagonal: max |E - mu| %.2g (< 1e-4)", worst_diag));
  v.check(sides, "diagonal: mu1 left, mu2 right for phi_V in (0, pi)");

  // Near a window end the pair is only weakly localized, so match against the
  // full spectrum and read the side from the half-chain weight.
  double worst_off = 0.0;
  int pairs = 0;
  bool off_sides = true;
  for (int k = 0; k < 8; ++k) {
    const double phi = -3 * pi / 4 + (k + 0.5) * (3 * pi / 2) / 8;
    ModelSpec m;
    m.variant = Variant::OffDiagonalAAH;
    m.n_sites = 80;
    m.lambda = 0.2;
    m.alpha_q = 4;
    m.phi_lambda = phi;
    const auto es = eigensystem(build_hamiltonian(m));
    const auto expected = edge_energies_offdiagonal(0.2, phi);
    for (const auto& [e, side] : {std::pair{expected.left, EdgeSide::Left}, std::pair{expected.right, EdgeSide::Right}}) {
      if (!e) continue;
      for (double sign : {-1.0, 1.0}) {
        ++pairs;
        Eigen::Index n = 0;
        const double err = (es.energies.array() - sign * *e).abs().minCoeff(&n);
        worst_off = std::max(worst_off, err);
        const double left = es.states.col(n).head(m.n_sites / 2).squaredNorm();
        off_sides = off_sides && (side == EdgeSide::Left ? left > 0.9 : left < 0.1);
      }
    }
  }
  v.check(worst_off < 1e-4, fmt("off-diagonal: %d edge energies over 8 phases, max error %.2g (< 1e-4)", pairs, worst_off));
  v.check(off_sides, "off-diagonal: every matched eigenvector carries > 90% of its weight on the predicted half");
  return v;
}

Verdict fourband_degeneracy(Context&) {
  Verdict v;
  const double e = std::sqrt(1.49);
  auto model = [](int l) {
    ModelSpec m;
    m.variant = Variant::FourBand;
    m.n_sites = 4 * l + 1;
    m.g2 = 0.7;
    return m;
  };
  const auto es10 = eigensystem(build_hamiltonian(model(10)));
  const auto rep = identify_edge_states(model(10), es10);
  double worst = 0.0;
  for (const auto& s : rep.states) worst = std::max(worst, std::abs(std::abs(s.energy) - e));
  for (int i : rep.protected_indices()) worst = std::max(worst, std::abs(std::abs(es10.energies(i)) - e));
  v.check(rep.states.size() == 4 && worst < 5e-3,
          fmt("N=41: %zu edge states, max ||E| - sqrt(1.49)| %.2g (< 5e-3)", rep.states.size(), worst));
  // Reported states are rotations inside each near-degenerate cluster; the
  // splitting is the spread of the cluster's eigenvalues.
  auto splitting = [&](int l) {
    const auto es = eigensystem(build_hamiltonian(model(l)));
    const auto r = identify_edge_states(model(l), es);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& c : r.clusters)
      for (int i : c.indices)
        if (es.energies(i) > 0) {
          lo = std::min(lo, es.energies(i));
          hi = std::max(hi, es.energies(i));
        }
    return hi - lo;
  };
  const double s8 = splitting(8);
  const double s10 = splitting(10);
  const double per_cell = std::sqrt(s10 / s8);
  v.check(per_cell >= 0.35 && per_cell <= 0.65,
          fmt("splitting %.3g (l=8) -> %.3g (l=10), per-cell ratio %.4f in [0.35, 0.65]", s8, s10, per_cell));
  return v;
}

Verdict frequency(Context& ctx) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const auto& r = ctx.scenario("fig3");
  const double elapsed = seconds_since(t0);
  const double target = 2.0 * std::sqrt(1.49);
  const double w = num(r.metrics["frequency"]["omega"]);
  const double err = std::abs(w - target) / target;
  v.check(err < 0.01, fmt("omega(n_1) = %.5f vs %.5f, relative error %.2g (< 1%%)", w, target, err));
  v.check(elapsed < 300.0, fmt("runtime %.1f s (< 300 s)", elapsed));
  return v;
}

Verdict amplitude(Context& ctx) {
  Verdict v;
  const auto& s = ctx.sweep("fig4_rates");
  for (int l : {8, 10}) {
    std::vector<double> a;
    for (double g : gammas(s)) a.push_back(column(s, g, "amplitude", l, l).second.at(0));
    double worst = 0.0;
    for (double x : a) worst = std::max(worst, std::abs(x - 0.13005) / 0.13005);
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    double mean = 0.0;
    for (double x : a) mean += x / a.size();
    const double spread = (*hi - *lo) / mean;
    v.check(worst < 0.05, fmt("l=%d: A = %.5f/%.5f/%.5f, max deviation %.2f%% (< 5%%)", l, a[0], a[1], a[2], 100 * worst));
    v.check(spread < 0.02, fmt("l=%d: spread over gamma %.2f%% (< 2%%)", l, 100 * spread));
  }
  return v;
}

Verdict decay(Context& ctx) {
  Verdict v;
  const auto& s = ctx.sweep("fig4_rates");
  for (double g : gammas(s)) {
    const auto [l, y] = column(s, g, "r_decay", 3, 9);
    const double c = fit_exponential(l, y).param("c");
    v.check(c >= 0.44 && c <= 0.54, fmt("gamma=%g: c = %.4f in [0.44, 0.54]", g, c));
  }
  return v;
}

Verdict relaxation(Context& ctx) {
  Verdict v;
  const auto& central = ctx.sweep("fig4_central");
  for (double g : gammas(central)) {
    const auto [l, y] = column(central, g, "r_relax", 3, 15);
    const auto f = fit_powerlaw(l, y);
    const double d = f.param("d");
    v.check(d >= 2.0 && d <= 3.0, fmt("central gamma=%g: d = %.3f in [2, 3]", g, d));
  }
  const auto& bulk = ctx.sweep("fig4_bulk");
  const auto gs = gammas(bulk);
  for (std::size_t k = 0; k < 2 && k < gs.size(); ++k) {
    const auto [l, y] = column(bulk, gs[k], "r_relax", 3, 15);
    const auto c = detect_crossover(l, y);
    v.check(c.plateau_detected(), fmt("bulk gamma=%g: plateau up to l_c = %g", gs[k], c.l_c));
    v.check(c.exponent >= 1.6 && c.exponent <= 2.4,
            fmt("bulk gamma=%g: post-crossover d = %.3f over %d points in [1.6, 2.4]", gs[k], c.exponent, c.tail_points));
  }
  return v;
}

Verdict pearson_convergence(Context& ctx) {
  Verdict v;
  const auto& fig1 = ctx.scenario("fig1");
  const double r_min = num(fig1.metrics["pearson"]["final"]["min"]);
  v.check(r_min > 0.99, fmt("gamma=1.5: final-20%% min r[ReC_1N, ImC_1N(t+tau)] = %.5f (> 0.99)", r_min));
  const auto& control = ctx.scenario("fig1_gamma0");
  const double abs_mean = num(control.metrics["pearson"]["final"]["mean_abs"]);
  v.check(abs_mean < 0.9, fmt("gamma=0 control: final-20%% mean |r| = %.4f (< 0.9)", abs_mean));
  return v;
}

RobustnessReport& robustness(Context& ctx) {
  if (!ctx.robustness) {
    ctx.robustness_config = load_robustness(ctx.dir + "/fig5.json");
    std::erase_if(ctx.robustness_config.cases,
                  [](const RobustnessCase& c) { return c.g3 == 0.0 && !c.random_state_seed; });
    ctx.robustness = run_robustness(ctx.robustness_config, ctx.quiet);
  }
  return *ctx.robustness;
}

Verdict robustness_criterion(Context& ctx) {
  Verdict v;
  for (const auto& c : robustness(ctx).summary["cases"]) {
    const double r = num(c["dissipative"]["r_min"]);
    const double rc = num(c["control"]["r_min"]);
    const double locked = num(c["dissipative"]["phase_locking"]["final"]["min"]);
    const std::string name = c["name"].get<std::string>();
    v.check(r > 0.99, fmt("%s: post-transient min r = %.5f (> 0.99; best-lag final min %.4f)", name.c_str(), r, locked));
    v.check(!(rc > 0.99), fmt("%s control: min r = %.4f (must not exceed 0.99)", name.c_str(), rc));
  }
  return v;
}

Verdict invariants(Context& ctx) {
  Verdict v;
  struct Item {
    std::string name;
    json invariants;
    json liouvillian;
    ScenarioConfig config;
  };
  std::vector<Item> items;
  for (const char* name : {"fig1", "fig1_gamma0", "fig2", "fig2_gamma0", "fig3", "fig3_gamma0", "fig4_bulk_base"}) {
    const auto& r = ctx.scenario(name);
    items.push_back({name, r.metrics["invariants"], r.metrics["liouvillian"], r.config});
  }
  const auto& rep = robustness(ctx);
  for (std::size_t k = 0; k < ctx.robustness_config.cases.size(); ++k) {
    const auto& c = rep.summary["cases"][k];
    ScenarioConfig cfg = robustness_case(ctx.robustness_config, ctx.robustness_config.cases[k]);
    items.push_back({"fig5_" + c["name"].get<std::string>(), c["dissipative"]["invariants"], c["dissipative"]["liouvillian"], cfg});
    cfg.dissipation.gamma = 0.0;
    items.push_back({"fig5_" + c["name"].get<std::string>() + "_control", c["control"]["invariants"], c["control"]["liouvillian"], cfg});
  }

  std::map<std::string, double> spectra;  // model + dissipation -> max real part
  for (const auto& it : items) {
    const auto& inv = it.invariants;
    const double herm = num(inv["max_hermiticity_violation"]);
    const double lo = num(inv["min_eigenvalue"]);
    const double hi = num(inv["max_eigenvalue"]);
    v.check(herm < 1e-9 && lo >= -1e-8 && hi <= 1.0 + 1e-8,
            fmt("%s: Hermiticity %.1e, spectrum of C in [%.2e, 1%+.1e]", it.name.c_str(), herm, lo, hi - 1.0));
    if (it.config.dissipation.jump_type == JumpType::Dephasing) {
      const double drift = num(inv["max_trace_drift"]);
      v.check(drift < 1e-9, fmt("%s: particle-number drift %.1e", it.name.c_str(), drift));
    }
    double max_re = num(it.liouvillian.value("max_real_part", json(nullptr)));
    std::string how = "from the run";
    if (!std::isfinite(max_re)) {
      json key = to_json(it.config)["model"];
      key["dissipation"] = to_json(it.config)["dissipation"];
      auto found = spectra.find(key.dump());
      if (found == spectra.end()) {
        const Superoperator m(build_hamiltonian(it.config.model), it.config.dissipation);
        found = spectra.emplace(key.dump(), superoperator_eigenvalues(m, true, true).real().maxCoeff()).first;
      }
      max_re = found->second;
      how = "eigenvalues only";
    }
    v.check(max_re <= 1e-9, fmt("%s: max Re(lambda) %.1e (%s)", it.name.c_str(), max_re, how.c_str()));
  }
  // Collapse passing lines.
  std::vector<std::string> failed;
  for (const auto& n : v.notes)
    if (n.rfind("[x]", 0) == 0) failed.push_back(n);
  const std::size_t total = v.notes.size();
  v.notes = failed;
  v.notes.insert(v.notes.begin(), fmt("%zu checks over %zu runs, %zu failed", total, items.size(), failed.size()));
  return v;
}

Verdict frequency_ambiguity(Context& ctx) {
  Verdict v;
  const auto& m = ctx.scenario("fig1").metrics;
  const json& match = m["frequency_match"];
  const auto hits = match.value("matches", json::array());
  std::string errors;
  for (const auto& c : match["candidates"])
    errors += fmt("%s %.2g ", c["name"].get<std::string>().c_str(), num(c.value("relative_error", json(nullptr))));
  v.check(hits.size() == 1, fmt("omega = %.5f; relative errors: %s-> matched %s", num(m["frequency"]["omega"]),
                                errors.c_str(), match["matched"].dump().c_str()));
  v.check(m.contains("frequency_match"), "match recorded in metrics.json under frequency_match");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
#ifdef EDGESYNC_SCENARIO_DIR
  ctx.dir = EDGESYNC_SCENARIO_DIR;
#else
  ctx.dir = "scenarios";
#endif
  ctx.quiet.write = false;
  std::string report_path;
  std::set<int> expected_failures;
  std::set<int> only;
  auto ids = [](const char* list, std::set<int>& into) {
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) into.insert(std::stoi(item));
  };
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--scenarios") {
      ctx.dir = argv[i + 1];
    } else if (flag == "--report") {
      report_path = argv[i + 1];
    } else if (flag == "--expect-fail") {
      ids(argv[i + 1], expected_failures);
    } else if (flag == "--only") {
      ids(argv[i + 1], only);
    } else {
      std::cerr << "unknown option " << flag << "\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> criteria{
      {"oracle equivalence", oracle},
      {"edge-energy closed forms", edge_energies},
      {"four-band degeneracy", fourband_degeneracy},
      {"synchronization frequency", frequency},
      {"amplitude convergence", amplitude},
      {"decay-rate scaling", decay},
      {"relaxation scaling", relaxation},
      {"Pearson convergence", pearson_convergence},
      {"robustness", robustness_criterion},
      {"invariant suite", invariants},
      {"frequency ambiguity", frequency_ambiguity},
  };

  std::ostringstream out;
  int passed = 0;
  int unexpected = 0;
  int ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second(ctx);
    } catch (const std::exception& e) {
      v.check(false, std::string("error: ") + e.what());
    }
    const bool expected_pass = !expected_failures.contains(id);
    passed += v.pass;
    unexpected += v.pass != expected_pass;
    std::ostringstream line;
    line << (v.pass ? "PASS" : "FAIL") << fmt(" [%2d] ", id) << criteria[k].first
         << fmt(" (%.0f s)", seconds_since(t0));
    if (!expected_pass) line << (v.pass ? "  (listed as a known failure, now passes)" : "  (known failure)");
    line << "\n";
    for (const auto& n : v.notes) line << "       " << n << "\n";
    std::cout << line.str() << std::flush;
    out << line.str();
  }
  const std::string summary = fmt("acceptance: %d of %d criteria pass, %d outcome(s) differ from expectation\n",
                                  passed, ran, unexpected);
  std::cout << summary;
  out << summary;
  if (!report_path.empty()) std::ofstream(report_path) << out.str();
  return unexpected == 0 ? 0 : 1;
}
