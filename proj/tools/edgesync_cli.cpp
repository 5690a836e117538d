#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "edgesync/config.hpp"
#include "edgesync/errors.hpp"
#include "edgesync/experiment.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/single_particle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgesync;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::string out;
  int workers = 0;
  bool large = false;
  std::optional<std::uint64_t> seed;
};

void apply_seed(ScenarioConfig& c, const Globals& g) {
  if (!g.seed) return;
  c.model.disorder_seed = *g.seed;
  if (c.initial.preset == "Random") c.initial.seed = *g.seed;
  set_chain_length(c, c.model.n_sites);
}

RunOptions run_options(const Globals& g) {
  RunOptions o;
  o.workers = g.workers;
  o.allow_large = g.large;
  if (!g.out.empty()) o.output = g.out;
  return o;
}

fs::path output_dir(const Globals& g, const std::string& fallback) {
  fs::path p(g.out.empty() ? fallback : g.out);
  fs::create_directories(p);
  return p;
}

double left_weight(const Eigen::VectorXd& u, int window) {
  return u.head(window).squaredNorm();
}

double right_weight(const Eigen::VectorXd& u, int window) {
  return u.tail(window).squaredNorm();
}

void write_phase_scan(const fs::path& path, const ModelSpec& base, int steps) {
  if (base.variant == Variant::FourBand) throw ConfigError("phase-steps: the four-band model has no phase parameter");
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot write '" + path.string() + "'");
  out << "phase,index,energy,weight_left,weight_right\n";
  const int window = unit_cell_size(base);
  for (int k = 0; k < steps; ++k) {
    ModelSpec m = base;
    const double phase = 2.0 * std::numbers::pi * k / steps;
    (m.variant == Variant::DiagonalAAH ? m.phi_v : m.phi_lambda) = phase;
    const EigenSystem es = eigensystem(build_hamiltonian(m));
    for (int n = 0; n < es.energies.size(); ++n) {
      const Eigen::VectorXd u = es.states.col(n);
      out << format_number(phase) << "," << n << "," << format_number(es.energies(n)) << ","
          << format_number(left_weight(u, window)) << "," << format_number(right_weight(u, window)) << "\n";
    }
  }
}

int cmd_spectrum(const Globals& g, const std::string& path, int phase_steps) {
  ScenarioConfig c = load_scenario(path);
  apply_seed(c, g);
  const EigenSystem es = eigensystem(build_hamiltonian(c.model));
  const auto edges = identify_edge_states(c.model, es);
  json bands = json::array();
  for (const auto& [lo, hi] : bulk_bands(c.model)) bands.push_back({lo, hi});
  const fs::path dir = output_dir(g, c.output);
  json doc{{"model", to_json(c)["model"]},
           {"energies", std::vector<double>(es.energies.data(), es.energies.data() + es.energies.size())},
           {"bulk_bands", bands},
           {"edge_states", to_json(edges)}};
  write_json((dir / "spectrum.json").string(), doc);
  if (phase_steps > 0) write_phase_scan(dir / "spectrum_vs_phase.csv", c.model, phase_steps);
  std::cout << "spectrum: " << edges.states.size() << " edge states -> " << (dir / "spectrum.json").string() << "\n";
  return 0;
}

int cmd_evolve(const Globals& g, const std::string& path) {
  ScenarioConfig c = load_scenario(path);
  apply_seed(c, g);
  const auto r = run_scenario(c, run_options(g));
  const auto& final_span = r.metrics["pearson"]["final"];
  std::cout << "evolve: " << c.name << " r_min(final) = " << final_span["min"] << ", synchronized = "
            << r.metrics["synchronized"] << " -> " << r.directory << "\n";
  return 0;
}

int cmd_liouvillian(const Globals& g, const std::string& path) {
  ScenarioConfig c = load_scenario(path);
  apply_seed(c, g);
  const auto r = scenario_liouvillian(c, g.large);
  const fs::path dir = output_dir(g, c.output);
  write_json((dir / "liouvillian.json").string(), to_json(r));
  std::cout << "liouvillian: r_decay = " << format_number(r.r_decay) << ", r_relax = " << format_number(r.r_relax)
            << ", omega_sync = " << format_number(r.omega_sync) << " -> " << (dir / "liouvillian.json").string()
            << "\n";
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& path) {
  SweepConfig s = load_sweep(path);
  apply_seed(s.base, g);
  const auto r = run_sweep(s, run_options(g));
  for (const auto& f : r.failures)
    std::cerr << "sweep: point l=" << f.l << " N=" << f.n_sites << " gamma=" << format_number(f.gamma)
              << " failed: " << f.error << "\n";
  std::cout << "sweep: " << r.rows.size() << " rows, " << r.failures.size() << " failures -> " << r.directory << "\n";
  return 0;
}

int cmd_robustness(const Globals& g, const std::string& path) {
  RobustnessConfig rc = load_robustness(path);
  apply_seed(rc.base, g);
  if (g.seed)
    for (auto& c : rc.cases) {
      if (c.random_state_seed) c.random_state_seed = *g.seed;
      if (c.disorder_amplitude > 0.0) c.disorder_seed = *g.seed;
    }
  const auto r = run_robustness(rc, run_options(g));
  for (const auto& c : r.summary["cases"])
    std::cout << "robustness: " << c["name"].get<std::string>() << " r_min = " << c["dissipative"]["r_min"]
              << ", control r_min = " << c["control"]["r_min"] << ", pass = " << c["pass"] << "\n";
  return 0;
}

int cmd_fit(const Globals& g, const std::string& path, const FitRequest& req) {
  const auto rows = read_sweep_csv(path);
  const auto fits = run_fits(rows, {req});
  const fs::path dir = output_dir(g, fs::path(path).parent_path().string());
  write_json((dir / "fits.json").string(), {{"source", path}, {"fits", fits}});
  for (const auto& f : fits) {
    std::cout << "fit: gamma = " << f["gamma"] << " ";
    if (f.contains("error"))
      std::cout << "error: " << f["error"].get<std::string>() << "\n";
    else
      std::cout << f["result"].dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-state synchronization in dissipative AAH chains"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--out", g.out, "Output directory (overrides the config)");
  app.add_option("--workers", g.workers, "Sweep worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
  app.add_flag("--large", g.large, "Allow superoperator diagonalizations with N^2 > 4096");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for random initial states and disorder");

  std::string config;
  int phase_steps = 0;
  auto* spectrum = app.add_subcommand("spectrum", "Single-particle spectrum and edge states");
  spectrum->add_option("config", config, "Scenario JSON")->required();
  spectrum->add_option("--phase-steps", phase_steps, "Also scan the modulation phase over this many points")
      ->check(CLI::NonNegativeNumber);
  auto* evolve_cmd = app.add_subcommand("evolve", "Run a scenario");
  evolve_cmd->add_option("config", config, "Scenario JSON")->required();
  auto* liouv = app.add_subcommand("liouvillian", "Superoperator spectrum and mode classification");
  liouv->add_option("config", config, "Scenario JSON")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("config", config, "Sweep JSON")->required();
  auto* robust = app.add_subcommand("robustness", "Run the robustness suite");
  robust->add_option("config", config, "Robustness JSON")->required();

  FitRequest req;
  std::string residual = "relative";
  auto* fit = app.add_subcommand("fit", "Fit a column of a sweep CSV");
  fit->add_option("csv", config, "Sweep CSV")->required();
  fit->add_option("--kind", req.kind, "exponential, powerlaw or crossover")
      ->required()
      ->check(CLI::IsMember({"exponential", "powerlaw", "crossover"}));
  fit->add_option("--quantity", req.quantity, "Column to fit")->required();
  fit->add_option("--l-range", req.l_range, "Inclusive l range")->expected(2);
  fit->add_option("--residual", residual, "relative or absolute");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*spectrum) return cmd_spectrum(g, config, phase_steps);
    if (*evolve_cmd) return cmd_evolve(g, config);
    if (*liouv) return cmd_liouvillian(g, config);
    if (*sweep) return cmd_sweep(g, config);
    if (*robust) return cmd_robustness(g, config);
    req.residual = residual_from_string(residual);
    return cmd_fit(g, config, req);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
