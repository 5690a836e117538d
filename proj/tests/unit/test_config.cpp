#include "doctest.h"

#include <cmath>
#include <numbers>

#include "edgesync/config.hpp"
#include "edgesync/errors.hpp"

using namespace edgesync;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "name": "t",
    "model": {"variant": "FourBand", "n_sites": 13, "g1": 1.0, "g2": 0.7},
    "dissipation": {"site_preset": "CenterFive", "gamma": 2.0},
    "initial_state": "OnePlus",
    "t_max": 10, "dt": 0.1
  })");
}

std::string error_of(const json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped scenarios parse") {
  const std::string dir = EDGESYNC_SCENARIO_DIR;
  const auto fig1 = load_scenario(dir + "/fig1.json");
  CHECK(fig1.model.variant == Variant::DiagonalAAH);
  CHECK(fig1.model.n_sites == 59);
  CHECK(fig1.model.phi_v == doctest::Approx(std::numbers::pi / 2));
  CHECK(fig1.dissipation.sites == std::vector<int>{29, 30});
  CHECK(fig1.dissipation.gamma == 1.5);
  CHECK(fig1.initial.state.theta.front() == doctest::Approx(std::numbers::pi / 4));
  const auto fig2 = load_scenario(dir + "/fig2.json");
  CHECK(fig2.model.lambda == 0.2);
  CHECK(fig2.dissipation.sites == std::vector<int>{40, 41});
  const auto fig3 = load_scenario(dir + "/fig3.json");
  CHECK(fig3.dissipation.sites == std::vector<int>{19, 20, 21, 22, 23});
  CHECK(closed_form_omega(fig3.model) == doctest::Approx(2.44131).epsilon(1e-5));
  CHECK(closed_form_omega(fig1.model) == doctest::Approx(2.33882).epsilon(1e-5));
  CHECK(closed_form_omega(fig2.model) == doctest::Approx(2.56125).epsilon(1e-5));
  const auto sweep = load_sweep(dir + "/fig4_rates.json");
  CHECK(sweep.base.name == "fig3");
  CHECK(sweep.chain.n_sites(10) == 41);
  const auto bulk = load_sweep(dir + "/fig4_bulk.json");
  CHECK(bulk.gamma_values.size() == 10);
  CHECK(bulk.gamma_values.front() == doctest::Approx(0.002));
  CHECK(bulk.gamma_values.back() == doctest::Approx(0.038));
  const auto rob = load_robustness(dir + "/fig5.json");
  CHECK(rob.cases.size() >= 3);
}

TEST_CASE("defaults and resolved presets") {
  const auto c = parse_scenario(minimal());
  CHECK(c.channels == std::vector<std::string>{"n_1", "n_mid", "n_N"});
  CHECK(c.metrics.first == "n_1");
  CHECK(c.metrics.frequency_channel == "n_1");
  CHECK(c.metrics.window.kind == MetricSetting::Kind::Auto);
  CHECK(c.output == "runs/t");
  CHECK(c.dissipation.sites == std::vector<int>{5, 6, 7, 8, 9});
  const auto j = to_json(c);
  CHECK(j["dissipation"]["sites"].size() == 5);
  CHECK(j["initial_state"]["theta"].size() == 13);
  const auto again = parse_scenario(j);
  CHECK(to_json(again) == j);
}

TEST_CASE("angles and metric settings") {
  auto j = minimal();
  j["model"] = {{"variant", "DiagonalAAH"}, {"n_sites", 11}, {"v", 0.7}, {"phi_v", "-3pi/4"}};
  j["dissipation"]["site_preset"] = "CenterTwo";
  j["metrics"] = {{"tau", "quarter_period"}, {"window", 4.0}, {"t_transient", "auto"}, {"pair", {"ReC_1N", "ImC_1N"}}};
  const auto c = parse_scenario(j);
  CHECK(c.model.phi_v == doctest::Approx(-0.75 * std::numbers::pi));
  CHECK(c.metrics.tau.kind == MetricSetting::Kind::QuarterPeriod);
  CHECK(c.metrics.window.value == 4.0);
  CHECK(c.metrics.frequency_channel == "ReC_1N");
}

TEST_CASE("validation errors name the field") {
  auto j = minimal();
  j["model"]["colour"] = 1;
  CHECK(error_of(j).find("model.colour") != std::string::npos);
  j = minimal();
  j["dissipation"]["site_preset"] = "BulkHalf";
  j["model"]["n_sites"] = 15;
  CHECK(error_of(j).find("dissipation") != std::string::npos);
  j = minimal();
  j["dt"] = 0;
  CHECK(error_of(j).find("dt") != std::string::npos);
  j = minimal();
  j["channels"] = json::array();
  CHECK(error_of(j).find("channels") != std::string::npos);
  j = minimal();
  j["metrics"] = {{"window", -1}};
  CHECK(error_of(j).find("metrics.window") != std::string::npos);
  j = minimal();
  j["initial_state"] = "Sideways";
  CHECK(error_of(j).find("initial_state") != std::string::npos);
  j = minimal();
  j.erase("model");
  CHECK(error_of(j).find("model") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.json"), ConfigError);
}

TEST_CASE("resizing re-resolves presets") {
  auto c = parse_scenario(minimal());
  set_chain_length(c, 21);
  CHECK(c.dissipation.sites == std::vector<int>{9, 10, 11, 12, 13});
  CHECK(c.initial.state.theta.size() == 21);
  CHECK_THROWS_AS(set_chain_length(c, 20), ConfigError);
}

TEST_CASE("sweep axes") {
  json s{{"base", minimal()}, {"l", {{"from", 3}, {"to", 9}}}, {"gamma", {{"from", 1}, {"to", 3}, {"count", 3}}}};
  const auto sw = parse_sweep(s);
  CHECK(sw.l_values.size() == 7);
  CHECK(sw.gamma_values == std::vector<double>{1, 2, 3});
  s["l"] = json::array();
  CHECK_THROWS_AS(parse_sweep(s), ConfigError);
  s["l"] = {3, 4};
  s["task"] = "everything";
  CHECK_THROWS_AS(parse_sweep(s), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const auto a = to_json(parse_scenario(minimal()));
  CHECK(config_hash(a) == config_hash(a));
  CHECK(config_hash(a).size() == 64);
  auto b = a;
  b["dissipation"]["gamma"] = 2.5;
  CHECK(config_hash(a) != config_hash(b));
}
