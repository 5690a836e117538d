#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "edgesync/dynamics.hpp"
#include "edgesync/errors.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/many_body.hpp"

using namespace edgesync;
using cd = std::complex<double>;

namespace {

DissipationSpec dephasing(std::vector<int> sites, double gamma) {
  return {JumpType::Dephasing, std::move(sites), gamma};
}

double max_deviation(const TimeSeries& a, const TimeSeries& b) {
  double worst = 0.0;
  for (std::size_t c = 0; c < a.channels.size(); ++c)
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.channels[c][k] - b.channels[c][k]));
  return worst;
}

}  // namespace

TEST_CASE("initial correlation presets") {
  CHECK(initial_correlation(vacuum_state(5)).norm() == 0.0);
  const auto one = initial_correlation(one_plus_state(5));
  CHECK(one(0, 0).real() == doctest::Approx(1.0));
  CHECK(one(4, 4).real() == doctest::Approx(0.5));
  CHECK(std::abs(one(0, 4)) < 1e-15);
  const auto plus = initial_correlation(plus_ends_state(4));
  CHECK(plus(0, 0).real() == doctest::Approx(0.5));
  CHECK(plus(3, 3).real() == doctest::Approx(0.5));
  CHECK(plus(0, 3).real() == doctest::Approx(0.25));
  CHECK(std::abs(plus(1, 1)) + std::abs(plus(2, 2)) + std::abs(plus(1, 2)) == 0.0);
}

TEST_CASE("product-state correlations agree with the many-body construction") {
  const auto spec = random_product_state(5, 3);
  const auto c = initial_correlation(spec);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(std::abs(c(i, j) - product_state_two_point(spec, i, j)) < 1e-14);
  CHECK(std::abs(product_state_two_point(plus_ends_state(4), 0, 3) - cd(0.25, 0.0)) < 1e-14);
}

TEST_CASE("random states are reproducible and Hermitian with physical spectrum") {
  const auto a = random_product_state(12, 99);
  const auto b = random_product_state(12, 99);
  CHECK(a.theta == b.theta);
  CHECK(a.phi == b.phi);
  const auto c = initial_correlation(a);
  CHECK(hermiticity_violation(c) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
  CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-12);
}

TEST_CASE("right-hand side examples") {
  const auto h = uniform_chain(6);
  const auto c = initial_correlation(random_product_state(6, 5));
  CHECK(std::abs(lindblad_rhs(c, h, dephasing({}, 0.0)).trace()) < 1e-14);

  HamiltonianMatrix h1 = uniform_chain(1);
  Eigen::MatrixXcd c1(1, 1);
  c1(0, 0) = 0.3;
  CHECK(lindblad_rhs(c1, h1, dephasing({1}, 2.5)).norm() == 0.0);

  Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(2, 2);
  c2(0, 1) = 1.0;
  const auto d = lindblad_rhs(c2, uniform_chain(2, 0.0), dephasing({1}, 1.0));
  CHECK(std::abs(d(0, 1) - cd(-0.5, 0.0)) < 1e-15);
}

TEST_CASE("two-site Rabi oscillation") {
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(2, 2);
  c0(0, 0) = 1.0;
  const auto ts = evolve(c0, uniform_chain(2), dephasing({}, 0.0), 10.0, 0.05, {"n_1"});
  double worst = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) worst = std::max(worst, std::abs(ts.channels[0][k] - std::pow(std::cos(ts.t[k]), 2)));
  CHECK(worst < 1e-9);
}

TEST_CASE("occupied single site stays occupied") {
  ProductStateSpec s{{std::numbers::pi / 2}, {0.0}};
  const auto ts = evolve(initial_correlation(s), uniform_chain(1), dephasing({1}, 3.0), 5.0, 0.1, {"n_1"});
  for (double v : ts.channels[0]) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("oracle agrees with the correlation-matrix evolution") {
  SUBCASE("single site") {
    const auto spec = random_product_state(1, 1);
    const auto a = evolve(initial_correlation(spec), uniform_chain(1), dephasing({1}, 1.0), 3.0, 0.1, {"n_1"});
    const auto b = exact_oracle_evolve(spec, uniform_chain(1), dephasing({1}, 1.0), 3.0, 0.1, {"n_1"});
    CHECK(max_deviation(a, b) < 1e-12);
  }
  SUBCASE("five sites, dephasing") {
    ModelSpec m;
    m.n_sites = 5;
    m.v = 0.7;
    m.phi_v = 0.4;
    const auto h = build_hamiltonian(m);
    const auto spec = random_product_state(5, 17);
    const std::vector<std::string> ch{"n_1", "n_3", "n_5", "ReC_1N", "ImC_1N", "ReC_2_4", "N_tot"};
    const auto a = evolve(initial_correlation(spec), h, dephasing({3}, 1.0), 10.0, 0.1, ch);
    const auto b = exact_oracle_evolve(spec, h, dephasing({3}, 1.0), 10.0, 0.1, ch);
    CHECK(max_deviation(a, b) < 1e-8);
  }
  SUBCASE("four sites, loss") {
    const auto h = uniform_chain(4);
    const auto spec = random_product_state(4, 2);
    DissipationSpec d{JumpType::Loss, {2}, 0.5};
    const auto a = evolve(initial_correlation(spec), h, d, 10.0, 0.1, {"N_tot", "n_2"});
    const auto b = exact_oracle_evolve(spec, h, d, 10.0, 0.1, {"N_tot", "n_2"});
    CHECK(max_deviation(a, b) < 1e-8);
    for (std::size_t k = 1; k < b.size(); ++k) CHECK(b.channels[0][k] <= b.channels[0][k - 1] + 1e-12);
  }
}

TEST_CASE("dephasing conserves the particle number") {
  const auto h = build_hamiltonian([] {
    ModelSpec m;
    m.variant = Variant::FourBand;
    m.n_sites = 21;
    m.g2 = 0.7;
    return m;
  }());
  const auto ts = evolve(initial_correlation(random_product_state(21, 4)), h, dephasing({9, 10, 11, 12, 13}, 2.0),
                         50.0, 0.5, {"N_tot"});
  CHECK(ts.metadata["max_trace_drift"].get<double>() < 1e-9);
  CHECK(ts.metadata["max_hermiticity_violation"].get<double>() < 1e-9);
  CHECK(ts.metadata["min_eigenvalue"].get<double>() > -1e-8);
  CHECK(ts.metadata["max_eigenvalue"].get<double>() < 1.0 + 1e-8);
}

TEST_CASE("channel parsing") {
  CHECK(parse_channel("n_mid", 7).i == 3);
  CHECK(parse_channel("n_N", 7).i == 6);
  const auto c = parse_channel("ImC_1N", 7);
  CHECK(c.kind == Channel::Kind::ImagPart);
  CHECK(c.j == 6);
  CHECK_THROWS_AS(parse_channel("n_8", 7), ConfigError);
  CHECK_THROWS_AS(parse_channel("foo", 7), ConfigError);
}

TEST_CASE("site presets") {
  CHECK(site_preset("CenterTwo", 59) == std::vector<int>{29, 30});
  CHECK(site_preset("CenterFive", 41) == std::vector<int>{19, 20, 21, 22, 23});
  CHECK(site_preset("BulkHalf", 13) == std::vector<int>{4, 5, 6, 7, 8, 9, 10});
  CHECK_THROWS_AS(site_preset("CenterFive", 40), ConfigError);
  CHECK_THROWS_AS(site_preset("BulkHalf", 15), ConfigError);
  CHECK_THROWS_AS(validate(dephasing({0}, 1.0), 5), ConfigError);
  CHECK_THROWS_AS(validate(dephasing({2}, -1.0), 5), ConfigError);
}

TEST_CASE("sampling grid and bad steps") {
  CHECK(sample_count(10.0, 0.1) == 100);
  const auto ts = evolve(initial_correlation(vacuum_state(3)), uniform_chain(3), dephasing({}, 0.0), 1.0, 0.25, {"n_1"});
  CHECK(ts.size() == 5);
  CHECK(ts.t.back() == doctest::Approx(1.0));
  CHECK_THROWS_AS(evolve(initial_correlation(vacuum_state(3)), uniform_chain(3), dephasing({}, 0.0), 1.0, 0.0, {"n_1"}),
                  ConfigError);
}
