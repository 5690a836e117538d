#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "edgesync/dynamics.hpp"
#include "edgesync/errors.hpp"
#include "edgesync/lattice.hpp"
#include "edgesync/liouvillian.hpp"
#include "edgesync/single_particle.hpp"

using namespace edgesync;
using cd = std::complex<double>;

namespace {

ModelSpec fourband(int n, double g2 = 0.7, double g3 = 0.0) {
  ModelSpec m;
  m.variant = Variant::FourBand;
  m.n_sites = n;
  m.g2 = g2;
  m.g3 = g3;
  return m;
}

DissipationSpec dephasing(std::vector<int> sites, double gamma) {
  return {JumpType::Dephasing, std::move(sites), gamma};
}

Eigen::MatrixXcd random_matrix(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = cd(g(rng), g(rng));
  return c;
}

std::vector<cd> sorted(const Eigen::VectorXcd& v) {
  std::vector<cd> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), [](cd a, cd b) {
    if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

LiouvillianReport classify(const ModelSpec& m, const DissipationSpec& d, double hint, SpectrumOptions opt = {}) {
  const auto h = build_hamiltonian(m);
  const auto es = eigensystem(h);
  const auto edges = identify_edge_states(m, es);
  return spectrum_and_classify(Superoperator(h, d), es, edges.protected_indices(), hint, opt);
}

}  // namespace

TEST_CASE("superoperator action matches the right-hand side") {
  const auto h = build_hamiltonian(fourband(9));
  for (auto d : {dephasing({4, 5, 6}, 1.3), DissipationSpec{JumpType::Loss, {2, 7}, 0.8}}) {
    const Superoperator m(h, d);
    const auto c = random_matrix(9, 3);
    const Eigen::VectorXcd lhs = m.dense() * vectorize(c);
    CHECK((lhs - vectorize(lindblad_rhs(c, h, d))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m.apply(c) - lindblad_rhs(c, h, d)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK((unvectorize(vectorize(random_matrix(4, 1)), 4) - random_matrix(4, 1)).norm() == 0.0);
}

TEST_CASE("single dephased site has a zero superoperator") {
  const Superoperator m(uniform_chain(1), dephasing({1}, 2.0));
  CHECK(m.dense().norm() == 0.0);
}

TEST_CASE("two-site closed chain has Bohr frequencies 0, 0, +-2") {
  const auto ev = sorted(superoperator_eigenvalues(Superoperator(uniform_chain(2), dephasing({}, 0.0)), false));
  REQUIRE(ev.size() == 4);
  CHECK(std::abs(ev[0] - cd(0, -2)) < 1e-12);
  CHECK(std::abs(ev[1]) < 1e-12);
  CHECK(std::abs(ev[2]) < 1e-12);
  CHECK(std::abs(ev[3] - cd(0, 2)) < 1e-12);
}

TEST_CASE("reduced eigensolve reproduces the dense complex spectrum") {
  for (const auto& [m, d] : {std::pair{fourband(13), dephasing({5, 6, 7, 8, 9}, 2.0)},
                             std::pair{fourband(13, 0.7, 0.1), DissipationSpec{JumpType::Loss, {6, 7}, 1.0}}}) {
    const Superoperator s(build_hamiltonian(m), d);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> dense(s.dense(), false);
    const auto ref = sorted(dense.eigenvalues());
    for (bool sym : {true, false}) {
      const auto got = sorted(superoperator_eigenvalues(s, sym));
      REQUIRE(got.size() == ref.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(got[k] - ref[k]));
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("spectrum is contractive and closed under conjugation") {
  const Superoperator s(build_hamiltonian(fourband(17)), dephasing({7, 8, 9, 10, 11}, 2.0));
  const auto ev = superoperator_eigenvalues(s);
  CHECK(ev.real().maxCoeff() <= 1e-9);
  const auto a = sorted(ev);
  const auto b = sorted(ev.conjugate());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-9);
}

TEST_CASE("propagator consistency with the matrix exponential") {
  const auto h = build_hamiltonian(fourband(9));
  const auto d = dephasing({3, 4, 5, 6, 7}, 1.5);
  const Superoperator m(h, d);
  const auto c0 = initial_correlation(random_product_state(9, 8));
  const double t = 2.0;
  const Eigen::MatrixXcd prop = (m.dense() * t).exp();
  const Eigen::MatrixXcd expected = unvectorize(prop * vectorize(c0), 9);
  std::vector<std::string> ch;
  for (int i = 1; i <= 9; ++i) ch.push_back("n_" + std::to_string(i));
  ch.push_back("ReC_1N");
  ch.push_back("ImC_1N");
  const auto ts = evolve(c0, h, d, t, 0.5, ch);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(ts.channels[i].back() - expected(i, i).real()) < 1e-9);
  CHECK(std::abs(ts.channels[9].back() - expected(0, 8).real()) < 1e-9);
  CHECK(std::abs(ts.channels[10].back() - expected(0, 8).imag()) < 1e-9);
}

TEST_CASE("closed dynamics has no decay") {
  const auto r = classify(fourband(21), dephasing({}, 0.0), 2.0 * std::sqrt(1.49));
  CHECK(r.r_decay == doctest::Approx(0.0).epsilon(1e-12));
  for (const auto& mode : r.modes) CHECK(std::abs(mode.eigenvalue.real()) < 1e-10);
}

TEST_CASE("four-band sync modes") {
  const double hint = 2.0 * std::sqrt(1.49);
  const auto r29 = classify(fourband(29), dephasing(site_preset("CenterFive", 29), 2.0), hint);
  const auto r41 = classify(fourband(41), dephasing(site_preset("CenterFive", 41), 2.0), hint);
  CHECK(r41.n_sync > 0);
  CHECK(std::abs(r41.omega_sync - hint) < 0.01 * hint);
  CHECK(r41.r_decay > 0.0);
  CHECK(r41.r_decay < r29.r_decay);
  CHECK(r41.r_relax > r41.r_decay);
  CHECK(r41.max_real_part <= 1e-9);
  CHECK(r41.symmetry != "none");
  CHECK(r41.n_stationary + r41.n_sync + r41.n_relaxing == 41 * 41);
}

TEST_CASE("sync projection of the one-plus state") {
  const auto m = fourband(41);
  const auto c0 = initial_correlation(one_plus_state(41));
  SpectrumOptions opt;
  opt.initial = &c0;
  opt.probes = {{0, 0}, {40, 40}};
  const auto r = classify(m, dephasing(site_preset("CenterFive", 41), 2.0), 2.0 * std::sqrt(1.49), opt);
  REQUIRE(r.projections.size() == 2);
  CHECK(r.projections[0].amplitude() == doctest::Approx(0.13005).epsilon(0.01));
  CHECK(r.projections[1].amplitude() == doctest::Approx(0.5 * r.projections[0].amplitude()).epsilon(0.01));
  CHECK(std::abs(r.projections[0].positive - std::conj(r.projections[0].negative)) < 1e-10);
}

TEST_CASE("classification errors") {
  const double hint = 2.0 * std::sqrt(1.49);
  CHECK_THROWS_AS(classify(fourband(41), dephasing({}, 1.0), -1.0), ConfigError);
  CHECK_THROWS_AS(classify(fourband(41), dephasing(site_preset("CenterFive", 41), 2.0), 7.3), ClassificationError);
  CHECK_THROWS_AS(classify(fourband(65), dephasing(site_preset("CenterFive", 65), 2.0), hint), CapabilityError);
  CHECK_THROWS_AS(superoperator_eigenvalues(Superoperator(uniform_chain(65), dephasing({}, 0.0))), CapabilityError);
}

TEST_CASE("report serialization") {
  const auto r = classify(fourband(13), dephasing(site_preset("CenterFive", 13), 2.0), 2.0 * std::sqrt(1.49));
  const auto j = to_json(r);
  CHECK(j["modes"].size() == 169);
  CHECK(j.contains("r_decay"));
  CHECK(j.contains("r_relax"));
  CHECK(j["counts"]["sync"].get<int>() == r.n_sync);
  CHECK_FALSE(to_json(r, false).contains("modes"));
}
