#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "diffnet/spectrum.hpp"

using namespace diffnet;

namespace {
SpectrumScenario quiet_scenario(int n_nodes, const Eigen::VectorXd& w) {
  SpectrumScenario sc;
  sc.w_true = w;
  sc.channel_gain.assign(n_nodes, 1.0);
  sc.obs_noise.assign(n_nodes, NoiseModel::gaussian(0.0));
  return sc;
}
}  // namespace

TEST_CASE("rectangular basis bucketing") {
  SUBCASE("M=2, four grid points on [0,1]") {
    BasisSet basis(2, 4, 0.0, 1.0);
    // grid {0.25, 0.5, 0.75, 1.0} buckets to (1,1,2,2)
    CHECK(basis.basis_of(basis.grid(0)) == 0);
    CHECK(basis.basis_of(basis.grid(1)) == 0);
    CHECK(basis.basis_of(basis.grid(2)) == 1);
    CHECK(basis.basis_of(basis.grid(3)) == 1);
  }
  SUBCASE("paper dimensions: exactly two grid points per basis") {
    BasisSet basis(50, 100, 0.0, 1.0);
    std::vector<int> hits(50, 0);
    for (int iota = 0; iota < 100; ++iota)
      hits[basis.basis_of(basis.grid(iota))]++;
    for (int h : hits) CHECK(h == 2);
  }
  SUBCASE("rows are one-hot") {
    BasisSet basis(5, 12, 0.0, 1.0);
    for (int iota = 0; iota < 12; ++iota)
      CHECK(basis.row(iota).sum() == doctest::Approx(1.0));
    for (int iota = 0; iota < 12; ++iota)
      CHECK(basis.row(iota).maxCoeff() == doctest::Approx(1.0));
  }
  SUBCASE("band edges") {
    BasisSet basis(4, 8, -1.0, 1.0);
    CHECK(basis.basis_of(-1.0) == 0);
    CHECK(basis.basis_of(1.0) == 3);
    CHECK_THROWS_AS(basis.basis_of(1.5), std::out_of_range);
    CHECK_THROWS_AS(BasisSet(4, 3, 0.0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("true psd evaluation") {
  BasisSet basis(10, 20, 0.0, 1.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(10);
  CHECK(psd_true(basis, w, 0.33) == 0.0);
  w[3] = 0.7;  // basis 3 covers (0.3, 0.4]
  CHECK(psd_true(basis, w, 0.35) == doctest::Approx(0.7));
  CHECK(psd_true(basis, w, 0.55) == 0.0);
}

TEST_CASE("indicator property across the band") {
  BasisSet basis(7, 21, 0.0, 1.0);
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double f = rng.uniform(0.0, 1.0);
    const Eigen::VectorXd q = basis.evaluate(f);
    CHECK(q.sum() == doctest::Approx(1.0));
    CHECK(q.maxCoeff() == doctest::Approx(1.0));
  }
}

TEST_CASE("spectrum measurement") {
  BasisSet basis(10, 20, 0.0, 1.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(10);
  w[3] = 0.7;
  Eigen::VectorXd u;
  double d = 0.0;
  Rng rng(9);

  SUBCASE("unit channel, zero noise, active bin") {
    auto sc = quiet_scenario(2, w);
    const int iota = 6;  // grid(6) = 0.35 -> basis 3
    REQUIRE(basis.basis_of(basis.grid(iota)) == 3);
    spectrum_measure(sc, basis, 0, iota, rng, u, d);
    CHECK(d == doctest::Approx(0.7));
  }
  SUBCASE("dead channel measures only noise") {
    auto sc = quiet_scenario(2, w);
    sc.channel_gain[1] = 0.0;
    sc.obs_noise[1] = NoiseModel::gaussian(1.0);
    spectrum_measure(sc, basis, 1, 6, rng, u, d);
    CHECK(u.norm() == 0.0);
    CHECK(d != 0.0);  // v alone
  }
  SUBCASE("inactive bin, zero noise") {
    auto sc = quiet_scenario(2, w);
    spectrum_measure(sc, basis, 0, 12, rng, u, d);
    CHECK(d == 0.0);
  }
}

TEST_CASE("round-robin covariance is diagonal") {
  BasisSet basis(5, 15, 0.0, 1.0);
  const Eigen::MatrixXd cov = basis.q().transpose() * basis.q() /
                              static_cast<double>(basis.n_freq());
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      if (a != b) CHECK(cov(a, b) == 0.0);
  CHECK(cov.trace() == doctest::Approx(1.0));
}

TEST_CASE("sparse power fixture") {
  const Eigen::VectorXd w = SpectrumScenario::sparse_powers(50, 8, 0.7, 11);
  int active = 0;
  for (int j = 0; j < 50; ++j) {
    CHECK(w[j] >= 0.0);
    if (w[j] > 0.0) {
      CHECK(w[j] == doctest::Approx(0.7));
      ++active;
    }
  }
  CHECK(active == 8);
  CHECK(w == SpectrumScenario::sparse_powers(50, 8, 0.7, 11));  // seeded
}

TEST_CASE("noiseless drls recovers the spectrum exactly") {
  const auto topo = Topology::random_geometric(4, 0.7, 13);
  const auto c = build_metropolis(topo);
  BasisSet basis(10, 20, 0.0, 1.0);
  SpectrumScenario sc = quiet_scenario(4, Eigen::VectorXd::Zero(10));
  sc.w_true = SpectrumScenario::sparse_powers(10, 3, 0.7, 11);

  AlgorithmConfig cfg;
  cfg.alg = Algorithm::kDrls;
  cfg.rls.dim = 10;
  cfg.rls.lambda = 0.995;

  const SpectrumRunResult out =
      run_spectrum(c, cfg, sc, basis, 1500, 1, 3, 1);
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 10; ++j)
      CHECK(out.final_estimates(k, j) ==
            doctest::Approx(sc.w_true[j]).epsilon(1e-6));
  // support exactly recovered
  for (int k = 0; k < 4; ++k) {
    std::multiset<double> top;
    for (int j = 0; j < 10; ++j)
      if (sc.w_true[j] > 0) CHECK(out.final_estimates(k, j) > 0.5);
  }
  CHECK(out.net_msd_db[1500] < -100.0);
}

TEST_CASE("psd estimate is linear in the estimated powers") {
  const auto topo = Topology::from_edges(2, {{0, 1}});
  const auto c = build_metropolis(topo);
  BasisSet basis(4, 8, 0.0, 1.0);
  SpectrumScenario sc = quiet_scenario(2, Eigen::VectorXd::Zero(4));
  sc.w_true = SpectrumScenario::sparse_powers(4, 2, 0.5, 3);

  AlgorithmConfig cfg;
  cfg.alg = Algorithm::kDrls;
  cfg.rls.dim = 4;

  const SpectrumRunResult out = run_spectrum(c, cfg, sc, basis, 200, 1, 7, 1);
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd expected =
        basis.q() * out.final_estimates.row(k).transpose();
    CHECK((out.psd_estimates.row(k).transpose() - expected).norm() == 0.0);
  }
}

TEST_CASE("random schedule still converges in the mean") {
  const auto topo = Topology::from_edges(3, {{0, 1}, {1, 2}});
  const auto c = build_metropolis(topo);
  BasisSet basis(6, 12, 0.0, 1.0);
  SpectrumScenario sc = quiet_scenario(3, Eigen::VectorXd::Zero(6));
  sc.w_true = SpectrumScenario::sparse_powers(6, 2, 0.7, 19);
  sc.schedule = FrequencySchedule::kRandom;
  for (auto& n : sc.obs_noise) n = NoiseModel::gaussian(0.01);

  AlgorithmConfig cfg;
  cfg.alg = Algorithm::kDrls;
  cfg.rls.dim = 6;
  cfg.rls.lambda = 0.995;

  const SpectrumRunResult out =
      run_spectrum(c, cfg, sc, basis, 2000, 2, 23, 1);
  CHECK(out.net_msd_db[2000] < -15.0);
}
