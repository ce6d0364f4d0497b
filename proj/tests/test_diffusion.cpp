#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "diffnet/diffusion.hpp"
#include "diffnet/simulate.hpp"

using namespace diffnet;

namespace {

Eigen::MatrixXd random_spd(int m, Rng& rng) {
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(m, m);
}

Scenario small_scenario(int n, int m, double theta_var = 0.1) {
  Scenario sc;
  sc.w_true = random_unit_vector(m, 9);
  sc.regressor_mode = RegressorMode::kShift;
  sc.innovation_var.assign(n, 1.0);
  sc.noise.assign(n, NoiseModel::gaussian(theta_var));
  return sc;
}

CombinationMatrix line3_weights() {
  return build_metropolis(Topology::from_edges(3, {{0, 1}, {1, 2}}));
}

}  // namespace

TEST_CASE("rls gain with zero regressor") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  Eigen::VectorXd g;
  rls_gain(p, Eigen::VectorXd::Zero(3), 0.5, g);
  CHECK(p.isApprox(4.0 * Eigen::MatrixXd::Identity(3, 3)));
  CHECK(g.norm() == 0.0);
}

TEST_CASE("rls gain hand example") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  Eigen::VectorXd g;
  rls_gain(p, u, 1.0, g);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 1) == doctest::Approx(1.0));
  CHECK(p(0, 1) == doctest::Approx(0.0));
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.0));
}

TEST_CASE("rls gain tracks the exact inverse") {
  Rng rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 6;
    const double lambda = 0.95;
    Eigen::MatrixXd phi = random_spd(m, rng);
    Eigen::MatrixXd p = phi.inverse();
    Eigen::VectorXd u(m);
    for (int j = 0; j < m; ++j) u[j] = rng.normal();

    Eigen::VectorXd g;
    rls_gain(p, u, lambda, g);
    const Eigen::MatrixXd phi_next = lambda * phi + u * u.transpose();
    const Eigen::MatrixXd p_oracle = phi_next.inverse();
    CHECK((p - p_oracle).norm() / p_oracle.norm() < 1e-9);
    CHECK((g - p_oracle * u).norm() < 1e-9 * g.norm() + 1e-12);
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd u(2), g;
  u << std::nan(""), 0.0;
  CHECK_THROWS_AS(rls_gain(p, u, 1.0, g), std::invalid_argument);
}

TEST_CASE("constrained adaptation") {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd g(2), psi;
  g << 1.0, 0.0;

  SUBCASE("no innovation") {
    const double scale = rdrls_adapt(w, g, 0.0, 1.0, psi);
    CHECK(scale == 1.0);
    CHECK(psi == w);
  }
  SUBCASE("clamped step lands on the constraint sphere") {
    const double scale = rdrls_adapt(w, g, 2.0, 1.0, psi);
    CHECK(scale == doctest::Approx(0.5));
    CHECK(psi[0] == doctest::Approx(1.0));
    CHECK(psi[1] == doctest::Approx(0.0));
    CHECK((psi - w).squaredNorm() == doctest::Approx(1.0));
  }
  SUBCASE("small update passes through unscaled") {
    const double scale = rdrls_adapt(w, g, 0.2, 1.0, psi);  // energy 0.04
    CHECK(scale == 1.0);
    CHECK(psi[0] == doctest::Approx(0.2));
  }
  SUBCASE("infinite bound disables the constraint") {
    const double scale = rdrls_adapt(w, g, 50.0, kXiInfinity, psi);
    CHECK(scale == 1.0);
    CHECK(psi[0] == doctest::Approx(50.0));
  }
}

TEST_CASE("local bound recursion") {
  CHECK(bound_local(0.5, 0.7, 0.97) == doctest::Approx(0.5));  // min saturates
  CHECK(bound_local(0.5, 0.2, 0.97) == doctest::Approx(0.491));
  CHECK(bound_local(0.0, 1.0, 0.97) == 0.0);  // absorbing state

  // never exceeds xi, exactly, across magnitudes
  Rng rng(43);
  for (int i = 0; i < 2000; ++i) {
    const double xi = std::exp(rng.uniform(-300.0, 300.0) * 0.1);
    const double m = std::exp(rng.uniform(-300.0, 300.0) * 0.1);
    CHECK(bound_local(xi, m, 0.97) <= xi);
  }
}

TEST_CASE("dcd bound recursion") {
  CHECK(bound_update_dcd(0.5, 0.0, 0.96) == doctest::Approx(0.48));
  CHECK(bound_update_dcd(0.5, 0.5, 0.96) == doctest::Approx(0.5));
  CHECK(bound_update_dcd(0.5, 0.1, 0.96) == doctest::Approx(0.484));
}

TEST_CASE("bound combination") {
  const auto c = line3_weights();
  SUBCASE("identity weights pass zeta through") {
    const auto id = build_metropolis(Topology::isolated(3));
    CHECK(bound_combine({0.4, 0.5, 0.6}, id, 1) == doctest::Approx(0.5));
  }
  SUBCASE("constant vector is preserved") {
    CHECK(bound_combine({0.3, 0.3, 0.3}, c, 1) == doctest::Approx(0.3));
  }
  SUBCASE("metropolis line graph end node") {
    CHECK(bound_combine({0.6, 0.3, 123.0}, c, 0) == doctest::Approx(0.5));
  }
}

TEST_CASE("estimate combination") {
  const auto c = line3_weights();
  std::vector<Eigen::VectorXd> psis(3, Eigen::VectorXd::Zero(2));
  SUBCASE("identity") {
    const auto id = build_metropolis(Topology::isolated(3));
    psis[1] << 3.0, -1.0;
    CHECK(combine(psis, id, 1) == psis[1]);
  }
  SUBCASE("two-node convex average") {
    const auto c2 = build_metropolis(Topology::from_edges(2, {{0, 1}}));
    std::vector<Eigen::VectorXd> p2(2);
    p2[0] = Eigen::VectorXd::Zero(2);
    p2[1] = Eigen::VectorXd::Zero(2);
    p2[0] << 1.0, 0.0;
    p2[1] << 0.0, 1.0;
    const Eigen::VectorXd w = combine(p2, c2, 0);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));
  }
  SUBCASE("consensus fixed point") {
    for (auto& p : psis) p << 0.7, -0.2;
    const Eigen::VectorXd w = combine(psis, c, 1);
    CHECK(w[0] == doctest::Approx(0.7));
    CHECK(w[1] == doctest::Approx(-0.2));
  }
}

TEST_CASE("lms baselines") {
  Eigen::VectorXd w(2), u(2);
  w << 0.5, 0.5;
  u << 1.0, 0.0;
  CHECK(dlms_adapt(w, u, 0.0, 0.015) == w);
  CHECK(dlms_adapt(w, u, 1.0, 0.015)[0] == doctest::Approx(0.515));
  CHECK_THROWS_AS(dlms_adapt(w, u, 1.0, 0.0), std::invalid_argument);

  CHECK(dselms_adapt(w, u, 0.0, 0.015) == w);  // sign(0) = 0
  CHECK(dselms_adapt(w, u, -7.3, 0.015)[0] == doctest::Approx(0.485));
  CHECK(dselms_adapt(w, u, 7.3, 0.015)[0] == doctest::Approx(0.515));
}

TEST_CASE("bound initialization") {
  CHECK(xi_init(1.0, 2.0, 2.0, 16) == doctest::Approx(1.0 / 16.0));
  CHECK(xi_init(10.0, 2.0, 2.0, 16) ==
        doctest::Approx(10.0 * xi_init(1.0, 2.0, 2.0, 16)));
  CHECK_THROWS_AS(xi_init(1.0, 1.0, 0.0, 16), std::invalid_argument);
}

TEST_CASE("nc cadence and branches") {
  // 2 nodes, fully connected; V_t = rho*M with M=4, rho=2 -> 8, V_d = 6.
  const auto c = build_metropolis(Topology::from_edges(2, {{0, 1}}));
  const int vt = 8, vd = 6;
  std::vector<NcState> states{NcState(vt, vd), NcState(vt, vd)};

  for (int i = 0; i < vt; ++i)
    for (auto& s : states) s.push(0.01, 1.0);
  CHECK(states[0].ring_full());

  for (auto& s : states) s.update_sigma(0.5);
  // trimmed sum keeps the 2 smallest of 8 identical values
  CHECK(states[0].sigma_e2() == doctest::Approx(0.5 * 0.02));

  SUBCASE("stationary statistics grow theta (branch b) then settle") {
    NcDecision d = nc_decide(states, c, 0, vt, vd, 15.0, 1.0, 0.5);
    CHECK(d.action == NcDecision::Action::kGrow);  // theta rose from 0
    CHECK(d.zeta == doctest::Approx(1.0 + d.theta_new));
    states[0].set_theta_old(d.theta_new);
    states[1].set_theta_old(d.theta_new);
    // no new data: same sigma, theta_new == theta_old -> default branch
    d = nc_decide(states, c, 0, vt, vd, 15.0, 1.0, 0.5);
    CHECK(d.action == NcDecision::Action::kDefault);
  }
  SUBCASE("a surge against a tiny bound forces the reset") {
    for (int i = 0; i < vt; ++i)
      for (auto& s : states) s.push(100.0, 1.0);
    for (auto& s : states) s.update_sigma(0.5);
    const NcDecision d = nc_decide(states, c, 0, vt, vd, 15.0, 1e-6, 0.5);
    CHECK(d.action == NcDecision::Action::kReset);
    CHECK(d.zeta == doctest::Approx(0.5));  // back to xi(0)
  }
  SUBCASE("zero bound with rising theta forces the reset") {
    for (int i = 0; i < vt; ++i)
      for (auto& s : states) s.push(1.0, 1.0);
    for (auto& s : states) s.update_sigma(0.5);
    const NcDecision d = nc_decide(states, c, 0, vt, vd, 15.0, 0.0, 0.5);
    CHECK(d.action == NcDecision::Action::kReset);
  }
}

TEST_CASE("nc ring skips vanishing regressors") {
  NcState s(4, 3);
  for (int i = 0; i < 3; ++i) s.push(1.0, 1.0);
  s.push(99.0, 0.0);  // skipped
  CHECK_FALSE(s.ring_full());
  s.push(1.0, 1.0);
  CHECK(s.ring_full());
}

TEST_CASE("constraint invariant holds over a noisy network run") {
  const auto topo = Topology::random_geometric(5, 0.6, 3);
  const auto c = build_metropolis(topo);
  Scenario sc = small_scenario(5, 8);
  for (auto& n : sc.noise) n = NoiseModel::contaminated(0.2, 0.05, 1000.0);

  AlgorithmConfig cfg;
  cfg.alg = Algorithm::kRdrls;
  cfg.rls.dim = 8;
  EstimationSource source(sc, 1234, 0);
  const auto xi0 = std::vector<double>(5, 0.05);
  const TrialResult r = run_trial(c, cfg, source, 2000, xi0);
  CHECK(r.max_constraint_ratio <= 1.0 + 1e-9);
}

TEST_CASE("network max bound is non-increasing without nc") {
  const auto topo = Topology::random_geometric(6, 0.6, 5);
  const auto c = build_metropolis(topo);
  Scenario sc = small_scenario(6, 6);
  for (auto& n : sc.noise) n = NoiseModel::contaminated(0.3, 0.02, 500.0);

  AlgorithmConfig cfg;
  cfg.alg = Algorithm::kRdrls;
  cfg.rls.dim = 6;
  EstimationSource source(sc, 77, 0);
  std::vector<double> xi0(6);
  for (int k = 0; k < 6; ++k) xi0[k] = 0.01 * (k + 1);
  const TrialResult r = run_trial(c, cfg, source, 1500, xi0);

  for (long i = 1; i <= 1500; ++i)
    CHECK(r.xi.row(i).maxCoeff() <= r.xi.row(i - 1).maxCoeff());
}

TEST_CASE("infinite bound reproduces drls bit for bit") {
  const auto topo = Topology::random_geometric(4, 0.7, 11);
  const auto c = build_metropolis(topo);
  Scenario sc = small_scenario(4, 6);

  AlgorithmConfig drls;
  drls.alg = Algorithm::kDrls;
  drls.rls.dim = 6;
  AlgorithmConfig rdrls = drls;
  rdrls.alg = Algorithm::kRdrls;
  rdrls.xi0_override = kXiInfinity;

  TrialOptions opts;
  opts.record_w_history = true;
  EstimationSource s1(sc, 55, 0), s2(sc, 55, 0);
  const TrialResult a = run_trial(c, drls, s1, 500, {}, opts);
  const TrialResult b = run_trial(c, rdrls, s2, 500, {}, opts);
  CHECK(a.w_history == b.w_history);  // bitwise
}

TEST_CASE("two-phase consistency: combination sees only this instant") {
  // With identity combination weights every node runs standalone; a
  // cross-check that neighbors at instant i cannot leak w_{m,i} into
  // adaptation: run the coupled network and a per-node standalone run on
  // the same streams, then compare the standalone node against the coupled
  // one BEFORE combination via the observer.
  const auto topo = Topology::from_edges(2, {{0, 1}});
  const auto c = build_metropolis(topo);
  Scenario sc = small_scenario(2, 4);

  AlgorithmConfig cfg;
  cfg.alg = Algorithm::kRdrls;
  cfg.rls.dim = 4;

  std::vector<Eigen::VectorXd> psi_log;
  TrialOptions opts;
  opts.observer = [&](const StepView& v) {
    if (v.iter == 3) psi_log.push_back(v.psi);
  };
  EstimationSource s1(sc, 321, 0);
  run_trial(c, cfg, s1, 3, std::vector<double>(2, 1.0), opts);
  REQUIRE(psi_log.size() == 2);

  // replay: psi of node k at instant 3 must be reproducible from the
  // combined state of instant 2 alone
  EstimationSource s2(sc, 321, 0);
  TrialOptions hist;
  hist.record_w_history = true;
  const TrialResult r = run_trial(c, cfg, s2, 3, std::vector<double>(2, 1.0),
                                  hist);
  // the network is symmetric here: both psis must differ from each other
  // (different data streams) yet be consistent with the recorded history
  CHECK(psi_log[0] != psi_log[1]);
  const Eigen::VectorXd w_comb =
      0.5 * (psi_log[0] + psi_log[1]);  // uniform metropolis on K2
  CHECK((r.w_history.row(3).segment(0, 4).transpose() - w_comb).norm() <
        1e-14);
}

TEST_CASE("rls covariance stays symmetric positive over long runs") {
  const int m = 8;
  Eigen::MatrixXd p = 100.0 * Eigen::MatrixXd::Identity(m, m);
  Ar2Source ar(1.6, -0.81, 1.0);
  RegressorSource src(RegressorMode::kShift, m, ar, Rng(61));
  Eigen::VectorXd u(m), g(m);
  double worst_asym = 0.0;
  for (long i = 0; i < 100000; ++i) {
    src.next(u);
    rls_gain(p, u, 0.985, g);
    if (i % 1000 == 0) {
      worst_asym = std::max(
          worst_asym, (p - p.transpose()).cwiseAbs().maxCoeff());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
  CHECK(worst_asym < 1e-10);
}
