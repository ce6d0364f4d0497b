#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "diffnet/harness.hpp"

using namespace diffnet;

namespace {

const char* kTinyConfig = R"(
seed = 7
[net]
n = 6
topology = random
radius = 0.6
[run]
m = 6
iters = 120
trials = 3
[regressor]
mode = shift
[signal]
eps_var = uniform(0.2,1.0)
[noise]
kind = cg
theta_var = uniform(0.2,1.0)
pr = uniform(0.001,0.05)
hbar_y = 1000
[alg]
alg = rdrls
lambda = 0.985
delta = 0.01
beta = 0.97
ec = 1
)";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run_cli(std::initializer_list<std::string> args) {
  std::vector<const char*> argv{"diffnet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config parsing") {
  const Config cfg = Config::from_string(
      "seed = 12\n[alg]\nlambda = 0.98 # trailing comment\nname = rdrls-nc\n"
      "list = 1, 2.5, 3\nflag = true\n");
  CHECK(cfg.get_seed("seed", 0) == 12);
  CHECK(cfg.get_double("alg.lambda") == doctest::Approx(0.98));
  CHECK(cfg.get_string("alg.name") == "rdrls-nc");
  CHECK(cfg.get_list("alg.list") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(cfg.get_bool("alg.flag", false));
  CHECK(cfg.get_double("alg.missing", 1.5) == 1.5);
  CHECK_THROWS(cfg.get_double("alg.name"));
  CHECK_THROWS(Config::from_string("novalue\n"));

  const auto profile = cfg.get_profile("nope", 4, 0.3, 1, 1);
  CHECK(profile == std::vector<double>{0.3, 0.3, 0.3, 0.3});
  const Config u = Config::from_string("p = uniform(0.2,1.0)\n");
  const auto drawn = u.get_profile("p", 8, 0.0, 5, 2);
  CHECK(drawn.size() == 8);
  for (double v : drawn) {
    CHECK(v >= 0.2);
    CHECK(v <= 1.0);
  }
  CHECK(drawn == u.get_profile("p", 8, 0.0, 5, 2));
}

TEST_CASE("experiment from config and xi0") {
  const Experiment exp = Experiment::from_config(Config::from_string(kTinyConfig));
  CHECK(exp.topology.n_nodes() == 6);
  CHECK(exp.scenario.dim() == 6);
  CHECK(exp.algorithms.size() == 1);
  CHECK(exp.algorithms[0].alg == Algorithm::kRdrls);
  CHECK(exp.scenario.w_true.norm() == doctest::Approx(1.0));
  // hbar tied to the signal power: sigma_g^2 = 1000 sigma_y^2
  for (int k = 0; k < 6; ++k) {
    const NoiseModel& nm = exp.scenario.noise[k];
    CHECK(nm.hbar * nm.theta_var ==
          doctest::Approx(1000.0 * exp.scenario.signal_power(k)));
  }
  const auto xi0 = compute_xi0(exp.scenario, exp.algorithms[0].rls);
  for (int k = 0; k < 6; ++k)
    CHECK(xi0[k] == doctest::Approx(exp.scenario.measurement_power(k) /
                                    (6.0 * exp.scenario.input_power(k))));
}

TEST_CASE("zero-iteration run starts at 0 dB") {
  const Experiment exp = Experiment::from_config(Config::from_string(kTinyConfig));
  const RunResult r = run_experiment(exp.c, exp.algorithms[0], exp.scenario,
                                     0, 1, exp.seed);
  CHECK(r.trace.net_db[0] == doctest::Approx(0.0));
}

TEST_CASE("ensemble averaging is linear-domain, dB last") {
  const Experiment exp = Experiment::from_config(Config::from_string(kTinyConfig));
  const auto& ac = exp.algorithms[0];

  // recompute from raw per-trial deviations
  const int trials = 3;
  Eigen::MatrixXd dev2_sum;
  const auto xi0 = compute_xi0(exp.scenario, ac.rls);
  for (int t = 0; t < trials; ++t) {
    EstimationSource source(exp.scenario, exp.seed, t);
    const TrialResult r = run_trial(exp.c, ac, source, 50, xi0);
    if (t == 0)
      dev2_sum = r.dev2;
    else
      dev2_sum += r.dev2;
  }
  const RunResult r = run_experiment(exp.c, ac, exp.scenario, 50, trials,
                                     exp.seed);
  for (long i = 0; i <= 50; ++i) {
    double net = 0.0;
    for (int k = 0; k < 6; ++k) net += dev2_sum(i, k) / trials;
    net /= 6.0;
    CHECK(r.trace.net_db[i] == doctest::Approx(10.0 * std::log10(net)));
  }
}

TEST_CASE("same seed twice gives identical results at any thread count") {
  const Experiment exp = Experiment::from_config(Config::from_string(kTinyConfig));
  const auto& ac = exp.algorithms[0];

  ExperimentOptions serial;
  serial.n_threads = 1;
  ExperimentOptions wide;
  wide.n_threads = 4;
  const RunResult a =
      run_experiment(exp.c, ac, exp.scenario, 120, 8, exp.seed, serial);
  const RunResult b =
      run_experiment(exp.c, ac, exp.scenario, 120, 8, exp.seed, wide);
  CHECK(a.trace.net_db == b.trace.net_db);  // bitwise
  CHECK(a.trace.node_db == b.trace.node_db);
  CHECK(a.bounds.e_xi == b.bounds.e_xi);
}

TEST_CASE("steady state windows") {
  MsdTrace trace;
  trace.trials = 1;
  trace.node_db.resize(11, 2);
  trace.net_db.resize(11);
  for (long i = 0; i <= 10; ++i) {
    trace.node_db(i, 0) = -20.0;            // constant
    trace.node_db(i, 1) = i < 5 ? 0.0 : -30.0;  // two segments
    trace.net_db[i] = -10.0;
  }
  const Eigen::VectorXd ss = steady_state_msd(trace, 5, 10);
  CHECK(ss[0] == doctest::Approx(-20.0));
  CHECK(ss[1] == doctest::Approx(-30.0));  // tail segment only
  CHECK(steady_state_net(trace, 0, 10) == doctest::Approx(-10.0));
  CHECK_THROWS_AS(steady_state_msd(trace, 8, 5), std::invalid_argument);
  CHECK_THROWS_AS(steady_state_msd(trace, 0, 11), std::invalid_argument);
}

TEST_CASE("cli simulate is deterministic and writes the expected files") {
  TempDir dir("cli_sim_test");
  {
    std::ofstream out(dir.file("exp.cfg"));
    out << kTinyConfig;
  }
  CHECK(run_cli({"simulate", "--config", dir.file("exp.cfg"), "--out",
                 dir.file("out1"), "--quiet"}) == 0);
  CHECK(run_cli({"simulate", "--config", dir.file("exp.cfg"), "--out",
                 dir.file("out2"), "--quiet"}) == 0);

  const std::string net1 = slurp(dir.file("out1") + "/msd_net.csv");
  CHECK(net1 == slurp(dir.file("out2") + "/msd_net.csv"));
  CHECK(net1.rfind("# schema_version", 0) == 0);
  CHECK(net1.find("iter,msd_db") != std::string::npos);
  CHECK(slurp(dir.file("out1") + "/msd_node.csv") ==
        slurp(dir.file("out2") + "/msd_node.csv"));
  // bound algorithm also dumps the xi trace for the theory model
  CHECK(std::filesystem::exists(dir.file("out1") + "/xi_trace.csv"));

  // round trip of the trace file
  const BoundTraces t = read_bound_traces(dir.file("out1") + "/xi_trace.csv");
  CHECK(t.n_iters() == 120);
  CHECK(t.n_nodes() == 6);
  CHECK(t.e_xi.minCoeff() >= 0.0);
}

TEST_CASE("cli exit codes") {
  TempDir dir("cli_err_test");
  SUBCASE("unknown flag") {
    CHECK(run_cli({"simulate", "--config", "x.cfg", "--bogus"}) == 1);
  }
  SUBCASE("missing subcommand") { CHECK(run_cli({}) == 1); }
  SUBCASE("missing config file") {
    CHECK(run_cli({"simulate", "--config", dir.file("absent.cfg"),
                   "--quiet"}) == 1);
  }
  SUBCASE("bad config contents") {
    {
      std::ofstream out(dir.file("bad.cfg"));
      out << "[noise]\nkind = marble\n";
    }
    CHECK(run_cli({"simulate", "--config", dir.file("bad.cfg"), "--quiet"}) ==
          1);
  }
  SUBCASE("complexity without config") {
    CHECK(run_cli({"complexity", "--m", "16", "--nk", "10", "--out",
                   dir.file("cx"), "--quiet"}) == 0);
    const std::string table = slurp(dir.file("cx") + "/complexity.csv");
    CHECK(table.find("dlms,193,176,0,0") != std::string::npos);
    CHECK(table.find("drls,1232,") != std::string::npos);
  }
}

TEST_CASE("cli seed and trials overrides change the output") {
  TempDir dir("cli_seed_test");
  {
    std::ofstream out(dir.file("exp.cfg"));
    out << kTinyConfig;
  }
  CHECK(run_cli({"simulate", "--config", dir.file("exp.cfg"), "--out",
                 dir.file("a"), "--quiet"}) == 0);
  CHECK(run_cli({"simulate", "--config", dir.file("exp.cfg"), "--out",
                 dir.file("b"), "--seed", "8", "--quiet"}) == 0);
  CHECK(slurp(dir.file("a") + "/msd_net.csv") !=
        slurp(dir.file("b") + "/msd_net.csv"));
}

TEST_CASE("multi-algorithm simulate emits one column per algorithm") {
  TempDir dir("cli_multi_test");
  {
    std::ofstream out(dir.file("exp.cfg"));
    out << kTinyConfig;
    out << "alg.alg = drls,rdrls\n";
  }
  CHECK(run_cli({"simulate", "--config", dir.file("exp.cfg"), "--out",
                 dir.file("out"), "--quiet"}) == 0);
  const std::string net = slurp(dir.file("out") + "/msd_net.csv");
  CHECK(net.find("iter,msd_db_drls,msd_db_rdrls") != std::string::npos);
}

TEST_CASE("theory cli consumes the simulate trace") {
  TempDir dir("cli_theory_test");
  const char* cfg = R"(
seed = 3
[net]
n = 4
topology = random
radius = 0.7
[run]
m = 4
iters = 60
trials = 4
[regressor]
mode = iid
[signal]
eps_var = 1.0
[noise]
kind = cg
theta_var = 0.5
pr = 0.01
hbar = 100
[alg]
alg = rdrls
beta = 0.97
[theory]
samples = 20000
)";
  {
    std::ofstream out(dir.file("exp.cfg"));
    out << cfg;
  }
  REQUIRE(run_cli({"simulate", "--config", dir.file("exp.cfg"), "--out",
                   dir.file("sim"), "--quiet"}) == 0);
  CHECK(run_cli({"theory", "--config", dir.file("exp.cfg"), "--xi-trace",
                 dir.file("sim") + "/xi_trace.csv", "--out",
                 dir.file("theory"), "--quiet"}) == 0);
  const std::string out = slurp(dir.file("theory") + "/theory.csv");
  CHECK(out.find("iter,node,msd_db,msd_net_db") != std::string::npos);
  // first data row: iteration 0, node 1, ~0 dB
  const auto row_start = out.find("\n0,1,");
  REQUIRE(row_start != std::string::npos);
  std::istringstream row(out.substr(row_start + 5));
  double msd_db = 99.0, net_db = 99.0;
  char comma;
  row >> msd_db >> comma >> net_db;
  CHECK(msd_db == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(net_db == doctest::Approx(0.0).epsilon(1e-9));
}
