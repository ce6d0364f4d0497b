#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "diffnet/csv.hpp"
#include "diffnet/harness.hpp"

namespace diffnet {

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> topology;
  std::optional<double> radius;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "config file");
  if (needs_config) opt->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed override");
  cmd->add_option("--trials", args.trials, "trial count override");
  cmd->add_option("--topology", args.topology,
                  "'random' or a topology file path");
  cmd->add_option("--radius", args.radius, "geometric-graph radius");
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

Config load_config(const CommonArgs& args) {
  Config cfg = Config::from_file(args.config_path);
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  if (args.trials) cfg.set("run.trials", std::to_string(*args.trials));
  if (args.topology) {
    if (*args.topology == "random") {
      cfg.set("net.topology", "random");
    } else {
      cfg.set("net.topology", "file");
      cfg.set("net.file", *args.topology);
    }
  }
  if (args.radius) cfg.set("net.radius", std::to_string(*args.radius));
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / name).string();
}

int run_simulate(const CommonArgs& args) {
  const Experiment exp = Experiment::from_config(load_config(args));
  std::vector<RunResult> results;
  for (const auto& ac : exp.algorithms) {
    if (!args.quiet)
      std::cout << "simulate: " << to_string(ac.alg) << " (" << exp.n_trials
                << " trials, " << exp.n_iters << " iterations)\n";
    results.push_back(run_experiment(exp.c, ac, exp.scenario, exp.n_iters,
                                     exp.n_trials, exp.seed));
    if (!args.quiet)
      std::cout << "  done in " << results.back().wall_seconds << " s\n";
  }

  {
    CsvWriter csv(out_path(args, "msd_net.csv"));
    std::string header = "iter";
    for (const auto& ac : exp.algorithms)
      header += ",msd_db" + (exp.algorithms.size() > 1
                                 ? "_" + to_string(ac.alg)
                                 : std::string());
    csv.header(header);
    for (long i = 0; i <= exp.n_iters; ++i) {
      csv.field(i);
      for (const auto& r : results) csv.field(r.trace.net_db[i]);
      csv.end_row();
    }
  }
  {
    CsvWriter csv(out_path(args, "msd_node.csv"));
    std::string header = "node";
    for (const auto& ac : exp.algorithms)
      header += ",steady_msd_db" + (exp.algorithms.size() > 1
                                        ? "_" + to_string(ac.alg)
                                        : std::string());
    csv.header(header);
    std::vector<Eigen::VectorXd> steady;
    for (const auto& r : results)
      steady.push_back(steady_state_msd(r.trace, exp.ss_begin, exp.ss_end));
    for (int k = 0; k < exp.topology.n_nodes(); ++k) {
      csv.field(static_cast<long>(k) + 1);
      for (const auto& s : steady) csv.field(s[k]);
      csv.end_row();
    }
  }
  for (std::size_t a = 0; a < exp.algorithms.size(); ++a) {
    if (!maintains_bound(exp.algorithms[a].alg)) continue;
    write_bound_traces(out_path(args, "xi_trace.csv"), results[a].bounds);
    break;  // first bound-maintaining algorithm feeds the theory model
  }
  return 0;
}

int run_spectrum_cmd(const CommonArgs& args) {
  const SpectrumExperiment exp =
      SpectrumExperiment::from_config(load_config(args));
  std::vector<SpectrumRunResult> results;
  for (const auto& ac : exp.algorithms) {
    if (!args.quiet)
      std::cout << "spectrum: " << to_string(ac.alg) << " (" << exp.n_trials
                << " trials, " << exp.n_iters << " iterations)\n";
    results.push_back(run_spectrum(exp.c, ac, exp.scenario, exp.basis,
                                   exp.n_iters, exp.n_trials, exp.seed));
  }
  {
    CsvWriter csv(out_path(args, "msd_net.csv"));
    std::string header = "iter";
    for (const auto& ac : exp.algorithms)
      header += ",msd_db" + (exp.algorithms.size() > 1
                                 ? "_" + to_string(ac.alg)
                                 : std::string());
    csv.header(header);
    for (long i = 0; i <= exp.n_iters; ++i) {
      csv.field(i);
      for (const auto& r : results) csv.field(r.net_msd_db[i]);
      csv.end_row();
    }
  }
  for (std::size_t a = 0; a < exp.algorithms.size(); ++a) {
    CsvWriter csv(out_path(
        args, "psd_" + to_string(exp.algorithms[a].alg) + ".csv"));
    csv.header("freq,true_psd,node,est_psd");
    for (int iota = 0; iota < exp.basis.n_freq(); ++iota) {
      const double f = exp.basis.grid(iota);
      const double truth =
          psd_true(exp.basis, exp.scenario.w_true, f);
      for (int k = 0; k < exp.topology.n_nodes(); ++k) {
        csv.field(f).field(truth).field(static_cast<long>(k) + 1);
        csv.field(results[a].psd_estimates(k, iota));
        csv.end_row();
      }
    }
  }
  return 0;
}

int run_theory(const CommonArgs& args, const std::string& trace_path) {
  const Config cfg = load_config(args);
  const Experiment exp = Experiment::from_config(cfg);

  std::vector<Eigen::MatrixXd> input_cov;
  std::vector<double> pr, hbar, theta;
  for (int k = 0; k < exp.topology.n_nodes(); ++k) {
    input_cov.push_back(exp.scenario.input_covariance(k));
    const NoiseModel& nm = exp.scenario.noise[k];
    if (nm.kind == NoiseKind::kAlphaStable)
      throw std::invalid_argument(
          "theory: the evolution model needs Gaussian or CG noise");
    pr.push_back(nm.kind == NoiseKind::kContaminatedGaussian ? nm.pr : 0.0);
    hbar.push_back(nm.kind == NoiseKind::kContaminatedGaussian ? nm.hbar
                                                               : 0.0);
    theta.push_back(nm.theta_var);
  }

  double beta = 0.0;
  bool found = false;
  for (const auto& ac : exp.algorithms)
    if (maintains_bound(ac.alg)) {
      beta = ac.rls.beta;
      found = true;
      break;
    }
  if (!found)
    throw std::invalid_argument("theory: config must select a bound algorithm");

  const BoundTraces traces = read_bound_traces(trace_path);
  const long samples = cfg.get_long("theory.samples", 100000);
  TheoryModel model(exp.c, std::move(input_cov), std::move(pr),
                    std::move(hbar), std::move(theta), beta,
                    exp.scenario.w_true, samples, exp.seed);
  if (!args.quiet)
    std::cout << "theory: " << traces.n_iters() << " iterations, NM = "
              << model.n_nodes() * model.dim() << "\n";
  const TheoryTrace out = run_theory(model, traces);
  if (out.clamped > 0 && !args.quiet)
    std::cout << "theory: clamped " << out.clamped
              << " negative radicands in Omega\n";

  CsvWriter csv(out_path(args, "theory.csv"));
  csv.header("iter,node,msd_db,msd_net_db");
  for (long i = 0; i < out.net_db.size(); ++i)
    for (int k = 0; k < out.node_db.cols(); ++k) {
      csv.field(i).field(static_cast<long>(k) + 1);
      csv.field(out.node_db(i, k)).field(out.net_db[i]);
      csv.end_row();
    }
  return 0;
}

int run_appendix(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const Experiment exp = Experiment::from_config(cfg);

  AlgorithmConfig ac;
  bool found = false;
  for (const auto& candidate : exp.algorithms)
    if (maintains_bound(candidate.alg) && !is_dcd(candidate.alg)) {
      ac = candidate;
      found = true;
      break;
    }
  if (!found)
    throw std::invalid_argument("check-appendix-a: config must select rdrls");

  std::vector<int> nodes;
  if (cfg.has("aa.nodes")) {
    for (double v : cfg.get_list("aa.nodes"))
      nodes.push_back(static_cast<int>(v) - 1);
  } else {
    for (int k : {0, 5, 10, 15})
      if (k < exp.topology.n_nodes()) nodes.push_back(k);
  }
  const int trials =
      static_cast<int>(cfg.get_long("aa.trials", exp.n_trials));
  const long samples = cfg.get_long("aa.samples", 100000);

  if (!args.quiet)
    std::cout << "check-appendix-a: " << trials << " trials, " << exp.n_iters
              << " iterations\n";
  const ApproxCheck check =
      appendix_check(exp.c, ac, exp.scenario,
                     compute_xi0(exp.scenario, ac.rls), exp.n_iters, trials,
                     exp.seed, nodes, samples);

  CsvWriter csv(out_path(args, "appendix_a.csv"));
  csv.header("iter,node,lhs,rhs");
  for (long i = 0; i < check.lhs.rows(); ++i)
    for (std::size_t j = 0; j < check.nodes.size(); ++j) {
      csv.field(i).field(static_cast<long>(check.nodes[j]) + 1);
      csv.field(check.lhs(i, j)).field(check.rhs(i, j));
      csv.end_row();
    }
  return 0;
}

int run_complexity(const CommonArgs& args, int m, int n_k, int kappa, int nu,
                   int mb) {
  const long long c_plus = 2LL * nu * m + mb;
  CsvWriter csv(out_path(args, "complexity.csv"));
  csv.header("algorithm,multiplications,additions,divisions,square_roots");
  for (const char* name :
       {"dlms", "drls", "dcd-drls", "dcd-drls-shift", "rdrls", "dcd-rdrls",
        "dcd-rdrls-shift"}) {
    const OpCounts ops = complexity_table(name, m, n_k, kappa, c_plus);
    csv.field(std::string(name));
    csv.field(static_cast<long>(ops.multiplications));
    csv.field(static_cast<long>(ops.additions));
    csv.field(static_cast<long>(ops.divisions));
    csv.field(static_cast<long>(ops.square_roots));
    csv.end_row();
  }
  if (!args.quiet)
    std::cout << "complexity: wrote table for M=" << m << ", n_k=" << n_k
              << ", kappa=" << kappa << ", C+dcd=" << c_plus << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"diffusion RLS estimation over adaptive networks"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "parameter-estimation runs");
  add_common(sim, sim_args);

  CommonArgs spec_args;
  auto* spec = app.add_subcommand("spectrum", "distributed spectrum estimation");
  add_common(spec, spec_args);

  CommonArgs theory_args;
  std::string trace_path;
  auto* theory = app.add_subcommand("theory", "covariance evolution model");
  add_common(theory, theory_args);
  theory->add_option("--xi-trace", trace_path, "bound trace CSV from simulate")
      ->required();

  CommonArgs aa_args;
  auto* aa = app.add_subcommand("check-appendix-a",
                                "sign-error approximation diagnostic");
  add_common(aa, aa_args);

  CommonArgs cx_args;
  int cx_m = 16, cx_nk = 10, cx_kappa = 1, cx_nu = 4, cx_mb = 16;
  auto* cx = app.add_subcommand("complexity", "per-node operation counts");
  add_common(cx, cx_args, /*needs_config=*/false);
  cx->add_option("--m", cx_m, "filter length");
  cx->add_option("--nk", cx_nk, "neighborhood size");
  cx->add_option("--kappa", cx_kappa, "constrained-branch flag (0 or 1)");
  cx->add_option("--nu", cx_nu, "DCD coordinate updates");
  cx->add_option("--mb", cx_mb, "DCD bit budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (spec->parsed()) return run_spectrum_cmd(spec_args);
    if (theory->parsed()) return run_theory(theory_args, trace_path);
    if (aa->parsed()) return run_appendix(aa_args);
    if (cx->parsed())
      return run_complexity(cx_args, cx_m, cx_nk, cx_kappa, cx_nu, cx_mb);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.rfind("config", 0) == 0 || what.find("cannot open") !=
                                            std::string::npos) {
      std::cerr << "config error: " << what << "\n";
      return 1;
    }
    std::cerr << "runtime error: " << what << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace diffnet
