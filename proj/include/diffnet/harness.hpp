#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "diffnet/analysis.hpp"
#include "diffnet/config.hpp"
#include "diffnet/simulate.hpp"
#include "diffnet/spectrum.hpp"
#include "diffnet/topology.hpp"

namespace diffnet {

/// Ensemble-averaged deviation trace; row 0 is the initial state.
struct MsdTrace {
  Eigen::MatrixXd node_db;  // (n_iters+1) x N
  Eigen::VectorXd net_db;   // n_iters+1
  int trials = 0;
};

struct RunResult {
  MsdTrace trace;
  /// Ensemble-averaged bound traces; empty unless the algorithm keeps them.
  BoundTraces bounds;
  /// Derived per-trial substream seeds, for replaying a single trial.
  std::vector<std::uint64_t> trial_seeds;
  double max_constraint_ratio = 0.0;
  long nc_resets = 0;
  double wall_seconds = 0.0;
  /// Full estimate history of trial 0 (only when record_history is set).
  Eigen::MatrixXd w_history;
};

struct ExperimentOptions {
  int n_threads = 0;  // 0: DIFFNET_THREADS or hardware concurrency
  bool record_history = false;
};

/// Per-node bound initialization from the analytic scenario powers.
std::vector<double> compute_xi0(const Scenario& scenario,
                                const RdrlsParams& params);

/// Runs `n_trials` independent trials and ensemble-averages in the linear
/// domain; dB conversion is the final step. Byte-identical output for a
/// fixed (scenario, seed) at any thread count.
RunResult run_experiment(const CombinationMatrix& c,
                         const AlgorithmConfig& cfg, const Scenario& scenario,
                         long n_iters, int n_trials, std::uint64_t seed,
                         const ExperimentOptions& options = {});

/// Per-node linear-domain mean of the trace over iterations
/// [win_begin, win_end], returned in dB.
Eigen::VectorXd steady_state_msd(const MsdTrace& trace, long win_begin,
                                 long win_end);
double steady_state_net(const MsdTrace& trace, long win_begin, long win_end);

/// Experiment description assembled from a Config (plus CLI overrides).
struct Experiment {
  Topology topology;
  CombinationMatrix c;
  Scenario scenario;
  std::vector<AlgorithmConfig> algorithms;
  long n_iters = 3000;
  int n_trials = 50;
  std::uint64_t seed = 1;
  long ss_begin = 0;  // steady-state window (defaults to the last 200)
  long ss_end = 0;

  static Experiment from_config(const Config& cfg);
};

/// Spectrum-application description.
struct SpectrumExperiment {
  Topology topology;
  CombinationMatrix c;
  SpectrumScenario scenario;
  BasisSet basis;
  std::vector<AlgorithmConfig> algorithms;
  long n_iters = 3000;
  int n_trials = 50;
  std::uint64_t seed = 1;

  static SpectrumExperiment from_config(const Config& cfg);
};

/// Shared topology construction (`net.*` keys / CLI overrides).
Topology topology_from_config(const Config& cfg, std::uint64_t seed);

/// Algorithm list and parameters (`alg`, `alg.*`, `nc.*`, `dcd.*` keys).
std::vector<AlgorithmConfig> algorithms_from_config(const Config& cfg, int m);

/// Reads a bound-trace CSV (`iter,node,e_xi,e_zeta`, 1-based nodes).
BoundTraces read_bound_traces(const std::string& path);
void write_bound_traces(const std::string& path, const BoundTraces& traces);

/// Entry point of the batch CLI; exposed so tests can drive it in-process.
/// Returns 0 on success, 1 on usage/config errors, 2 on runtime failures.
int cli_main(int argc, const char* const* argv);

}  // namespace diffnet
