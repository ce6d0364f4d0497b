#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diffnet/dcd.hpp"
#include "diffnet/diffusion.hpp"
#include "diffnet/signals.hpp"
#include "diffnet/topology.hpp"

namespace diffnet {

enum class Algorithm {
  kDlms,
  kDselms,
  kDrls,
  kRdrls,
  kRdrlsNc,
  kDcdDrls,
  kDcdRdrls,
  kDcdRdrlsNc,
};

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm alg);

/// True for the robust variants that maintain the xi/zeta bound pair.
bool maintains_bound(Algorithm alg);
bool uses_nc(Algorithm alg);
bool is_dcd(Algorithm alg);

struct AlgorithmConfig {
  Algorithm alg = Algorithm::kRdrlsNc;
  RdrlsParams rls;
  NcParams nc;
  DcdParams dcd;
  double mu = 0.015;  // dLMS / dSE-LMS step size
  /// When set, replaces the computed xi_k(0) at every node. An infinite
  /// value disables the constraint entirely.
  std::optional<double> xi0_override;
};

/// Per-trial stream of (regressor, measurement) pairs. One instance per
/// trial; `sample` is called once per (iteration, node) in a fixed order.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual int dim() const = 0;
  virtual int n_nodes() const = 0;
  virtual void sample(long iter, int node, Eigen::VectorXd& u, double& d) = 0;
  /// Effective unknown vector at iteration `iter` (deviation reference).
  virtual Eigen::VectorXd true_vector(long iter) const = 0;
};

/// Data source for the parameter-estimation scenarios (AR or iid regressors,
/// Gaussian/CG/alpha-stable noise, optional impulse cluster / change point).
class EstimationSource final : public DataSource {
 public:
  EstimationSource(const Scenario& scenario, std::uint64_t master_seed,
                   std::uint64_t trial);

  int dim() const override { return scenario_.dim(); }
  int n_nodes() const override { return scenario_.n_nodes(); }
  void sample(long iter, int node, Eigen::VectorXd& u, double& d) override;
  Eigen::VectorXd true_vector(long iter) const override {
    return scenario_.true_vector(iter);
  }

 private:
  Scenario scenario_;
  std::vector<RegressorSource> regressors_;
  std::vector<Rng> noise_rng_;
  std::vector<Rng> cluster_rng_;
  std::vector<double> cluster_sd_;  // per node, sqrt(scale * sigma_y^2)
};

/// Read-only view of one node's state right after its adaptation step.
struct StepView {
  long iter;
  int node;
  const Eigen::VectorXd& u;
  double d;
  double e;
  const Eigen::VectorXd& w_prev;
  const Eigen::VectorXd& psi;
  double xi_prev;          // bound in force for this step (inf if unbounded)
  double update_energy;    // squared norm of the applied increment
};

using StepObserver = std::function<void(const StepView&)>;

struct TrialResult {
  /// Squared deviations ||w_o(i) - w_{k,i}||^2; row 0 is the initial state.
  Eigen::MatrixXd dev2;
  /// Bound trajectories (rows 0..n_iters); empty for unbounded algorithms.
  Eigen::MatrixXd xi;
  Eigen::MatrixXd zeta;
  /// Final estimates, one row per node.
  Eigen::MatrixXd w_final;
  /// Max over all steps of update_energy / xi_prev (0 when unbounded).
  double max_constraint_ratio = 0.0;
  long nc_resets = 0;
  /// Optional dense history of all node estimates, row i = iteration i,
  /// columns blocked per node. Filled only when requested.
  Eigen::MatrixXd w_history;
};

struct TrialOptions {
  bool record_w_history = false;
  StepObserver observer;
};

/// Runs one trial of the two-phase (adapt-then-combine) diffusion loop.
/// `xi0` gives the per-node initial bound for the robust variants (ignored
/// otherwise; the xi0_override in `cfg` wins when present).
TrialResult run_trial(const CombinationMatrix& c, const AlgorithmConfig& cfg,
                      DataSource& source, long n_iters,
                      const std::vector<double>& xi0,
                      const TrialOptions& options = {});

}  // namespace diffnet
