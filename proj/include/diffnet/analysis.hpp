#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "diffnet/rng.hpp"
#include "diffnet/simulate.hpp"
#include "diffnet/topology.hpp"

namespace diffnet {

/// chi_k = E{ 1/sqrt(u^T R^-2 u) } for u ~ N(0, R), by Monte Carlo.
struct ChiEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
ChiEstimate estimate_chi(const Eigen::MatrixXd& r, long n_samples, Rng& rng);

/// Closed form of chi for R = I_M: Gamma((M-1)/2) / (sqrt(2) Gamma(M/2)).
double chi_identity(int dim);

/// varpi = sqrt(2/pi) * [ pr / sqrt(tr(W R) + (hbar+1) s2) +
///                        (1-pr) / sqrt(tr(W R) + s2) ].
double varpi(const Eigen::MatrixXd& w_block, const Eigen::MatrixXd& r,
             double pr, double hbar, double sigma_theta2);

/// omega2 * E{ R^-1 u u^T R^-1 / (u^T R^-2 u) }, u ~ N(0, R), symmetrized.
/// This is the covariance of the unit-normalized gain direction scaled by
/// the update energy; its trace is exactly omega2.
Eigen::MatrixXd breve_r_block(const Eigen::MatrixXd& r, double omega2,
                              long n_samples, Rng& rng);

/// Ensemble-averaged bound traces feeding the evolution model; trace[i][k]
/// holds E{xi_k(i)} (resp. E{zeta_k(i)}), row 0 the initial bound.
struct BoundTraces {
  Eigen::MatrixXd e_xi;
  Eigen::MatrixXd e_zeta;

  long n_iters() const { return e_xi.rows() - 1; }
  int n_nodes() const { return static_cast<int>(e_xi.cols()); }
};

/// Semi-analytic deviation-covariance model. Holds the per-node inputs of
/// the recursion and the current NM x NM covariance.
class TheoryModel {
 public:
  TheoryModel(const CombinationMatrix& c,
              std::vector<Eigen::MatrixXd> input_cov,
              std::vector<double> pr, std::vector<double> hbar,
              std::vector<double> sigma_theta2, double beta,
              const Eigen::VectorXd& w_true, long mc_samples,
              std::uint64_t seed);

  int n_nodes() const { return n_; }
  int dim() const { return m_; }
  const Eigen::MatrixXd& w() const { return w_; }
  double chi(int k) const { return chi_[k]; }

  /// Advances W by one step of the covariance recursion, driven by
  /// E{zeta(i)} and E{xi(i-1)} taken from the traces. Returns the number of
  /// negative radicands clamped in Omega (Monte-Carlo noise guard).
  int step(const BoundTraces& traces, long i);

  /// Per-node MSD_k = tr(W_kk) and network MSD = tr(W)/N, linear domain.
  void msd(Eigen::VectorXd& per_node, double& network) const;

 private:
  int n_, m_;
  double beta_;
  Eigen::MatrixXd c_lift_;              // C (x) I_M
  std::vector<Eigen::MatrixXd> r_;      // per-node input covariance
  std::vector<Eigen::MatrixXd> g_;      // E{R^-1 u u^T R^-1 / sqrt(u^T R^-2 u)}
  std::vector<double> chi_;
  std::vector<double> pr_, hbar_, sigma_theta2_;
  Eigen::MatrixXd w_;
};

/// MSD in dB with a -200 dB floor for vanishing deviations.
double to_db(double linear);

struct TheoryTrace {
  Eigen::MatrixXd node_db;  // (n_iters+1) x N
  Eigen::VectorXd net_db;   // n_iters+1
  long clamped = 0;         // Omega radicands clamped to zero
};

/// Runs the full Eq.-style covariance recursion for as many iterations as
/// the traces supply.
TheoryTrace run_theory(TheoryModel& model, const BoundTraces& traces);

/// Paired per-iteration traces of the two sides of the sign-error
/// approximation E{ w~^T R^-1 u / sqrt(u^T R^-2 u) sign(e) } ~=
/// chi * E{ w~^T R^-1 u sign(e) }, estimated from the same ensemble.
struct ApproxCheck {
  std::vector<int> nodes;     // node indices reported
  Eigen::MatrixXd lhs;        // (n_iters+1) x nodes.size()
  Eigen::MatrixXd rhs;
};

ApproxCheck appendix_check(const CombinationMatrix& c,
                           const AlgorithmConfig& cfg,
                           const Scenario& scenario,
                           const std::vector<double>& xi0, long n_iters,
                           int n_trials, std::uint64_t master_seed,
                           const std::vector<int>& nodes, long mc_samples);

/// Per-instant operation counts of one node (complexity-table rows).
struct OpCounts {
  long long multiplications = 0;
  long long additions = 0;
  long long divisions = 0;
  long long square_roots = 0;
};

/// Operation counts for algorithm `name` at a node with n_k neighbors.
/// Recognized names: dlms, drls, dcd-drls, dcd-drls-shift, rdrls,
/// dcd-rdrls, dcd-rdrls-shift. kappa marks the constrained DCD branch;
/// c_dcd_plus is the DCD addition count (bounded by 2*Nu*M + Mb).
OpCounts complexity_table(const std::string& name, int m, int n_k, int kappa,
                          long long c_dcd_plus);

}  // namespace diffnet
