#pragma once

#include <Eigen/Dense>
#include <vector>

#include "diffnet/simulate.hpp"

namespace diffnet {

/// Nonoverlapping rectangular basis over [f_min, f_max]: M indicator
/// functions of equal width, evaluated on an N_c-point frequency grid
/// f_iota = f_min + iota*(f_max-f_min)/N_c, iota = 1..N_c.
class BasisSet {
 public:
  BasisSet(int n_basis, int n_freq, double f_min, double f_max);

  int n_basis() const { return m_; }
  int n_freq() const { return n_freq_; }
  double grid(int iota) const;           // 0-based grid index
  int basis_of(double f) const;          // 0-based basis index covering f
  Eigen::VectorXd row(int iota) const;   // q(f_iota)
  Eigen::VectorXd evaluate(double f) const;  // q(f)
  const Eigen::MatrixXd& q() const { return q_; }

 private:
  int m_, n_freq_;
  double f_min_, f_max_;
  Eigen::MatrixXd q_;  // N_c x M, one-hot rows
};

/// phi_s(f) = q(f)^T w.
double psd_true(const BasisSet& basis, const Eigen::VectorXd& w, double f);

enum class FrequencySchedule { kRoundRobin, kRandom };

struct SpectrumScenario {
  Eigen::VectorXd w_true;               // nonnegative transmit powers
  std::vector<double> channel_gain;     // |H_k|, per node (flat over f)
  std::vector<NoiseModel> obs_noise;    // per node
  FrequencySchedule schedule = FrequencySchedule::kRoundRobin;

  int n_nodes() const { return static_cast<int>(obs_noise.size()); }

  /// Sparse power vector: `active` entries of `power`, indices drawn by seed.
  static Eigen::VectorXd sparse_powers(int n_basis, int active, double power,
                                       std::uint64_t seed);
};

/// One scalar observation: regressor |H_k| q(f_iota) and measurement
/// d = regressor^T w_o + v (the receiver noise floor is assumed estimated
/// beforehand and cancels).
void spectrum_measure(const SpectrumScenario& scenario, const BasisSet& basis,
                      int node, int iota, Rng& noise_rng, Eigen::VectorXd& u,
                      double& d);

/// Data source feeding one frequency per instant per node.
class SpectrumSource final : public DataSource {
 public:
  SpectrumSource(const SpectrumScenario& scenario, const BasisSet& basis,
                 std::uint64_t master_seed, std::uint64_t trial);

  int dim() const override { return basis_.n_basis(); }
  int n_nodes() const override { return scenario_.n_nodes(); }
  void sample(long iter, int node, Eigen::VectorXd& u, double& d) override;
  Eigen::VectorXd true_vector(long) const override { return scenario_.w_true; }

 private:
  SpectrumScenario scenario_;
  BasisSet basis_;
  std::vector<Rng> noise_rng_;
  std::vector<Rng> schedule_rng_;
};

struct SpectrumRunResult {
  Eigen::MatrixXd node_msd_db;       // (n_iters+1) x N, ensemble average
  Eigen::VectorXd net_msd_db;        // n_iters+1
  Eigen::MatrixXd final_estimates;   // N x M, ensemble-averaged final w
  Eigen::MatrixXd psd_estimates;     // N x N_c, q(f)^T w on the grid
};

/// Full distributed spectrum-estimation experiment (ensemble over trials).
SpectrumRunResult run_spectrum(const CombinationMatrix& c,
                               const AlgorithmConfig& cfg,
                               const SpectrumScenario& scenario,
                               const BasisSet& basis, long n_iters,
                               int n_trials, std::uint64_t master_seed,
                               int n_threads = 0);

}  // namespace diffnet
