#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "diffnet/rng.hpp"

namespace diffnet {

/// Second-order autoregressive scalar source,
/// u(i) = a1*u(i-1) + a2*u(i-2) + eps(i).
class Ar2Source {
 public:
  Ar2Source(double a1, double a2, double innovation_var)
      : a1_(a1), a2_(a2), innovation_var_(innovation_var) {
    if (innovation_var < 0.0)
      throw std::invalid_argument("ar2: negative innovation variance");
  }

  double a1() const { return a1_; }
  double a2() const { return a2_; }
  double innovation_var() const { return innovation_var_; }

  void set_state(double u_prev, double u_prev2) {
    u1_ = u_prev;
    u2_ = u_prev2;
  }

  /// Advances the recursion with an externally supplied innovation.
  double next(double innovation) {
    const double u = a1_ * u1_ + a2_ * u2_ + innovation;
    u2_ = u1_;
    u1_ = u;
    return u;
  }

  double next(Rng& rng) {
    return next(rng.normal(0.0, std::sqrt(innovation_var_)));
  }

  /// Stationary autocovariance r(0..max_lag) from the Yule-Walker equations.
  /// Requires a stable pole pair.
  static std::vector<double> yule_walker(double a1, double a2,
                                         double innovation_var, int max_lag);

 private:
  double a1_, a2_, innovation_var_;
  double u1_ = 0.0, u2_ = 0.0;
};

enum class RegressorMode { kShift, kIid };

/// Produces the per-instant M-vector regressor: either a delay line over a
/// scalar AR stream (shift mode) or a fresh white Gaussian vector (iid mode).
class RegressorSource {
 public:
  RegressorSource(RegressorMode mode, int dim, const Ar2Source& ar, Rng rng,
                  int warmup = 100);

  RegressorMode mode() const { return mode_; }
  int dim() const { return dim_; }

  /// Fills `u` with the regressor for the next instant.
  void next(Eigen::VectorXd& u);

  /// Per-entry variance (shift: AR stationary variance; iid: innovation var).
  double entry_variance() const;

  /// Stationary covariance E{u u^T} of the regressor.
  Eigen::MatrixXd covariance() const;

 private:
  RegressorMode mode_;
  int dim_;
  Ar2Source ar_;
  Rng rng_;
  std::vector<double> delay_line_;
};

enum class NoiseKind { kGaussian, kContaminatedGaussian, kAlphaStable };

/// Per-node additive measurement noise. Contaminated Gaussian is background
/// Gaussian plus Bernoulli-gated impulses of variance hbar*theta_var; the
/// alpha-stable variant has characteristic function exp(-gamma*|t|^alpha).
struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  double theta_var = 1.0;  // background Gaussian variance
  double pr = 0.0;         // impulse appearance probability
  double hbar = 0.0;       // impulse-to-background variance ratio
  double alpha = 2.0;
  double gamma = 1.0;

  static NoiseModel gaussian(double theta_var);
  static NoiseModel contaminated(double theta_var, double pr, double hbar);
  static NoiseModel alpha_stable(double alpha, double gamma);

  double sample(Rng& rng) const;

  /// Variance for Gaussian/CG; for alpha-stable the Gaussian-equivalent
  /// 2*gamma^(2/alpha) (the variance the scale would carry at alpha = 2).
  double nominal_variance() const;
};

/// Symmetric alpha-stable draw via the Chambers-Mallows-Stuck transform,
/// scale gamma^(1/alpha).
double sample_alpha_stable(double alpha, double gamma, Rng& rng);

/// d = u^T w + v.
double measure(const Eigen::VectorXd& u, const Eigen::VectorXd& w_true,
               double noise);

/// Window of extra zero-mean Gaussian measurement noise, applied to every
/// node for iterations in [start, start + length).
struct ImpulseCluster {
  long start = 0;
  long length = 0;
  /// Per-node variance multiplier on sigma_y^2 (power of u^T w_o).
  double variance_scale = 0.0;

  bool active(long iter) const {
    return variance_scale > 0.0 && iter >= start && iter < start + length;
  }
};

/// Full data-generation scenario for the parameter-estimation experiments.
struct Scenario {
  Eigen::VectorXd w_true;
  double ar_a1 = 1.6;
  double ar_a2 = -0.81;
  RegressorMode regressor_mode = RegressorMode::kShift;
  std::vector<double> innovation_var;  // per node
  std::vector<NoiseModel> noise;       // per node
  std::optional<long> change_iteration;  // w_o flips sign from here on
  std::optional<ImpulseCluster> cluster;

  int n_nodes() const { return static_cast<int>(noise.size()); }
  int dim() const { return static_cast<int>(w_true.size()); }

  /// Effective unknown vector at iteration i (accounts for the change point).
  Eigen::VectorXd true_vector(long iter) const {
    if (change_iteration && iter >= *change_iteration) return -w_true;
    return w_true;
  }

  Eigen::MatrixXd input_covariance(int node) const;

  /// sigma_y^2 = w_o^T R_k w_o, computed from the analytic input covariance.
  double signal_power(int node) const;

  /// sigma_d^2 = sigma_y^2 + noise variance.
  double measurement_power(int node) const;

  /// Per-entry regressor power sigma_u^2.
  double input_power(int node) const;
};

/// Unit-norm random vector with entries from a zero-mean uniform draw.
Eigen::VectorXd random_unit_vector(int dim, std::uint64_t seed);

/// Per-node variance profile: `count` uniform draws in [lo, hi], seeded.
std::vector<double> uniform_profile(int count, double lo, double hi,
                                    std::uint64_t seed, std::uint64_t tag);

}  // namespace diffnet
