#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

#include "diffnet/topology.hpp"

namespace diffnet {

/// Parameters of the robust diffusion RLS update.
struct RdrlsParams {
  double lambda = 0.985;  // forgetting factor, (0, 1]
  double delta = 0.01;    // regularization for P(0) = delta^-1 I
  double beta = 0.97;     // bound memory factor, (0, 1)
  double ec = 1.0;        // bound-init scale
  int dim = 16;

  void validate() const;
};

/// Non-stationarity control parameters. The detector window is V_t = rho*M
/// samples and the trimmed sum keeps the smallest V_t - V_d of them.
struct NcParams {
  double rho = 3.0;
  double tau = 0.96;
  double t_th = 15.0;

  int window(int dim) const { return static_cast<int>(rho * dim); }
  int discard(int dim) const {
    return static_cast<int>(std::floor(0.75 * window(dim)));
  }
  void validate(int dim) const;
};

/// Kalman-gain step of the RLS recursion: updates P by the matrix inversion
/// lemma and returns g = P_next * u. P_next is re-symmetrized to keep the
/// recursion SPD over long runs.
void rls_gain(Eigen::MatrixXd& p, const Eigen::VectorXd& u, double lambda,
              Eigen::VectorXd& g);

/// Norm-constrained adaptation: psi = w_prev + scale * g * e with
/// scale = min(sqrt(xi_prev) / (||g|| |e|), 1). Convention: a vanishing
/// denominator means a vanishing increment, so scale = 1.
/// Returns the scale actually applied.
double rdrls_adapt(const Eigen::VectorXd& w_prev, const Eigen::VectorXd& g,
                   double e, double xi_prev, Eigen::VectorXd& psi);

/// Local bound recursion: zeta = beta*xi + (1-beta)*min(g_norm2_e2, xi).
/// Evaluated as xi minus a nonnegative decrement so zeta <= xi holds exactly
/// in floating point.
double bound_local(double xi_prev, double g_norm2_e2, double beta);

/// DCD-variant bound recursion (no inner min; the solver constraint already
/// caps the increment energy): zeta = beta*xi + (1-beta)*dw_norm2.
double bound_update_dcd(double xi_prev, double dw_norm2, double beta);

/// Diffuses the neighbors' local bounds: xi_k = sum_m c_{m,k} zeta_m.
/// The result is capped at the neighborhood max, which the exact convex
/// combination cannot exceed; the cap only absorbs rounding.
double bound_combine(const std::vector<double>& zetas,
                     const CombinationMatrix& c, int k);

/// Combination step: w_k = sum_m c_{m,k} psi_m.
Eigen::VectorXd combine(const std::vector<Eigen::VectorXd>& psis,
                        const CombinationMatrix& c, int k);

/// psi = w_prev + mu * u * e.
Eigen::VectorXd dlms_adapt(const Eigen::VectorXd& w_prev,
                           const Eigen::VectorXd& u, double e, double mu);

/// psi = w_prev + mu * u * sign(e), with sign(0) = 0.
Eigen::VectorXd dselms_adapt(const Eigen::VectorXd& w_prev,
                             const Eigen::VectorXd& u, double e, double mu);

/// Bound initialization xi(0) = E_c * sigma_d^2 / (M * sigma_u^2).
double xi_init(double ec, double sigma_d2, double sigma_u2, int dim);

/// Windowed error statistic and change detector of the NC method. One
/// instance per node; `push` every iteration, `check` at i = n*V_t.
class NcState {
 public:
  NcState() = default;
  NcState(int window, int discard);

  /// Records e^2/||u||^2; iterations with a vanishing regressor are skipped.
  void push(double e2, double u_norm2);

  bool ring_full() const { return filled_ >= window_; }
  double sigma_e2() const { return sigma_e2_; }

  /// Trimmed-mean update (ascending sort, smallest window-discard entries):
  /// sigma_e2 <- tau*sigma_e2 + (1-tau)*sum. Call only when the ring is full.
  void update_sigma(double tau);

  double theta_old() const { return theta_old_; }
  void set_theta_old(double v) { theta_old_ = v; }

 private:
  int window_ = 0;
  int discard_ = 0;
  int filled_ = 0;
  int head_ = 0;
  std::vector<double> ring_;
  std::vector<double> scratch_;
  double sigma_e2_ = 0.0;
  double theta_old_ = 0.0;
};

/// Outcome of the NC decision at a check instant.
struct NcDecision {
  enum class Action { kDefault, kGrow, kReset } action = Action::kDefault;
  double zeta = 0.0;       // override value for kGrow / kReset
  double theta_new = 0.0;  // diagnostic
};

/// NC step 2 for node k, given this instant's smoothed error statistics of
/// the whole network. Caller must already have run update_sigma on all nodes.
/// xi_prev = xi_k(i-1), xi0 = xi_k(0).
NcDecision nc_decide(const std::vector<NcState>& states,
                     const CombinationMatrix& c, int k, int window,
                     int discard, double t_th, double xi_prev, double xi0);

constexpr double kXiInfinity = std::numeric_limits<double>::infinity();

}  // namespace diffnet
