#include "diffnet/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diffnet {

void RdrlsParams::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("rdrls: lambda must lie in (0,1]");
  if (!(delta > 0.0)) throw std::invalid_argument("rdrls: delta must be > 0");
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("rdrls: beta must lie in (0,1)");
  if (!(ec > 0.0)) throw std::invalid_argument("rdrls: ec must be > 0");
  if (dim <= 0) throw std::invalid_argument("rdrls: dim must be positive");
}

void NcParams::validate(int dim) const {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("nc: tau must lie in (0,1)");
  const int vt = window(dim);
  const int vd = discard(dim);
  if (vt <= 0 || vd <= 0 || vd >= vt)
    throw std::invalid_argument("nc: need 0 < V_d < V_t");
}

void rls_gain(Eigen::MatrixXd& p, const Eigen::VectorXd& u, double lambda,
              Eigen::VectorXd& g) {
  if (!u.allFinite() || !p.allFinite())
    throw std::invalid_argument("rls_gain: non-finite input");
  const Eigen::VectorXd pu = p * u;
  const double denom = lambda + u.dot(pu);
  p.noalias() -= pu * (pu / denom).transpose();
  p /= lambda;
  // The inversion-lemma update loses symmetry at roundoff level; restore it.
  p = 0.5 * (p + p.transpose()).eval();
  g.noalias() = p * u;
}

double rdrls_adapt(const Eigen::VectorXd& w_prev, const Eigen::VectorXd& g,
                   double e, double xi_prev, Eigen::VectorXd& psi) {
  if (xi_prev < 0.0) throw std::invalid_argument("rdrls_adapt: xi < 0");
  const double denom = g.norm() * std::abs(e);
  double scale = 1.0;
  if (denom > 0.0) scale = std::min(std::sqrt(xi_prev) / denom, 1.0);
  psi = w_prev + (scale * e) * g;
  return scale;
}

double bound_local(double xi_prev, double g_norm2_e2, double beta) {
  if (xi_prev < 0.0 || g_norm2_e2 < 0.0)
    throw std::invalid_argument("bound_local: negative input");
  if (std::isinf(xi_prev)) return xi_prev;  // disabled-constraint sentinel
  // zeta = beta*xi + (1-beta)*min(m, xi), written as xi minus a nonnegative
  // decrement so the result never exceeds xi even after rounding.
  const double clipped = std::min(g_norm2_e2, xi_prev);
  return xi_prev - (1.0 - beta) * (xi_prev - clipped);
}

double bound_update_dcd(double xi_prev, double dw_norm2, double beta) {
  if (xi_prev < 0.0 || dw_norm2 < 0.0)
    throw std::invalid_argument("bound_update_dcd: negative input");
  return beta * xi_prev + (1.0 - beta) * dw_norm2;
}

double bound_combine(const std::vector<double>& zetas,
                     const CombinationMatrix& c, int k) {
  double xi = 0.0;
  double neighborhood_max = 0.0;
  for (int m : c.neighborhoods()[k]) {
    xi += c(m, k) * zetas[m];
    neighborhood_max = std::max(neighborhood_max, zetas[m]);
  }
  return std::min(xi, neighborhood_max);
}

Eigen::VectorXd combine(const std::vector<Eigen::VectorXd>& psis,
                        const CombinationMatrix& c, int k) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(psis[k].size());
  for (int m : c.neighborhoods()[k]) w += c(m, k) * psis[m];
  return w;
}

Eigen::VectorXd dlms_adapt(const Eigen::VectorXd& w_prev,
                           const Eigen::VectorXd& u, double e, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("dlms: mu must be > 0");
  return w_prev + (mu * e) * u;
}

Eigen::VectorXd dselms_adapt(const Eigen::VectorXd& w_prev,
                             const Eigen::VectorXd& u, double e, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("dselms: mu must be > 0");
  const double s = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
  return w_prev + (mu * s) * u;
}

double xi_init(double ec, double sigma_d2, double sigma_u2, int dim) {
  if (!(ec > 0.0 && sigma_d2 > 0.0 && dim > 0))
    throw std::invalid_argument("xi_init: inputs must be positive");
  if (!(sigma_u2 > 0.0))
    throw std::invalid_argument("xi_init: sigma_u2 must be > 0");
  return ec * sigma_d2 / (dim * sigma_u2);
}

NcState::NcState(int window, int discard)
    : window_(window), discard_(discard) {
  if (window <= 0 || discard <= 0 || discard >= window)
    throw std::invalid_argument("nc: need 0 < V_d < V_t");
  ring_.assign(window_, 0.0);
  scratch_.resize(window_);
}

void NcState::push(double e2, double u_norm2) {
  if (u_norm2 <= 0.0) return;
  ring_[head_] = e2 / u_norm2;
  head_ = (head_ + 1) % window_;
  if (filled_ < window_) ++filled_;
}

void NcState::update_sigma(double tau) {
  scratch_ = ring_;
  std::sort(scratch_.begin(), scratch_.end());
  double trimmed = 0.0;
  for (int j = 0; j < window_ - discard_; ++j) trimmed += scratch_[j];
  sigma_e2_ = tau * sigma_e2_ + (1.0 - tau) * trimmed;
}

NcDecision nc_decide(const std::vector<NcState>& states,
                     const CombinationMatrix& c, int k, int window,
                     int discard, double t_th, double xi_prev, double xi0) {
  double theta_new = 0.0;
  for (int m : c.neighborhoods()[k]) theta_new += c(m, k) * states[m].sigma_e2();
  theta_new /= static_cast<double>(window - discard);

  const double theta_old = states[k].theta_old();
  const double rise = theta_new - theta_old;
  double delta = 0.0;
  if (xi_prev > 0.0)
    delta = rise / xi_prev;
  else if (rise > 0.0)
    delta = std::numeric_limits<double>::infinity();  // forces the reset branch

  NcDecision d;
  d.theta_new = theta_new;
  if (delta > t_th) {
    d.action = NcDecision::Action::kReset;
    d.zeta = xi0;
  } else if (theta_new > theta_old) {
    d.action = NcDecision::Action::kGrow;
    d.zeta = xi_prev + rise;
  }
  return d;
}

}  // namespace diffnet
