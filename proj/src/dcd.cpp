#include "diffnet/dcd.hpp"

#include <cmath>
#include <stdexcept>

namespace diffnet {

namespace {
bool is_power_of_two(double x) {
  if (!(x > 0.0)) return false;
  int exp = 0;
  return std::frexp(x, &exp) == 0.5;
}
}  // namespace

void DcdParams::validate() const {
  if (!is_power_of_two(h))
    throw std::invalid_argument("dcd: H must be a positive power of two");
  if (mb < 1) throw std::invalid_argument("dcd: Mb must be >= 1");
  if (nu < 1) throw std::invalid_argument("dcd: Nu must be >= 1");
}

DcdWorkspace::DcdWorkspace(int dim, double delta) {
  if (dim <= 0) throw std::invalid_argument("dcd: dim must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("dcd: delta must be > 0");
  phi = delta * Eigen::MatrixXd::Identity(dim, dim);
  r = Eigen::VectorXd::Zero(dim);
  b = Eigen::VectorXd::Zero(dim);
  dw = Eigen::VectorXd::Zero(dim);
}

void DcdWorkspace::reset(double delta) {
  const auto dim = phi.rows();
  phi = delta * Eigen::MatrixXd::Identity(dim, dim);
  r.setZero();
  dw.setZero();
}

void phi_update(Eigen::MatrixXd& phi, const Eigen::VectorXd& u, double lambda,
                bool shift_structured) {
  const auto m = phi.rows();
  if (u.size() != m) throw std::invalid_argument("phi_update: size mismatch");
  if (!shift_structured) {
    phi *= lambda;
    phi.noalias() += u * u.transpose();
    return;
  }
  // Shift path: the lower-right block of phi_i is the upper-left block of
  // phi_{i-1}; only the first column is recomputed, then mirrored.
  const Eigen::MatrixXd upper_left = phi.topLeftCorner(m - 1, m - 1);
  phi.bottomRightCorner(m - 1, m - 1) = upper_left;
  phi.col(0) = lambda * phi.col(0) + u[0] * u;
  phi.row(0).tail(m - 1) = phi.col(0).tail(m - 1).transpose();
}

long long dcd_solve(DcdWorkspace& ws, const DcdParams& params) {
  const auto m = ws.phi.rows();
  for (Eigen::Index l = 0; l < m; ++l)
    if (!(ws.phi(l, l) > 0.0))
      throw std::invalid_argument("dcd_solve: non-positive diagonal entry");

  ws.dw.setZero();
  ws.r = ws.b;
  double mu = params.h / 2.0;
  int y = 1;
  long long adds = 0;

  for (int pass = 0; pass < params.nu; ++pass) {
    // argmax |r_j|, ties resolved toward the lowest index
    Eigen::Index l = 0;
    double best = std::abs(ws.r[0]);
    for (Eigen::Index j = 1; j < m; ++j) {
      const double a = std::abs(ws.r[j]);
      if (a > best) {
        best = a;
        l = j;
      }
    }
    while (true) {
      ++adds;  // comparison counts as an addition
      if (!(std::abs(ws.r[l]) <= 0.5 * mu * ws.phi(l, l) && y <= params.mb))
        break;
      ++y;
      mu *= 0.5;
    }
    if (y > params.mb) break;
    const double step = ws.r[l] > 0.0 ? mu : -mu;
    ws.dw[l] += step;
    ++adds;
    ws.r.noalias() -= step * ws.phi.col(l);
    adds += m;
  }
  ws.add_count += adds;
  return adds;
}

void dcd_drls_step(DcdWorkspace& ws, const Eigen::VectorXd& w_prev,
                   const Eigen::VectorXd& u, double d, double lambda,
                   const DcdParams& params, Eigen::VectorXd& psi) {
  const double e = d - u.dot(w_prev);
  phi_update(ws.phi, u, lambda, params.shift_structured);
  ws.b = lambda * ws.r + e * u;
  // The solve leaves ws.r at the incrementally maintained residual
  // b - phi*dw, which warm-starts the next instant.
  dcd_solve(ws, params);
  psi = w_prev + ws.dw;
}

int dcd_rdrls_step(DcdWorkspace& ws, const Eigen::VectorXd& w_prev,
                   const Eigen::VectorXd& u, double d, double lambda,
                   const DcdParams& params, double xi_prev,
                   Eigen::VectorXd& psi) {
  if (xi_prev < 0.0) throw std::invalid_argument("dcd_rdrls: xi < 0");
  const double e = d - u.dot(w_prev);
  const Eigen::VectorXd r_warm = ws.r;  // r_{k,i-1}, reused if we re-solve
  phi_update(ws.phi, u, lambda, params.shift_structured);
  ws.b = lambda * r_warm + e * u;
  dcd_solve(ws, params);

  int kappa = 0;
  const double energy1 = ws.dw.squaredNorm();
  if (energy1 > xi_prev) {
    kappa = 1;
    const double shrink = std::sqrt(xi_prev) / std::sqrt(energy1);
    ws.b = lambda * r_warm + (shrink * e) * u;
    dcd_solve(ws, params);
    // The increment is rescaled onto the constraint sphere; the stored
    // residual stays at the second solve's value.
    const double norm2 = ws.dw.norm();
    if (norm2 > 0.0) {
      ws.dw *= std::sqrt(xi_prev) / norm2;
    } else {
      ws.dw.setZero();  // degenerate re-solve, skip the update
    }
  }
  psi = w_prev + ws.dw;
  return kappa;
}

}  // namespace diffnet
