#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace diffnet {

/// Dichotomous coordinate-descent parameters: H is the amplitude range (a
/// power of two), Mb the bit budget, Nu the maximum number of coordinate
/// updates per solve.
struct DcdParams {
  double h = 4.0;
  int mb = 16;
  int nu = 4;
  bool shift_structured = false;

  void validate() const;
};

/// Per-node state of the DCD-based recursions: the exponentially weighted
/// correlation matrix, the warm-start residual and the last increment.
struct DcdWorkspace {
  Eigen::MatrixXd phi;
  Eigen::VectorXd r;
  Eigen::VectorXd b;
  Eigen::VectorXd dw;
  long long add_count = 0;  // running tally of additions across solves

  explicit DcdWorkspace(int dim, double delta);
  void reset(double delta);
};

/// Correlation update phi' = lambda*phi + u u^T. The shift path copies the
/// upper-left (M-1)x(M-1) block into the lower-right and recomputes only the
/// first column (mirrored into the first row); valid only when u is a delay
/// line over a scalar stream.
void phi_update(Eigen::MatrixXd& phi, const Eigen::VectorXd& u, double lambda,
                bool shift_structured);

/// One DCD solve of phi * dw = b. workspace.b must be set; dw and r are
/// (re)initialized internally. Additions are counted as M per residual
/// update, 1 per dw update and 1 per while-condition evaluation, and
/// accumulated into workspace.add_count. Returns the additions of this solve.
long long dcd_solve(DcdWorkspace& ws, const DcdParams& params);

/// DCD-dRLS adaptation: e = d - u^T w_prev, correlation and right-hand-side
/// updates, one DCD solve, psi = w_prev + dw.
void dcd_drls_step(DcdWorkspace& ws, const Eigen::VectorXd& w_prev,
                   const Eigen::VectorXd& u, double d, double lambda,
                   const DcdParams& params, Eigen::VectorXd& psi);

/// Robust DCD step. Solves once; if the increment energy exceeds xi_prev
/// (kappa = 1), rebuilds the right-hand side with the shrunk error term,
/// resolves, and rescales the increment onto the constraint sphere. Returns
/// kappa.
int dcd_rdrls_step(DcdWorkspace& ws, const Eigen::VectorXd& w_prev,
                   const Eigen::VectorXd& u, double d, double lambda,
                   const DcdParams& params, double xi_prev,
                   Eigen::VectorXd& psi);

}  // namespace diffnet
