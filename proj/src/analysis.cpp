#include "diffnet/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace diffnet {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("analysis: covariance must be SPD");
  return llt;
}

void draw_gaussian(const Eigen::LLT<Eigen::MatrixXd>& llt, Rng& rng,
                   Eigen::VectorXd& z, Eigen::VectorXd& u) {
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  u.noalias() = llt.matrixL() * z;
}
}  // namespace

ChiEstimate estimate_chi(const Eigen::MatrixXd& r, long n_samples, Rng& rng) {
  if (n_samples <= 1) throw std::invalid_argument("estimate_chi: n_samples");
  const auto llt = checked_llt(r);
  const Eigen::MatrixXd r_inv =
      llt.solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  Eigen::VectorXd z(r.rows()), u(r.rows()), t(r.rows());
  double sum = 0.0, sum2 = 0.0;
  for (long s = 0; s < n_samples; ++s) {
    draw_gaussian(llt, rng, z, u);
    t.noalias() = r_inv * u;
    const double v = 1.0 / t.norm();
    sum += v;
    sum2 += v * v;
  }
  ChiEstimate est;
  est.value = sum / static_cast<double>(n_samples);
  const double var =
      (sum2 / static_cast<double>(n_samples)) - est.value * est.value;
  est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_samples));
  return est;
}

double chi_identity(int dim) {
  if (dim < 2) throw std::invalid_argument("chi_identity: dim must be >= 2");
  return std::exp(std::lgamma(0.5 * (dim - 1)) - std::lgamma(0.5 * dim)) /
         std::sqrt(2.0);
}

double varpi(const Eigen::MatrixXd& w_block, const Eigen::MatrixXd& r,
             double pr, double hbar, double sigma_theta2) {
  if (!(sigma_theta2 > 0.0))
    throw std::invalid_argument("varpi: sigma_theta2 must be > 0");
  const double trace_wr = (w_block * r).trace();
  if (trace_wr < -1e-12 * (1.0 + w_block.norm() * r.norm()))
    throw std::invalid_argument("varpi: negative tr(WR)");
  const double t = std::max(trace_wr, 0.0);
  return std::sqrt(2.0 / kPi) *
         (pr / std::sqrt(t + (hbar + 1.0) * sigma_theta2) +
          (1.0 - pr) / std::sqrt(t + sigma_theta2));
}

Eigen::MatrixXd breve_r_block(const Eigen::MatrixXd& r, double omega2,
                              long n_samples, Rng& rng) {
  if (omega2 < 0.0) throw std::invalid_argument("breve_r: omega2 < 0");
  const auto m = r.rows();
  if (omega2 == 0.0) return Eigen::MatrixXd::Zero(m, m);
  const auto llt = checked_llt(r);
  const Eigen::MatrixXd r_inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
  Eigen::VectorXd z(m), u(m), t(m);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  for (long s = 0; s < n_samples; ++s) {
    draw_gaussian(llt, rng, z, u);
    t.noalias() = r_inv * u;
    // outer product of the unit-normalized gain direction: every sample
    // contributes trace one, so the block's trace is exactly omega2
    acc.noalias() += (t * t.transpose()) / t.squaredNorm();
  }
  acc *= omega2 / static_cast<double>(n_samples);
  return 0.5 * (acc + acc.transpose());
}

TheoryModel::TheoryModel(const CombinationMatrix& c,
                         std::vector<Eigen::MatrixXd> input_cov,
                         std::vector<double> pr, std::vector<double> hbar,
                         std::vector<double> sigma_theta2, double beta,
                         const Eigen::VectorXd& w_true, long mc_samples,
                         std::uint64_t seed)
    : n_(c.n_nodes()),
      m_(static_cast<int>(w_true.size())),
      beta_(beta),
      r_(std::move(input_cov)),
      pr_(std::move(pr)),
      hbar_(std::move(hbar)),
      sigma_theta2_(std::move(sigma_theta2)) {
  if (static_cast<int>(r_.size()) != n_ ||
      static_cast<int>(pr_.size()) != n_ ||
      static_cast<int>(hbar_.size()) != n_ ||
      static_cast<int>(sigma_theta2_.size()) != n_)
    throw std::invalid_argument("theory: per-node input size mismatch");
  for (const auto& r : r_)
    if (r.rows() != m_ || r.cols() != m_)
      throw std::invalid_argument("theory: covariance dimension mismatch");
  c_lift_ = c.kron_identity(m_);

  chi_.resize(n_);
  g_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    Rng rng = make_stream(seed, stream::kScenarioTag, k, 101);
    chi_[k] = estimate_chi(r_[k], mc_samples, rng).value;
    // The time-invariant factor of the breve-R blocks; Omega^2 scales it
    // per iteration.
    g_[k] = breve_r_block(r_[k], 1.0, mc_samples, rng);
  }

  // Zero-initialized estimates: the initial deviation is col{w_o,...,w_o}
  // deterministically, so W_0 has w_o w_o^T in every block.
  const Eigen::MatrixXd block = w_true * w_true.transpose();
  w_.resize(n_ * m_, n_ * m_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) w_.block(a * m_, b * m_, m_, m_) = block;
}

int TheoryModel::step(const BoundTraces& traces, long i) {
  if (i < 1 || i > traces.n_iters())
    throw std::out_of_range("theory: iteration outside trace range");
  if (traces.n_nodes() != n_)
    throw std::invalid_argument("theory: trace node count mismatch");

  int clamped = 0;
  Eigen::VectorXd d_scale(n_ * m_);
  Eigen::VectorXd omega2(n_);
  for (int k = 0; k < n_; ++k) {
    const double rad =
        (traces.e_zeta(i, k) - beta_ * traces.e_xi(i - 1, k)) / (1.0 - beta_);
    double o2 = rad;
    if (rad < 0.0) {
      o2 = 0.0;
      ++clamped;
    }
    omega2[k] = o2;
    const double lam = chi_[k] * varpi(w_.block(k * m_, k * m_, m_, m_),
                                       r_[k], pr_[k], hbar_[k],
                                       sigma_theta2_[k]);
    d_scale.segment(k * m_, m_).setConstant(lam * std::sqrt(o2));
  }

  // S = W - W D - D W + D (W - W_breve) D + R_breve, with D diagonal.
  Eigen::MatrixXd s = w_;
  s -= w_ * d_scale.asDiagonal();
  s -= d_scale.asDiagonal() * w_;
  Eigen::MatrixXd centered = w_;
  for (int k = 0; k < n_; ++k) {
    centered.block(k * m_, k * m_, m_, m_).setZero();
  }
  s += d_scale.asDiagonal() * centered * d_scale.asDiagonal();
  for (int k = 0; k < n_; ++k)
    s.block(k * m_, k * m_, m_, m_) += omega2[k] * g_[k];

  w_ = c_lift_.transpose() * s * c_lift_;
  w_ = 0.5 * (w_ + w_.transpose()).eval();
  return clamped;
}

void TheoryModel::msd(Eigen::VectorXd& per_node, double& network) const {
  per_node.resize(n_);
  for (int k = 0; k < n_; ++k)
    per_node[k] = w_.block(k * m_, k * m_, m_, m_).trace();
  network = w_.trace() / static_cast<double>(n_);
}

double to_db(double linear) {
  if (!(linear > 0.0)) return -200.0;
  return std::max(10.0 * std::log10(linear), -200.0);
}

TheoryTrace run_theory(TheoryModel& model, const BoundTraces& traces) {
  const long t = traces.n_iters();
  TheoryTrace out;
  out.node_db.resize(t + 1, model.n_nodes());
  out.net_db.resize(t + 1);
  Eigen::VectorXd per_node;
  double network = 0.0;
  model.msd(per_node, network);
  for (int k = 0; k < model.n_nodes(); ++k)
    out.node_db(0, k) = to_db(per_node[k]);
  out.net_db[0] = to_db(network);
  for (long i = 1; i <= t; ++i) {
    out.clamped += model.step(traces, i);
    model.msd(per_node, network);
    for (int k = 0; k < model.n_nodes(); ++k)
      out.node_db(i, k) = to_db(per_node[k]);
    out.net_db[i] = to_db(network);
  }
  return out;
}

ApproxCheck appendix_check(const CombinationMatrix& c,
                           const AlgorithmConfig& cfg,
                           const Scenario& scenario,
                           const std::vector<double>& xi0, long n_iters,
                           int n_trials, std::uint64_t master_seed,
                           const std::vector<int>& nodes, long mc_samples) {
  const int m = scenario.dim();
  ApproxCheck out;
  out.nodes = nodes;
  out.lhs = Eigen::MatrixXd::Zero(n_iters + 1, nodes.size());
  out.rhs = Eigen::MatrixXd::Zero(n_iters + 1, nodes.size());

  std::vector<Eigen::MatrixXd> r_inv(nodes.size());
  std::vector<double> chi(nodes.size());
  std::vector<int> column_of(scenario.n_nodes(), -1);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Eigen::MatrixXd r = scenario.input_covariance(nodes[j]);
    r_inv[j] = r.llt().solve(Eigen::MatrixXd::Identity(m, m));
    Rng rng = make_stream(master_seed, stream::kScenarioTag, nodes[j], 102);
    chi[j] = estimate_chi(r, mc_samples, rng).value;
    column_of[nodes[j]] = static_cast<int>(j);
  }

  for (int trial = 0; trial < n_trials; ++trial) {
    EstimationSource source(scenario, master_seed, trial);
    TrialOptions options;
    options.observer = [&](const StepView& view) {
      const int col = column_of[view.node];
      if (col < 0) return;
      const Eigen::VectorXd deviation =
          scenario.true_vector(view.iter) - view.w_prev;
      const Eigen::VectorXd ru = r_inv[col] * view.u;
      const double ea_r = deviation.dot(ru);
      const double sign_e =
          view.e > 0.0 ? 1.0 : (view.e < 0.0 ? -1.0 : 0.0);
      out.lhs(view.iter, col) += ea_r / ru.norm() * sign_e;
      out.rhs(view.iter, col) += chi[col] * ea_r * sign_e;
    };
    run_trial(c, cfg, source, n_iters, xi0, options);
  }
  out.lhs /= static_cast<double>(n_trials);
  out.rhs /= static_cast<double>(n_trials);
  return out;
}

OpCounts complexity_table(const std::string& name, int m, int n_k, int kappa,
                          long long c_dcd_plus) {
  if (m <= 0 || n_k <= 0 || kappa < 0 || kappa > 1 || c_dcd_plus < 0)
    throw std::invalid_argument("complexity: invalid inputs");
  const long long mm = m, nk = n_k, kp = kappa, cd = c_dcd_plus;
  OpCounts ops;
  if (name == "dlms") {
    ops.multiplications = nk * mm + 2 * mm + 1;
    ops.additions = nk * mm + mm;
  } else if (name == "drls") {
    ops.multiplications = nk * mm + 4 * mm * mm + 3 * mm;
    ops.additions = nk * mm + 3 * mm * mm;
    ops.divisions = mm;
  } else if (name == "dcd-drls") {
    ops.multiplications = nk * mm + 2 * mm * mm + 3 * mm;
    ops.additions = nk * mm + mm * mm + 2 * mm + cd;
  } else if (name == "dcd-drls-shift") {
    ops.multiplications = nk * mm + 5 * mm;
    ops.additions = nk * mm + 3 * mm + cd;
  } else if (name == "rdrls") {
    ops.multiplications = nk * (mm + 1) + 4 * mm * mm + 4 * mm + 5;
    ops.additions = nk * (mm + 1) + 3 * mm * mm + mm + 1;
    ops.divisions = mm + 1;
    ops.square_roots = 1;
  } else if (name == "dcd-rdrls") {
    ops.multiplications = nk * (mm + 1) + 2 * mm * mm + 4 * mm + 3 * kp * mm + 2;
    ops.additions = nk * (mm + 1) + mm * mm + 3 * mm + kp * (2 * mm - 1 + cd) + cd;
    ops.divisions = 2 * kp;
    ops.square_roots = 2 * kp;
  } else if (name == "dcd-rdrls-shift") {
    ops.multiplications = nk * (mm + 1) + 6 * mm + 3 * kp * mm + 2;
    ops.additions = nk * (mm + 1) + 4 * mm + kp * (2 * mm - 1 + cd) + cd;
    ops.divisions = 2 * kp;
    ops.square_roots = 2 * kp;
  } else {
    throw std::invalid_argument("complexity: unknown algorithm " + name);
  }
  return ops;
}

}  // namespace diffnet
