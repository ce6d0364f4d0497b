#include "diffnet/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace diffnet {

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "dlms") return Algorithm::kDlms;
  if (name == "dselms") return Algorithm::kDselms;
  if (name == "drls") return Algorithm::kDrls;
  if (name == "rdrls") return Algorithm::kRdrls;
  if (name == "rdrls-nc") return Algorithm::kRdrlsNc;
  if (name == "dcd-drls") return Algorithm::kDcdDrls;
  if (name == "dcd-rdrls") return Algorithm::kDcdRdrls;
  if (name == "dcd-rdrls-nc") return Algorithm::kDcdRdrlsNc;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::kDlms: return "dlms";
    case Algorithm::kDselms: return "dselms";
    case Algorithm::kDrls: return "drls";
    case Algorithm::kRdrls: return "rdrls";
    case Algorithm::kRdrlsNc: return "rdrls-nc";
    case Algorithm::kDcdDrls: return "dcd-drls";
    case Algorithm::kDcdRdrls: return "dcd-rdrls";
    case Algorithm::kDcdRdrlsNc: return "dcd-rdrls-nc";
  }
  return "?";
}

bool maintains_bound(Algorithm alg) {
  return alg == Algorithm::kRdrls || alg == Algorithm::kRdrlsNc ||
         alg == Algorithm::kDcdRdrls || alg == Algorithm::kDcdRdrlsNc;
}

bool uses_nc(Algorithm alg) {
  return alg == Algorithm::kRdrlsNc || alg == Algorithm::kDcdRdrlsNc;
}

bool is_dcd(Algorithm alg) {
  return alg == Algorithm::kDcdDrls || alg == Algorithm::kDcdRdrls ||
         alg == Algorithm::kDcdRdrlsNc;
}

EstimationSource::EstimationSource(const Scenario& scenario,
                                   std::uint64_t master_seed,
                                   std::uint64_t trial)
    : scenario_(scenario) {
  const int n = scenario_.n_nodes();
  if (n <= 0) throw std::invalid_argument("scenario: no nodes");
  if (scenario_.innovation_var.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("scenario: innovation_var size mismatch");
  regressors_.reserve(n);
  noise_rng_.reserve(n);
  cluster_rng_.reserve(n);
  for (int k = 0; k < n; ++k) {
    Ar2Source ar(scenario_.ar_a1, scenario_.ar_a2,
                 scenario_.innovation_var[k]);
    regressors_.emplace_back(scenario_.regressor_mode, scenario_.dim(), ar,
                             make_stream(master_seed, trial, k,
                                         stream::kRegressor));
    noise_rng_.push_back(make_stream(master_seed, trial, k, stream::kNoise));
    cluster_rng_.push_back(
        make_stream(master_seed, trial, k, stream::kCluster));
    cluster_sd_.push_back(
        scenario_.cluster
            ? std::sqrt(scenario_.cluster->variance_scale *
                        scenario_.signal_power(k))
            : 0.0);
  }
}

void EstimationSource::sample(long iter, int node, Eigen::VectorXd& u,
                              double& d) {
  regressors_[node].next(u);
  double v = scenario_.noise[node].sample(noise_rng_[node]);
  if (scenario_.cluster && scenario_.cluster->active(iter))
    v += cluster_rng_[node].normal(0.0, cluster_sd_[node]);
  d = measure(u, scenario_.true_vector(iter), v);
}

namespace {

struct NodeState {
  Eigen::VectorXd w;
  Eigen::VectorXd psi;
  Eigen::VectorXd u;
  Eigen::VectorXd g;
  Eigen::MatrixXd p;                  // exact RLS inverse correlation
  std::unique_ptr<DcdWorkspace> dcd;  // DCD variants
  double d = 0.0;
  double e = 0.0;
  double xi = 0.0;
  double zeta = 0.0;
  double xi0 = 0.0;
  double update_energy = 0.0;
  NcState nc;
};

}  // namespace

TrialResult run_trial(const CombinationMatrix& c, const AlgorithmConfig& cfg,
                      DataSource& source, long n_iters,
                      const std::vector<double>& xi0,
                      const TrialOptions& options) {
  const int n = c.n_nodes();
  const int m = source.dim();
  if (source.n_nodes() != n)
    throw std::invalid_argument("run_trial: node count mismatch");
  cfg.rls.validate();
  const bool bounded = maintains_bound(cfg.alg);
  const bool nc_on = uses_nc(cfg.alg);
  const bool dcd_alg = is_dcd(cfg.alg);
  const bool exact_rls = cfg.alg == Algorithm::kDrls ||
                         cfg.alg == Algorithm::kRdrls ||
                         cfg.alg == Algorithm::kRdrlsNc;
  if (nc_on) cfg.nc.validate(m);
  if (dcd_alg) cfg.dcd.validate();
  const int vt = cfg.nc.window(m);
  const int vd = cfg.nc.discard(m);

  std::vector<NodeState> nodes(n);
  for (int k = 0; k < n; ++k) {
    auto& s = nodes[k];
    s.w = Eigen::VectorXd::Zero(m);
    s.psi = Eigen::VectorXd::Zero(m);
    s.u = Eigen::VectorXd::Zero(m);
    if (exact_rls)
      s.p = (1.0 / cfg.rls.delta) * Eigen::MatrixXd::Identity(m, m);
    if (dcd_alg) s.dcd = std::make_unique<DcdWorkspace>(m, cfg.rls.delta);
    if (bounded) {
      if (cfg.xi0_override)
        s.xi0 = *cfg.xi0_override;
      else if (static_cast<int>(xi0.size()) == n)
        s.xi0 = xi0[k];
      else
        throw std::invalid_argument("run_trial: missing xi0 for bound");
      s.xi = s.xi0;
    }
    if (nc_on) s.nc = NcState(vt, vd);
  }

  TrialResult result;
  result.dev2.resize(n_iters + 1, n);
  if (bounded) {
    result.xi.resize(n_iters + 1, n);
    result.zeta.resize(n_iters + 1, n);
  }
  if (options.record_w_history) {
    result.w_history.resize(n_iters + 1, static_cast<Eigen::Index>(n) * m);
    result.w_history.setZero();
  }

  {
    const Eigen::VectorXd w0 = source.true_vector(0);
    for (int k = 0; k < n; ++k) {
      result.dev2(0, k) = (w0 - nodes[k].w).squaredNorm();
      if (bounded) {
        result.xi(0, k) = nodes[k].xi;
        result.zeta(0, k) = nodes[k].xi;
      }
    }
  }

  std::vector<double> zetas(n, 0.0);
  std::vector<Eigen::VectorXd> psis(n);
  std::vector<NcState> nc_snapshot;

  for (long i = 1; i <= n_iters; ++i) {
    // --- adaptation phase: every node uses only instant i-1 state ---
    for (int k = 0; k < n; ++k) {
      auto& s = nodes[k];
      source.sample(i, k, s.u, s.d);
      switch (cfg.alg) {
        case Algorithm::kDlms:
          s.e = s.d - s.u.dot(s.w);
          s.psi = dlms_adapt(s.w, s.u, s.e, cfg.mu);
          break;
        case Algorithm::kDselms:
          s.e = s.d - s.u.dot(s.w);
          s.psi = dselms_adapt(s.w, s.u, s.e, cfg.mu);
          break;
        case Algorithm::kDrls:
          s.e = s.d - s.u.dot(s.w);
          rls_gain(s.p, s.u, cfg.rls.lambda, s.g);
          s.psi = s.w + s.e * s.g;
          break;
        case Algorithm::kRdrls:
        case Algorithm::kRdrlsNc: {
          s.e = s.d - s.u.dot(s.w);
          rls_gain(s.p, s.u, cfg.rls.lambda, s.g);
          rdrls_adapt(s.w, s.g, s.e, s.xi, s.psi);
          break;
        }
        case Algorithm::kDcdDrls:
          dcd_drls_step(*s.dcd, s.w, s.u, s.d, cfg.rls.lambda, cfg.dcd,
                        s.psi);
          s.e = s.d - s.u.dot(s.w);
          break;
        case Algorithm::kDcdRdrls:
        case Algorithm::kDcdRdrlsNc:
          dcd_rdrls_step(*s.dcd, s.w, s.u, s.d, cfg.rls.lambda, cfg.dcd, s.xi,
                         s.psi);
          s.e = s.d - s.u.dot(s.w);
          break;
      }
      if (bounded || options.observer) {
        s.update_energy = dcd_alg ? s.dcd->dw.squaredNorm()
                                  : (s.psi - s.w).squaredNorm();
      }
      if (bounded) {
        const double xi_prev = s.xi;
        double ratio = 0.0;
        if (s.update_energy > 0.0) {
          if (xi_prev == 0.0)
            ratio = std::numeric_limits<double>::infinity();
          else if (std::isfinite(xi_prev))
            ratio = s.update_energy / xi_prev;
        }
        result.max_constraint_ratio =
            std::max(result.max_constraint_ratio, ratio);
      }
      if (options.observer) {
        options.observer(StepView{i, k, s.u, s.d, s.e, s.w, s.psi,
                                  bounded ? s.xi : kXiInfinity,
                                  s.update_energy});
      }
    }

    // --- bound phase ---
    if (bounded) {
      for (int k = 0; k < n; ++k) {
        auto& s = nodes[k];
        if (dcd_alg)
          s.zeta = bound_update_dcd(s.xi, s.update_energy, cfg.rls.beta);
        else
          s.zeta = bound_local(s.xi, s.g.squaredNorm() * s.e * s.e,
                               cfg.rls.beta);
      }
      if (nc_on) {
        for (int k = 0; k < n; ++k)
          nodes[k].nc.push(nodes[k].e * nodes[k].e, nodes[k].u.squaredNorm());
        bool check = (i % vt == 0);
        if (check)
          for (int k = 0; k < n; ++k) check = check && nodes[k].nc.ring_full();
        if (check) {
          // Step 1 for the whole network first: theta_new at node k combines
          // this instant's smoothed statistics of its neighbors.
          for (int k = 0; k < n; ++k) nodes[k].nc.update_sigma(cfg.nc.tau);
          nc_snapshot.clear();
          for (int k = 0; k < n; ++k) nc_snapshot.push_back(nodes[k].nc);
          for (int k = 0; k < n; ++k) {
            auto& s = nodes[k];
            const NcDecision d = nc_decide(nc_snapshot, c, k, vt, vd,
                                           cfg.nc.t_th, s.xi, s.xi0);
            if (d.action == NcDecision::Action::kReset) {
              s.zeta = d.zeta;
              if (s.dcd)
                s.dcd->reset(cfg.rls.delta);
              else
                s.p = (1.0 / cfg.rls.delta) *
                      Eigen::MatrixXd::Identity(m, m);
              ++result.nc_resets;
            } else if (d.action == NcDecision::Action::kGrow) {
              s.zeta = d.zeta;
            }
            s.nc.set_theta_old(d.theta_new);
          }
        }
      }
      for (int k = 0; k < n; ++k) zetas[k] = nodes[k].zeta;
    }

    // --- combination phase: consumes only psi_m(i), zeta_m(i) ---
    for (int k = 0; k < n; ++k) psis[k] = nodes[k].psi;
    for (int k = 0; k < n; ++k) {
      nodes[k].w = combine(psis, c, k);
      if (bounded) nodes[k].xi = bound_combine(zetas, c, k);
    }

    const Eigen::VectorXd w_true = source.true_vector(i);
    for (int k = 0; k < n; ++k) {
      result.dev2(i, k) = (w_true - nodes[k].w).squaredNorm();
      if (bounded) {
        result.xi(i, k) = nodes[k].xi;
        result.zeta(i, k) = nodes[k].zeta;
      }
      if (options.record_w_history)
        result.w_history.row(i).segment(static_cast<Eigen::Index>(k) * m, m) =
            nodes[k].w.transpose();
    }
  }
  result.w_final.resize(n, m);
  for (int k = 0; k < n; ++k) result.w_final.row(k) = nodes[k].w.transpose();
  return result;
}

}  // namespace diffnet
