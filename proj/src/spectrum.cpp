#include "diffnet/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "diffnet/analysis.hpp"
#include "parallel.hpp"

namespace diffnet {

BasisSet::BasisSet(int n_basis, int n_freq, double f_min, double f_max)
    : m_(n_basis), n_freq_(n_freq), f_min_(f_min), f_max_(f_max) {
  if (n_basis <= 0) throw std::invalid_argument("basis: n_basis must be > 0");
  if (n_freq < n_basis)
    throw std::invalid_argument("basis: need n_freq >= n_basis");
  if (!(f_max > f_min)) throw std::invalid_argument("basis: empty band");
  q_ = Eigen::MatrixXd::Zero(n_freq_, m_);
  for (int iota = 0; iota < n_freq_; ++iota)
    q_(iota, basis_of(grid(iota))) = 1.0;
}

double BasisSet::grid(int iota) const {
  if (iota < 0 || iota >= n_freq_)
    throw std::out_of_range("basis: grid index");
  return f_min_ + (iota + 1) * (f_max_ - f_min_) / n_freq_;
}

int BasisSet::basis_of(double f) const {
  if (f < f_min_ || f > f_max_)
    throw std::out_of_range("basis: frequency outside band");
  // Bin m covers (f_min + (m-1)*D, f_min + m*D]; the grid starts one step
  // above f_min, so every grid point lands in exactly one bin. The small
  // slack keeps edge frequencies in the closed (lower) bin despite rounding.
  const double width = (f_max_ - f_min_) / m_;
  const double ratio = (f - f_min_) / width;
  const int idx = static_cast<int>(std::ceil(ratio - 1e-9)) - 1;
  return std::clamp(idx, 0, m_ - 1);
}

Eigen::VectorXd BasisSet::row(int iota) const {
  if (iota < 0 || iota >= n_freq_)
    throw std::out_of_range("basis: grid index");
  return q_.row(iota).transpose();
}

Eigen::VectorXd BasisSet::evaluate(double f) const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(m_);
  q[basis_of(f)] = 1.0;
  return q;
}

double psd_true(const BasisSet& basis, const Eigen::VectorXd& w, double f) {
  if (w.size() != basis.n_basis())
    throw std::invalid_argument("psd: power vector size mismatch");
  return basis.evaluate(f).dot(w);
}

Eigen::VectorXd SpectrumScenario::sparse_powers(int n_basis, int active,
                                                double power,
                                                std::uint64_t seed) {
  if (active <= 0 || active > n_basis)
    throw std::invalid_argument("spectrum: invalid active count");
  Rng rng = make_stream(seed, stream::kScenarioTag, 0, stream::kTrueVector);
  std::vector<int> indices(n_basis);
  std::iota(indices.begin(), indices.end(), 0);
  // Fisher-Yates prefix shuffle; the first `active` entries are the support.
  for (int j = 0; j < active; ++j) {
    const int pick = j + static_cast<int>(rng.below(n_basis - j));
    std::swap(indices[j], indices[pick]);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_basis);
  for (int j = 0; j < active; ++j) w[indices[j]] = power;
  return w;
}

void spectrum_measure(const SpectrumScenario& scenario, const BasisSet& basis,
                      int node, int iota, Rng& noise_rng, Eigen::VectorXd& u,
                      double& d) {
  u = scenario.channel_gain[node] * basis.row(iota);
  const double v = scenario.obs_noise[node].sample(noise_rng);
  d = u.dot(scenario.w_true) + v;
}

SpectrumSource::SpectrumSource(const SpectrumScenario& scenario,
                               const BasisSet& basis,
                               std::uint64_t master_seed, std::uint64_t trial)
    : scenario_(scenario), basis_(basis) {
  const int n = scenario_.n_nodes();
  if (static_cast<int>(scenario_.channel_gain.size()) != n)
    throw std::invalid_argument("spectrum: channel gain size mismatch");
  if (scenario_.w_true.size() != basis_.n_basis())
    throw std::invalid_argument("spectrum: power vector size mismatch");
  for (int k = 0; k < n; ++k) {
    noise_rng_.push_back(make_stream(master_seed, trial, k, stream::kNoise));
    schedule_rng_.push_back(
        make_stream(master_seed, trial, k, stream::kSchedule));
  }
}

void SpectrumSource::sample(long iter, int node, Eigen::VectorXd& u,
                            double& d) {
  int iota;
  if (scenario_.schedule == FrequencySchedule::kRoundRobin)
    iota = static_cast<int>((iter - 1) % basis_.n_freq());
  else
    iota = static_cast<int>(schedule_rng_[node].below(basis_.n_freq()));
  spectrum_measure(scenario_, basis_, node, iota, noise_rng_[node], u, d);
}

SpectrumRunResult run_spectrum(const CombinationMatrix& c,
                               const AlgorithmConfig& cfg,
                               const SpectrumScenario& scenario,
                               const BasisSet& basis, long n_iters,
                               int n_trials, std::uint64_t master_seed,
                               int n_threads) {
  const int n = scenario.n_nodes();
  const int m = basis.n_basis();
  if (n_trials < 1) throw std::invalid_argument("spectrum: n_trials >= 1");

  Eigen::MatrixXd dev2_sum = Eigen::MatrixXd::Zero(n_iters + 1, n);
  Eigen::MatrixXd w_sum = Eigen::MatrixXd::Zero(n, m);

  struct Piece {
    Eigen::MatrixXd dev2;
    Eigen::MatrixXd w_final;
  };
  parallel_trials<Piece>(
      n_trials, n_threads,
      [&](int trial) {
        SpectrumSource source(scenario, basis, master_seed, trial);
        std::vector<double> no_xi0;
        TrialResult r = run_trial(c, cfg, source, n_iters, no_xi0);
        return Piece{std::move(r.dev2), std::move(r.w_final)};
      },
      [&](int, Piece& p) {
        dev2_sum += p.dev2;
        w_sum += p.w_final;
      });

  SpectrumRunResult out;
  out.node_msd_db.resize(n_iters + 1, n);
  out.net_msd_db.resize(n_iters + 1);
  const double inv_trials = 1.0 / static_cast<double>(n_trials);
  for (long i = 0; i <= n_iters; ++i) {
    double net = 0.0;
    for (int k = 0; k < n; ++k) {
      const double lin = dev2_sum(i, k) * inv_trials;
      out.node_msd_db(i, k) = to_db(lin);
      net += lin;
    }
    out.net_msd_db[i] = to_db(net / n);
  }
  out.final_estimates = w_sum * inv_trials;
  out.psd_estimates.resize(n, basis.n_freq());
  for (int k = 0; k < n; ++k)
    out.psd_estimates.row(k) =
        (basis.q() * out.final_estimates.row(k).transpose()).transpose();
  return out;
}

}  // namespace diffnet
