#include "diffnet/signals.hpp"

#include <cmath>

namespace diffnet {

std::vector<double> Ar2Source::yule_walker(double a1, double a2,
                                           double innovation_var,
                                           int max_lag) {
  // Stability of the AR(2) polynomial: |a2| < 1, a2 +/- a1 < 1.
  if (!(std::abs(a2) < 1.0 && a1 + a2 < 1.0 && a2 - a1 < 1.0))
    throw std::invalid_argument("ar2: unstable coefficient pair");
  const double r0 = innovation_var * (1.0 - a2) /
                    ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1);
  r[0] = r0;
  if (max_lag >= 1) r[1] = a1 * r0 / (1.0 - a2);
  for (int lag = 2; lag <= max_lag; ++lag)
    r[lag] = a1 * r[lag - 1] + a2 * r[lag - 2];
  return r;
}

RegressorSource::RegressorSource(RegressorMode mode, int dim,
                                 const Ar2Source& ar, Rng rng, int warmup)
    : mode_(mode), dim_(dim), ar_(ar), rng_(rng) {
  if (dim <= 0) throw std::invalid_argument("regressor: dim must be positive");
  if (mode_ == RegressorMode::kShift) {
    delay_line_.assign(dim_, 0.0);
    // Discard a transient so the delay line starts from the stationary
    // distribution.
    for (int i = 0; i < warmup; ++i) ar_.next(rng_);
    for (int i = 0; i < dim_; ++i) {
      // delay_line_[0] is the newest sample.
      for (int j = dim_ - 1; j > 0; --j) delay_line_[j] = delay_line_[j - 1];
      delay_line_[0] = ar_.next(rng_);
    }
  }
}

void RegressorSource::next(Eigen::VectorXd& u) {
  u.resize(dim_);
  if (mode_ == RegressorMode::kShift) {
    for (int j = dim_ - 1; j > 0; --j) delay_line_[j] = delay_line_[j - 1];
    delay_line_[0] = ar_.next(rng_);
    for (int j = 0; j < dim_; ++j) u[j] = delay_line_[j];
  } else {
    const double sd = std::sqrt(ar_.innovation_var());
    for (int j = 0; j < dim_; ++j) u[j] = rng_.normal(0.0, sd);
  }
}

double RegressorSource::entry_variance() const {
  if (mode_ == RegressorMode::kShift)
    return Ar2Source::yule_walker(ar_.a1(), ar_.a2(), ar_.innovation_var(),
                                  0)[0];
  return ar_.innovation_var();
}

Eigen::MatrixXd RegressorSource::covariance() const {
  Eigen::MatrixXd r_mat(dim_, dim_);
  if (mode_ == RegressorMode::kShift) {
    const auto r = Ar2Source::yule_walker(ar_.a1(), ar_.a2(),
                                          ar_.innovation_var(), dim_ - 1);
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) r_mat(a, b) = r[std::abs(a - b)];
  } else {
    r_mat = ar_.innovation_var() * Eigen::MatrixXd::Identity(dim_, dim_);
  }
  return r_mat;
}

NoiseModel NoiseModel::gaussian(double theta_var) {
  if (theta_var < 0.0) throw std::invalid_argument("noise: negative variance");
  NoiseModel m;
  m.kind = NoiseKind::kGaussian;
  m.theta_var = theta_var;
  return m;
}

NoiseModel NoiseModel::contaminated(double theta_var, double pr, double hbar) {
  if (theta_var < 0.0) throw std::invalid_argument("noise: negative variance");
  if (pr < 0.0 || pr > 1.0)
    throw std::invalid_argument("noise: pr must lie in [0,1]");
  if (hbar < 0.0) throw std::invalid_argument("noise: hbar must be >= 0");
  NoiseModel m;
  m.kind = NoiseKind::kContaminatedGaussian;
  m.theta_var = theta_var;
  m.pr = pr;
  m.hbar = hbar;
  return m;
}

NoiseModel NoiseModel::alpha_stable(double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("noise: alpha must lie in (0,2]");
  if (!(gamma > 0.0)) throw std::invalid_argument("noise: gamma must be > 0");
  NoiseModel m;
  m.kind = NoiseKind::kAlphaStable;
  m.alpha = alpha;
  m.gamma = gamma;
  m.theta_var = 0.0;
  return m;
}

double NoiseModel::sample(Rng& rng) const {
  switch (kind) {
    case NoiseKind::kGaussian:
      return rng.normal(0.0, std::sqrt(theta_var));
    case NoiseKind::kContaminatedGaussian: {
      double v = rng.normal(0.0, std::sqrt(theta_var));
      if (rng.bernoulli(pr)) v += rng.normal(0.0, std::sqrt(hbar * theta_var));
      return v;
    }
    case NoiseKind::kAlphaStable:
      return sample_alpha_stable(alpha, gamma, rng);
  }
  throw std::logic_error("noise: unknown kind");
}

double NoiseModel::nominal_variance() const {
  switch (kind) {
    case NoiseKind::kGaussian:
      return theta_var;
    case NoiseKind::kContaminatedGaussian:
      return pr * (hbar + 1.0) * theta_var + (1.0 - pr) * theta_var;
    case NoiseKind::kAlphaStable:
      return 2.0 * std::pow(gamma, 2.0 / alpha);
  }
  throw std::logic_error("noise: unknown kind");
}

double sample_alpha_stable(double alpha, double gamma, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("alpha_stable: alpha must lie in (0,2]");
  if (!(gamma > 0.0))
    throw std::invalid_argument("alpha_stable: gamma must be > 0");
  const double half_pi = 1.5707963267948966192313216916398;
  const double v = rng.uniform(-half_pi, half_pi);
  const double w = rng.exponential();
  const double scale = std::pow(gamma, 1.0 / alpha);
  if (alpha == 1.0) return scale * std::tan(v);
  const double x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
  return scale * x;
}

double measure(const Eigen::VectorXd& u, const Eigen::VectorXd& w_true,
               double noise) {
  if (u.size() != w_true.size())
    throw std::invalid_argument("measure: dimension mismatch");
  return u.dot(w_true) + noise;
}

Eigen::MatrixXd Scenario::input_covariance(int node) const {
  if (node < 0 || node >= n_nodes())
    throw std::out_of_range("scenario: node index");
  const int m = dim();
  if (regressor_mode == RegressorMode::kShift) {
    const auto r = Ar2Source::yule_walker(ar_a1, ar_a2, innovation_var[node],
                                          m - 1);
    Eigen::MatrixXd r_mat(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) r_mat(a, b) = r[std::abs(a - b)];
    return r_mat;
  }
  return innovation_var[node] * Eigen::MatrixXd::Identity(m, m);
}

double Scenario::signal_power(int node) const {
  const Eigen::MatrixXd r = input_covariance(node);
  return w_true.dot(r * w_true);
}

double Scenario::measurement_power(int node) const {
  return signal_power(node) + noise[node].nominal_variance();
}

double Scenario::input_power(int node) const {
  if (regressor_mode == RegressorMode::kShift)
    return Ar2Source::yule_walker(ar_a1, ar_a2, innovation_var[node], 0)[0];
  return innovation_var[node];
}

Eigen::VectorXd random_unit_vector(int dim, std::uint64_t seed) {
  Rng rng = make_stream(seed, stream::kScenarioTag, 0, stream::kTrueVector);
  Eigen::VectorXd w(dim);
  for (int j = 0; j < dim; ++j) w[j] = rng.uniform(-1.0, 1.0);
  const double norm = w.norm();
  if (norm == 0.0) w[0] = 1.0;  // vanishing draw, fall back to a basis vector
  else w /= norm;
  return w;
}

std::vector<double> uniform_profile(int count, double lo, double hi,
                                    std::uint64_t seed, std::uint64_t tag) {
  Rng rng = make_stream(seed, stream::kScenarioTag, tag, stream::kProfile);
  std::vector<double> values(count);
  for (auto& v : values) v = rng.uniform(lo, hi);
  return values;
}

}  // namespace diffnet
