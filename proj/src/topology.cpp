#include "diffnet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "diffnet/rng.hpp"

namespace diffnet {

Topology::Topology(int n_nodes, std::vector<std::uint8_t> adjacency)
    : n_(n_nodes), adj_(std::move(adjacency)) {
  if (n_ <= 0) throw std::invalid_argument("topology: n_nodes must be positive");
  if (adj_.size() != static_cast<std::size_t>(n_) * n_)
    throw std::invalid_argument("topology: adjacency size mismatch");
  for (int k = 0; k < n_; ++k) {
    if (!adj_[idx(k, k)])
      throw std::invalid_argument("topology: adjacency diagonal must be true");
    for (int m = 0; m < k; ++m) {
      if (adj_[idx(m, k)] != adj_[idx(k, m)])
        throw std::invalid_argument("topology: adjacency must be symmetric");
    }
  }
  neighborhoods_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    for (int m = 0; m < n_; ++m) {
      if (adj_[idx(m, k)]) neighborhoods_[k].push_back(m);
    }
  }
}

Topology Topology::isolated(int n_nodes) {
  if (n_nodes <= 0)
    throw std::invalid_argument("topology: n_nodes must be positive");
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n_nodes) * n_nodes, 0);
  for (int k = 0; k < n_nodes; ++k)
    adj[static_cast<std::size_t>(k) * n_nodes + k] = 1;
  return Topology(n_nodes, std::move(adj));
}

Topology Topology::from_edges(int n_nodes,
                              const std::vector<std::pair<int, int>>& edges) {
  if (n_nodes <= 0)
    throw std::invalid_argument("topology: n_nodes must be positive");
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n_nodes) * n_nodes, 0);
  auto at = [&](int m, int k) -> std::uint8_t& {
    return adj[static_cast<std::size_t>(m) * n_nodes + k];
  };
  for (int k = 0; k < n_nodes; ++k) at(k, k) = 1;
  for (const auto& [m, k] : edges) {
    if (m < 0 || m >= n_nodes || k < 0 || k >= n_nodes)
      throw std::invalid_argument("topology: edge endpoint out of range");
    at(m, k) = 1;
    at(k, m) = 1;
  }
  return Topology(n_nodes, std::move(adj));
}

Topology Topology::random_geometric(int n_nodes, double radius,
                                    std::uint64_t seed, int max_attempts) {
  if (radius <= 0.0)
    throw std::invalid_argument("topology: radius must be positive");
  Rng rng = make_stream(seed, stream::kScenarioTag, 0, stream::kTopology);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<double> x(n_nodes), y(n_nodes);
    for (int k = 0; k < n_nodes; ++k) {
      x[k] = rng.uniform01();
      y[k] = rng.uniform01();
    }
    std::vector<std::pair<int, int>> edges;
    for (int k = 0; k < n_nodes; ++k) {
      for (int m = 0; m < k; ++m) {
        const double d = std::hypot(x[k] - x[m], y[k] - y[m]);
        if (d < radius) edges.emplace_back(m, k);
      }
    }
    Topology t = Topology::from_edges(n_nodes, edges);
    if (t.connected()) return t;
  }
  throw std::runtime_error(
      "topology: failed to draw a connected geometric graph; "
      "increase radius");
}

Topology Topology::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("topology: cannot open " + path);
  int n = 0;
  if (!(in >> n)) throw std::runtime_error("topology: missing node count");
  std::vector<std::pair<int, int>> edges;
  int m = 0, k = 0;
  while (in >> m >> k) edges.emplace_back(m - 1, k - 1);  // file is 1-based
  return from_edges(n, edges);
}

const std::vector<int>& Topology::neighbors(int k) const {
  check_node(k);
  return neighborhoods_[k];
}

int Topology::degree(int k) const {
  check_node(k);
  return static_cast<int>(neighborhoods_[k].size());
}

void Topology::check_node(int k) const {
  if (k < 0 || k >= n_)
    throw std::out_of_range("topology: node index out of range");
}

int Topology::n_components() const {
  std::vector<int> label(n_, -1);
  int components = 0;
  for (int start = 0; start < n_; ++start) {
    if (label[start] >= 0) continue;
    std::deque<int> queue{start};
    label[start] = components;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int m : neighborhoods_[v]) {
        if (label[m] < 0) {
          label[m] = components;
          queue.push_back(m);
        }
      }
    }
    ++components;
  }
  return components;
}

bool Topology::connected() const { return n_components() == 1; }

CombinationMatrix::CombinationMatrix(const Topology& topology,
                                     Eigen::MatrixXd weights)
    : c_(std::move(weights)) {
  const int n = topology.n_nodes();
  if (c_.rows() != n || c_.cols() != n)
    throw std::invalid_argument("combination: weight matrix size mismatch");
  for (int k = 0; k < n; ++k) {
    double column_sum = 0.0;
    for (int m = 0; m < n; ++m) {
      const double w = c_(m, k);
      if (w < 0.0)
        throw std::invalid_argument("combination: negative weight");
      if (w != 0.0 && !topology.adjacent(m, k))
        throw std::invalid_argument(
            "combination: nonzero weight outside neighborhood");
      column_sum += w;
    }
    if (std::abs(column_sum - 1.0) > 1e-12)
      throw std::invalid_argument("combination: column must sum to one");
    neighborhoods_.push_back(topology.neighbors(k));
  }
}

Eigen::MatrixXd CombinationMatrix::kron_identity(int m_dim) const {
  const int n = n_nodes();
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(n * m_dim, n * m_dim);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (c_(a, b) != 0.0)
        lifted.block(a * m_dim, b * m_dim, m_dim, m_dim) =
            c_(a, b) * Eigen::MatrixXd::Identity(m_dim, m_dim);
  return lifted;
}

CombinationMatrix build_metropolis(const Topology& topology) {
  const int n = topology.n_nodes();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double off_sum = 0.0;
    for (int m : topology.neighbors(k)) {
      if (m == k) continue;
      c(m, k) = 1.0 / std::max(topology.degree(m), topology.degree(k));
      off_sum += c(m, k);
    }
    c(k, k) = 1.0 - off_sum;
  }
  return CombinationMatrix(topology, std::move(c));
}

}  // namespace diffnet
