#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace diffnet {

/// Undirected network topology. Adjacency is stored symmetric with a true
/// diagonal: every node belongs to its own neighborhood.
class Topology {
 public:
  /// Builds a topology from an adjacency relation. The diagonal is forced to
  /// true; off-diagonal entries must already be symmetric.
  Topology(int n_nodes, std::vector<std::uint8_t> adjacency);

  /// Convenience: N isolated nodes (self-loops only).
  static Topology isolated(int n_nodes);

  /// Builds a topology from an explicit edge list (0-based, self-loops
  /// implied).
  static Topology from_edges(int n_nodes,
                             const std::vector<std::pair<int, int>>& edges);

  /// Random geometric graph: nodes uniform in the unit square, edge when the
  /// distance is below `radius`. Redraws until connected (throws after
  /// `max_attempts` failures).
  static Topology random_geometric(int n_nodes, double radius,
                                   std::uint64_t seed, int max_attempts = 1000);

  /// Parses the plain-text format: first line N, then one `m k` edge pair per
  /// line, 1-based.
  static Topology from_file(const std::string& path);

  int n_nodes() const { return n_; }
  bool adjacent(int m, int k) const { return adj_[idx(m, k)] != 0; }

  /// Neighborhood of node k (self included), ascending index order.
  const std::vector<int>& neighbors(int k) const;

  /// |N_k|, self included.
  int degree(int k) const;

  bool connected() const;

  /// Number of connected components.
  int n_components() const;

 private:
  std::size_t idx(int m, int k) const {
    return static_cast<std::size_t>(m) * n_ + k;
  }
  void check_node(int k) const;

  int n_;
  std::vector<std::uint8_t> adj_;
  std::vector<std::vector<int>> neighborhoods_;
};

/// Column-stochastic diffusion weights; entry (m, k) is the weight node k
/// assigns to the estimate received from neighbor m.
class CombinationMatrix {
 public:
  CombinationMatrix(const Topology& topology, Eigen::MatrixXd weights);

  int n_nodes() const { return static_cast<int>(c_.rows()); }
  double operator()(int m, int k) const { return c_(m, k); }
  const Eigen::MatrixXd& matrix() const { return c_; }
  const std::vector<std::vector<int>>& neighborhoods() const {
    return neighborhoods_;
  }

  /// Kronecker lift C (x) I_M for network-wide covariance recursions.
  Eigen::MatrixXd kron_identity(int m_dim) const;

 private:
  Eigen::MatrixXd c_;
  std::vector<std::vector<int>> neighborhoods_;
};

/// Metropolis combination rule: c_{m,k} = 1/max(n_m, n_k) for neighbors
/// m != k, diagonal absorbs the remainder so each column sums to one.
CombinationMatrix build_metropolis(const Topology& topology);

}  // namespace diffnet
