#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "diffnet/topology.hpp"

using namespace diffnet;

namespace {
Topology line3() { return Topology::from_edges(3, {{0, 1}, {1, 2}}); }
}  // namespace

TEST_CASE("metropolis weights on an isolated node") {
  const auto c = build_metropolis(Topology::isolated(1));
  CHECK(c(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("metropolis weights on the three-node line") {
  const auto c = build_metropolis(line3());
  // degrees (self included): 2, 3, 2
  CHECK(c(1, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(c(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(c(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(c(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(c(2, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(c(1, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(c(2, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(c(2, 0) == 0.0);
  CHECK(c(0, 2) == 0.0);
}

TEST_CASE("metropolis weights on the complete three-node graph") {
  const auto t = Topology::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto c = build_metropolis(t);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k) CHECK(c(m, k) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("neighbors are ascending and include self") {
  const auto t = line3();
  CHECK(t.neighbors(1) == std::vector<int>{0, 1, 2});
  CHECK(Topology::isolated(4).neighbors(2) == std::vector<int>{2});
  CHECK_THROWS_AS(t.neighbors(3), std::out_of_range);
  CHECK_THROWS_AS(t.neighbors(-1), std::out_of_range);
}

TEST_CASE("adjacency validation") {
  // non-reflexive
  std::vector<std::uint8_t> adj = {0, 1, 1, 1};
  CHECK_THROWS_AS(Topology(2, adj), std::invalid_argument);
  // non-symmetric
  adj = {1, 1, 0, 1};
  CHECK_THROWS_AS(Topology(2, adj), std::invalid_argument);
}

TEST_CASE("random geometric topology is connected with valid weights") {
  const auto t = Topology::random_geometric(20, 0.4, 42);
  CHECK(t.n_nodes() == 20);
  CHECK(t.connected());
  const auto c = build_metropolis(t);

  for (int k = 0; k < 20; ++k) {
    double sum = 0.0;
    for (int m = 0; m < 20; ++m) {
      CHECK(c(m, k) >= 0.0);
      // zero pattern matches the adjacency complement
      if (!t.adjacent(m, k)) CHECK(c(m, k) == 0.0);
      sum += c(m, k);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // off-diagonal symmetry of the Metropolis rule
  for (int k = 0; k < 20; ++k)
    for (int m = 0; m < k; ++m) CHECK(c(m, k) == c(k, m));

  // same seed, same graph
  const auto t2 = Topology::random_geometric(20, 0.4, 42);
  for (int k = 0; k < 20; ++k)
    for (int m = 0; m < 20; ++m) CHECK(t.adjacent(m, k) == t2.adjacent(m, k));
}

TEST_CASE("disconnected topology is reported, not rejected") {
  const auto t = Topology::from_edges(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(t.connected());
  CHECK(t.n_components() == 2);
  CHECK_NOTHROW(build_metropolis(t));
}

TEST_CASE("topology file round trip, 1-based") {
  const std::string path = "topology_test.txt";
  {
    std::ofstream out(path);
    out << "3\n1 2\n2 3\n";
  }
  const auto t = Topology::from_file(path);
  CHECK(t.n_nodes() == 3);
  CHECK(t.adjacent(0, 1));
  CHECK(t.adjacent(1, 2));
  CHECK_FALSE(t.adjacent(0, 2));
  std::remove(path.c_str());
}

TEST_CASE("kronecker lift keeps block structure") {
  const auto c = build_metropolis(line3());
  const Eigen::MatrixXd lifted = c.kron_identity(2);
  CHECK(lifted.rows() == 6);
  CHECK(lifted(0, 2) == doctest::Approx(c(0, 1)));
  CHECK(lifted(1, 3) == doctest::Approx(c(0, 1)));
  CHECK(lifted(0, 3) == 0.0);
}
