#include <gtest/gtest.h>

#include <cmath>

#include "dkflab/graph.hpp"
#include "dkflab/rng.hpp"
#include "instances.hpp"

using namespace dkflab;
using namespace dkflab::topology;

namespace {

Eigen::MatrixXd example1_adjacency() {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 2) = a(2, 0) = 1;
  a(0, 3) = a(3, 0) = 2;
  a(1, 2) = a(2, 1) = 2;
  a(2, 3) = a(3, 2) = 1;
  return a;
}

}  // namespace

TEST(Laplacian, Example1) {
  const CommGraph g(example1_adjacency());
  EXPECT_EQ(g.laplacian(), testsupport::example1_laplacian());
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_TRUE(g.is_connected());
  EXPECT_NO_THROW(assert_connected(g));
}

TEST(Laplacian, Example1Spectrum) {
  const CommGraph g(example1_adjacency());
  const auto& sp = g.spectrum();
  EXPECT_EQ(sp.eigenvalues[0], 0.0);
  EXPECT_NEAR(sp.eigenvalues.sum(), 12.0, 1e-12);
  // characteristic polynomial of L has the factor s^2 - 7 s + 8 for the top pair
  EXPECT_NEAR(sp.largest(), (7.0 + std::sqrt(17.0)) / 2.0, 1e-12);
  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(4, 0.5);
  EXPECT_EQ(sp.basis.col(0), ones);
  EXPECT_LT((sp.basis.transpose() * sp.basis - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-12);
  const Eigen::MatrixXd rebuilt = sp.basis * sp.eigenvalues.asDiagonal() * sp.basis.transpose();
  EXPECT_LT((rebuilt - g.laplacian()).norm(), 1e-12);
}

TEST(Neighbors, Example1NodeZero) {
  const CommGraph g(example1_adjacency());
  const std::vector<Neighbor> want{{2, 1.0}, {3, 2.0}};
  EXPECT_EQ(neighbors(g, 0), want);
  EXPECT_EQ(g.degree(2), 3u);
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_THROW(g.neighbors(4), Error);
}

TEST(Validation, RejectsBadAdjacency) {
  auto code_of = [](const Eigen::MatrixXd& a) {
    try {
      CommGraph g(a);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  Eigen::MatrixXd a = example1_adjacency();
  a(0, 2) = 3;
  EXPECT_EQ(code_of(a), Errc::directed_graph);
  a = example1_adjacency();
  a(1, 1) = 1;
  EXPECT_EQ(code_of(a), Errc::self_loop);
  a = example1_adjacency();
  a(0, 1) = a(1, 0) = -1;
  EXPECT_EQ(code_of(a), Errc::negative_weight);
  EXPECT_EQ(code_of(Eigen::MatrixXd::Zero(2, 3)), Errc::non_square);
}

TEST(Connectivity, DisconnectedReportsComponents) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  a(0, 3) = a(3, 0) = 1;
  a(1, 4) = a(4, 1) = 1;
  const CommGraph g(a);
  EXPECT_FALSE(g.is_connected());
  try {
    assert_connected(g);
    FAIL();
  } catch (const DisconnectedGraphError& e) {
    EXPECT_EQ(e.code(), Errc::disconnected_graph);
    const std::vector<std::vector<std::size_t>> want{{0, 3}, {1, 4}, {2}};
    EXPECT_EQ(e.components(), want);
  }
}

TEST(Connectivity, AgreesWithUnionFind) {
  Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const auto n = 1 + static_cast<Index>(rng.below(8));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (rng.uniform() < 0.25) a(i, j) = a(j, i) = rng.uniform(0.5, 2.0);
    const CommGraph g(a);
    const auto oracle = testsupport::union_find_components(a);
    EXPECT_EQ(connected_components(g), oracle);
    EXPECT_EQ(g.is_connected(), oracle.size() == 1);
  }
}

TEST(Spectrum, KernelBasisStartsWithOnes) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1;
  a(2, 3) = a(3, 2) = 1;
  const auto sp = spectrum(CommGraph(a));
  EXPECT_EQ(sp.basis.col(0), Eigen::VectorXd::Constant(4, 0.5));
  EXPECT_LT((sp.basis.transpose() * sp.basis - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-12);
}

TEST(RandomGraph, ConnectedAndDeterministic) {
  Rng a(4);
  Rng b(4);
  const CommGraph g1 = random_connected_graph(20, 0.2, a);
  const CommGraph g2 = random_connected_graph(20, 0.2, b);
  EXPECT_TRUE(g1.is_connected());
  EXPECT_EQ(g1.adjacency(), g2.adjacency());
  Rng c(4);
  EXPECT_THROW(random_connected_graph(10, 0.0, c, 3), Error);
}

TEST(RandomGraph, SingleNode) {
  Rng rng(1);
  const CommGraph g = random_connected_graph(1, 0.5, rng);
  EXPECT_TRUE(g.is_connected());
  EXPECT_EQ(g.edge_count(), 0u);
}
