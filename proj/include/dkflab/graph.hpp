#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dkflab/error.hpp"

namespace dkflab {
class Rng;
}

namespace dkflab::topology {

using Index = Eigen::Index;

/// Eigen-decomposition of a graph Laplacian.
///
/// `eigenvalues` ascend with the first pinned to exactly 0. When the graph is
/// connected the first basis column is exactly 1/sqrt(N) * 1_N, so
/// basis = [U_1, U_bar] splits the consensus direction from the rest.
struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd basis;

  double algebraic_connectivity() const { return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0; }
  double largest() const { return eigenvalues.size() ? eigenvalues[eigenvalues.size() - 1] : 0.0; }
};

struct Neighbor {
  Index node;
  double weight;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Connectivity threshold on the second-smallest Laplacian eigenvalue.
inline constexpr double kConnectivityThreshold = 1e-10;

/// Weighted undirected communication graph. Immutable once built.
class CommGraph {
 public:
  /// Validates `adjacency` (square, symmetric, non-negative, zero diagonal)
  /// and builds the Laplacian and its spectrum.
  explicit CommGraph(Eigen::MatrixXd adjacency);

  Index n_nodes() const noexcept { return adjacency_.rows(); }
  const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }
  const Eigen::MatrixXd& laplacian() const noexcept { return laplacian_; }
  const LaplacianSpectrum& spectrum() const noexcept { return spectrum_; }

  /// Neighbors of `i` in ascending index order.
  const std::vector<Neighbor>& neighbors(Index i) const;
  double weight(Index i, Index j) const;
  bool has_edge(Index i, Index j) const;
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t degree(Index i) const { return neighbors(i).size(); }

  bool is_connected() const noexcept;

 private:
  Eigen::MatrixXd adjacency_;
  Eigen::MatrixXd laplacian_;
  LaplacianSpectrum spectrum_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::size_t edge_count_ = 0;
};

CommGraph laplacian_from_adjacency(const Eigen::MatrixXd& adjacency);

LaplacianSpectrum spectrum(const Eigen::MatrixXd& laplacian);
inline const LaplacianSpectrum& spectrum(const CommGraph& g) { return g.spectrum(); }

/// Throws DisconnectedGraphError (with the component partition) unless the
/// second-smallest Laplacian eigenvalue exceeds kConnectivityThreshold.
void assert_connected(const CommGraph& g);

const std::vector<Neighbor>& neighbors(const CommGraph& g, Index i);

/// Connected components by breadth-first search, each sorted ascending.
std::vector<std::vector<std::size_t>> connected_components(const CommGraph& g);

/// Erdos-Renyi graph with unit weights, resampled until connected.
/// Gives up with DisconnectedGraph after `max_attempts` draws.
CommGraph random_connected_graph(Index n_nodes, double edge_prob, Rng& rng, int max_attempts = 10000);

}  // namespace dkflab::topology
