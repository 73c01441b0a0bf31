#include "dkflab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "dkflab/rng.hpp"

namespace dkflab::topology {

namespace {

void validate_adjacency(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(Errc::non_square, "adjacency matrix must be square");
  if (a.rows() == 0) throw Error(Errc::dimension_mismatch, "graph needs at least one node");
  if (!a.allFinite()) throw Error(Errc::negative_weight, "adjacency has non-finite weights");
  for (Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) {
      std::ostringstream os;
      os << "node " << i << " has a self edge of weight " << a(i, i);
      throw Error(Errc::self_loop, os.str());
    }
    for (Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) < 0.0) {
        std::ostringstream os;
        os << "weight a(" << i << "," << j << ") = " << a(i, j) << " is negative";
        throw Error(Errc::negative_weight, os.str());
      }
      if (a(i, j) != a(j, i)) {
        std::ostringstream os;
        os << "a(" << i << "," << j << ") != a(" << j << "," << i << ")";
        throw Error(Errc::directed_graph, os.str());
      }
    }
  }
}

}  // namespace

CommGraph::CommGraph(Eigen::MatrixXd adjacency) : adjacency_(std::move(adjacency)) {
  validate_adjacency(adjacency_);
  const Index n = adjacency_.rows();
  laplacian_ = -adjacency_;
  for (Index i = 0; i < n; ++i) laplacian_(i, i) = adjacency_.row(i).sum();

  neighbors_.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (adjacency_(i, j) > 0.0) {
        neighbors_[static_cast<std::size_t>(i)].push_back({j, adjacency_(i, j)});
        if (j > i) ++edge_count_;
      }
    }
  }
  spectrum_ = topology::spectrum(laplacian_);
}

const std::vector<Neighbor>& CommGraph::neighbors(Index i) const {
  if (i < 0 || i >= n_nodes()) {
    std::ostringstream os;
    os << "node " << i << " not in [0, " << n_nodes() << ")";
    throw Error(Errc::index_out_of_range, os.str());
  }
  return neighbors_[static_cast<std::size_t>(i)];
}

double CommGraph::weight(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= n_nodes() || j >= n_nodes())
    throw Error(Errc::index_out_of_range, "edge endpoint out of range");
  return adjacency_(i, j);
}

bool CommGraph::has_edge(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= n_nodes() || j >= n_nodes()) return false;
  return adjacency_(i, j) > 0.0;
}

bool CommGraph::is_connected() const noexcept {
  return n_nodes() == 1 || spectrum_.algebraic_connectivity() > kConnectivityThreshold;
}

CommGraph laplacian_from_adjacency(const Eigen::MatrixXd& adjacency) {
  return CommGraph(adjacency);
}

LaplacianSpectrum spectrum(const Eigen::MatrixXd& laplacian) {
  const Index n = laplacian.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian);
  LaplacianSpectrum out{es.eigenvalues(), es.eigenvectors()};
  out.eigenvalues[0] = 0.0;

  Index kernel = 1;
  while (kernel < n && out.eigenvalues[kernel] <= kConnectivityThreshold) ++kernel;

  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (kernel == 1) {
    out.basis.col(0) = ones;
  } else {
    // re-orthonormalize the kernel block so that its first direction is 1_N
    Eigen::MatrixXd block(n, kernel + 1);
    block.col(0) = ones;
    block.rightCols(kernel) = out.basis.leftCols(kernel);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, kernel);
    q.col(0) = ones;
    out.basis.leftCols(kernel) = q;
  }
  return out;
}

std::vector<std::vector<std::size_t>> connected_components(const CommGraph& g) {
  const auto n = static_cast<std::size_t>(g.n_nodes());
  std::vector<int> label(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::deque<std::size_t> queue{start};
    label[start] = id;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      out.back().push_back(u);
      for (const Neighbor& nb : g.neighbors(static_cast<Index>(u))) {
        const auto v = static_cast<std::size_t>(nb.node);
        if (label[v] < 0) {
          label[v] = id;
          queue.push_back(v);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

void assert_connected(const CommGraph& g) {
  if (!g.is_connected()) throw DisconnectedGraphError(connected_components(g));
}

const std::vector<Neighbor>& neighbors(const CommGraph& g, Index i) {
  return g.neighbors(i);
}

CommGraph random_connected_graph(Index n_nodes, double edge_prob, Rng& rng, int max_attempts) {
  if (n_nodes < 1) throw Error(Errc::dimension_mismatch, "random graph needs at least one node");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
    for (Index i = 0; i < n_nodes; ++i) {
      for (Index j = i + 1; j < n_nodes; ++j) {
        if (rng.uniform() < edge_prob) {
          a(i, j) = 1.0;
          a(j, i) = 1.0;
        }
      }
    }
    CommGraph g(std::move(a));
    if (g.is_connected()) return g;
  }
  throw Error(Errc::disconnected_graph, "no connected realization found; increase edge_prob");
}

}  // namespace dkflab::topology
