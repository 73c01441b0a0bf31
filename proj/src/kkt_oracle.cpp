#include "dkflab/kkt_oracle.hpp"

#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"

namespace dkflab::kkt {

namespace {

Index block_dim(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw Error(Errc::dimension_mismatch, "no node blocks");
  return blocks.front().rows();
}

Eigen::MatrixXd block_diag_inverse(const std::vector<Eigen::MatrixXd>& blocks) {
  const Index n = block_dim(blocks);
  const auto count = static_cast<Index>(blocks.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(count * n, count * n);
  for (Index i = 0; i < count; ++i) {
    try {
      out.block(i * n, i * n, n, n) = matops::spd_inverse(blocks[static_cast<std::size_t>(i)]);
    } catch (const Error&) {
      std::ostringstream os;
      os << "block " << i << " is not positive definite";
      throw Error(Errc::singular_block, os.str());
    }
  }
  return out;
}

}  // namespace

NodeProblem node_problem(const Eigen::VectorXd& z_bar, const Eigen::MatrixXd& H_bar, const Eigen::MatrixXd& S_bar) {
  const Eigen::LDLT<Eigen::MatrixXd> s(S_bar);
  return {H_bar.transpose() * s.solve(z_bar), matops::symmetrize(H_bar.transpose() * s.solve(H_bar))};
}

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& parts) {
  Index total = 0;
  for (const auto& p : parts) total += p.size();
  Eigen::VectorXd out(total);
  Index pos = 0;
  for (const auto& p : parts) {
    out.segment(pos, p.size()) = p;
    pos += p.size();
  }
  return out;
}

std::vector<Eigen::VectorXd> unstack(const Eigen::VectorXd& v, Index n_nodes) {
  if (n_nodes <= 0 || v.size() % n_nodes != 0) throw Error(Errc::dimension_mismatch, "cannot split stacked vector");
  const Index n = v.size() / n_nodes;
  std::vector<Eigen::VectorXd> out;
  for (Index i = 0; i < n_nodes; ++i) out.push_back(v.segment(i * n, n));
  return out;
}

Eigen::VectorXd replicate(const Eigen::VectorXd& v, Index n_nodes) {
  return v.replicate(n_nodes, 1);
}

Eigen::MatrixXd kron_laplacian(const topology::CommGraph& graph, Index n) {
  return Eigen::kroneckerProduct(graph.laplacian(), Eigen::MatrixXd::Identity(n, n)).eval();
}

Eigen::MatrixXd laplacian_pinv(const topology::CommGraph& graph) {
  topology::assert_connected(graph);
  const auto& sp = graph.spectrum();
  const Index N = graph.n_nodes();
  if (N == 1) return Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd u_bar = sp.basis.rightCols(N - 1);
  const Eigen::VectorXd inv = sp.eigenvalues.tail(N - 1).cwiseInverse();
  return u_bar * inv.asDiagonal() * u_bar.transpose();
}

SaddleSolution solve_estimate_kkt(const topology::CommGraph& graph, const std::vector<NodeProblem>& nodes) {
  topology::assert_connected(graph);
  const Index N = graph.n_nodes();
  if (static_cast<Index>(nodes.size()) != N) throw Error(Errc::dimension_mismatch, "one problem per node");
  const Index n = nodes.front().g.size();

  Eigen::MatrixXd g_sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& p : nodes) {
    g_sum += p.G;
    rhs += p.g;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(matops::symmetrize(g_sum));
  if (llt.info() != Eigen::Success) throw Error(Errc::singular_block, "sum of node information is not positive definite");

  SaddleSolution s;
  s.xi_dagger = llt.solve(rhs);
  s.xi_star = replicate(s.xi_dagger, N);
  std::vector<Eigen::VectorXd> b;
  for (const auto& p : nodes) b.push_back(p.g - p.G * s.xi_dagger);
  s.b = stack(b);
  const Eigen::MatrixXd pinv = Eigen::kroneckerProduct(laplacian_pinv(graph), Eigen::MatrixXd::Identity(n, n)).eval();
  s.lambda_particular = pinv * s.b;
  s.lambda_star = s.lambda_particular;
  std::tie(s.primal_residual, s.dual_residual) = estimate_kkt_residuals(graph, nodes, s.xi_star, s.lambda_star);
  return s;
}

std::pair<double, double> estimate_kkt_residuals(const topology::CommGraph& graph,
                                                 const std::vector<NodeProblem>& nodes, const Eigen::VectorXd& xi,
                                                 const Eigen::VectorXd& lambda) {
  const Index N = graph.n_nodes();
  const Index n = nodes.front().g.size();
  const Eigen::MatrixXd L = kron_laplacian(graph, n);
  Eigen::VectorXd dual = L * lambda;
  for (Index i = 0; i < N; ++i) {
    const auto& p = nodes[static_cast<std::size_t>(i)];
    dual.segment(i * n, n) += p.G * xi.segment(i * n, n) - p.g;
  }
  return {(L * xi).norm(), dual.norm()};
}

CovSolution solve_cov_kkt(const topology::CommGraph& graph, const std::vector<Eigen::VectorXd>& targets) {
  topology::assert_connected(graph);
  const Index N = graph.n_nodes();
  if (static_cast<Index>(targets.size()) != N) throw Error(Errc::dimension_mismatch, "one target per node");
  const Index d = targets.front().size();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(d);
  for (const auto& t : targets) avg += t;
  avg /= static_cast<double>(N);

  CovSolution s;
  s.zeta_star = replicate(avg, N);
  const Eigen::VectorXd v = stack(targets);
  const Eigen::MatrixXd pinv = Eigen::kroneckerProduct(laplacian_pinv(graph), Eigen::MatrixXd::Identity(d, d)).eval();
  s.mu_star = pinv * (v - s.zeta_star);
  const Eigen::MatrixXd L = kron_laplacian(graph, d);
  s.residual = (s.zeta_star - v + L * s.mu_star).norm() + (L * s.zeta_star).norm();
  return s;
}

InfoSolution solve_info_kkt(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& phis,
                            const std::vector<Eigen::VectorXd>& cs) {
  topology::assert_connected(graph);
  const Index N = graph.n_nodes();
  if (static_cast<Index>(phis.size()) != N || static_cast<Index>(cs.size()) != N)
    throw Error(Errc::dimension_mismatch, "one block per node");
  const Index n = cs.front().size();

  const Eigen::MatrixXd phi_inv = block_diag_inverse(phis);
  Eigen::MatrixXd w_sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < N; ++i) {
    const Eigen::MatrixXd w = phi_inv.block(i * n, i * n, n, n);
    w_sum += w;
    rhs += w * cs[static_cast<std::size_t>(i)];
  }
  InfoSolution s;
  s.eta_common = matops::spd_inverse(matops::symmetrize(w_sum)) * rhs;
  s.eta_star = replicate(s.eta_common, N);
  const Eigen::VectorXd c = stack(cs);
  // stationarity Phi^-1 (eta - c) + L nu = 0
  const Eigen::MatrixXd pinv = Eigen::kroneckerProduct(laplacian_pinv(graph), Eigen::MatrixXd::Identity(n, n)).eval();
  s.nu_star = pinv * (phi_inv * (c - s.eta_star));
  const Eigen::MatrixXd L = kron_laplacian(graph, n);
  s.residual = (-phi_inv * s.eta_star - L * s.nu_star + phi_inv * c).norm() + (L * s.eta_star).norm();
  return s;
}

Eigen::MatrixXd dual_operator(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks) {
  const Index n = block_dim(blocks);
  if (static_cast<Index>(blocks.size()) != graph.n_nodes()) throw Error(Errc::dimension_mismatch, "one block per node");
  const Eigen::MatrixXd L = kron_laplacian(graph, n);
  return matops::symmetrize(L * block_diag_inverse(blocks) * L);
}

Eigen::MatrixXd iteration_matrix(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks,
                                 double alpha) {
  const Eigen::MatrixXd A = dual_operator(graph, blocks);
  return Eigen::MatrixXd::Identity(A.rows(), A.cols()) - alpha * A;
}

Eigen::VectorXd iteration_matrix_spectrum(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks,
                                          double alpha) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(iteration_matrix(graph, blocks, alpha), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double consensus_spectral_radius(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks,
                                 double alpha) {
  topology::assert_connected(graph);
  const Index N = graph.n_nodes();
  const Index n = block_dim(blocks);
  if (N == 1) return 0.0;
  const Eigen::MatrixXd U = Eigen::kroneckerProduct(graph.spectrum().basis, Eigen::MatrixXd::Identity(n, n)).eval();
  const Eigen::MatrixXd rotated = U.transpose() * iteration_matrix(graph, blocks, alpha) * U;
  const Eigen::MatrixXd sub = matops::symmetrize(rotated.bottomRightCorner((N - 1) * n, (N - 1) * n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double dual_operator_max_eigenvalue(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dual_operator(graph, blocks), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Eigen::VectorXd dual_limit(const topology::CommGraph& graph, const Eigen::VectorXd& lambda0,
                           const Eigen::VectorXd& lambda_particular) {
  topology::assert_connected(graph);
  const Index N = graph.n_nodes();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(lambda0.size() / N);
  for (const auto& part : unstack(lambda0, N)) avg += part;
  avg /= static_cast<double>(N);
  return lambda_particular + replicate(avg, N);
}

Eigen::VectorXd rotated_dual_error(const topology::CommGraph& graph, const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& lambda_star) {
  const Index N = graph.n_nodes();
  const Index n = lambda.size() / N;
  const Eigen::MatrixXd U = Eigen::kroneckerProduct(graph.spectrum().basis, Eigen::MatrixXd::Identity(n, n)).eval();
  return U.transpose() * (lambda - lambda_star);
}

}  // namespace dkflab::kkt
