#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dkflab/graph.hpp"

namespace dkflab::kkt {

using Index = Eigen::Index;

/// Per-node data of the estimation problem: g_i = H_bar_i^T S_bar_i^-1 z_bar_i
/// and G_i = H_bar_i^T S_bar_i^-1 H_bar_i.
struct NodeProblem {
  Eigen::VectorXd g;
  Eigen::MatrixXd G;
};

NodeProblem node_problem(const Eigen::VectorXd& z_bar, const Eigen::MatrixXd& H_bar, const Eigen::MatrixXd& S_bar);

struct SaddleSolution {
  Eigen::VectorXd xi_star;            // (1_N kron I) xi_dagger
  Eigen::VectorXd lambda_star;        // lambda_particular (zero consensus component)
  Eigen::VectorXd xi_dagger;          // (sum G_i)^-1 sum g_i
  Eigen::VectorXd lambda_particular;  // (U_bar Lambda_bar^-1 U_bar^T kron I) b
  Eigen::VectorXd b;                  // g - G (1_N kron I) xi_dagger
  double primal_residual = 0.0;       // ||(L kron I) xi*||
  double dual_residual = 0.0;         // ||G xi* + (L kron I) lambda* - g||
};

/// Throws DisconnectedGraph, SingularBlock.
SaddleSolution solve_estimate_kkt(const topology::CommGraph& graph, const std::vector<NodeProblem>& nodes);

/// Residuals of the estimate saddle-point system at an arbitrary (xi, lambda).
std::pair<double, double> estimate_kkt_residuals(const topology::CommGraph& graph,
                                                 const std::vector<NodeProblem>& nodes, const Eigen::VectorXd& xi,
                                                 const Eigen::VectorXd& lambda);

struct CovSolution {
  Eigen::VectorXd zeta_star;  // replicated average of the targets
  Eigen::VectorXd mu_star;    // (U_bar Lambda_bar^-1 U_bar^T kron I)(v - zeta*)
  double residual = 0.0;      // ||zeta* - v + (L kron I) mu*|| + ||(L kron I) zeta*||
};

/// Covariance saddle point for objectives 1/2 ||zeta_i - v_i||^2. Throws DisconnectedGraph.
CovSolution solve_cov_kkt(const topology::CommGraph& graph, const std::vector<Eigen::VectorXd>& targets);

/// Information-form problem: minimize sum 1/2 (eta_i - c_i)^T Phi_i^-1 (eta_i - c_i)
/// subject to eta_1 = ... = eta_N.
struct InfoSolution {
  Eigen::VectorXd eta_star;
  Eigen::VectorXd nu_star;
  Eigen::VectorXd eta_common;
  /// Residual of [-Phi^-1, -L; L, 0][eta; nu] = [-Phi^-1 c; 0].
  double residual = 0.0;
};
InfoSolution solve_info_kkt(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& phis,
                            const std::vector<Eigen::VectorXd>& cs);

/// L kron I_n
Eigen::MatrixXd kron_laplacian(const topology::CommGraph& graph, Index n);
/// U_bar Lambda_bar^-1 U_bar^T (Laplacian pseudo-inverse).
Eigen::MatrixXd laplacian_pinv(const topology::CommGraph& graph);

/// A = (L kron I) G^-1 (L kron I) with G = blkdiag(blocks).
Eigen::MatrixXd dual_operator(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks);
/// I - alpha A
Eigen::MatrixXd iteration_matrix(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks,
                                 double alpha);
/// Eigenvalues of I - alpha A in ascending order (the matrix is symmetric).
Eigen::VectorXd iteration_matrix_spectrum(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks,
                                          double alpha);
/// Spectral radius of I - alpha A restricted to the non-consensus block after
/// rotating by U kron I.
double consensus_spectral_radius(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks,
                                 double alpha);
/// Largest eigenvalue of A.
double dual_operator_max_eigenvalue(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& blocks);

/// lambda_particular + (1_N kron I) avg(lambda_{i,0}).
Eigen::VectorXd dual_limit(const topology::CommGraph& graph, const Eigen::VectorXd& lambda0,
                           const Eigen::VectorXd& lambda_particular);

/// (U^T kron I)(lambda - lambda_star)
Eigen::VectorXd rotated_dual_error(const topology::CommGraph& graph, const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& lambda_star);

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& parts);
std::vector<Eigen::VectorXd> unstack(const Eigen::VectorXd& v, Index n_nodes);
/// (1_N kron I) v
Eigen::VectorXd replicate(const Eigen::VectorXd& v, Index n_nodes);

}  // namespace dkflab::kkt
