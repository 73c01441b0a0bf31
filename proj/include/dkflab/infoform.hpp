#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dkflab/graph.hpp"
#include "dkflab/sysmodel.hpp"

namespace dkflab::infoform {

using Index = Eigen::Index;

/// Scaling of the prior in the local correction: `split_prior` uses tau / N and
/// Omega / N, `full_prior` drops the 1/N.
enum class CiScaling { split_prior, full_prior };

struct InfoState {
  Index node = 0;
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
  Eigen::VectorXd x_pred;
  Eigen::MatrixXd P_pred;
  Eigen::MatrixXd Omega_pred;
  Eigen::VectorXd tau_pred;  // Omega_pred x_pred
  Eigen::VectorXd eta;
  Eigen::MatrixXd Phi;  // H^T R^-1 H + Omega_pred / N
};

InfoState make_state(Index node, const Eigen::VectorXd& x0, const Eigen::MatrixXd& P0);

/// Information-filter prediction. Throws SingularCovariance.
void info_predict(InfoState& s, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);

/// Phi_i with 1/N on the prior information.
Eigen::MatrixXd local_information(const InfoState& s, const sysmodel::SensorModel& sensor, Index n_nodes);

/// h_i(eta) = 1/2 (eta^T Phi^-1 eta - 2 eta^T Phi^-1 c + y^T R^-1 y + tau^T Omega^-1 tau / N)
/// with c = H^T R^-1 y + tau / N. The factor 2 on the cross term makes
/// h_i(Phi xi) = f_i(xi) and gives the gradient Phi^-1 (eta - c).
double info_objective(const Eigen::VectorXd& eta, const InfoState& s, const sysmodel::SensorModel& sensor,
                      const Eigen::VectorXd& y, Index n_nodes);
Eigen::VectorXd info_gradient(const Eigen::VectorXd& eta, const InfoState& s, const sysmodel::SensorModel& sensor,
                              const Eigen::VectorXd& y, Index n_nodes);

/// eta* = H^T R^-1 y + tau / N (or + tau with full_prior).
Eigen::VectorXd ci_local_correct(const InfoState& s, const sysmodel::SensorModel& sensor, const Eigen::VectorXd& y,
                                 Index n_nodes, CiScaling scaling = CiScaling::split_prior);
/// Matching information matrix H^T R^-1 H + Omega / N (or + Omega).
Eigen::MatrixXd ci_local_information(const InfoState& s, const sysmodel::SensorModel& sensor, Index n_nodes,
                                     CiScaling scaling = CiScaling::split_prior);

/// Metropolis-Hastings weights: 1 / (1 + max(d_i, d_j)) on edges, the
/// remainder on the diagonal.
Eigen::MatrixXd metropolis_weights(const topology::CommGraph& graph);

/// Throws NotDoublyStochastic unless rows and columns sum to 1 within 1e-10,
/// entries are non-negative and (given a graph) off-diagonal support lies on edges.
void validate_consensus_weights(const Eigen::MatrixXd& W, const topology::CommGraph* graph = nullptr);

/// One node's share of a consensus round: sum over j in {i} U N_i, ascending,
/// of W_ij v_j. `values` is indexed by node.
Eigen::VectorXd weighted_average(const Eigen::MatrixXd& W, Index i, const std::vector<Index>& support,
                                 const std::vector<const Eigen::VectorXd*>& values);

/// Nodes with W_ij != 0 (including i), ascending.
std::vector<Index> weight_support(const Eigen::MatrixXd& W, Index i);

/// value_i <- sum_j W_ij value_j for every node.
std::vector<Eigen::VectorXd> ci_consensus_round(const std::vector<Eigen::VectorXd>& values, const Eigen::MatrixXd& W);

struct CiOptions {
  Index consensus_rounds = 1;
  CiScaling scaling = CiScaling::split_prior;
};

/// Local correction of every node (stores eta and Phi) without consensus.
void ci_begin(std::vector<InfoState>& states, const sysmodel::LinearGaussianSystem& sys,
              const std::vector<Eigen::VectorXd>& measurements, CiScaling scaling);

/// x_hat = Phi^-1 eta; P = (N Phi)^-1 with split_prior, Phi^-1 otherwise.
/// Throws SingularCovariance.
void ci_finalize(InfoState& s, Index n_nodes, CiScaling scaling);

/// Prediction, local correction, `consensus_rounds` averaging rounds on both
/// eta and vech(Phi), then ci_finalize.
void ci_filter_step(std::vector<InfoState>& states, const sysmodel::LinearGaussianSystem& sys,
                    const topology::CommGraph& graph, const std::vector<Eigen::VectorXd>& measurements,
                    const CiOptions& options);

}  // namespace dkflab::infoform
