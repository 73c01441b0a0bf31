#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dkflab/graph.hpp"
#include "dkflab/sysmodel.hpp"

namespace dkflab::dadkf {

using Index = Eigen::Index;

/// Quantities fixed for one correction: Phi_i = H^T R^-1 H + Omega_pred / N,
/// its inverse, the local estimate x_pred + K (y - H x_pred) and Phi_i itself
/// (which is also the local covariance information Omega_{i,k}).
struct LocalCorrection {
  Eigen::MatrixXd phi_inv;
  Eigen::VectorXd local_estimate;
  Eigen::MatrixXd information;
  Eigen::VectorXd cov_target;  // vech(N Omega_{i,k}) or vech(Omega_{i,k})
};

struct EstimatorState {
  Index node = 0;
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
  Eigen::VectorXd x_pred;
  Eigen::MatrixXd P_pred;
  Eigen::MatrixXd Omega_pred;
  Eigen::VectorXd xi;
  Eigen::VectorXd lambda;
  Eigen::VectorXd zeta;
  Eigen::VectorXd mu;
  LocalCorrection local;
};

EstimatorState make_state(Index node, const Eigen::VectorXd& x0, const Eigen::MatrixXd& P0);

enum class StepMode { fixed, automatic };

struct StepSizes {
  double alpha_lambda = 0.01;
  double alpha_mu = 0.01;
  StepMode lambda_mode = StepMode::fixed;
  StepMode mu_mode = StepMode::fixed;

  static StepSizes automatic() { return {0.0, 0.0, StepMode::automatic, StepMode::automatic}; }
};

/// f_i(xi) = 1/2 (z_bar - H_bar xi)^T S_bar^-1 (z_bar - H_bar xi) with
/// z_bar = [y_i; x_pred], H_bar = [H_i; I], S_bar = blkdiag(R_i, N P_pred).
struct LocalObjective {
  Eigen::VectorXd z_bar;
  Eigen::MatrixXd H_bar;
  Eigen::MatrixXd S_bar;

  double value(const Eigen::VectorXd& xi) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& xi) const;
  /// H_bar^T S_bar^-1 H_bar
  Eigen::MatrixXd hessian() const;
};

LocalObjective make_local_objective(const EstimatorState& state, const sysmodel::SensorModel& sensor,
                                    const Eigen::VectorXd& y, Index n_nodes);

/// A neighbor's value together with the edge weight a_ij.
struct NeighborValue {
  double weight;
  std::reference_wrapper<const Eigen::VectorXd> value;
};

/// sum_j a_ij (own - value_j), accumulated in the order given.
Eigen::VectorXd laplacian_row_sum(const Eigen::VectorXd& own, const std::vector<NeighborValue>& neighbors);

/// x_pred = F x_hat, P_pred = F P F^T + Q, Omega_pred = P_pred^-1.
/// Throws SingularCovariance if P_pred cannot be inverted.
void local_predict(EstimatorState& state, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);

/// Builds Phi_i, K_i and the local estimate. Throws SingularLocalInformation.
LocalCorrection local_correction(const EstimatorState& state, const sysmodel::SensorModel& sensor,
                                 const Eigen::VectorXd& y, Index n_nodes, bool include_n_factor = true);

Eigen::VectorXd covariance_target(const Eigen::MatrixXd& information, Index n_nodes, bool include_n_factor);

/// xi_{l+1} = local_estimate - Phi^-1 sum_j a_ij (lambda_i - lambda_j)
Eigen::VectorXd primal_step(const LocalCorrection& local, const Eigen::VectorXd& lambda,
                            const std::vector<NeighborValue>& neighbor_lambdas);
/// lambda_{l+1} = lambda_l + alpha sum_j a_ij (xi_i - xi_j)
Eigen::VectorXd dual_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& xi, double alpha_lambda,
                          const std::vector<NeighborValue>& neighbor_xis);
/// zeta_{l+1} = target - sum_j a_ij (mu_i - mu_j)
Eigen::VectorXd cov_primal_step(const Eigen::VectorXd& target, const Eigen::VectorXd& mu,
                                const std::vector<NeighborValue>& neighbor_mus);
/// mu_{l+1} = mu_l + alpha sum_j a_ij (zeta_i - zeta_j)
Eigen::VectorXd cov_dual_step(const Eigen::VectorXd& mu, const Eigen::VectorXd& zeta, double alpha_mu,
                              const std::vector<NeighborValue>& neighbor_zetas);

/// Per-node driver pieces used both here and by the network simulator.
///
/// begin_correction stores the local correction and (unless warm) zeroes the
/// duals. primal_round consumes neighbor duals, dual_round neighbor primals.
void begin_correction(EstimatorState& state, const sysmodel::SensorModel& sensor, const Eigen::VectorXd& y,
                      Index n_nodes, bool include_n_factor, bool warm_start);
void primal_round(EstimatorState& state, const std::vector<NeighborValue>& neighbor_lambdas,
                  const std::vector<NeighborValue>& neighbor_mus);
void dual_round(EstimatorState& state, double alpha_lambda, double alpha_mu,
                const std::vector<NeighborValue>& neighbor_xis, const std::vector<NeighborValue>& neighbor_zetas);

/// x_hat = xi, P = invvech(zeta)^-1. Throws IndefiniteInformation.
void finalize_correction(EstimatorState& state);

/// 2 / (sigma_N^2 max_i ||Phi_i^-1||) with spectral norms. +inf when the
/// graph has no edges. Throws DisconnectedGraph.
double step_size_bound(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& phi_inverses);
/// Uses the phi_inv stored by begin_correction.
double step_size_bound(const topology::CommGraph& graph, const std::vector<EstimatorState>& states);
/// 2 / sigma_N^2, +inf without edges.
double covariance_step_bound(const topology::CommGraph& graph);

struct CorrectionOptions {
  StepSizes step_sizes;
  Index l_star = 10;
  bool warm_start = false;
  bool include_n_factor = true;
  bool record_trace = false;
};

/// All node iterates at one iteration index.
struct IterateSnapshot {
  std::vector<Eigen::VectorXd> xi;
  std::vector<Eigen::VectorXd> lambda;
  std::vector<Eigen::VectorXd> zeta;
  std::vector<Eigen::VectorXd> mu;
};

struct CorrectionReport {
  double alpha_lambda = 0.0;
  double alpha_mu = 0.0;
  double lambda_bound = 0.0;
  double mu_bound = 0.0;
  /// Entries l = 0..l_star. Entry 0 holds the initial duals with xi = x_pred
  /// and zeta = the covariance target.
  std::optional<std::vector<IterateSnapshot>> trace;
};

/// Resolves automatic step sizes: half of each bound (alpha = 1 when the bound
/// is infinite).
std::pair<double, double> resolve_step_sizes(const StepSizes& sizes, double lambda_bound, double mu_bound);

/// One distributed correction on already predicted states. Each of the l*
/// rounds is a primal update from neighbor duals followed by a dual update
/// from neighbor primals, all nodes reading the previous round's values.
/// With l* = 0 the primal is evaluated once from the initial duals.
CorrectionReport distributed_correct(std::vector<EstimatorState>& states, const sysmodel::LinearGaussianSystem& sys,
                                     const topology::CommGraph& graph,
                                     const std::vector<Eigen::VectorXd>& measurements,
                                     const CorrectionOptions& options);

/// local_predict on every node, then distributed_correct.
CorrectionReport filter_step(std::vector<EstimatorState>& states, const sysmodel::LinearGaussianSystem& sys,
                             const topology::CommGraph& graph, const std::vector<Eigen::VectorXd>& measurements,
                             const CorrectionOptions& options);

}  // namespace dkflab::dadkf
