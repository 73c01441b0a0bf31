#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dkflab/sysmodel.hpp"

namespace dkflab::ckf {

using Index = Eigen::Index;

struct CkfState {
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
};

/// z = [y; x_pred], H_bar = [H; I], S = blkdiag(R, P_pred).
struct StackedMeasurementModel {
  Eigen::VectorXd z;
  Eigen::MatrixXd H_bar;
  Eigen::MatrixXd S;

  static StackedMeasurementModel build(const Eigen::VectorXd& y, const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                                       const Eigen::VectorXd& x_pred, const Eigen::MatrixXd& P_pred);
};

/// x = F x, P = F P F^T + Q (symmetrized).
CkfState predict(const CkfState& prev, const sysmodel::LinearGaussianSystem& sys);
CkfState predict(const CkfState& prev, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);

/// Result of an information-form correction against a prior information matrix.
struct InformationCorrection {
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;            // (H^T R^-1 H + prior)^-1
  Eigen::MatrixXd information;  // H^T R^-1 H + prior
  Eigen::MatrixXd gain;         // P H^T R^-1
};

/// Shared kernel for the centralized and local corrections. Throws
/// NotPositiveDefinite when R or the posterior information is not SPD.
InformationCorrection correct_information_form(const Eigen::VectorXd& x_pred, const Eigen::MatrixXd& prior_information,
                                               const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                                               const Eigen::VectorXd& y);

/// Measurement update in information form. Throws SingularCovariance.
CkfState correct(const CkfState& pred, const Eigen::VectorXd& y, const Eigen::MatrixXd& H, const Eigen::MatrixXd& R);

/// (H^T R^-1 H + P^-1)^-1 H^T R^-1
Eigen::MatrixXd kalman_gain_information_form(const Eigen::MatrixXd& P_pred, const Eigen::MatrixXd& H,
                                             const Eigen::MatrixXd& R);
/// P H^T (H P H^T + R)^-1. Throws SingularInnovation.
Eigen::MatrixXd kalman_gain_dual_form(const Eigen::MatrixXd& P_pred, const Eigen::MatrixXd& H,
                                      const Eigen::MatrixXd& R);

/// (I - K H) P_pred, the subtractive covariance update (cross-check only).
Eigen::MatrixXd subtractive_covariance(const Eigen::MatrixXd& P_pred, const Eigen::MatrixXd& H,
                                       const Eigen::MatrixXd& R);

/// 1/2 (z - H_bar xi)^T S^-1 (z - H_bar xi)
double centralized_objective(const Eigen::VectorXd& xi, const StackedMeasurementModel& model);
Eigen::VectorXd centralized_gradient(const Eigen::VectorXd& xi, const StackedMeasurementModel& model);

/// Runs the centralized filter on the stacked model. Entry 0 is `initial`
/// (x_0, P_0); entry k >= 1 is predict + correct with the k-th measurement.
std::vector<CkfState> run(const sysmodel::LinearGaussianSystem& sys, const sysmodel::Trajectory& traj,
                          const CkfState& initial);

}  // namespace dkflab::ckf
