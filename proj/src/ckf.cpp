#include "dkflab/ckf.hpp"

#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"

namespace dkflab::ckf {

StackedMeasurementModel StackedMeasurementModel::build(const Eigen::VectorXd& y, const Eigen::MatrixXd& H,
                                                       const Eigen::MatrixXd& R, const Eigen::VectorXd& x_pred,
                                                       const Eigen::MatrixXd& P_pred) {
  const Index m = H.rows();
  const Index n = H.cols();
  matops::require_shape(R, m, m, "R");
  matops::require_shape(P_pred, n, n, "P_pred");
  if (y.size() != m || x_pred.size() != n) throw Error(Errc::dimension_mismatch, "stacked model vector sizes");
  StackedMeasurementModel out;
  out.z.resize(m + n);
  out.z << y, x_pred;
  out.H_bar.resize(m + n, n);
  out.H_bar << H, Eigen::MatrixXd::Identity(n, n);
  out.S = Eigen::MatrixXd::Zero(m + n, m + n);
  out.S.topLeftCorner(m, m) = R;
  out.S.bottomRightCorner(n, n) = P_pred;
  return out;
}

CkfState predict(const CkfState& prev, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  const Index n = F.rows();
  matops::require_shape(F, n, n, "F");
  matops::require_shape(Q, n, n, "Q");
  matops::require_shape(prev.P, n, n, "P");
  if (prev.x_hat.size() != n) throw Error(Errc::dimension_mismatch, "x_hat does not match F");
  return {F * prev.x_hat, matops::symmetrize(F * prev.P * F.transpose() + Q)};
}

CkfState predict(const CkfState& prev, const sysmodel::LinearGaussianSystem& sys) {
  return predict(prev, sys.F, sys.Q);
}

InformationCorrection correct_information_form(const Eigen::VectorXd& x_pred, const Eigen::MatrixXd& prior_information,
                                               const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                                               const Eigen::VectorXd& y) {
  const Index n = x_pred.size();
  const Index m = H.rows();
  matops::require_shape(H, m, n, "H");
  matops::require_shape(R, m, m, "R");
  matops::require_shape(prior_information, n, n, "prior information");
  if (y.size() != m) throw Error(Errc::dimension_mismatch, "measurement does not match H");

  const Eigen::MatrixXd r_inv = matops::spd_inverse(R);
  const Eigen::MatrixXd ht_rinv = H.transpose() * r_inv;
  InformationCorrection out;
  out.information = matops::symmetrize(ht_rinv * H + prior_information);
  out.P = matops::spd_inverse(out.information);
  out.gain = out.P * ht_rinv;
  out.x_hat = x_pred + out.gain * (y - H * x_pred);
  return out;
}

CkfState correct(const CkfState& pred, const Eigen::VectorXd& y, const Eigen::MatrixXd& H, const Eigen::MatrixXd& R) {
  try {
    const Eigen::MatrixXd prior = matops::spd_inverse(pred.P);
    auto c = correct_information_form(pred.x_hat, prior, H, R, y);
    return {std::move(c.x_hat), std::move(c.P)};
  } catch (const Error& e) {
    if (e.code() != Errc::not_positive_definite) throw;
    throw Error(Errc::singular_covariance, std::string("covariance update failed: ") + e.what());
  }
}

Eigen::MatrixXd kalman_gain_information_form(const Eigen::MatrixXd& P_pred, const Eigen::MatrixXd& H,
                                             const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd ht_rinv = H.transpose() * matops::spd_inverse(R);
  return matops::spd_inverse(matops::symmetrize(ht_rinv * H + matops::spd_inverse(P_pred))) * ht_rinv;
}

Eigen::MatrixXd kalman_gain_dual_form(const Eigen::MatrixXd& P_pred, const Eigen::MatrixXd& H,
                                      const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd innovation = matops::symmetrize(H * P_pred * H.transpose() + R);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(innovation);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
    throw Error(Errc::singular_innovation, "innovation covariance H P H^T + R is singular");
  // K = P H^T S^-1 = (S^-1 H P)^T
  return ldlt.solve(H * P_pred).transpose();
}

Eigen::MatrixXd subtractive_covariance(const Eigen::MatrixXd& P_pred, const Eigen::MatrixXd& H,
                                       const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd k = kalman_gain_dual_form(P_pred, H, R);
  const Index n = P_pred.rows();
  return matops::symmetrize((Eigen::MatrixXd::Identity(n, n) - k * H) * P_pred);
}

double centralized_objective(const Eigen::VectorXd& xi, const StackedMeasurementModel& model) {
  const Eigen::VectorXd r = model.z - model.H_bar * xi;
  return 0.5 * r.dot(model.S.ldlt().solve(r));
}

Eigen::VectorXd centralized_gradient(const Eigen::VectorXd& xi, const StackedMeasurementModel& model) {
  const Eigen::VectorXd r = model.z - model.H_bar * xi;
  return -model.H_bar.transpose() * model.S.ldlt().solve(r);
}

std::vector<CkfState> run(const sysmodel::LinearGaussianSystem& sys, const sysmodel::Trajectory& traj,
                          const CkfState& initial) {
  const Eigen::MatrixXd H = sys.stacked_H();
  const Eigen::MatrixXd R = sys.stacked_R();
  std::vector<CkfState> out;
  out.reserve(traj.states.size());
  out.push_back(initial);
  for (Index k = 1; k <= traj.steps(); ++k)
    out.push_back(correct(predict(out.back(), sys), traj.stacked_measurement(k), H, R));
  return out;
}

}  // namespace dkflab::ckf
