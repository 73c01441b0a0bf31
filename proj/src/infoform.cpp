#include "dkflab/infoform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dkflab/ckf.hpp"
#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"

namespace dkflab::infoform {

namespace {

double prior_scale(Index n_nodes, CiScaling scaling) {
  return scaling == CiScaling::split_prior ? 1.0 / static_cast<double>(n_nodes) : 1.0;
}

}  // namespace

InfoState make_state(Index node, const Eigen::VectorXd& x0, const Eigen::MatrixXd& P0) {
  matops::require_shape(P0, x0.size(), x0.size(), "P0");
  InfoState s;
  s.node = node;
  s.x_hat = x0;
  s.P = P0;
  return s;
}

void info_predict(InfoState& s, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  const ckf::CkfState pred = ckf::predict(ckf::CkfState{s.x_hat, s.P}, F, Q);
  s.x_pred = pred.x_hat;
  s.P_pred = pred.P;
  try {
    s.Omega_pred = matops::spd_inverse(s.P_pred);
  } catch (const Error& e) {
    throw Error(Errc::singular_covariance, std::string("predicted covariance is singular: ") + e.what());
  }
  s.tau_pred = s.Omega_pred * s.x_pred;
}

Eigen::MatrixXd local_information(const InfoState& s, const sysmodel::SensorModel& sensor, Index n_nodes) {
  return ci_local_information(s, sensor, n_nodes, CiScaling::split_prior);
}

double info_objective(const Eigen::VectorXd& eta, const InfoState& s, const sysmodel::SensorModel& sensor,
                      const Eigen::VectorXd& y, Index n_nodes) {
  const Eigen::MatrixXd r_inv = matops::spd_inverse(sensor.R);
  const double inv_n = 1.0 / static_cast<double>(n_nodes);
  const Eigen::VectorXd c = sensor.H.transpose() * r_inv * y + inv_n * s.tau_pred;
  const Eigen::LLT<Eigen::MatrixXd> phi(local_information(s, sensor, n_nodes));
  const double quad = eta.dot(phi.solve(eta)) - 2.0 * eta.dot(phi.solve(c));
  const double constant = y.dot(r_inv * y) + inv_n * s.tau_pred.dot(s.P_pred * s.tau_pred);
  return 0.5 * (quad + constant);
}

Eigen::VectorXd info_gradient(const Eigen::VectorXd& eta, const InfoState& s, const sysmodel::SensorModel& sensor,
                              const Eigen::VectorXd& y, Index n_nodes) {
  const Eigen::LLT<Eigen::MatrixXd> phi(local_information(s, sensor, n_nodes));
  return phi.solve(eta - ci_local_correct(s, sensor, y, n_nodes, CiScaling::split_prior));
}

Eigen::VectorXd ci_local_correct(const InfoState& s, const sysmodel::SensorModel& sensor, const Eigen::VectorXd& y,
                                 Index n_nodes, CiScaling scaling) {
  matops::require_shape(sensor.H, y.size(), s.tau_pred.size(), "H");
  return sensor.H.transpose() * matops::spd_inverse(sensor.R) * y + prior_scale(n_nodes, scaling) * s.tau_pred;
}

Eigen::MatrixXd ci_local_information(const InfoState& s, const sysmodel::SensorModel& sensor, Index n_nodes,
                                     CiScaling scaling) {
  const Eigen::MatrixXd ht_rinv = sensor.H.transpose() * matops::spd_inverse(sensor.R);
  return matops::symmetrize(ht_rinv * sensor.H + prior_scale(n_nodes, scaling) * s.Omega_pred);
}

Eigen::MatrixXd metropolis_weights(const topology::CommGraph& graph) {
  const Index n = graph.n_nodes();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (const auto& nb : graph.neighbors(i)) {
      const auto d = std::max(graph.degree(i), graph.degree(nb.node));
      W(i, nb.node) = 1.0 / (1.0 + static_cast<double>(d));
    }
  }
  for (Index i = 0; i < n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return W;
}

void validate_consensus_weights(const Eigen::MatrixXd& W, const topology::CommGraph* graph) {
  if (W.rows() != W.cols()) throw Error(Errc::non_square, "consensus weights must be square");
  constexpr double tol = 1e-10;
  for (Index i = 0; i < W.rows(); ++i) {
    if (std::abs(W.row(i).sum() - 1.0) > tol || std::abs(W.col(i).sum() - 1.0) > tol) {
      std::ostringstream os;
      os << "row or column " << i << " of W does not sum to 1";
      throw Error(Errc::not_doubly_stochastic, os.str());
    }
    for (Index j = 0; j < W.cols(); ++j) {
      if (W(i, j) < 0.0) throw Error(Errc::not_doubly_stochastic, "W has a negative entry");
      if (graph && i != j && W(i, j) != 0.0 && !graph->has_edge(i, j)) {
        std::ostringstream os;
        os << "W(" << i << "," << j << ") is nonzero but (" << i << "," << j << ") is not an edge";
        throw Error(Errc::not_doubly_stochastic, os.str());
      }
    }
  }
}

std::vector<Index> weight_support(const Eigen::MatrixXd& W, Index i) {
  std::vector<Index> out;
  for (Index j = 0; j < W.cols(); ++j)
    if (W(i, j) != 0.0) out.push_back(j);
  return out;
}

Eigen::VectorXd weighted_average(const Eigen::MatrixXd& W, Index i, const std::vector<Index>& support,
                                 const std::vector<const Eigen::VectorXd*>& values) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(values[static_cast<std::size_t>(i)]->size());
  for (Index j : support) acc += W(i, j) * *values[static_cast<std::size_t>(j)];
  return acc;
}

std::vector<Eigen::VectorXd> ci_consensus_round(const std::vector<Eigen::VectorXd>& values, const Eigen::MatrixXd& W) {
  if (static_cast<Index>(values.size()) != W.rows())
    throw Error(Errc::dimension_mismatch, "one value per node is required");
  validate_consensus_weights(W);
  std::vector<const Eigen::VectorXd*> ptrs;
  for (const auto& v : values) ptrs.push_back(&v);
  std::vector<Eigen::VectorXd> out;
  out.reserve(values.size());
  for (Index i = 0; i < W.rows(); ++i) out.push_back(weighted_average(W, i, weight_support(W, i), ptrs));
  return out;
}

void ci_begin(std::vector<InfoState>& states, const sysmodel::LinearGaussianSystem& sys,
              const std::vector<Eigen::VectorXd>& measurements, CiScaling scaling) {
  const auto n_nodes = static_cast<Index>(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i].eta = ci_local_correct(states[i], sys.sensors[i], measurements[i], n_nodes, scaling);
    states[i].Phi = ci_local_information(states[i], sys.sensors[i], n_nodes, scaling);
  }
}

void ci_finalize(InfoState& s, Index n_nodes, CiScaling scaling) {
  try {
    const Eigen::MatrixXd info = scaling == CiScaling::split_prior ? Eigen::MatrixXd(static_cast<double>(n_nodes) * s.Phi)
                                                              : s.Phi;
    s.P = matops::spd_inverse(info);
    s.x_hat = matops::spd_inverse(s.Phi) * s.eta;
  } catch (const Error& e) {
    std::ostringstream os;
    os << "node " << s.node << ": averaged information is not positive definite (" << e.what() << ")";
    throw Error(Errc::singular_covariance, os.str());
  }
}

void ci_filter_step(std::vector<InfoState>& states, const sysmodel::LinearGaussianSystem& sys,
                    const topology::CommGraph& graph, const std::vector<Eigen::VectorXd>& measurements,
                    const CiOptions& options) {
  const Index n_nodes = graph.n_nodes();
  if (static_cast<Index>(states.size()) != n_nodes || sys.sensor_count() != n_nodes ||
      static_cast<Index>(measurements.size()) != n_nodes)
    throw Error(Errc::dimension_mismatch, "states, sensors, measurements and graph nodes must agree in number");
  for (auto& s : states) info_predict(s, sys.F, sys.Q);
  ci_begin(states, sys, measurements, options.scaling);

  const Eigen::MatrixXd W = metropolis_weights(graph);
  std::vector<Eigen::VectorXd> etas;
  std::vector<Eigen::VectorXd> phis;
  for (const auto& s : states) {
    etas.push_back(s.eta);
    phis.push_back(matops::vech_vector(s.Phi));
  }
  for (Index r = 0; r < options.consensus_rounds; ++r) {
    etas = ci_consensus_round(etas, W);
    phis = ci_consensus_round(phis, W);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i].eta = etas[i];
    states[i].Phi = matops::invvech(phis[i]);
    ci_finalize(states[i], n_nodes, options.scaling);
  }
}

}  // namespace dkflab::infoform
