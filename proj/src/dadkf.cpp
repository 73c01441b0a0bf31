#include "dkflab/dadkf.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dkflab/ckf.hpp"
#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"

namespace dkflab::dadkf {

EstimatorState make_state(Index node, const Eigen::VectorXd& x0, const Eigen::MatrixXd& P0) {
  matops::require_shape(P0, x0.size(), x0.size(), "P0");
  EstimatorState s;
  s.node = node;
  s.x_hat = x0;
  s.P = P0;
  return s;
}

double LocalObjective::value(const Eigen::VectorXd& xi) const {
  const Eigen::VectorXd r = z_bar - H_bar * xi;
  return 0.5 * r.dot(S_bar.ldlt().solve(r));
}

Eigen::VectorXd LocalObjective::gradient(const Eigen::VectorXd& xi) const {
  const Eigen::VectorXd r = z_bar - H_bar * xi;
  return -H_bar.transpose() * S_bar.ldlt().solve(r);
}

Eigen::MatrixXd LocalObjective::hessian() const {
  return matops::symmetrize(H_bar.transpose() * S_bar.ldlt().solve(H_bar));
}

LocalObjective make_local_objective(const EstimatorState& state, const sysmodel::SensorModel& sensor,
                                    const Eigen::VectorXd& y, Index n_nodes) {
  auto model = ckf::StackedMeasurementModel::build(y, sensor.H, sensor.R, state.x_pred,
                                                   static_cast<double>(n_nodes) * state.P_pred);
  return {std::move(model.z), std::move(model.H_bar), std::move(model.S)};
}

Eigen::VectorXd laplacian_row_sum(const Eigen::VectorXd& own, const std::vector<NeighborValue>& neighbors) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(own.size());
  for (const auto& nb : neighbors) {
    const Eigen::VectorXd& v = nb.value.get();
    if (v.size() != own.size()) throw Error(Errc::dimension_mismatch, "neighbor value has the wrong length");
    acc += nb.weight * (own - v);
  }
  return acc;
}

void local_predict(EstimatorState& state, const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  const ckf::CkfState pred = ckf::predict(ckf::CkfState{state.x_hat, state.P}, F, Q);
  state.x_pred = pred.x_hat;
  state.P_pred = pred.P;
  try {
    state.Omega_pred = matops::spd_inverse(state.P_pred);
  } catch (const Error& e) {
    std::ostringstream os;
    os << "node " << state.node << ": predicted covariance is singular (" << e.what() << ")";
    throw Error(Errc::singular_covariance, os.str());
  }
}

Eigen::VectorXd covariance_target(const Eigen::MatrixXd& information, Index n_nodes, bool include_n_factor) {
  if (!include_n_factor) return matops::vech_vector(information);
  return matops::vech_vector(static_cast<double>(n_nodes) * information);
}

LocalCorrection local_correction(const EstimatorState& state, const sysmodel::SensorModel& sensor,
                                 const Eigen::VectorXd& y, Index n_nodes, bool include_n_factor) {
  if (n_nodes < 1) throw Error(Errc::dimension_mismatch, "network needs at least one node");
  if (state.Omega_pred.size() == 0) throw Error(Errc::dimension_mismatch, "local_correction before local_predict");
  const Eigen::MatrixXd prior = (1.0 / static_cast<double>(n_nodes)) * state.Omega_pred;
  try {
    auto c = ckf::correct_information_form(state.x_pred, prior, sensor.H, sensor.R, y);
    LocalCorrection out;
    out.phi_inv = std::move(c.P);
    out.local_estimate = std::move(c.x_hat);
    out.cov_target = covariance_target(c.information, n_nodes, include_n_factor);
    out.information = std::move(c.information);
    return out;
  } catch (const Error& e) {
    if (e.code() != Errc::not_positive_definite) throw;
    std::ostringstream os;
    os << "node " << state.node << ": local information is not positive definite (" << e.what() << ")";
    throw Error(Errc::singular_local_information, os.str());
  }
}

Eigen::VectorXd primal_step(const LocalCorrection& local, const Eigen::VectorXd& lambda,
                            const std::vector<NeighborValue>& neighbor_lambdas) {
  return local.local_estimate - local.phi_inv * laplacian_row_sum(lambda, neighbor_lambdas);
}

Eigen::VectorXd dual_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& xi, double alpha_lambda,
                          const std::vector<NeighborValue>& neighbor_xis) {
  return lambda + alpha_lambda * laplacian_row_sum(xi, neighbor_xis);
}

Eigen::VectorXd cov_primal_step(const Eigen::VectorXd& target, const Eigen::VectorXd& mu,
                                const std::vector<NeighborValue>& neighbor_mus) {
  return target - laplacian_row_sum(mu, neighbor_mus);
}

Eigen::VectorXd cov_dual_step(const Eigen::VectorXd& mu, const Eigen::VectorXd& zeta, double alpha_mu,
                              const std::vector<NeighborValue>& neighbor_zetas) {
  return mu + alpha_mu * laplacian_row_sum(zeta, neighbor_zetas);
}

void begin_correction(EstimatorState& state, const sysmodel::SensorModel& sensor, const Eigen::VectorXd& y,
                      Index n_nodes, bool include_n_factor, bool warm_start) {
  state.local = local_correction(state, sensor, y, n_nodes, include_n_factor);
  const Index n = state.x_pred.size();
  if (!warm_start || state.lambda.size() != n) state.lambda = Eigen::VectorXd::Zero(n);
  if (!warm_start || state.mu.size() != matops::packed_size(n)) state.mu = Eigen::VectorXd::Zero(matops::packed_size(n));
  state.xi = state.x_pred;
  state.zeta = state.local.cov_target;
}

void primal_round(EstimatorState& state, const std::vector<NeighborValue>& neighbor_lambdas,
                  const std::vector<NeighborValue>& neighbor_mus) {
  state.xi = primal_step(state.local, state.lambda, neighbor_lambdas);
  state.zeta = cov_primal_step(state.local.cov_target, state.mu, neighbor_mus);
}

void dual_round(EstimatorState& state, double alpha_lambda, double alpha_mu,
                const std::vector<NeighborValue>& neighbor_xis, const std::vector<NeighborValue>& neighbor_zetas) {
  state.lambda = dual_step(state.lambda, state.xi, alpha_lambda, neighbor_xis);
  state.mu = cov_dual_step(state.mu, state.zeta, alpha_mu, neighbor_zetas);
}

void finalize_correction(EstimatorState& state) {
  try {
    state.P = matops::spd_inverse(matops::invvech(state.zeta));
  } catch (const Error&) {
    std::ostringstream os;
    os << "node " << state.node << ": invvech(zeta) is not positive definite; l* may be too small or alpha_mu too large";
    throw Error(Errc::indefinite_information, os.str());
  }
  state.x_hat = state.xi;
}

double step_size_bound(const topology::CommGraph& graph, const std::vector<Eigen::MatrixXd>& phi_inverses) {
  topology::assert_connected(graph);
  const double sigma = graph.spectrum().largest();
  if (sigma <= 0.0) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& p : phi_inverses) worst = std::max(worst, matops::spectral_norm(p));
  return 2.0 / (sigma * sigma * worst);
}

double step_size_bound(const topology::CommGraph& graph, const std::vector<EstimatorState>& states) {
  std::vector<Eigen::MatrixXd> phis;
  phis.reserve(states.size());
  for (const auto& s : states) phis.push_back(s.local.phi_inv);
  return step_size_bound(graph, phis);
}

double covariance_step_bound(const topology::CommGraph& graph) {
  const double sigma = graph.spectrum().largest();
  if (sigma <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / (sigma * sigma);
}

std::pair<double, double> resolve_step_sizes(const StepSizes& sizes, double lambda_bound, double mu_bound) {
  auto pick = [](StepMode mode, double fixed, double bound) {
    if (mode == StepMode::fixed) return fixed;
    return std::isfinite(bound) ? 0.5 * bound : 1.0;
  };
  return {pick(sizes.lambda_mode, sizes.alpha_lambda, lambda_bound), pick(sizes.mu_mode, sizes.alpha_mu, mu_bound)};
}

namespace {

IterateSnapshot snapshot(const std::vector<EstimatorState>& states) {
  IterateSnapshot s;
  for (const auto& st : states) {
    s.xi.push_back(st.xi);
    s.lambda.push_back(st.lambda);
    s.zeta.push_back(st.zeta);
    s.mu.push_back(st.mu);
  }
  return s;
}

std::vector<NeighborValue> gather(const topology::CommGraph& graph, Index i, const std::vector<EstimatorState>& states,
                                  Eigen::VectorXd EstimatorState::*field) {
  std::vector<NeighborValue> out;
  for (const auto& nb : graph.neighbors(i))
    out.push_back({nb.weight, std::cref(states[static_cast<std::size_t>(nb.node)].*field)});
  return out;
}

}  // namespace

CorrectionReport distributed_correct(std::vector<EstimatorState>& states, const sysmodel::LinearGaussianSystem& sys,
                                     const topology::CommGraph& graph,
                                     const std::vector<Eigen::VectorXd>& measurements,
                                     const CorrectionOptions& options) {
  const Index n_nodes = graph.n_nodes();
  if (static_cast<Index>(states.size()) != n_nodes || sys.sensor_count() != n_nodes ||
      static_cast<Index>(measurements.size()) != n_nodes)
    throw Error(Errc::dimension_mismatch, "states, sensors, measurements and graph nodes must agree in number");
  if (options.l_star < 0) throw Error(Errc::dimension_mismatch, "l_star must be non-negative");
  topology::assert_connected(graph);

  for (Index i = 0; i < n_nodes; ++i) {
    const auto u = static_cast<std::size_t>(i);
    begin_correction(states[u], sys.sensors[u], measurements[u], n_nodes, options.include_n_factor,
                     options.warm_start);
  }

  CorrectionReport report;
  report.lambda_bound = step_size_bound(graph, states);
  report.mu_bound = covariance_step_bound(graph);
  std::tie(report.alpha_lambda, report.alpha_mu) =
      resolve_step_sizes(options.step_sizes, report.lambda_bound, report.mu_bound);
  if (options.record_trace) report.trace.emplace().push_back(snapshot(states));

  auto primal_phase = [&] {
    for (Index i = 0; i < n_nodes; ++i)
      primal_round(states[static_cast<std::size_t>(i)], gather(graph, i, states, &EstimatorState::lambda),
                   gather(graph, i, states, &EstimatorState::mu));
  };

  if (options.l_star == 0) primal_phase();
  for (Index l = 0; l < options.l_star; ++l) {
    primal_phase();
    for (Index i = 0; i < n_nodes; ++i)
      dual_round(states[static_cast<std::size_t>(i)], report.alpha_lambda, report.alpha_mu,
                 gather(graph, i, states, &EstimatorState::xi), gather(graph, i, states, &EstimatorState::zeta));
    if (report.trace) report.trace->push_back(snapshot(states));
  }

  for (auto& s : states) finalize_correction(s);
  return report;
}

CorrectionReport filter_step(std::vector<EstimatorState>& states, const sysmodel::LinearGaussianSystem& sys,
                             const topology::CommGraph& graph, const std::vector<Eigen::VectorXd>& measurements,
                             const CorrectionOptions& options) {
  for (auto& s : states) local_predict(s, sys.F, sys.Q);
  return distributed_correct(states, sys, graph, measurements, options);
}

}  // namespace dkflab::dadkf
