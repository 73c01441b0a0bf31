#include "dkflab/netsim.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"

namespace dkflab::netsim {

std::string_view to_string(PayloadKind kind) noexcept {
  switch (kind) {
    case PayloadKind::xi: return "xi";
    case PayloadKind::lambda: return "lambda";
    case PayloadKind::zeta: return "zeta";
    case PayloadKind::mu: return "mu";
    case PayloadKind::info_vector: return "info_vector";
    case PayloadKind::info_matrix: return "info_matrix";
  }
  return "unknown";
}

std::string_view to_string(Algorithm a) noexcept {
  return a == Algorithm::dadkf ? "dadkf" : "ci";
}

std::size_t CommStats::scalars_at(Index k) const {
  std::size_t total = 0;
  for (const auto& r : per_round)
    if (r.k == k) total += r.scalars;
  return total;
}

Router::Router(const topology::CommGraph& graph, Index state_dim, bool keep_log)
    : graph_(graph),
      state_dim_(state_dim),
      keep_log_(keep_log),
      outboxes_(static_cast<std::size_t>(graph.n_nodes())),
      inboxes_(static_cast<std::size_t>(graph.n_nodes())) {}

Index Router::payload_length(PayloadKind kind) const noexcept {
  switch (kind) {
    case PayloadKind::xi:
    case PayloadKind::lambda:
    case PayloadKind::info_vector:
      return state_dim_;
    default:
      return matops::packed_size(state_dim_);
  }
}

void Router::send(RoundMessage msg) {
  if (!graph_.has_edge(msg.from, msg.to)) {
    std::ostringstream os;
    os << "node " << msg.from << " tried to send " << to_string(msg.kind) << " to non-neighbor " << msg.to;
    throw Error(Errc::non_edge_message, os.str());
  }
  if (msg.payload.size() != payload_length(msg.kind)) {
    std::ostringstream os;
    os << to_string(msg.kind) << " payload has length " << msg.payload.size() << ", expected "
       << payload_length(msg.kind);
    throw Error(Errc::dimension_mismatch, os.str());
  }
  outboxes_[static_cast<std::size_t>(msg.from)].push_back(std::move(msg));
}

void Router::deliver(const RoundTag& tag) {
  for (auto& box : inboxes_) box.clear();
  if (stats_.per_round.empty() || stats_.per_round.back().k != tag.k || stats_.per_round.back().l != tag.l)
    stats_.per_round.push_back({tag.k, tag.l, 0, 0, 0});
  RoundStats& round = stats_.per_round.back();

  for (auto& box : outboxes_) {
    Index last_to = -1;
    std::vector<Index> seen;
    for (auto& msg : box) {
      msg.round = tag;
      ++round.messages;
      round.scalars += static_cast<std::size_t>(msg.payload.size());
      if (msg.to != last_to && std::find(seen.begin(), seen.end(), msg.to) == seen.end()) {
        seen.push_back(msg.to);
        ++round.exchanges;
        ++stats_.exchanges_total;
      }
      last_to = msg.to;
      ++stats_.messages_total;
      stats_.scalars_total += static_cast<std::size_t>(msg.payload.size());
      if (keep_log_) log_.push_back(msg);
      inboxes_[static_cast<std::size_t>(msg.to)].push_back(std::move(msg));
    }
    box.clear();
  }
}

const std::vector<RoundMessage>& Router::inbox(Index node) const {
  return inboxes_.at(static_cast<std::size_t>(node));
}

void parallel_for(Index n, int workers, const std::function<void(Index)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  const Index chunks = std::min<Index>(workers, n);
  std::mutex mutex;
  Index failed_at = n;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(chunks));
    for (Index c = 0; c < chunks; ++c) {
      const Index lo = n * c / chunks;
      const Index hi = n * (c + 1) / chunks;
      pool.emplace_back([&, lo, hi] {
        for (Index i = lo; i < hi; ++i) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (i < failed_at) {
              failed_at = i;
              failure = std::current_exception();
            }
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

DaDkfNode::DaDkfNode(Index id, const topology::CommGraph& graph, const sysmodel::SensorModel& sensor,
                     dadkf::EstimatorState state)
    : id_(id), neighbors_(graph.neighbors(id)), sensor_(sensor), state_(std::move(state)) {
  state_.node = id;
}

void DaDkfNode::predict(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  dadkf::local_predict(state_, F, Q);
}

void DaDkfNode::begin(const Eigen::VectorXd& y, Index n_nodes, bool include_n_factor, bool warm_start) {
  dadkf::begin_correction(state_, sensor_, y, n_nodes, include_n_factor, warm_start);
}

void DaDkfNode::send_duals(Router& router, const RoundTag& tag) const {
  for (const auto& nb : neighbors_) {
    router.send({id_, nb.node, PayloadKind::lambda, tag, state_.lambda});
    router.send({id_, nb.node, PayloadKind::mu, tag, state_.mu});
  }
}

void DaDkfNode::send_primals(Router& router, const RoundTag& tag) const {
  for (const auto& nb : neighbors_) {
    router.send({id_, nb.node, PayloadKind::xi, tag, state_.xi});
    router.send({id_, nb.node, PayloadKind::zeta, tag, state_.zeta});
  }
}

std::vector<dadkf::NeighborValue> DaDkfNode::collect(const std::vector<RoundMessage>& inbox, PayloadKind kind) const {
  std::vector<dadkf::NeighborValue> out;
  out.reserve(neighbors_.size());
  auto nb = neighbors_.begin();
  for (const auto& msg : inbox) {
    if (msg.kind != kind) continue;
    while (nb != neighbors_.end() && nb->node < msg.from) ++nb;
    if (nb == neighbors_.end() || nb->node != msg.from) {
      std::ostringstream os;
      os << "node " << id_ << " received " << to_string(kind) << " from non-neighbor " << msg.from;
      throw Error(Errc::non_edge_message, os.str());
    }
    out.push_back({nb->weight, std::cref(msg.payload)});
  }
  if (out.size() != neighbors_.size()) {
    std::ostringstream os;
    os << "node " << id_ << " expected " << neighbors_.size() << " " << to_string(kind) << " values, got " << out.size();
    throw Error(Errc::dimension_mismatch, os.str());
  }
  return out;
}

void DaDkfNode::primal_update(const std::vector<RoundMessage>& inbox) {
  dadkf::primal_round(state_, collect(inbox, PayloadKind::lambda), collect(inbox, PayloadKind::mu));
}

void DaDkfNode::dual_update(const std::vector<RoundMessage>& inbox, double alpha_lambda, double alpha_mu) {
  dadkf::dual_round(state_, alpha_lambda, alpha_mu, collect(inbox, PayloadKind::xi), collect(inbox, PayloadKind::zeta));
}

void DaDkfNode::finalize() {
  dadkf::finalize_correction(state_);
}

CiNode::CiNode(Index id, const topology::CommGraph& graph, const Eigen::MatrixXd& weights,
               const sysmodel::SensorModel& sensor, infoform::InfoState state)
    : id_(id), neighbors_(graph.neighbors(id)), weights_(weights), sensor_(sensor), state_(std::move(state)) {
  state_.node = id;
}

void CiNode::predict(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  infoform::info_predict(state_, F, Q);
}

void CiNode::local_correct(const Eigen::VectorXd& y, Index n_nodes, infoform::CiScaling scaling) {
  state_.eta = infoform::ci_local_correct(state_, sensor_, y, n_nodes, scaling);
  state_.Phi = infoform::ci_local_information(state_, sensor_, n_nodes, scaling);
  phi_packed_ = matops::vech_vector(state_.Phi);
}

void CiNode::send(Router& router, const RoundTag& tag) const {
  for (const auto& nb : neighbors_) {
    router.send({id_, nb.node, PayloadKind::info_vector, tag, state_.eta});
    router.send({id_, nb.node, PayloadKind::info_matrix, tag, phi_packed_});
  }
}

void CiNode::average(const std::vector<RoundMessage>& inbox) {
  // same summation order as infoform::ci_consensus_round: ascending node index, self included
  const auto n_nodes = static_cast<std::size_t>(weights_.rows());
  std::vector<const Eigen::VectorXd*> etas(n_nodes, nullptr);
  std::vector<const Eigen::VectorXd*> phis(n_nodes, nullptr);
  etas[static_cast<std::size_t>(id_)] = &state_.eta;
  phis[static_cast<std::size_t>(id_)] = &phi_packed_;
  for (const auto& msg : inbox) {
    auto& slot = msg.kind == PayloadKind::info_vector ? etas : phis;
    slot[static_cast<std::size_t>(msg.from)] = &msg.payload;
  }
  const std::vector<Index> support = infoform::weight_support(weights_, id_);
  for (Index j : support) {
    if (!etas[static_cast<std::size_t>(j)] || !phis[static_cast<std::size_t>(j)]) {
      std::ostringstream os;
      os << "node " << id_ << " is missing information from node " << j;
      throw Error(Errc::dimension_mismatch, os.str());
    }
  }
  Eigen::VectorXd eta = infoform::weighted_average(weights_, id_, support, etas);
  Eigen::VectorXd phi = infoform::weighted_average(weights_, id_, support, phis);
  state_.eta = std::move(eta);
  phi_packed_ = std::move(phi);
  state_.Phi = matops::invvech(phi_packed_);
}

void CiNode::finalize(Index n_nodes, infoform::CiScaling scaling) {
  infoform::ci_finalize(state_, n_nodes, scaling);
}

namespace {

void check_sizes(const sysmodel::LinearGaussianSystem& sys, const topology::CommGraph& graph,
                 const sysmodel::Trajectory& traj, const FilterParams& params) {
  auto fail = [](const std::string& what) { throw Error(Errc::config_mismatch, what); };
  const Index N = graph.n_nodes();
  const Index n = sys.state_dim();
  if (sys.sensor_count() != N) fail("sensor count differs from graph size");
  if (traj.states.empty() || traj.states.front().size() != n) fail("trajectory state dimension differs from system");
  for (const auto& ys : traj.measurements) {
    if (static_cast<Index>(ys.size()) != N) fail("trajectory has the wrong number of sensors");
    for (Index i = 0; i < N; ++i)
      if (ys[static_cast<std::size_t>(i)].size() != sys.sensors[static_cast<std::size_t>(i)].output_dim())
        fail("trajectory measurement dimension differs from sensor model");
  }
  if (static_cast<Index>(params.initial_estimates.size()) != N) fail("one initial estimate per node is required");
  for (const auto& x : params.initial_estimates)
    if (x.size() != n) fail("initial estimate has the wrong dimension");
  if (params.P0.rows() != n || params.P0.cols() != n) fail("P0 has the wrong shape");
  if (params.dkf.l_star < 0) fail("l_star must be non-negative");
  if (params.ci.consensus_rounds < 0) fail("ci consensus rounds must be non-negative");
}

template <typename Body>
void with_step(Index k, Body&& body) {
  try {
    body();
  } catch (const Error& e) {
    throw Error(e.code(), "time step " + std::to_string(k) + ": " + e.message());
  }
}

void run_dadkf(FilterRun& run, const sysmodel::LinearGaussianSystem& sys, const sysmodel::Trajectory& traj,
               const FilterParams& params, Router& router) {
  const topology::CommGraph& graph = run.graph;
  const Index N = graph.n_nodes();
  const auto& opt = params.dkf;
  std::vector<DaDkfNode> nodes;
  nodes.reserve(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i)
    nodes.emplace_back(i, graph, sys.sensors[static_cast<std::size_t>(i)],
                       dadkf::make_state(i, params.initial_estimates[static_cast<std::size_t>(i)], params.P0));
  auto node = [&](Index i) -> DaDkfNode& { return nodes[static_cast<std::size_t>(i)]; };

  for (Index k = 1; k <= traj.steps(); ++k) with_step(k, [&] {
    const auto& ys = traj.measurements[static_cast<std::size_t>(k)];
    parallel_for(N, params.workers, [&](Index i) {
      node(i).predict(sys.F, sys.Q);
      node(i).begin(ys[static_cast<std::size_t>(i)], N, opt.include_n_factor, opt.warm_start);
    });

    // the bound needs max_i ||Phi_i^-1||, a network-wide quantity; it is
    // evaluated here by the harness rather than by message passing
    std::vector<Eigen::MatrixXd> phis;
    for (const auto& nd : nodes) phis.push_back(nd.state().local.phi_inv);
    StepInfo info;
    info.lambda_bound = dadkf::step_size_bound(graph, phis);
    info.mu_bound = dadkf::covariance_step_bound(graph);
    std::tie(info.alpha_lambda, info.alpha_mu) =
        dadkf::resolve_step_sizes(opt.step_sizes, info.lambda_bound, info.mu_bound);
    run.steps.push_back(info);

    auto primal_phase = [&](Index l) {
      const RoundTag tag{k, l, 0};
      parallel_for(N, params.workers, [&](Index i) { node(i).send_duals(router, tag); });
      router.deliver(tag);
      parallel_for(N, params.workers, [&](Index i) { node(i).primal_update(router.inbox(i)); });
    };
    if (opt.l_star == 0) primal_phase(0);
    for (Index l = 0; l < opt.l_star; ++l) {
      primal_phase(l);
      const RoundTag tag{k, l, 1};
      parallel_for(N, params.workers, [&](Index i) { node(i).send_primals(router, tag); });
      router.deliver(tag);
      parallel_for(N, params.workers,
                   [&](Index i) { node(i).dual_update(router.inbox(i), info.alpha_lambda, info.alpha_mu); });
    }
    parallel_for(N, params.workers, [&](Index i) { node(i).finalize(); });

    auto& est = run.estimates.emplace_back();
    auto& cov = run.covariances.emplace_back();
    for (const auto& nd : nodes) {
      est.push_back(nd.state().x_hat);
      cov.push_back(nd.state().P);
    }
  });
}

void run_ci(FilterRun& run, const sysmodel::LinearGaussianSystem& sys, const sysmodel::Trajectory& traj,
            const FilterParams& params, Router& router) {
  const topology::CommGraph& graph = run.graph;
  const Index N = graph.n_nodes();
  const Eigen::MatrixXd W = infoform::metropolis_weights(graph);
  infoform::validate_consensus_weights(W, &graph);
  std::vector<CiNode> nodes;
  nodes.reserve(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i)
    nodes.emplace_back(i, graph, W, sys.sensors[static_cast<std::size_t>(i)],
                       infoform::make_state(i, params.initial_estimates[static_cast<std::size_t>(i)], params.P0));
  auto node = [&](Index i) -> CiNode& { return nodes[static_cast<std::size_t>(i)]; };
  const auto scaling = params.ci.scaling;

  for (Index k = 1; k <= traj.steps(); ++k) with_step(k, [&] {
    const auto& ys = traj.measurements[static_cast<std::size_t>(k)];
    parallel_for(N, params.workers, [&](Index i) {
      node(i).predict(sys.F, sys.Q);
      node(i).local_correct(ys[static_cast<std::size_t>(i)], N, scaling);
    });
    run.steps.push_back({});
    for (Index r = 0; r < params.ci.consensus_rounds; ++r) {
      const RoundTag tag{k, r, 0};
      parallel_for(N, params.workers, [&](Index i) { node(i).send(router, tag); });
      router.deliver(tag);
      parallel_for(N, params.workers, [&](Index i) { node(i).average(router.inbox(i)); });
    }
    parallel_for(N, params.workers, [&](Index i) { node(i).finalize(N, scaling); });

    auto& est = run.estimates.emplace_back();
    auto& cov = run.covariances.emplace_back();
    for (const auto& nd : nodes) {
      est.push_back(nd.state().x_hat);
      cov.push_back(nd.state().P);
    }
  });
}

}  // namespace

FilterRun run_filter(const sysmodel::LinearGaussianSystem& sys, const topology::CommGraph& graph,
                     const sysmodel::Trajectory& traj, const FilterParams& params) {
  check_sizes(sys, graph, traj, params);
  topology::assert_connected(graph);

  FilterRun run{params.algorithm, traj.states, {}, {}, {}, {}, {}, {}, graph};
  run.estimates.push_back(params.initial_estimates);
  run.covariances.emplace_back(static_cast<std::size_t>(graph.n_nodes()), params.P0);
  run.steps.push_back({});

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(sys.state_dim());
  for (const auto& x : params.initial_estimates) mean += x;
  mean /= static_cast<double>(graph.n_nodes());
  run.ckf = ckf::run(sys, traj, {mean, params.P0});

  Router router(run.graph, sys.state_dim(), params.keep_log);
  if (params.algorithm == Algorithm::dadkf)
    run_dadkf(run, sys, traj, params, router);
  else
    run_ci(run, sys, traj, params, router);
  run.comm = router.stats();
  run.log = router.log();
  return run;
}

bool isolation_check(const std::vector<RoundMessage>& log, const topology::CommGraph& graph) {
  return std::all_of(log.begin(), log.end(), [&](const RoundMessage& m) { return graph.has_edge(m.from, m.to); });
}

bool isolation_check(const FilterRun& run) {
  return isolation_check(run.log, run.graph);
}

}  // namespace dkflab::netsim
