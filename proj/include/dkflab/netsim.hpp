#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dkflab/ckf.hpp"
#include "dkflab/dadkf.hpp"
#include "dkflab/graph.hpp"
#include "dkflab/infoform.hpp"
#include "dkflab/sysmodel.hpp"

namespace dkflab::netsim {

using Index = Eigen::Index;

enum class PayloadKind { xi, lambda, zeta, mu, info_vector, info_matrix };
std::string_view to_string(PayloadKind kind) noexcept;

/// Time step k, correction round l and phase within the round (0 = duals or
/// CI averaging, 1 = primals).
struct RoundTag {
  Index k = 0;
  Index l = 0;
  int phase = 0;
};

struct RoundMessage {
  Index from = 0;
  Index to = 0;
  PayloadKind kind = PayloadKind::xi;
  RoundTag round;
  Eigen::VectorXd payload;
};

struct RoundStats {
  Index k = 0;
  Index l = 0;
  std::size_t messages = 0;
  std::size_t scalars = 0;
  /// Distinct directed (from, to) transfers summed over phases.
  std::size_t exchanges = 0;
};

struct CommStats {
  std::size_t messages_total = 0;
  std::size_t scalars_total = 0;
  std::size_t exchanges_total = 0;
  std::vector<RoundStats> per_round;

  /// Scalars sent during time step k.
  std::size_t scalars_at(Index k) const;
};

/// Edge-enforcing synchronous transport. Each node writes only its own outbox,
/// so nodes may send concurrently; deliver() is the barrier.
class Router {
 public:
  Router(const topology::CommGraph& graph, Index state_dim, bool keep_log);

  /// Throws NonEdgeMessage if (from, to) is not an edge, DimensionMismatch if
  /// the payload length does not fit the kind.
  void send(RoundMessage msg);
  /// Moves all outboxes into inboxes (sorted by sender, then send order) and
  /// records statistics for `tag`.
  void deliver(const RoundTag& tag);
  const std::vector<RoundMessage>& inbox(Index node) const;

  const CommStats& stats() const noexcept { return stats_; }
  const std::vector<RoundMessage>& log() const noexcept { return log_; }
  Index payload_length(PayloadKind kind) const noexcept;

 private:
  const topology::CommGraph& graph_;
  Index state_dim_;
  bool keep_log_;
  std::vector<std::vector<RoundMessage>> outboxes_;
  std::vector<std::vector<RoundMessage>> inboxes_;
  CommStats stats_;
  std::vector<RoundMessage> log_;
};

/// Runs fn(i) for i in [0, n). With workers > 1 the index range is split into
/// contiguous chunks on std::jthread workers. If any call throws, the exception
/// of the lowest failing index is rethrown after all workers join.
void parallel_for(Index n, int workers, const std::function<void(Index)>& fn);

/// One DA-DKF estimator that only sees its inbox.
class DaDkfNode {
 public:
  DaDkfNode(Index id, const topology::CommGraph& graph, const sysmodel::SensorModel& sensor, dadkf::EstimatorState state);

  void predict(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);
  void begin(const Eigen::VectorXd& y, Index n_nodes, bool include_n_factor, bool warm_start);
  void send_duals(Router& router, const RoundTag& tag) const;
  void primal_update(const std::vector<RoundMessage>& inbox);
  void send_primals(Router& router, const RoundTag& tag) const;
  void dual_update(const std::vector<RoundMessage>& inbox, double alpha_lambda, double alpha_mu);
  void finalize();

  const dadkf::EstimatorState& state() const noexcept { return state_; }

 private:
  std::vector<dadkf::NeighborValue> collect(const std::vector<RoundMessage>& inbox, PayloadKind kind) const;

  Index id_;
  std::vector<topology::Neighbor> neighbors_;
  const sysmodel::SensorModel& sensor_;
  dadkf::EstimatorState state_;
};

/// One CI estimator averaging eta and vech(Phi) with its row of W.
class CiNode {
 public:
  CiNode(Index id, const topology::CommGraph& graph, const Eigen::MatrixXd& weights, const sysmodel::SensorModel& sensor,
         infoform::InfoState state);

  void predict(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);
  void local_correct(const Eigen::VectorXd& y, Index n_nodes, infoform::CiScaling scaling);
  void send(Router& router, const RoundTag& tag) const;
  void average(const std::vector<RoundMessage>& inbox);
  void finalize(Index n_nodes, infoform::CiScaling scaling);

  const infoform::InfoState& state() const noexcept { return state_; }

 private:
  Index id_;
  std::vector<topology::Neighbor> neighbors_;
  const Eigen::MatrixXd& weights_;
  const sysmodel::SensorModel& sensor_;
  infoform::InfoState state_;
  Eigen::VectorXd phi_packed_;
};

enum class Algorithm { dadkf, ci };
std::string_view to_string(Algorithm a) noexcept;

struct FilterParams {
  Algorithm algorithm = Algorithm::dadkf;
  dadkf::CorrectionOptions dkf;
  infoform::CiOptions ci;
  /// One initial estimate per node; the CKF starts from their mean.
  std::vector<Eigen::VectorXd> initial_estimates;
  Eigen::MatrixXd P0;
  int workers = 1;
  bool keep_log = false;
};

struct StepInfo {
  double alpha_lambda = 0.0;
  double alpha_mu = 0.0;
  double lambda_bound = 0.0;
  double mu_bound = 0.0;
};

struct FilterRun {
  Algorithm algorithm = Algorithm::dadkf;
  std::vector<Eigen::VectorXd> truth;
  /// estimates[k][i], covariances[k][i] for k = 0..steps.
  std::vector<std::vector<Eigen::VectorXd>> estimates;
  std::vector<std::vector<Eigen::MatrixXd>> covariances;
  std::vector<ckf::CkfState> ckf;
  /// steps[k] for k = 1..steps (entry 0 is unused).
  std::vector<StepInfo> steps;
  CommStats comm;
  std::vector<RoundMessage> log;
  topology::CommGraph graph;
};

/// Throws ConfigMismatch when the system, graph, trajectory and params
/// disagree on sizes; numeric errors propagate.
FilterRun run_filter(const sysmodel::LinearGaussianSystem& sys, const topology::CommGraph& graph,
                     const sysmodel::Trajectory& traj, const FilterParams& params);

/// True iff every logged message traversed an edge of `graph`.
bool isolation_check(const std::vector<RoundMessage>& log, const topology::CommGraph& graph);
bool isolation_check(const FilterRun& run);

}  // namespace dkflab::netsim
