#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dkflab/dadkf.hpp"
#include "dkflab/graph.hpp"
#include "dkflab/infoform.hpp"
#include "dkflab/metrics.hpp"
#include "dkflab/netsim.hpp"
#include "dkflab/sysmodel.hpp"

namespace dkflab::scenario {

using Index = Eigen::Index;

inline constexpr std::string_view kVersion = "dkf-lab 1.0.0";

struct RandomSensorSpec {
  Index count = 0;
  Index rows = 1;
  double h_lo = -1.0;
  double h_hi = 1.0;
  double r_lo = 0.1;
  double r_hi = 1.0;
  std::optional<std::uint64_t> seed;
};

struct RandomGraphSpec {
  Index nodes = 0;
  double edge_prob = 0.2;
  std::optional<std::uint64_t> seed;
};

/// Declarative experiment. Random parts are drawn by materialize() from
/// their own seed or, when absent, from streams derived from `seed`.
struct ScenarioConfig {
  std::string name = "scenario";
  Eigen::MatrixXd F;
  Eigen::MatrixXd Q;
  std::vector<sysmodel::SensorModel> sensors;
  std::optional<RandomSensorSpec> random_sensors;
  Eigen::MatrixXd adjacency;
  std::optional<RandomGraphSpec> random_graph;

  netsim::Algorithm algorithm = netsim::Algorithm::dadkf;
  dadkf::CorrectionOptions dkf;
  infoform::CiOptions ci;
  Eigen::MatrixXd P0;  // empty means Q

  Index steps = 100;
  std::uint64_t seed = 1;
  Eigen::VectorXd x0;                // empty means the origin
  Eigen::VectorXd initial_estimate;  // center of the initial estimates, empty means the origin
  double initial_estimate_spread = 0.0;
  std::vector<Index> snapshots;
  int workers = 1;
};

/// Parses JSON text. Throws ConfigError naming the offending field.
ScenarioConfig parse_config(std::string_view json_text);
/// Throws IoError if the file cannot be read.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Concrete, validated instance of a config.
struct Scenario {
  sysmodel::LinearGaussianSystem sys;
  topology::CommGraph graph;
  Eigen::VectorXd x0;
  Eigen::MatrixXd P0;
  std::vector<Eigen::VectorXd> initial_estimates;
  std::uint64_t trajectory_seed = 0;
};

/// Draws the random parts and validates the result (dimensions, SPD noise,
/// connectivity, observability of (F, stacked H)). Throws ConfigError.
Scenario materialize(const ScenarioConfig& cfg);

/// The 4-node academic example: alpha_lambda = alpha_mu = 0.01, P0 = Q,
/// 100 steps from the origin with all estimates starting at 0.
ScenarioConfig example1_config(Index l_star);
/// The rotating target with `nodes` estimators on a random graph (edge
/// probability 0.2), alpha = 1e-5, l* = 10, initial estimates in (-15, 15).
ScenarioConfig example2_config(Index nodes, Index steps);

struct ScenarioResult {
  sysmodel::Trajectory trajectory;
  netsim::FilterRun run;
  std::vector<metrics::MetricsRow> metrics;
  std::vector<std::string> warnings;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// JSON metadata: seed, PRNG, version, resolved step sizes, the step-size
/// bound (first/min/max over k), norms used and warnings.
std::string run_meta_json(const ScenarioConfig& cfg, const ScenarioResult& result);

/// Writes metrics.csv, estimates.csv, run_meta.json and snapshot_k<K>.csv.
/// Throws IoError.
void write_outputs(const ScenarioConfig& cfg, const ScenarioResult& result, const std::filesystem::path& out_dir);

}  // namespace dkflab::scenario
