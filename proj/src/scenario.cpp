#include "dkflab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dkflab/error.hpp"
#include "dkflab/matops.hpp"
#include "dkflab/rng.hpp"

namespace dkflab::scenario {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field, msg);
}

void check_keys(const json& j, const std::string& field, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(field, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(field.empty() ? key : field + "." + key, "unknown key");
  }
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

Index as_index(const json& j, const std::string& field, Index min_value) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < min_value) fail(field, "must be at least " + std::to_string(min_value));
  return static_cast<Index>(v);
}

std::uint64_t as_seed(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    fail(field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) fail(field, "expected true or false");
  return j.get<bool>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty list of numbers");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = as_number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

/// A list of rows; a flat list is read as a single row.
Eigen::MatrixXd as_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a matrix as a list of rows");
  if (!j.front().is_array()) return as_vector(j, field).transpose();
  const std::size_t cols = j.front().size();
  if (cols == 0) fail(field, "matrix rows must be non-empty");
  Eigen::MatrixXd m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(row_field, "rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = as_number(j[r][c], row_field + "[" + std::to_string(c) + "]");
  }
  return m;
}

/// A matrix, or a number s meaning s * I_dim.
Eigen::MatrixXd as_matrix_or_scalar(const json& j, const std::string& field, Index dim) {
  if (j.is_number()) return as_number(j, field) * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd m = as_matrix(j, field);
  if (m.rows() != dim || m.cols() != dim)
    fail(field, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  return m;
}

void require_spd(const Eigen::MatrixXd& m, const std::string& field) {
  if (!matops::is_symmetric(m)) fail(field, "must be symmetric");
  if (!matops::is_positive_definite(m)) fail(field, "must be positive definite");
}

void parse_system(const json& j, ScenarioConfig& cfg) {
  check_keys(j, "system", {"F", "expm_of", "Q"});
  if (j.contains("F") == j.contains("expm_of")) fail("system", "give exactly one of F or expm_of");
  if (j.contains("F")) {
    cfg.F = as_matrix(j["F"], "system.F");
  } else {
    const Eigen::MatrixXd a = as_matrix(j["expm_of"], "system.expm_of");
    if (a.rows() != a.cols()) fail("system.expm_of", "must be square");
    cfg.F = sysmodel::matrix_exponential(a);
  }
  if (cfg.F.rows() != cfg.F.cols()) fail("system.F", "must be square");
  if (!j.contains("Q")) fail("system.Q", "missing");
  cfg.Q = as_matrix_or_scalar(j["Q"], "system.Q", cfg.F.rows());
}

void parse_sensors(const json& j, ScenarioConfig& cfg) {
  const Index n = cfg.F.rows();
  if (j.is_object()) {
    check_keys(j, "sensors", {"random"});
    const json& r = j.at("random");
    check_keys(r, "sensors.random", {"count", "rows", "h_range", "r_range", "seed"});
    RandomSensorSpec spec;
    if (!r.contains("count")) fail("sensors.random.count", "missing");
    spec.count = as_index(r["count"], "sensors.random.count", 1);
    if (r.contains("rows")) spec.rows = as_index(r["rows"], "sensors.random.rows", 1);
    if (r.contains("h_range")) {
      const Eigen::VectorXd h = as_vector(r["h_range"], "sensors.random.h_range");
      if (h.size() != 2 || !(h[0] < h[1])) fail("sensors.random.h_range", "expected [lo, hi] with lo < hi");
      spec.h_lo = h[0];
      spec.h_hi = h[1];
    }
    if (r.contains("r_range")) {
      const Eigen::VectorXd rr = as_vector(r["r_range"], "sensors.random.r_range");
      if (rr.size() != 2 || !(rr[0] < rr[1]) || rr[0] <= 0.0)
        fail("sensors.random.r_range", "expected [lo, hi] with 0 < lo < hi");
      spec.r_lo = rr[0];
      spec.r_hi = rr[1];
    }
    if (r.contains("seed")) spec.seed = as_seed(r["seed"], "sensors.random.seed");
    cfg.random_sensors = spec;
    return;
  }
  if (!j.is_array() || j.empty()) fail("sensors", "expected a list of sensors or {\"random\": ...}");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string field = "sensors[" + std::to_string(i) + "]";
    check_keys(j[i], field, {"H", "R"});
    if (!j[i].contains("H")) fail(field + ".H", "missing");
    if (!j[i].contains("R")) fail(field + ".R", "missing");
    sysmodel::SensorModel s;
    s.H = as_matrix(j[i]["H"], field + ".H");
    if (s.H.cols() != n) fail(field + ".H", "must have " + std::to_string(n) + " columns");
    s.R = as_matrix_or_scalar(j[i]["R"], field + ".R", s.H.rows());
    cfg.sensors.push_back(std::move(s));
  }
}

void parse_graph(const json& j, ScenarioConfig& cfg) {
  if (j.is_array()) {
    cfg.adjacency = as_matrix(j, "graph");
    return;
  }
  check_keys(j, "graph", {"adjacency", "laplacian", "random"});
  if (j.size() != 1) fail("graph", "give exactly one of adjacency, laplacian or random");
  if (j.contains("adjacency")) {
    cfg.adjacency = as_matrix(j["adjacency"], "graph.adjacency");
  } else if (j.contains("laplacian")) {
    const Eigen::MatrixXd L = as_matrix(j["laplacian"], "graph.laplacian");
    if (L.rows() != L.cols()) fail("graph.laplacian", "must be square");
    if (L.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12 * (1.0 + L.cwiseAbs().maxCoeff()))
      fail("graph.laplacian", "rows must sum to zero");
    Eigen::MatrixXd a = -L;
    a.diagonal().setZero();
    cfg.adjacency = a;
  } else {
    const json& r = j["random"];
    check_keys(r, "graph.random", {"nodes", "edge_prob", "seed"});
    RandomGraphSpec spec;
    if (!r.contains("nodes")) fail("graph.random.nodes", "missing");
    spec.nodes = as_index(r["nodes"], "graph.random.nodes", 1);
    if (r.contains("edge_prob")) spec.edge_prob = as_number(r["edge_prob"], "graph.random.edge_prob");
    if (!(spec.edge_prob > 0.0 && spec.edge_prob <= 1.0)) fail("graph.random.edge_prob", "must be in (0, 1]");
    if (r.contains("seed")) spec.seed = as_seed(r["seed"], "graph.random.seed");
    cfg.random_graph = spec;
  }
}

double parse_step(const json& j, const std::string& field, dadkf::StepMode& mode) {
  if (j.is_string()) {
    if (j.get<std::string>() != "auto") fail(field, "expected a positive number or \"auto\"");
    mode = dadkf::StepMode::automatic;
    return 0.0;
  }
  const double v = as_number(j, field);
  if (v <= 0.0) fail(field, "must be positive");
  mode = dadkf::StepMode::fixed;
  return v;
}

void parse_filter(const json& j, ScenarioConfig& cfg) {
  check_keys(j, "filter", {"algorithm", "alpha_lambda", "alpha_mu", "l_star", "warm_start", "include_n_factor",
                           "ci_rounds", "ci_scaling", "P0"});
  if (j.contains("algorithm")) {
    const std::string a = j["algorithm"].is_string() ? j["algorithm"].get<std::string>() : "";
    if (a == "dadkf") cfg.algorithm = netsim::Algorithm::dadkf;
    else if (a == "ci") cfg.algorithm = netsim::Algorithm::ci;
    else fail("filter.algorithm", "expected \"dadkf\" or \"ci\"");
  }
  auto& st = cfg.dkf.step_sizes;
  if (j.contains("alpha_lambda")) st.alpha_lambda = parse_step(j["alpha_lambda"], "filter.alpha_lambda", st.lambda_mode);
  if (j.contains("alpha_mu")) st.alpha_mu = parse_step(j["alpha_mu"], "filter.alpha_mu", st.mu_mode);
  if (j.contains("l_star")) cfg.dkf.l_star = as_index(j["l_star"], "filter.l_star", 1);
  if (j.contains("warm_start")) cfg.dkf.warm_start = as_bool(j["warm_start"], "filter.warm_start");
  if (j.contains("include_n_factor")) cfg.dkf.include_n_factor = as_bool(j["include_n_factor"], "filter.include_n_factor");
  if (j.contains("ci_rounds")) cfg.ci.consensus_rounds = as_index(j["ci_rounds"], "filter.ci_rounds", 0);
  if (j.contains("ci_scaling")) {
    const std::string s = j["ci_scaling"].is_string() ? j["ci_scaling"].get<std::string>() : "";
    if (s == "split_prior" || s == "paper") cfg.ci.scaling = infoform::CiScaling::split_prior;
    else if (s == "full_prior" || s == "battistelli") cfg.ci.scaling = infoform::CiScaling::full_prior;
    else fail("filter.ci_scaling", "expected \"split_prior\" or \"full_prior\"");
  }
  if (j.contains("P0")) cfg.P0 = as_matrix_or_scalar(j["P0"], "filter.P0", cfg.F.rows());
}

void parse_sim(const json& j, ScenarioConfig& cfg) {
  check_keys(j, "sim", {"steps", "seed", "x0", "initial_estimate", "initial_estimate_spread", "snapshots", "workers"});
  const Index n = cfg.F.rows();
  if (j.contains("steps")) cfg.steps = as_index(j["steps"], "sim.steps", 1);
  if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "sim.seed");
  if (j.contains("x0")) {
    cfg.x0 = as_vector(j["x0"], "sim.x0");
    if (cfg.x0.size() != n) fail("sim.x0", "must have " + std::to_string(n) + " entries");
  }
  if (j.contains("initial_estimate")) {
    cfg.initial_estimate = as_vector(j["initial_estimate"], "sim.initial_estimate");
    if (cfg.initial_estimate.size() != n) fail("sim.initial_estimate", "must have " + std::to_string(n) + " entries");
  }
  if (j.contains("initial_estimate_spread")) {
    cfg.initial_estimate_spread = as_number(j["initial_estimate_spread"], "sim.initial_estimate_spread");
    if (cfg.initial_estimate_spread < 0.0) fail("sim.initial_estimate_spread", "must be non-negative");
  }
  if (j.contains("snapshots")) {
    if (!j["snapshots"].is_array()) fail("sim.snapshots", "expected a list of steps");
    for (std::size_t i = 0; i < j["snapshots"].size(); ++i)
      cfg.snapshots.push_back(as_index(j["snapshots"][i], "sim.snapshots[" + std::to_string(i) + "]", 0));
  }
  if (j.contains("workers")) cfg.workers = static_cast<int>(as_index(j["workers"], "sim.workers", 1));
  for (Index k : cfg.snapshots)
    if (k > cfg.steps) fail("sim.snapshots", "step " + std::to_string(k) + " is beyond sim.steps");
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    fail("", std::string("not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"name", "system", "sensors", "graph", "filter", "sim"});
  ScenarioConfig cfg;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "expected a string");
    cfg.name = j["name"].get<std::string>();
  }
  if (!j.contains("system")) fail("system", "missing");
  if (!j.contains("sensors")) fail("sensors", "missing");
  if (!j.contains("graph")) fail("graph", "missing");
  parse_system(j["system"], cfg);
  parse_sensors(j["sensors"], cfg);
  parse_graph(j["graph"], cfg);
  if (j.contains("filter")) parse_filter(j["filter"], cfg);
  if (j.contains("sim")) parse_sim(j["sim"], cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Scenario materialize(const ScenarioConfig& cfg) {
  const Index n = cfg.F.rows();
  if (n == 0 || cfg.F.cols() != n) fail("system.F", "must be a non-empty square matrix");
  if (cfg.Q.rows() != n || cfg.Q.cols() != n) fail("system.Q", "shape does not match F");
  require_spd(cfg.Q, "system.Q");

  Scenario sc{{cfg.F, cfg.Q, {}}, topology::CommGraph(Eigen::MatrixXd::Zero(1, 1)), {}, {}, {}, 0};
  if (cfg.random_sensors) {
    const auto& spec = *cfg.random_sensors;
    Rng rng(spec.seed.value_or(derive_seed(cfg.seed, 2)));
    sc.sys.sensors =
        sysmodel::random_sensors(spec.count, n, spec.rows, spec.h_lo, spec.h_hi, spec.r_lo, spec.r_hi, rng);
  } else {
    sc.sys.sensors = cfg.sensors;
  }
  for (std::size_t i = 0; i < sc.sys.sensors.size(); ++i) {
    const auto& s = sc.sys.sensors[i];
    const std::string field = "sensors[" + std::to_string(i) + "]";
    if (s.H.cols() != n) fail(field + ".H", "column count does not match F");
    if (s.R.rows() != s.H.rows() || s.R.cols() != s.H.rows()) fail(field + ".R", "shape does not match H");
    require_spd(s.R, field + ".R");
  }
  if (sc.sys.sensors.empty()) fail("sensors", "at least one sensor is required");

  try {
    if (cfg.random_graph) {
      Rng rng(cfg.random_graph->seed.value_or(derive_seed(cfg.seed, 1)));
      sc.graph = topology::random_connected_graph(cfg.random_graph->nodes, cfg.random_graph->edge_prob, rng);
    } else {
      sc.graph = topology::CommGraph(cfg.adjacency);
    }
  } catch (const Error& e) {
    fail("graph", e.what());
  }
  if (!sc.graph.is_connected()) {
    std::ostringstream os;
    os << "graph is disconnected (" << topology::connected_components(sc.graph).size() << " components)";
    fail("graph", os.str());
  }
  if (sc.graph.n_nodes() != sc.sys.sensor_count()) {
    std::ostringstream os;
    os << sc.sys.sensor_count() << " sensors but the graph has " << sc.graph.n_nodes() << " nodes";
    fail("sensors", os.str());
  }
  if (!sysmodel::check_observability(sc.sys.F, sc.sys.stacked_H()))
    fail("sensors", "the pair (F, stacked H) is not observable");

  sc.P0 = cfg.P0.size() ? cfg.P0 : cfg.Q;
  if (sc.P0.rows() != n || sc.P0.cols() != n) fail("filter.P0", "shape does not match F");
  require_spd(sc.P0, "filter.P0");
  if (cfg.algorithm == netsim::Algorithm::dadkf && cfg.dkf.l_star < 1) fail("filter.l_star", "must be at least 1");

  sc.x0 = cfg.x0.size() ? cfg.x0 : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd center = cfg.initial_estimate.size() ? cfg.initial_estimate : Eigen::VectorXd::Zero(n);
  Rng rng(derive_seed(cfg.seed, 3));
  for (Index i = 0; i < sc.graph.n_nodes(); ++i) {
    Eigen::VectorXd x = center;
    if (cfg.initial_estimate_spread > 0.0)
      for (Index j = 0; j < n; ++j) x[j] += rng.uniform(-cfg.initial_estimate_spread, cfg.initial_estimate_spread);
    sc.initial_estimates.push_back(std::move(x));
  }
  sc.trajectory_seed = derive_seed(cfg.seed, 0);
  return sc;
}

ScenarioConfig example1_config(Index l_star) {
  ScenarioConfig cfg;
  cfg.name = "example1_lstar" + std::to_string(l_star);
  cfg.F.resize(4, 4);
  cfg.F << 0.4, 0.9, 0, 0,
          -0.9, 0.4, 0, 0,
           0, 0, 0.5, 0.8,
           0, 0, -0.8, 0.5;
  cfg.Q = 0.1 * Eigen::MatrixXd::Identity(4, 4);
  Eigen::MatrixXd H(4, 4);
  H << 1, 0, 0, 0,
       1, 1, 0, 0,
       0, 0, 1, 1,
       0, 0, 1, 0;
  cfg.sensors = sysmodel::split_rows(H, Eigen::Vector4d(0.1, 0.2, 0.3, 0.1));
  Eigen::MatrixXd L(4, 4);
  L << 3, 0, -1, -2,
       0, 2, -2, 0,
      -1, -2, 4, -1,
      -2, 0, -1, 3;
  cfg.adjacency = -L;
  cfg.adjacency.diagonal().setZero();
  cfg.dkf.step_sizes = {0.01, 0.01, dadkf::StepMode::fixed, dadkf::StepMode::fixed};
  cfg.dkf.l_star = l_star;
  cfg.P0 = cfg.Q;
  cfg.steps = 100;
  cfg.seed = 1;
  return cfg;
}

ScenarioConfig example2_config(Index nodes, Index steps) {
  ScenarioConfig cfg;
  cfg.name = "example2_n" + std::to_string(nodes);
  Eigen::MatrixXd A(4, 4);
  A << 0, 0.5, 0, 0,
      -0.5, 0, 0, 0,
       0, 0, 0, -0.5,
       0, 0, 0.5, 0;
  cfg.F = sysmodel::matrix_exponential(A);
  cfg.Q = 0.1 * Eigen::MatrixXd::Identity(4, 4);
  cfg.random_sensors = RandomSensorSpec{nodes, 1, -1.0, 1.0, 0.1, 1.0, std::nullopt};
  cfg.random_graph = RandomGraphSpec{nodes, 0.2, std::nullopt};
  cfg.dkf.step_sizes = {1e-5, 1e-5, dadkf::StepMode::fixed, dadkf::StepMode::fixed};
  cfg.dkf.l_star = 10;
  cfg.P0 = cfg.Q;
  cfg.steps = steps;
  cfg.seed = 1;
  cfg.initial_estimate_spread = 15.0;
  for (Index k : {0, 10, 20, 50})
    if (k <= steps) cfg.snapshots.push_back(k);
  return cfg;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const Scenario sc = materialize(cfg);
  sysmodel::Trajectory traj = sysmodel::simulate(sc.sys, sc.x0, cfg.steps, sc.trajectory_seed);

  netsim::FilterParams params;
  params.algorithm = cfg.algorithm;
  params.dkf = cfg.dkf;
  params.ci = cfg.ci;
  params.initial_estimates = sc.initial_estimates;
  params.P0 = sc.P0;
  params.workers = cfg.workers;
  netsim::FilterRun run = netsim::run_filter(sc.sys, sc.graph, traj, params);
  auto rows = metrics::compute_metrics(run);
  ScenarioResult res{std::move(traj), std::move(run), std::move(rows), {}};

  if (cfg.algorithm == netsim::Algorithm::dadkf) {
    Index over_lambda = 0;
    Index over_mu = 0;
    for (std::size_t k = 1; k < res.run.steps.size(); ++k) {
      const auto& s = res.run.steps[k];
      if (s.alpha_lambda >= s.lambda_bound) ++over_lambda;
      if (s.alpha_mu >= s.mu_bound) ++over_mu;
    }
    if (over_lambda)
      res.warnings.push_back("alpha_lambda is not below the step-size bound at " + std::to_string(over_lambda) +
                             " of " + std::to_string(cfg.steps) + " steps");
    if (over_mu)
      res.warnings.push_back("alpha_mu is not below 2/sigma_N^2 at " + std::to_string(over_mu) + " steps");
  }
  return res;
}

namespace {

nlohmann::ordered_json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return "inf";
}

nlohmann::ordered_json summary(const std::vector<netsim::StepInfo>& steps, double netsim::StepInfo::*field) {
  if (steps.size() < 2) return nullptr;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < steps.size(); ++k) {
    lo = std::min(lo, steps[k].*field);
    hi = std::max(hi, steps[k].*field);
  }
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["first"] = number_or_inf(steps[1].*field);
  out["min"] = number_or_inf(lo);
  out["max"] = number_or_inf(hi);
  return out;
}

}  // namespace

std::string run_meta_json(const ScenarioConfig& cfg, const ScenarioResult& result) {
  nlohmann::ordered_json meta;
  meta["scenario"] = cfg.name;
  meta["version"] = kVersion;
  meta["seed"] = cfg.seed;
  meta["prng"] = Rng::kName;
  meta["algorithm"] = netsim::to_string(cfg.algorithm);
  meta["nodes"] = result.run.graph.n_nodes();
  meta["edges"] = result.run.graph.edge_count();
  meta["sigma_N"] = result.run.graph.spectrum().largest();
  meta["steps"] = cfg.steps;
  if (cfg.algorithm == netsim::Algorithm::dadkf) {
    meta["l_star"] = cfg.dkf.l_star;
    meta["warm_start"] = cfg.dkf.warm_start;
    meta["include_n_factor"] = cfg.dkf.include_n_factor;
    meta["alpha_lambda_mode"] = cfg.dkf.step_sizes.lambda_mode == dadkf::StepMode::fixed ? "fixed" : "auto";
    meta["alpha_mu_mode"] = cfg.dkf.step_sizes.mu_mode == dadkf::StepMode::fixed ? "fixed" : "auto";
    meta["alpha_lambda"] = summary(result.run.steps, &netsim::StepInfo::alpha_lambda);
    meta["alpha_mu"] = summary(result.run.steps, &netsim::StepInfo::alpha_mu);
    meta["alpha_lambda_bound"] = summary(result.run.steps, &netsim::StepInfo::lambda_bound);
    meta["alpha_mu_bound"] = summary(result.run.steps, &netsim::StepInfo::mu_bound);
  } else {
    meta["ci_rounds"] = cfg.ci.consensus_rounds;
    meta["ci_scaling"] = cfg.ci.scaling == infoform::CiScaling::split_prior ? "split_prior" : "full_prior";
  }
  meta["norms"] = {{"vector", "euclidean"}, {"matrix", "spectral"}};
  meta["messages_total"] = result.run.comm.messages_total;
  meta["scalars_total"] = result.run.comm.scalars_total;
  meta["warnings"] = result.warnings;
  return meta.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

}  // namespace

void write_outputs(const ScenarioConfig& cfg, const ScenarioResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "metrics.csv", [&](std::ostream& os) { metrics::write_metrics_csv(os, result.metrics); });
  write_file(out_dir / "estimates.csv", [&](std::ostream& os) { metrics::write_estimates_csv(os, result.run); });
  write_file(out_dir / "run_meta.json", [&](std::ostream& os) { os << run_meta_json(cfg, result); });
  for (Index k : cfg.snapshots) {
    write_file(out_dir / ("snapshot_k" + std::to_string(k) + ".csv"),
               [&](std::ostream& os) { metrics::write_snapshot_csv(os, result.run, k); });
  }
}

}  // namespace dkflab::scenario
