#include "instances.hpp"

#include <numeric>

#include "dkflab/matops.hpp"

namespace testsupport {

Eigen::MatrixXd random_orthogonal(Index n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd random_spd(Index n, double lo, double hi, Rng& rng) {
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  Eigen::VectorXd d(n);
  for (Index i = 0; i < n; ++i) d[i] = rng.uniform(lo, hi);
  return matops::symmetrize(q * d.asDiagonal() * q.transpose());
}

topology::CommGraph random_weighted_graph(Index nodes, double p, double w_lo, double w_hi, Rng& rng) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nodes, nodes);
  for (Index i = 1; i < nodes; ++i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i)));
    a(i, j) = a(j, i) = rng.uniform(w_lo, w_hi);
  }
  for (Index i = 0; i < nodes; ++i)
    for (Index j = i + 1; j < nodes; ++j)
      if (a(i, j) == 0.0 && rng.uniform() < p) a(i, j) = a(j, i) = rng.uniform(w_lo, w_hi);
  return topology::CommGraph(a);
}

Instance random_instance(std::uint64_t seed, const InstanceShape& shape) {
  Rng rng(seed);
  const auto N = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(shape.max_nodes - 1)));
  const auto n = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(shape.max_dim)));
  topology::CommGraph graph = random_weighted_graph(N, 0.4, 0.5, 2.0, rng);

  sysmodel::LinearGaussianSystem sys;
  sys.F = random_orthogonal(n, rng) * 0.9;
  sys.Q = random_spd(n, 0.5, 2.0, rng);
  for (Index i = 0; i < N; ++i) {
    const auto m = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(shape.max_rows)));
    sysmodel::SensorModel s;
    s.H = rng.uniform_matrix(m, n, -1.0, 1.0);
    s.R = random_spd(m, 0.5, 2.0, rng);
    sys.sensors.push_back(std::move(s));
  }

  Instance inst{std::move(sys), std::move(graph), {}, {}};
  const Eigen::VectorXd x_common = rng.uniform_matrix(n, 1, -3.0, 3.0);
  const Eigen::MatrixXd P_common = random_spd(n, 0.5, 2.0, rng);
  for (Index i = 0; i < N; ++i) {
    dadkf::EstimatorState s;
    s.node = i;
    s.x_pred = shape.common_prediction ? x_common : Eigen::VectorXd(rng.uniform_matrix(n, 1, -3.0, 3.0));
    s.P_pred = shape.common_prediction ? P_common : random_spd(n, 0.5, 2.0, rng);
    s.Omega_pred = matops::spd_inverse(s.P_pred);
    s.x_hat = s.x_pred;
    s.P = s.P_pred;
    inst.states.push_back(std::move(s));
    const auto& sensor = inst.sys.sensors[static_cast<std::size_t>(i)];
    inst.y.push_back(sensor.H * x_common + rng.standard_normal(sensor.output_dim()));
  }
  return inst;
}

ckf::CkfState centralized_reference(const Instance& inst) {
  const Eigen::MatrixXd H = inst.sys.stacked_H();
  const Eigen::MatrixXd R = inst.sys.stacked_R();
  Eigen::VectorXd y(H.rows());
  Index row = 0;
  for (const auto& v : inst.y) {
    y.segment(row, v.size()) = v;
    row += v.size();
  }
  const auto& s0 = inst.states.front();
  const Eigen::MatrixXd K = ckf::kalman_gain_dual_form(s0.P_pred, H, R);
  return {s0.x_pred + K * (y - H * s0.x_pred), ckf::subtractive_covariance(s0.P_pred, H, R)};
}

std::vector<kkt::NodeProblem> node_problems(const Instance& inst) {
  std::vector<kkt::NodeProblem> out;
  for (Index i = 0; i < inst.nodes(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const auto obj = dadkf::make_local_objective(inst.states[u], inst.sys.sensors[u], inst.y[u], inst.nodes());
    out.push_back(kkt::node_problem(obj.z_bar, obj.H_bar, obj.S_bar));
  }
  return out;
}

std::vector<Eigen::MatrixXd> phi_blocks(const Instance& inst) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& p : node_problems(inst)) out.push_back(p.G);
  return out;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double h) {
  Eigen::VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

std::vector<std::vector<std::size_t>> union_find_components(const Eigen::MatrixXd& adjacency) {
  const auto n = static_cast<std::size_t>(adjacency.rows());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (adjacency(static_cast<Index>(i), static_cast<Index>(j)) != 0.0) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return groups;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

Eigen::MatrixXd example1_F() {
  Eigen::MatrixXd F(4, 4);
  F << 0.4, 0.9, 0, 0, -0.9, 0.4, 0, 0, 0, 0, 0.5, 0.8, 0, 0, -0.8, 0.5;
  return F;
}

Eigen::MatrixXd example1_H() {
  Eigen::MatrixXd H(4, 4);
  H << 1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0;
  return H;
}

Eigen::Vector4d example1_R_diag() {
  return {0.1, 0.2, 0.3, 0.1};
}

Eigen::MatrixXd example1_laplacian() {
  Eigen::MatrixXd L(4, 4);
  L << 3, 0, -1, -2, 0, 2, -2, 0, -1, -2, 4, -1, -2, 0, -1, 3;
  return L;
}

}  // namespace testsupport
