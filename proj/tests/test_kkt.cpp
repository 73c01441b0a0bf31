#include <gtest/gtest.h>

#include "dkflab/ckf.hpp"
#include "dkflab/dadkf.hpp"
#include "dkflab/kkt_oracle.hpp"
#include "dkflab/matops.hpp"
#include "dkflab/rng.hpp"
#include "instances.hpp"

using namespace dkflab;
using namespace dkflab::kkt;

namespace {

// Dense minimum-norm solve of [D, L; L, 0][x; y] = [r; 0].
std::pair<Eigen::VectorXd, Eigen::VectorXd> dense_saddle(const Eigen::MatrixXd& D, const Eigen::MatrixXd& L,
                                                         const Eigen::VectorXd& r) {
  const Index m = D.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  K.topLeftCorner(m, m) = D;
  K.topRightCorner(m, m) = L;
  K.bottomLeftCorner(m, m) = L;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m);
  rhs.head(m) = r;
  const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  return {sol.head(m), sol.tail(m)};
}

Eigen::MatrixXd block_diag(const std::vector<Eigen::MatrixXd>& blocks) {
  const Index n = blocks.front().rows();
  const auto N = static_cast<Index>(blocks.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N * n, N * n);
  for (Index i = 0; i < N; ++i) out.block(i * n, i * n, n, n) = blocks[static_cast<std::size_t>(i)];
  return out;
}

topology::CommGraph example1_graph() {
  Eigen::MatrixXd a = -testsupport::example1_laplacian();
  a.diagonal().setZero();
  return topology::CommGraph(a);
}

}  // namespace

TEST(EstimateKkt, FourNodeStateThreeMatchesCentralized) {
  testsupport::InstanceShape shape;
  int seen = 0;
  for (std::uint64_t seed = 1; seen < 10 && seed < 500; ++seed) {
    const auto inst = testsupport::random_instance(seed, shape);
    if (inst.nodes() != 4 || inst.dim() != 3) continue;
    ++seen;
    const auto sol = solve_estimate_kkt(inst.graph, testsupport::node_problems(inst));
    const auto ref = testsupport::centralized_reference(inst);
    EXPECT_LT(testsupport::rel_err(sol.xi_dagger, ref.x_hat), 1e-10);
    EXPECT_LT(sol.primal_residual, 1e-10);
    EXPECT_LT(sol.dual_residual, 1e-9 * (1 + stack(std::vector<Eigen::VectorXd>{sol.b}).norm()));
  }
  EXPECT_EQ(seen, 10);
}

TEST(EstimateKkt, AgreesWithDenseSaddleSolve) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = testsupport::random_instance(seed);
    const auto nodes = testsupport::node_problems(inst);
    const auto sol = solve_estimate_kkt(inst.graph, nodes);
    std::vector<Eigen::MatrixXd> Gs;
    std::vector<Eigen::VectorXd> gs;
    for (const auto& p : nodes) {
      Gs.push_back(p.G);
      gs.push_back(p.g);
    }
    const auto [xi, lambda] = dense_saddle(block_diag(Gs), kron_laplacian(inst.graph, inst.dim()), stack(gs));
    EXPECT_LT(testsupport::rel_err(sol.xi_star, xi), 1e-9) << "seed " << seed;
    EXPECT_LT(testsupport::rel_err(sol.lambda_star, lambda), 1e-8) << "seed " << seed;
    const auto res = estimate_kkt_residuals(inst.graph, nodes, sol.xi_star, sol.lambda_star);
    EXPECT_LT(res.first + res.second, 1e-9);
  }
}

TEST(EstimateKkt, Disconnected) {
  const topology::CommGraph g(Eigen::MatrixXd::Zero(2, 2));
  std::vector<NodeProblem> nodes(2, {Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1)});
  EXPECT_THROW(solve_estimate_kkt(g, nodes), DisconnectedGraphError);
}

TEST(CovKkt, Example1AverageIsCentralizedInformation) {
  sysmodel::LinearGaussianSystem sys;
  sys.F = testsupport::example1_F();
  sys.Q = 0.1 * Eigen::MatrixXd::Identity(4, 4);
  sys.sensors = sysmodel::split_rows(testsupport::example1_H(), testsupport::example1_R_diag());
  std::vector<Eigen::VectorXd> targets;
  for (Index i = 0; i < 4; ++i) {
    auto s = dadkf::make_state(i, Eigen::VectorXd::Zero(4), sys.Q);
    dadkf::local_predict(s, sys.F, sys.Q);
    targets.push_back(
        dadkf::local_correction(s, sys.sensors[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(1), 4).cov_target);
  }
  const auto sol = solve_cov_kkt(example1_graph(), targets);
  const auto pred = ckf::predict({Eigen::VectorXd::Zero(4), sys.Q}, sys);
  const auto post = ckf::correct(pred, Eigen::VectorXd::Zero(4), sys.stacked_H(), sys.stacked_R());
  const Eigen::VectorXd want = matops::vech_vector(matops::spd_inverse(post.P));
  for (const auto& z : unstack(sol.zeta_star, 4)) EXPECT_LT((z - want).norm(), 1e-10);
  EXPECT_LT(sol.residual, 1e-10);
}

TEST(InfoKkt, AgreesWithDenseSaddleSolve) {
  testsupport::InstanceShape shape;
  shape.common_prediction = false;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = testsupport::random_instance(seed, shape);
    const auto phis = testsupport::phi_blocks(inst);
    Rng rng(seed);
    std::vector<Eigen::VectorXd> cs;
    std::vector<Eigen::MatrixXd> inverses;
    for (const auto& p : phis) {
      cs.push_back(rng.uniform_matrix(inst.dim(), 1, -3, 3));
      inverses.push_back(matops::spd_inverse(p));
    }
    const auto sol = solve_info_kkt(inst.graph, phis, cs);
    const Eigen::MatrixXd D = block_diag(inverses);
    const Eigen::MatrixXd L = kron_laplacian(inst.graph, inst.dim());
    const auto [eta, nu] = dense_saddle(-D, -L, -D * stack(cs));
    EXPECT_LT(testsupport::rel_err(sol.eta_star, eta), 1e-9);
    EXPECT_LT(sol.residual, 1e-9);
    (void)nu;
  }
}

TEST(Laplacian, PseudoInverse) {
  const auto g = example1_graph();
  const Eigen::MatrixXd P = laplacian_pinv(g);
  const Eigen::MatrixXd& L = g.laplacian();
  EXPECT_LT((L * P * L - L).norm(), 1e-12);
  EXPECT_LT((P * L * P - P).norm(), 1e-12);
  EXPECT_LT((P * Eigen::VectorXd::Ones(4)).norm(), 1e-12);
  EXPECT_LT((P - L.completeOrthogonalDecomposition().pseudoInverse()).norm(), 1e-12);
}

TEST(IterationMatrix, StructuralUnitEigenvalues) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = testsupport::random_instance(seed);
    const auto blocks = testsupport::phi_blocks(inst);
    const double sharp = 2.0 / dual_operator_max_eigenvalue(inst.graph, blocks);
    const Eigen::VectorXd ev = iteration_matrix_spectrum(inst.graph, blocks, 0.9 * sharp);
    const Index n = inst.dim();
    Index ones = 0;
    for (Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i] - 1.0) < 1e-9) ++ones;
    EXPECT_EQ(ones, n);
    EXPECT_LT(ev.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    EXPECT_LT(consensus_spectral_radius(inst.graph, blocks, 0.9 * sharp), 1.0);
    EXPECT_GT(consensus_spectral_radius(inst.graph, blocks, 1.5 * sharp), 1.0);
    EXPECT_GT(consensus_spectral_radius(inst.graph, blocks, 1.001 * sharp), 1.0);
  }
}

TEST(DualLimit, IterationReachesFormula) {
  const auto inst = testsupport::random_instance(17);
  const Index N = inst.nodes();
  const Index n = inst.dim();
  const auto nodes = testsupport::node_problems(inst);
  const auto sol = solve_estimate_kkt(inst.graph, nodes);
  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& p : nodes) blocks.push_back(p.G);
  const double alpha = 1.0 / dual_operator_max_eigenvalue(inst.graph, blocks);
  Rng rng(4);
  const Eigen::VectorXd lambda0 = rng.uniform_matrix(N * n, 1, -1, 1);
  // lambda <- lambda + alpha L G^-1 (g - L lambda)
  const Eigen::MatrixXd L = kron_laplacian(inst.graph, n);
  const Eigen::MatrixXd Ginv = block_diag([&] {
    std::vector<Eigen::MatrixXd> inv;
    for (const auto& b : blocks) inv.push_back(matops::spd_inverse(b));
    return inv;
  }());
  std::vector<Eigen::VectorXd> gs;
  for (const auto& p : nodes) gs.push_back(p.g);
  const Eigen::VectorXd g = stack(gs);
  Eigen::VectorXd lambda = lambda0;
  for (int l = 0; l < 10000; ++l) lambda += alpha * L * (Ginv * (g - L * lambda));
  const Eigen::VectorXd limit = dual_limit(inst.graph, lambda0, sol.lambda_particular);
  EXPECT_LT((lambda - limit).norm(), 1e-7);
  const Eigen::VectorXd rot = rotated_dual_error(inst.graph, lambda, limit);
  EXPECT_LT(rot.norm(), 1e-7);
}

TEST(Helpers, StackUnstackReplicate) {
  std::vector<Eigen::VectorXd> parts{Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)};
  const Eigen::VectorXd s = stack(parts);
  EXPECT_EQ(s, Eigen::Vector4d(1, 2, 3, 4));
  EXPECT_EQ(unstack(s, 2)[1], parts[1]);
  EXPECT_EQ(replicate(Eigen::Vector2d(5, 6), 2), Eigen::Vector4d(5, 6, 5, 6));
  EXPECT_THROW(unstack(s, 3), Error);
}
