#include <gtest/gtest.h>

#include "dkflab/ckf.hpp"
#include "dkflab/matops.hpp"
#include "dkflab/rng.hpp"
#include "instances.hpp"

using namespace dkflab;
using namespace dkflab::ckf;

namespace {

sysmodel::LinearGaussianSystem example1_system() {
  sysmodel::LinearGaussianSystem sys;
  sys.F = testsupport::example1_F();
  sys.Q = 0.1 * Eigen::MatrixXd::Identity(4, 4);
  sys.sensors = sysmodel::split_rows(testsupport::example1_H(), testsupport::example1_R_diag());
  return sys;
}

struct Problem {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;
  Eigen::VectorXd y;
};

Problem random_problem(Rng& rng, Eigen::Index n, Eigen::Index m) {
  return {rng.uniform_matrix(n, 1, -2, 2), testsupport::random_spd(n, 0.5, 2.0, rng),
          rng.uniform_matrix(m, n, -1, 1), testsupport::random_spd(m, 0.5, 2.0, rng),
          rng.uniform_matrix(m, 1, -2, 2)};
}

}  // namespace

TEST(Predict, Example1FirstStep) {
  const auto sys = example1_system();
  const CkfState p = predict({Eigen::VectorXd::Zero(4), sys.Q}, sys);
  // 0.1 F F^T + 0.1 I with F F^T = diag(0.97, 0.97, 0.89, 0.89)
  const Eigen::Vector4d d(0.197, 0.197, 0.189, 0.189);
  EXPECT_LT((p.P - Eigen::MatrixXd(d.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(p.x_hat, Eigen::VectorXd::Zero(4));
}

TEST(Correct, Example1FirstStepInformation) {
  const auto sys = example1_system();
  const CkfState pred = predict({Eigen::VectorXd::Zero(4), sys.Q}, sys);
  const CkfState post = correct(pred, Eigen::VectorXd::Ones(4), sys.stacked_H(), sys.stacked_R());
  // H^T R^-1 H + P_pred^-1 by hand
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
  want(0, 0) = 10 + 5 + 1 / 0.197;
  want(0, 1) = want(1, 0) = 5;
  want(1, 1) = 5 + 1 / 0.197;
  want(2, 2) = 1 / 0.3 + 10 + 1 / 0.189;
  want(2, 3) = want(3, 2) = 1 / 0.3;
  want(3, 3) = 1 / 0.3 + 1 / 0.189;
  EXPECT_LT(testsupport::rel_err(matops::spd_inverse(post.P), want), 1e-12);
  EXPECT_NEAR(want(0, 0), 20.076142131979694, 1e-12);
  EXPECT_NEAR(want(3, 3), 8.624338624338623, 1e-12);
}

TEST(Gain, InformationAndDualFormsAgree) {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const Problem p = random_problem(rng, 4, 4);
    const Eigen::MatrixXd a = kalman_gain_information_form(p.P, p.H, p.R);
    const Eigen::MatrixXd b = kalman_gain_dual_form(p.P, p.H, p.R);
    EXPECT_LT(testsupport::rel_err(a, b), 1e-9);
    const CkfState post = correct({p.x, p.P}, p.y, p.H, p.R);
    EXPECT_LT(testsupport::rel_err(post.P, subtractive_covariance(p.P, p.H, p.R)), 1e-9);
  }
}

TEST(Correct, GradientOfObjectiveVanishes) {
  Rng rng(32);
  for (int rep = 0; rep < 50; ++rep) {
    const Problem p = random_problem(rng, 4, 3);
    const CkfState post = correct({p.x, p.P}, p.y, p.H, p.R);
    const auto model = StackedMeasurementModel::build(p.y, p.H, p.R, p.x, p.P);
    EXPECT_LT(centralized_gradient(post.x_hat, model).norm(), 1e-8);
    const auto fd = testsupport::fd_gradient(
        [&](const Eigen::VectorXd& v) { return centralized_objective(v, model); }, post.x_hat);
    EXPECT_LT(fd.norm(), 1e-8);
    const Eigen::VectorXd probe = rng.uniform_matrix(4, 1, -1, 1);
    const auto fd2 = testsupport::fd_gradient(
        [&](const Eigen::VectorXd& v) { return centralized_objective(v, model); }, probe);
    EXPECT_LT((fd2 - centralized_gradient(probe, model)).norm(), 1e-6 * (1 + fd2.norm()));
  }
}

TEST(Correct, IsMinimizer) {
  Rng rng(33);
  const Problem p = random_problem(rng, 4, 4);
  const CkfState post = correct({p.x, p.P}, p.y, p.H, p.R);
  const auto model = StackedMeasurementModel::build(p.y, p.H, p.R, p.x, p.P);
  const double best = centralized_objective(post.x_hat, model);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd d = rng.uniform_matrix(4, 1, -0.1, 0.1);
    EXPECT_LE(best, centralized_objective(post.x_hat + d, model));
  }
}

TEST(Objective, DecomposesOverNodes) {
  const auto inst = testsupport::random_instance(77);
  const Eigen::MatrixXd H = inst.sys.stacked_H();
  const Eigen::MatrixXd R = inst.sys.stacked_R();
  Eigen::VectorXd y(H.rows());
  Eigen::Index row = 0;
  for (const auto& v : inst.y) {
    y.segment(row, v.size()) = v;
    row += v.size();
  }
  const auto& s0 = inst.states.front();
  const auto model = StackedMeasurementModel::build(y, H, R, s0.x_pred, s0.P_pred);
  Rng rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd xi = rng.uniform_matrix(inst.dim(), 1, -2, 2);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < inst.nodes(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      sum += dadkf::make_local_objective(inst.states[u], inst.sys.sensors[u], inst.y[u], inst.nodes()).value(xi);
    }
    EXPECT_NEAR(sum, centralized_objective(xi, model), 1e-9 * (1 + std::abs(sum)));
  }
}

TEST(Correct, SingularInnovation) {
  const Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, 2);
  const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 2);
  try {
    kalman_gain_dual_form(P, H, R);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::singular_innovation);
  }
  try {
    correct({Eigen::VectorXd::Zero(2), -Eigen::MatrixXd::Identity(2, 2)}, Eigen::VectorXd::Zero(2), H,
            Eigen::MatrixXd::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::singular_covariance);
  }
}

TEST(Run, TimelineAndShapes) {
  const auto sys = example1_system();
  const auto traj = sysmodel::simulate(sys, Eigen::VectorXd::Zero(4), 10, 1);
  const CkfState init{Eigen::VectorXd::Zero(4), sys.Q};
  const auto out = run(sys, traj, init);
  ASSERT_EQ(out.size(), 11u);
  EXPECT_EQ(out[0].x_hat, init.x_hat);
  EXPECT_EQ(out[0].P, init.P);
  const CkfState step1 = correct(predict(init, sys), traj.stacked_measurement(1), sys.stacked_H(), sys.stacked_R());
  EXPECT_EQ(out[1].x_hat, step1.x_hat);
  EXPECT_EQ(out[1].P, step1.P);
}
