#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dkflab/rng.hpp"
#include "dkflab/sysmodel.hpp"
#include "instances.hpp"

using namespace dkflab;
using namespace dkflab::sysmodel;

namespace {

LinearGaussianSystem example1_system() {
  LinearGaussianSystem sys;
  sys.F = testsupport::example1_F();
  sys.Q = 0.1 * Eigen::MatrixXd::Identity(4, 4);
  sys.sensors = split_rows(testsupport::example1_H(), testsupport::example1_R_diag());
  return sys;
}

}  // namespace

TEST(System, Example1Shapes) {
  const auto sys = example1_system();
  EXPECT_NO_THROW(sys.validate());
  EXPECT_EQ(sys.sensor_count(), 4);
  EXPECT_EQ(sys.measurement_dim(), 4);
  EXPECT_EQ(sys.stacked_H(), testsupport::example1_H());
  const Eigen::MatrixXd R = testsupport::example1_R_diag().asDiagonal();
  EXPECT_EQ(sys.stacked_R(), R);
}

TEST(System, ValidateRejects) {
  auto sys = example1_system();
  sys.sensors[1].H = Eigen::MatrixXd::Zero(1, 3);
  try {
    sys.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
  sys = example1_system();
  sys.Q(0, 0) = -1;
  try {
    sys.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_positive_definite);
  }
}

TEST(Simulate, DeterministicAndShaped) {
  const auto sys = example1_system();
  const Trajectory a = simulate(sys, Eigen::VectorXd::Zero(4), 20, 9);
  const Trajectory b = simulate(sys, Eigen::VectorXd::Zero(4), 20, 9);
  EXPECT_EQ(a.steps(), 20);
  ASSERT_EQ(a.measurements.size(), 21u);
  EXPECT_EQ(a.measurements[3].size(), 4u);
  for (std::size_t k = 0; k < a.states.size(); ++k) EXPECT_EQ(a.states[k], b.states[k]);
  EXPECT_EQ(a.states[0], Eigen::VectorXd::Zero(4));
  EXPECT_EQ(a.stacked_measurement(5).size(), 4);
  const Trajectory c = simulate(sys, Eigen::VectorXd::Zero(4), 20, 10);
  EXPECT_NE(a.states[5], c.states[5]);
}

TEST(Simulate, ProcessNoiseCovarianceMatchesQ) {
  Rng rng(17);
  LinearGaussianSystem sys;
  sys.F = Eigen::MatrixXd::Zero(3, 3);
  sys.Q = testsupport::random_spd(3, 0.5, 2.0, rng);
  sys.sensors = {{Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)}};
  // F = 0 makes every state a fresh draw of w
  const Index n = 100000;
  const Trajectory t = simulate(sys, Eigen::VectorXd::Zero(3), n, 2);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  for (Index k = 1; k <= n; ++k) acc += t.states[k] * t.states[k].transpose();
  acc /= static_cast<double>(n);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(acc(i, j), sys.Q(i, j), 0.05 * sys.Q.norm());
  EXPECT_LT((acc - sys.Q).norm() / sys.Q.norm(), 0.05);
}

TEST(Simulate, RejectsBadInput) {
  const auto sys = example1_system();
  EXPECT_THROW(simulate(sys, Eigen::VectorXd::Zero(3), 5, 1), Error);
  EXPECT_THROW(simulate(sys, Eigen::VectorXd::Zero(4), 0, 1), Error);
}

TEST(Observability, Example1) {
  EXPECT_TRUE(check_observability(testsupport::example1_F(), testsupport::example1_H()));
}

TEST(Observability, UnobservablePair) {
  const Eigen::MatrixXd F = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd H(1, 3);
  H << 1, 0, 0;
  EXPECT_FALSE(check_observability(F, H));
  // a single row sees everything through a shift chain
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(3, 3);
  shift(1, 0) = shift(2, 1) = 1;
  Eigen::MatrixXd h(1, 3);
  h << 0, 0, 1;
  EXPECT_TRUE(check_observability(shift, h));
}

TEST(MatrixExponential, RotationBlocks) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  A(0, 1) = 0.5;
  A(1, 0) = -0.5;
  A(2, 3) = -0.5;
  A(3, 2) = 0.5;
  const Eigen::MatrixXd E = matrix_exponential(A);
  const double c = std::cos(0.5);
  const double s = std::sin(0.5);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
  want.block(0, 0, 2, 2) << c, s, -s, c;
  want.block(2, 2, 2, 2) << c, -s, s, c;
  EXPECT_LT((E - want).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(c, 0.8775825618903728, 1e-16);
  EXPECT_THROW(matrix_exponential(Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(RandomSensors, RangesAndDeterminism) {
  Rng a(8);
  Rng b(8);
  const auto s1 = random_sensors(10, 4, 2, -1.0, 1.0, 0.1, 1.0, a);
  const auto s2 = random_sensors(10, 4, 2, -1.0, 1.0, 0.1, 1.0, b);
  ASSERT_EQ(s1.size(), 10u);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1[i].H, s2[i].H);
    EXPECT_EQ(s1[i].H.rows(), 2);
    EXPECT_LE(s1[i].H.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_GE(s1[i].R.diagonal().minCoeff(), 0.1);
    EXPECT_LT(s1[i].R.diagonal().maxCoeff(), 1.0);
    EXPECT_EQ(s1[i].R(0, 1), 0.0);
  }
}

TEST(PsdSqrt, SquaresBack) {
  Rng rng(2);
  const Eigen::MatrixXd m = testsupport::random_spd(5, 0.1, 3.0, rng);
  const Eigen::MatrixXd r = psd_sqrt(m);
  EXPECT_LT((r * r - m).norm(), 1e-12);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const auto sys = example1_system();
  const Trajectory t = simulate(sys, Eigen::VectorXd::Zero(4), 3, 1);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "k,x_1,x_2,x_3,x_4,y_1_1,y_2_1,y_3_1,y_4_1");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
