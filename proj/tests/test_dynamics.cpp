#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace etfc;

TEST(Dynamics, SiStepExamples) {
  Eigen::MatrixXd pos(1, 2);
  pos << 0, 0;
  Eigen::MatrixXd u(1, 2);
  u << 1, 0;
  EXPECT_TRUE(testutil::bits_equal(si_step(pos, Eigen::MatrixXd::Zero(1, 2), 0.7), pos));
  const Eigen::MatrixXd stepped = si_step(pos, u, 0.5);
  EXPECT_DOUBLE_EQ(stepped(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(stepped(0, 1), 0.0);
}

TEST(Dynamics, SiStepTwoHalvesEqualWhole) {
  std::mt19937 rng(51);
  const Eigen::MatrixXd pos = testutil::random_positions(rng, 5, 3);
  const Eigen::MatrixXd u = testutil::random_positions(rng, 5, 3);
  const double dt = 0.4;
  const Eigen::MatrixXd once = si_step(pos, u, dt);
  const Eigen::MatrixXd twice = si_step(si_step(pos, u, dt / 2), u, dt / 2);
  EXPECT_LT((once - twice).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dynamics, SiStepCentroidIdentity) {
  std::mt19937 rng(53);
  const Eigen::MatrixXd pos = testutil::random_positions(rng, 7, 2);
  const Eigen::MatrixXd u = testutil::random_positions(rng, 7, 2);
  const double dt = 0.05;
  const Eigen::RowVectorXd lhs = centroid(si_step(pos, u, dt));
  const Eigen::RowVectorXd rhs = centroid(pos) + dt * centroid(u);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(Dynamics, EllPointExamples) {
  const Eigen::RowVector2d up = ell_point({1.0, 2.0, std::numbers::pi / 2.0}, 0.05);
  EXPECT_NEAR(up(0), 1.0, 1e-12);
  EXPECT_NEAR(up(1), 2.05, 1e-12);
  const Eigen::RowVector2d fwd = ell_point({3.0, -1.0, 0.0}, 0.05);
  EXPECT_DOUBLE_EQ(fwd(0), 3.05);
  EXPECT_DOUBLE_EQ(fwd(1), -1.0);
  std::mt19937 rng(55);
  std::uniform_real_distribution<double> ang(-4.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    const UnicyclePose pose{ang(rng), ang(rng), wrap_angle(ang(rng))};
    EXPECT_NEAR((ell_point(pose, 0.05) - Eigen::RowVector2d(pose.px, pose.py)).norm(), 0.05,
                1e-12);
  }
}

TEST(Dynamics, SiToUniExamples) {
  const UniCommand fwd = si_to_uni(Eigen::RowVector2d(0.1, 0.0), {0, 0, 0.0}, 0.05);
  EXPECT_DOUBLE_EQ(fwd.v, 0.1);
  EXPECT_DOUBLE_EQ(fwd.omega, 0.0);
  const UniCommand turn = si_to_uni(Eigen::RowVector2d(0.0, 0.1), {0, 0, 0.0}, 0.05);
  EXPECT_DOUBLE_EQ(turn.v, 0.0);
  EXPECT_DOUBLE_EQ(turn.omega, 2.0);
  EXPECT_THROW(si_to_uni(Eigen::RowVector2d(1, 0), {0, 0, 0}, 0.0), std::invalid_argument);
}

TEST(Dynamics, UniStepStraight) {
  const UnicyclePose next = uni_step({0, 0, 0}, 1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(next.px, 1.0);
  EXPECT_DOUBLE_EQ(next.py, 0.0);
  EXPECT_DOUBLE_EQ(next.theta, 0.0);
}

TEST(Dynamics, UniStepSpinInPlace) {
  const UnicyclePose next = uni_step({2.0, 3.0, 0.5}, 0.0, 0.25, 1.0);
  EXPECT_DOUBLE_EQ(next.px, 2.0);
  EXPECT_DOUBLE_EQ(next.py, 3.0);
  EXPECT_DOUBLE_EQ(next.theta, 0.75);
}

TEST(Dynamics, UniStepFullCircle) {
  const UnicyclePose start{0.3, -0.2, 1.1};
  const UnicyclePose next = uni_step(start, 1.0, 2.0 * std::numbers::pi, 1.0);
  EXPECT_NEAR(next.px, start.px, 1e-9);
  EXPECT_NEAR(next.py, start.py, 1e-9);
}

TEST(Dynamics, DiffeomorphismFiniteDifference) {
  std::mt19937 rng(57);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  const double ell = 0.05;
  const double dt = 1e-5;
  for (int trial = 0; trial < 1000; ++trial) {
    const UnicyclePose pose{coord(rng), coord(rng), wrap_angle(angle(rng))};
    Eigen::RowVector2d vel(coord(rng), coord(rng));
    if (vel.norm() < 0.01) vel = Eigen::RowVector2d(0.1, -0.05);
    const UniCommand cmd = si_to_uni(vel, pose, ell);
    const UnicyclePose next = uni_step(pose, cmd.v, cmd.omega, dt);
    const Eigen::RowVector2d fd = (ell_point(next, ell) - ell_point(pose, ell)) / dt;
    EXPECT_LT((fd - vel).norm(), 1e-3 * vel.norm());
  }
}

TEST(Dynamics, ThetaStaysWrapped) {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> w(-8.0, 8.0);
  UnicyclePose pose{0, 0, 0};
  for (int i = 0; i < 500; ++i) {
    pose = uni_step(pose, 0.3, w(rng), 0.7);
    EXPECT_GT(pose.theta, -std::numbers::pi);
    EXPECT_LE(pose.theta, std::numbers::pi);
  }
}

TEST(Dynamics, WrapAngle) {
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(3.0 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.25), 0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(-0.25), -0.25, 1e-15);
}

TEST(Dynamics, SaturationFlag) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(3, 2);
  EXPECT_FALSE(exceeds_velocity_bound(u, 0.2));
  u(1, 0) = 0.2;  // exactly at the bound does not exceed it
  EXPECT_FALSE(exceeds_velocity_bound(u, 0.2));
  u(2, 1) = 0.4;
  EXPECT_TRUE(exceeds_velocity_bound(u, 0.2));
  EXPECT_FALSE(exceeds_velocity_bound(u, std::numeric_limits<double>::infinity()));
}

TEST(Dynamics, PlantConfigValidation) {
  PlantConfig p;
  p.dt = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.dt = 0.05;
  p.model = PlantModel::kUnicycle;
  p.ell = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.ell = 0.05;
  EXPECT_NO_THROW(p.validate());
}
