#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <random>

#include "support.hpp"

using namespace cuspidal;

namespace {

// Independent chain product: Rot(x, alpha) Trans(x, d) Rot(z, theta) Trans(z, r) per joint,
// P at distance d4 along the last x axis.
Eigen::Vector3d chain_position(const RobotParams& p, const JointConfig& q) {
  using Eigen::AngleAxisd;
  using Eigen::Translation3d;
  using Eigen::Vector3d;
  auto link = [](double alpha, double d, double theta, double r) {
    return Eigen::Affine3d(AngleAxisd(alpha, Vector3d::UnitX())) * Translation3d(d, 0, 0) *
           AngleAxisd(theta, Vector3d::UnitZ()) * Translation3d(0, 0, r);
  };
  const Eigen::Affine3d T = link(0.0, 0.0, q.theta1, 0.0) * link(p.alpha2, p.d2, q.theta2, p.r2) *
                            link(p.alpha3, p.d3, q.theta3, p.r3);
  return T * Vector3d(p.d4, 0, 0);
}

RobotParams random_general_robot(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(0.1, 3.0), ang(-kPi, kPi);
  RobotParams p = RobotParams::orthogonal_robot(len(rng), len(rng), len(rng), len(rng) - 1.0, len(rng) - 1.0);
  p.alpha2 = ang(rng);
  p.alpha3 = ang(rng);
  return p;
}

}  // namespace

TEST(Model, ForwardKinematicsMatchesTransformChain) {
  std::mt19937_64 rng(11);
  for (int r = 0; r < 50; ++r) {
    const RobotParams p = r % 2 ? random_general_robot(rng) : test::random_robot(rng);
    for (int k = 0; k < 20; ++k) {
      const JointConfig q = test::random_config(rng);
      const CartesianPoint f = forward_kinematics(p, q);
      const Eigen::Vector3d ref = chain_position(p, q);
      EXPECT_NEAR(f.x, ref.x(), 1e-12 * (1 + p.length_scale()));
      EXPECT_NEAR(f.y, ref.y(), 1e-12 * (1 + p.length_scale()));
      EXPECT_NEAR(f.z, ref.z(), 1e-12 * (1 + p.length_scale()));
    }
  }
}

TEST(Model, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  const double h = 1e-6;
  for (int r = 0; r < 30; ++r) {
    const RobotParams p = random_general_robot(rng);
    for (int k = 0; k < 10; ++k) {
      const JointConfig q = test::random_config(rng);
      const Matrix3 J = jacobian(p, q);
      for (int c = 0; c < 3; ++c) {
        Eigen::Vector3d dq = Eigen::Vector3d::Zero();
        dq[c] = h;
        const Eigen::Vector3d a = q.vec() + dq, b = q.vec() - dq;
        const Eigen::Vector3d fd = (chain_position(p, JointConfig(a[0], a[1], a[2])) -
                                    chain_position(p, JointConfig(b[0], b[1], b[2]))) / (2 * h);
        for (int row = 0; row < 3; ++row) EXPECT_NEAR(J(row, c), fd[row], 1e-7 * (1 + p.length_scale()));
      }
    }
  }
}

TEST(Model, DeterminantMatchesMatrixDeterminant) {
  std::mt19937_64 rng(13);
  for (int r = 0; r < 30; ++r) {
    const RobotParams p = random_general_robot(rng);
    const JointConfig q = test::random_config(rng);
    const double s = std::pow(p.length_scale(), 3);
    EXPECT_NEAR(det_jacobian(p, q), jacobian(p, q).determinant(), 1e-11 * s);
  }
}

TEST(Model, DeterminantIndependentOfFirstJoint) {
  const RobotParams p = test::example_robot();
  for (double t1 : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    EXPECT_NEAR(jacobian(p, JointConfig(t1, 0.3, -1.2)).determinant(), det_jacobian(p, 0.3, -1.2), 1e-12);
  }
}

TEST(Model, OrthogonalClosedFormIsProportionalToDeterminant) {
  std::mt19937_64 rng(14);
  for (int r = 0; r < 30; ++r) {
    RobotParams p = test::random_robot(rng, false);
    if (r % 3 == 1) p.alpha3 = -kPi / 2;
    if (r % 3 == 2) p.alpha2 = kPi / 2;
    const double k = closed_form_calibration(p);
    ASSERT_GT(std::abs(k), 0.0);
    for (int s = 0; s < 20; ++s) {
      const JointConfig q = test::random_config(rng);
      EXPECT_NEAR(det_jacobian(p, q), k * det_jacobian_orthogonal(p, q.theta2, q.theta3), 1e-10 * std::pow(p.length_scale(), 3));
    }
  }
}

TEST(Model, WristFactorReconstructsDeterminant) {
  std::mt19937_64 rng(15);
  for (int r = 0; r < 20; ++r) {
    const RobotParams p = test::random_robot(rng, false);
    ASSERT_TRUE(p.has_wrist_factor());
    const JointConfig q = test::random_config(rng);
    const double wrist = p.d3 + std::cos(q.theta3) * p.d4;
    EXPECT_NEAR(singular_function(p, q.theta2, q.theta3) * wrist, det_jacobian(p, q), 1e-11 * std::pow(p.length_scale(), 3));
  }
}

TEST(Model, SingularGradientMatchesDifferences) {
  std::mt19937_64 rng(16);
  const double h = 1e-6;
  for (int r = 0; r < 20; ++r) {
    const RobotParams p = r % 2 ? test::random_robot(rng) : test::random_robot(rng, false);
    const JointConfig q = test::random_config(rng);
    const auto g = singular_gradient(p, q.theta2, q.theta3);
    const double f2 = (singular_function(p, q.theta2 + h, q.theta3) - singular_function(p, q.theta2 - h, q.theta3)) / (2 * h);
    const double f3 = (singular_function(p, q.theta2, q.theta3 + h) - singular_function(p, q.theta2, q.theta3 - h)) / (2 * h);
    const double s = std::pow(p.length_scale(), 3);
    EXPECT_NEAR(g[0], f2, 1e-7 * s);
    EXPECT_NEAR(g[1], f3, 1e-7 * s);
  }
}

TEST(Model, ScalingIsLinearInLengths) {
  const RobotParams p = test::example_robot();
  const JointConfig q(0.4, -1.1, 2.2);
  const CartesianPoint a = forward_kinematics(p, q), b = forward_kinematics(p.scaled(2.5), q);
  EXPECT_NEAR(b.x, 2.5 * a.x, 1e-12);
  EXPECT_NEAR(b.y, 2.5 * a.y, 1e-12);
  EXPECT_NEAR(b.z, 2.5 * a.z, 1e-12);
  EXPECT_DOUBLE_EQ(p.scaled(3.0).normalized().d3, p.d3);
}

TEST(Model, ReachBoundHolds) {
  std::mt19937_64 rng(17);
  for (int r = 0; r < 20; ++r) {
    const RobotParams p = test::random_robot(rng);
    for (int k = 0; k < 50; ++k) EXPECT_LE(forward_kinematics(p, test::random_config(rng)).norm(), reach_bound(p) + 1e-12);
  }
}

TEST(Model, AnglesWrapIntoHalfOpenInterval) {
  for (double a : {-10.0, -kPi, -1.0, 0.0, kPi, 7.0, 3 * kPi}) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - a, kTwoPi), 0.0, 1e-12);
  }
  EXPECT_NEAR(torus_distance(JointConfig(kPi - 0.01, 0, 0), JointConfig(-kPi + 0.01, 0, 0)), 0.02, 1e-12);
  EXPECT_TRUE(torus_equal(JointConfig(0.1, kPi, -0.2), JointConfig(0.1, -kPi, -0.2)));
}

TEST(Model, ValidationRejectsBadParameters) {
  RobotParams p = test::example_robot();
  EXPECT_NO_THROW(p.validate());
  p.d3 = -1;
  EXPECT_THROW(p.validate(), Error);
  p = test::example_robot();
  p.d4 = 0;
  EXPECT_THROW(p.validate(), Error);
  p = test::example_robot();
  p.r2 = std::nan("");
  EXPECT_THROW(p.validate(), Error);
  p = test::example_robot();
  p.joint_limits = std::array<JointRange, 3>{JointRange{0, 1}, JointRange{1, 0}, JointRange{}};
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
  p = test::example_robot();
  p.d2 = 0;
  EXPECT_NO_THROW(p.validate());
}

TEST(Model, OrthogonalityFlags) {
  RobotParams p = test::example_robot();
  EXPECT_TRUE(p.orthogonal());
  EXPECT_TRUE(p.has_wrist_factor());
  p.r3 = 0.5;
  EXPECT_FALSE(p.has_wrist_factor());
  p.alpha2 = 1.0;
  EXPECT_FALSE(p.orthogonal());
}
