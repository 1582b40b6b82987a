#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace cuspidal;

TEST(InverseKinematics, RoundTripRecoversConfiguration) {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int r = 0; r < 5; ++r) {
    const RobotParams p = test::random_robot(rng);
    for (int k = 0; k < 200; ++k) {
      const JointConfig q = test::random_config(rng);
      const CartesianPoint X = forward_kinematics(p, q);
      const IkSolutionSet s = inverse_kinematics(p, IkTarget::from_point(X));
      const IkSolution* c = test::closest(s, q);
      ASSERT_NE(c, nullptr);
      if (c->near_coincident) continue;  // on a fold the partner is not separable
      EXPECT_LT(torus_distance(c->q, q), 1e-8) << "robot " << r << " sample " << k;
      ++checked;
    }
  }
  EXPECT_GT(checked, 950);
}

TEST(InverseKinematics, EverySolutionReachesTheTarget) {
  std::mt19937_64 rng(32);
  for (int r = 0; r < 10; ++r) {
    const RobotParams p = test::random_robot(rng);
    const CartesianPoint X = forward_kinematics(p, test::random_config(rng));
    for (const IkSolution& s : inverse_kinematics(p, IkTarget::from_point(X)).solutions) {
      const CartesianPoint f = forward_kinematics(p, s.q);
      EXPECT_LT(std::hypot(f.x - X.x, f.y - X.y, f.z - X.z), 1e-9 * (1 + X.norm()));
      EXPECT_DOUBLE_EQ(s.det, det_jacobian(p, s.q));
    }
  }
}

TEST(InverseKinematics, CountMatchesBruteForceScan) {
  std::mt19937_64 rng(33);
  int tested = 0;
  while (tested < 6) {
    const RobotParams p = test::random_robot(rng);
    const CartesianPoint X = forward_kinematics(p, test::random_config(rng));
    const IkSolutionSet s = inverse_kinematics(p, IkTarget::from_point(X));
    if (s.any_near_coincident()) continue;
    const auto bf = test::brute_force_planar_solutions(p, X.rho(), X.z, 600);
    EXPECT_EQ(s.size(), bf.size()) << "rho " << X.rho() << " z " << X.z;
    for (const Point2& b : bf) {
      double best = 1e9;
      for (const IkSolution& sol : s.solutions)
        best = std::min(best, torus_distance2(sol.q.theta2, sol.q.theta3, b[0], b[1]));
      EXPECT_LT(best, 1e-7);
    }
    ++tested;
  }
}

TEST(InverseKinematics, ExampleRobotFourSolutions) {
  const RobotParams p = test::example_robot();
  const IkSolutionSet s = inverse_kinematics(p, IkTarget::planar(2.5, 0.5));
  ASSERT_EQ(s.size(), 4u);
  for (const JointConfig& ref : test::printed_solutions()) {
    const IkSolution* c = test::closest(s, ref);
    ASSERT_NE(c, nullptr);
    EXPECT_LT(test::max_joint_error(c->q, ref), 0.06);
  }
}

TEST(InverseKinematics, RegionCountsOfExampleRobot) {
  const RobotParams p = test::example_robot();
  EXPECT_EQ(ik_count(p, 2.5, 0.5), 4);  // inner region
  EXPECT_EQ(ik_count(p, 3.8, 0.0), 2);  // outer region
  EXPECT_EQ(ik_count(p, 7.0, 0.0), 0);  // beyond reach
  EXPECT_TRUE(inverse_kinematics(p, 0.0, 0.0, 9.0).empty());
}

TEST(InverseKinematics, AzimuthIsCarriedByFirstJoint) {
  const RobotParams p = test::example_robot();
  const IkSolutionSet a = inverse_kinematics(p, IkTarget::planar(2.5, 0.5));
  const double phi = 1.1;
  const IkSolutionSet b = inverse_kinematics(p, 2.5 * std::cos(phi), 2.5 * std::sin(phi), 0.5);
  ASSERT_EQ(a.size(), b.size());
  for (const IkSolution& s : a.solutions) {
    const JointConfig rotated(s.q.theta1 + phi, s.q.theta2, s.q.theta3);
    EXPECT_LT(torus_distance(test::closest(b, rotated)->q, rotated), 1e-9);
  }
}

TEST(InverseKinematics, ElbowAtPiIsFound) {
  std::mt19937_64 rng(34);
  for (int r = 0; r < 10; ++r) {
    const RobotParams p = test::random_robot(rng);
    const JointConfig q(0.3, test::random_config(rng).theta2, kPi);
    const IkSolutionSet s = inverse_kinematics(p, IkTarget::from_point(forward_kinematics(p, q)));
    const IkSolution* c = test::closest(s, q);
    ASSERT_NE(c, nullptr);
    EXPECT_LT(torus_distance(c->q, q), 1e-7);
  }
}

TEST(InverseKinematics, FoldPointsAreMarkedNearCoincident) {
  // a point on the outer boundary is a double solution
  const RobotParams p = test::example_robot();
  const SingularitySet ss = analyze_singularities(p, 256);
  bool seen = false;
  for (const SingularityCurve& c : ss.curves) {
    const Point2 q = c.points[c.points.size() / 3];
    const PlanarEval e = planar_eval(p, q[0], q[1]);
    const IkSolutionSet s = inverse_kinematics(p, IkTarget::planar(e.rho(), e.z));
    const IkSolution* m = test::closest(s, JointConfig(0, q[0], q[1]));
    ASSERT_NE(m, nullptr);
    EXPECT_LT(torus_distance2(m->q.theta2, m->q.theta3, q[0], q[1]), 1e-3);
    seen |= m->near_coincident;
  }
  EXPECT_TRUE(seen);
}
