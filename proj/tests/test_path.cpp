#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace cuspidal;

namespace {

const RobotParams& robot() {
  static const RobotParams p = test::example_robot();
  return p;
}

const SingularitySet& singularities() {
  static const SingularitySet s = analyze_singularities(robot(), 512);
  return s;
}

// Computed solution closest to printed solution k (1-based).
JointConfig solution(int k) {
  const IkSolutionSet s = inverse_kinematics(robot(), IkTarget::planar(2.5, 0.5));
  return test::closest(s, test::printed_solutions()[k - 1])->q;
}

const PostureChangePlan& plan_23() {
  static const PostureChangePlan plan = plan_posture_change(robot(), solution(2), solution(3), singularities().cusps);
  return plan;
}

// Arc length where the IK count along the path first changes, by bisection.
double count_change(const WorkspacePath& w) {
  const double L = w.length();
  auto count = [&](double s) {
    const CartesianPoint X = w.at(s);
    return ik_count(robot(), X.rho(), X.z);
  };
  const int c0 = count(0.0);
  double lo = 0.0, hi = L;
  for (int k = 1; k <= 1000; ++k) {
    if (count(L * k / 1000.0) != c0) {
      hi = L * k / 1000.0;
      lo = L * (k - 1) / 1000.0;
      break;
    }
  }
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) == c0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Path, WaypointGeometry) {
  const WorkspacePath w = WorkspacePath::rho_z({{1, 0}, {4, 0}, {4, 4}});
  EXPECT_DOUBLE_EQ(w.length(), 7.0);
  EXPECT_DOUBLE_EQ(w.at(2.0).x, 3.0);
  EXPECT_DOUBLE_EQ(w.at(5.0).z, 2.0);
  EXPECT_DOUBLE_EQ(w.at(99.0).z, 4.0);
  EXPECT_DOUBLE_EQ(w.reversed().at(0.0).z, 4.0);
  EXPECT_THROW(WorkspacePath::rho_z({{1, 0}}).validate(), Error);
  EXPECT_THROW(WorkspacePath::rho_z({{-1, 0}, {1, 0}}).validate(), Error);
}

TEST(Path, FeasibleLiftTracksThePath) {
  const WorkspacePath w = WorkspacePath::rho_z({{2.5, 0.5}, {2.4, 0.2}, {2.2, 0.3}});
  const LiftResult r = lift_path(robot(), w, solution(2));
  ASSERT_TRUE(r.feasible());
  EXPECT_LT(r.max_tracking_error, 1e-6 * robot().length_scale());
  EXPECT_LT(r.max_joint_jump, kMaxJointStep);
  // independent check on the returned trajectory
  for (const LiftSample& s : r.trajectory) {
    const CartesianPoint f = forward_kinematics(robot(), s.q), X = w.at(s.s);
    EXPECT_LT(std::hypot(f.x - X.x, f.y - X.y, f.z - X.z), 1e-6 * robot().length_scale());
  }
  EXPECT_DOUBLE_EQ(r.trajectory.back().s, w.length());
}

TEST(Path, LoopAroundACuspChangesPosture) {
  const PostureChangePlan& plan = plan_23();
  ASSERT_TRUE(plan.found);
  // the workspace loop traced by the plan, lifted independently from q2
  const WorkspacePath loop = WorkspacePath::rho_z(plan.trace);
  const LiftResult r = lift_path(robot(), loop, solution(2));
  ASSERT_TRUE(r.feasible());
  EXPECT_LT(torus_distance(r.end(), solution(3)), 1e-6);
  EXPECT_GT(torus_distance(r.end(), solution(2)), 1.0);
  EXPECT_GT(r.min_abs_det, 0.0);
}

TEST(Path, PlannerConnectsTwoPosturesOfOneAspect) {
  const PostureChangePlan& plan = plan_23();
  ASSERT_TRUE(plan.found);
  EXPECT_EQ(plan.aspect, 1);
  EXPECT_LT(torus_distance(plan.joints.front(), solution(2)), 1e-9);
  EXPECT_LT(torus_distance(plan.joints.back(), solution(3)), 1e-9);
  const double dscale = det_scale(robot());
  EXPECT_GE(plan.min_abs_det, 0.01 * dscale);
  // dense re-evaluation between consecutive points
  for (std::size_t k = 0; k + 1 < plan.joints.size(); ++k) {
    const JointConfig& a = plan.joints[k];
    const JointConfig& b = plan.joints[k + 1];
    EXPECT_LT(torus_distance2(a.theta2, a.theta3, b.theta2, b.theta3), 0.05);
    for (double t : {0.25, 0.5, 0.75}) {
      const double d = det_jacobian(robot(), a.theta2 + t * angle_diff(a.theta2, b.theta2),
                                    a.theta3 + t * angle_diff(a.theta3, b.theta3));
      EXPECT_GT(d, 0.0);
    }
  }
  EXPECT_EQ(plan.encircled, 1);
  int wound = 0;
  for (int w : plan.winding) wound += std::abs(w) == 1;
  EXPECT_EQ(wound, 1);
}

TEST(Path, PlannerConnectsTheOtherAspect) {
  const PostureChangePlan plan = plan_posture_change(robot(), solution(1), solution(4), singularities().cusps);
  ASSERT_TRUE(plan.found);
  EXPECT_EQ(plan.aspect, 2);
  EXPECT_EQ(plan.encircled, 1);
  for (double d : plan.det) EXPECT_LT(d, 0.0);
}

TEST(Path, PlannerRefusesToLeaveAnAspect) {
  const PostureChangePlan plan = plan_posture_change(robot(), solution(2), solution(1), singularities().cusps);
  EXPECT_FALSE(plan.found);
  EXPECT_NE(plan.reason.find("aspect"), std::string::npos);
  EXPECT_THROW(plan_posture_change(robot(), solution(2), JointConfig(0, 0, 0), singularities().cusps), Error);
}

TEST(Path, ConstructedChordIsBlockedEverywhere) {
  const BlockedChord chord = find_blocked_chord(robot());
  ASSERT_TRUE(chord.found);
  EXPECT_TRUE(chord.report.blocked_everywhere());
  EXPECT_EQ(chord.report.forward.size(), 2u);
  EXPECT_EQ(chord.report.reverse.size(), 2u);
  // every stop is a fold: on the internal boundary and with a singular configuration
  for (const auto* side : {&chord.report.forward, &chord.report.reverse}) {
    for (const BranchLift& b : *side) {
      EXPECT_EQ(b.lift.status, LiftStatus::Blocked);
      const CartesianPoint X = b.lift.block_point;
      EXPECT_LT(test::ws1_distance(robot(), singularities().boundary, {X.rho(), X.z}), 1e-3);
      EXPECT_LT(std::abs(det_jacobian(robot(), b.lift.block_config)), 1e-6 * det_scale(robot()));
    }
  }
  // recheck independently from a fresh feasibility run
  EXPECT_TRUE(check_feasibility(robot(), chord.path).blocked_everywhere());
}

TEST(Path, OuterSegmentIsFeasibleFromBothBranches) {
  const WorkspacePath w = WorkspacePath::rho_z({{3.8, 0.0}, {3.9, 0.1}});
  const FeasibilityReport r = check_feasibility(robot(), w);
  EXPECT_EQ(r.forward.size(), 2u);
  EXPECT_EQ(r.feasible_forward(), 2);
  EXPECT_EQ(r.feasible_reverse(), 2);
}

TEST(Path, ZeroLengthPathIsTriviallyFeasible) {
  const WorkspacePath w = WorkspacePath::rho_z({{2.5, 0.5}, {2.5, 0.5}});
  const FeasibilityReport r = check_feasibility(robot(), w);
  EXPECT_EQ(r.forward.size(), 4u);
  EXPECT_EQ(r.feasible_forward(), 4);
  EXPECT_EQ(r.feasible_reverse(), 4);
}

TEST(Path, CrossingOneSegmentBlocksTwoBranchesWhereTheCountDrops) {
  // inner region to outer region across BS3
  const WorkspacePath w = WorkspacePath::rho_z({{2.5, 0.0}, {3.3, 0.0}});
  const double s_star = count_change(w);
  const FeasibilityReport r = check_feasibility(robot(), w);
  ASSERT_EQ(r.forward.size(), 4u);
  EXPECT_EQ(r.feasible_forward(), 2);
  for (const BranchLift& b : r.forward) {
    if (b.lift.feasible()) continue;
    EXPECT_EQ(b.lift.status, LiftStatus::Blocked);
    EXPECT_NEAR(b.lift.s_block, s_star, 1e-3);
  }
  // from the outer side both branches make it into the inner region
  EXPECT_EQ(r.feasible_reverse(), 2);
}

TEST(Path, ReversalReturnsToTheStartingBranch) {
  const WorkspacePath w = WorkspacePath::rho_z({{2.5, 0.5}, {2.0, -0.5}, {3.6, -0.2}});
  for (const IkSolution& s : inverse_kinematics(robot(), IkTarget::planar(2.5, 0.5)).solutions) {
    const LiftResult f = lift_path(robot(), w, s.q);
    if (!f.feasible()) continue;
    const LiftResult b = lift_path(robot(), w.reversed(), f.end());
    ASSERT_TRUE(b.feasible());
    EXPECT_LT(torus_distance(b.end(), s.q), 1e-6);
  }
}

TEST(Path, PathsInsideOneFeasibleRegionAreTrackable) {
  const TopologyAnalysis t = analyze_topology(robot(), 512);
  std::mt19937_64 rng(61);
  for (const FeasibleRegion& wf : t.feasible) {
    const UniquenessDomain& qu = t.uniqueness[wf.id - 1];
    const WorkspaceGrid& g = t.partition.ws;
    // points two cells deep inside the region, away from slits
    auto deep = [&](double rho, double z) {
      const int a = std::min(g.nr - 1, static_cast<int>(rho / g.hr()));
      const int b = std::min(g.nz - 1, static_cast<int>((z - g.z_min) / g.hz()));
      for (int da = -2; da <= 2; ++da)
        for (int db = -2; db <= 2; ++db) {
          const int x = a + da, y = b + db;
          if (x < 0 || y < 0 || x >= g.nr || y >= g.nz) return false;
          if (wf.mask[g.index(x, y)] != 1) return false;
        }
      return true;
    };
    std::uniform_real_distribution<double> ur(0.0, g.rho_max), uz(g.z_min, g.z_max);
    int tested = 0;
    for (int attempt = 0; attempt < 20000 && tested < 5; ++attempt) {
      const Point2 A{ur(rng), uz(rng)}, B{ur(rng), uz(rng)};
      bool ok = true;
      for (int k = 0; k <= 200 && ok; ++k) ok = deep(A[0] + k / 200.0 * (B[0] - A[0]), A[1] + k / 200.0 * (B[1] - A[1]));
      if (!ok) continue;
      // start on the branch whose configuration lies in the uniqueness domain
      const IkSolutionSet s = inverse_kinematics(robot(), IkTarget::planar(A[0], A[1]));
      const IkSolution* start = nullptr;
      for (const IkSolution& sol : s.solutions) {
        const int c = t.aspects.cell_of(sol.q.theta2, sol.q.theta3);
        if (c >= 0 && qu.mask[c]) start = &sol;
      }
      ASSERT_NE(start, nullptr);
      const LiftResult r = lift_path(robot(), WorkspacePath::rho_z({A, B}), start->q);
      EXPECT_TRUE(r.feasible()) << "Wf" << wf.id << " from (" << A[0] << ", " << A[1] << ") to (" << B[0] << ", " << B[1] << ")";
      const int ce = t.aspects.cell_of(r.end().theta2, r.end().theta3);
      EXPECT_TRUE(ce >= 0 && qu.mask[ce]);
      ++tested;
    }
    EXPECT_EQ(tested, 5) << "Wf" << wf.id;
  }
}

TEST(Path, InconsistentStartIsRejected) {
  const WorkspacePath w = WorkspacePath::rho_z({{2.5, 0.5}, {2.4, 0.5}});
  try {
    lift_path(robot(), w, JointConfig(0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
  try {
    check_feasibility(robot(), WorkspacePath::rho_z({{9.0, 0.0}, {3.0, 0.0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unreachable);
  }
}

TEST(Path, CartesianFrameMatchesPlanarFrame) {
  const double phi = 0.8;
  const WorkspacePath a = WorkspacePath::rho_z({{3.8, 0.0}, {3.9, 0.1}});
  const WorkspacePath b = WorkspacePath::xyz({{3.8 * std::cos(phi), 3.8 * std::sin(phi), 0.0},
                                              {3.9 * std::cos(phi), 3.9 * std::sin(phi), 0.1}});
  EXPECT_EQ(check_feasibility(robot(), a).feasible_forward(), check_feasibility(robot(), b).feasible_forward());
}
