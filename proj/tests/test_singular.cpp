#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace cuspidal;

namespace {

const SingularitySet& example_analysis() {
  static const SingularitySet s = analyze_singularities(test::example_robot(), 512);
  return s;
}

Point2 image_of(const RobotParams& p, const Point2& q) {
  const PlanarEval e = planar_eval(p, q[0], q[1]);
  return {e.rho(), e.z};
}

}  // namespace

TEST(Singular, TracedPointsLieOnTheZeroSet) {
  const RobotParams p = test::example_robot();
  const double scale = singular_function_scale(p);
  for (const SingularityCurve& c : example_analysis().curves) {
    ASSERT_GT(c.points.size(), 50u);
    for (const Point2& q : c.points) EXPECT_LT(std::abs(singular_function(p, q[0], q[1])), 1e-8 * scale);
  }
}

TEST(Singular, EveryGridSignChangeIsNearATracedCurve) {
  // brute force: sign changes of det J along grid edges at a coarser resolution
  const RobotParams p = test::example_robot();
  const int n = 200;
  const double h = kTwoPi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double t2 = -kPi + i * h, t3 = -kPi + j * h;
      const double a = singular_function(p, t2, t3), b = singular_function(p, t2 + h, t3);
      if ((a > 0) == (b > 0)) continue;
      double best = 1e9;
      for (const SingularityCurve& c : example_analysis().curves)
        for (const Point2& q : c.points) best = std::min(best, torus_distance2(q[0], q[1], t2 + 0.5 * h, t3));
      EXPECT_LT(best, h);
    }
  }
}

TEST(Singular, ExampleRobotHasTwoClosedCurves) {
  const auto& s = example_analysis();
  ASSERT_EQ(s.curves.size(), 2u);
  for (const auto& c : s.curves) {
    EXPECT_TRUE(c.closed);
    EXPECT_EQ(c.kind, CurveKind::Regular);
  }
  EXPECT_EQ(s.curves[0].label, "S1");
  EXPECT_EQ(s.curves[1].label, "S2");
  EXPECT_FALSE(s.constant_sign);
}

TEST(Singular, ExampleRobotHasFourConfirmedCusps) {
  const RobotParams p = test::example_robot();
  for (int n : {256, 512, 1024}) {
    const SingularitySet s = analyze_singularities(p, n);
    ASSERT_EQ(s.cusps.size(), 4u) << "grid " << n;
    for (const CuspPoint& c : s.cusps) {
      EXPECT_TRUE(c.confirmed);
      EXPECT_EQ(c.multiplicity, 3);
    }
    EXPECT_TRUE(s.anomalies.empty());
  }
}

TEST(Singular, CuspsSitWhereTheImageTangentReverses) {
  const RobotParams p = test::example_robot();
  const auto& s = example_analysis();
  for (const CuspPoint& c : s.cusps) {
    const auto& pts = s.curves[c.curve].points;
    const int m = static_cast<int>(pts.size());
    const int k = static_cast<int>(std::lround(c.position));
    const int off = std::max(3, m / 100);
    auto tangent = [&](int a, int b) {
      const Point2 pa = image_of(p, pts[((a % m) + m) % m]), pb = image_of(p, pts[((b % m) + m) % m]);
      return Point2{pb[0] - pa[0], pb[1] - pa[1]};
    };
    const Point2 before = tangent(k - 2 * off, k - off), after = tangent(k + off, k + 2 * off);
    EXPECT_LT(before[0] * after[0] + before[1] * after[1], 0.0) << "cusp at " << c.rho << ", " << c.z;
    // the cusp configuration maps onto its reported image
    const Point2 img = image_of(p, {c.theta2, c.theta3});
    EXPECT_NEAR(img[0], c.rho, 1e-9);
    EXPECT_NEAR(img[1], c.z, 1e-9);
  }
}

TEST(Singular, CuspImagesMatchTheReferenceGeometry) {
  // symmetric about z = 0, two pairs
  std::vector<Point2> got;
  for (const CuspPoint& c : example_analysis().cusps) got.push_back({c.rho, c.z});
  const std::vector<Point2> ref = {{2.4656, 1.9987}, {2.4656, -1.9987}, {1.3555, 0.5047}, {1.3555, -0.5047}};
  for (const Point2& r : ref) {
    double best = 1e9;
    for (const Point2& g : got) best = std::min(best, std::hypot(g[0] - r[0], g[1] - r[1]));
    EXPECT_LT(best, 1e-3);
  }
}

TEST(Singular, InternalBoundaryHasFourSegmentsChangingTheCountByTwo) {
  const RobotParams p = test::example_robot();
  const auto& s = example_analysis();
  ASSERT_EQ(s.boundary.segments.size(), 4u);
  std::set<int> ids, cusps_used;
  for (const BoundarySegment& seg : s.boundary.segments) {
    ids.insert(seg.id);
    ASSERT_GE(seg.cusp_begin, 0);
    ASSERT_GE(seg.cusp_end, 0);
    EXPECT_NE(seg.cusp_begin, seg.cusp_end);
    cusps_used.insert(seg.cusp_begin);
    cusps_used.insert(seg.cusp_end);
    // count solutions on both sides of the segment midpoint by brute force
    const std::size_t k = seg.image.size() / 2;
    const Point2 a = seg.image[k - 1], b = seg.image[k + 1], m = seg.image[k];
    const double tx = b[0] - a[0], tz = b[1] - a[1], tn = std::hypot(tx, tz);
    const double d = 0.01;
    const auto s1 = test::brute_force_planar_solutions(p, m[0] - d * tz / tn, m[1] + d * tx / tn, 500);
    const auto s2 = test::brute_force_planar_solutions(p, m[0] + d * tz / tn, m[1] - d * tx / tn, 500);
    EXPECT_EQ(std::max(s1.size(), s2.size()), 4u) << "BS" << seg.id;
    EXPECT_EQ(std::min(s1.size(), s2.size()), 2u) << "BS" << seg.id;
  }
  EXPECT_EQ(ids, (std::set<int>{1, 2, 3, 4}));
  EXPECT_EQ(cusps_used.size(), 4u);
}

TEST(Singular, OuterCurveImageIsExternal) {
  const auto& s = example_analysis();
  int internal = 0, external = 0;
  for (const BoundaryCurveImage& c : s.boundary.curves) (c.internal ? internal : external)++;
  EXPECT_EQ(internal, 1);
  EXPECT_EQ(external, 1);
}

TEST(Singular, NonCuspidalRobotHasNoCusps) {
  // r2 = 0 with orthogonal axes
  const RobotParams p = RobotParams::orthogonal_robot(1.0, 2.0, 1.5, 0.0);
  const SingularitySet s = analyze_singularities(p, 256);
  EXPECT_TRUE(s.cusps.empty());
}

TEST(Singular, WristLinesAppearWhenTheElbowCanFold) {
  // d4 > d3 with r3 = 0: theta3 = +-acos(-d3 / d4) collapses onto the first axis
  const RobotParams p = RobotParams::orthogonal_robot(1.0, 0.5, 1.5, 0.7);
  const SingularitySet s = analyze_singularities(p, 256);
  int lines = 0;
  for (const auto& c : s.curves) {
    if (c.kind != CurveKind::WristLine) continue;
    ++lines;
    for (const Point2& q : c.points) EXPECT_NEAR(det_jacobian(p, q[0], q[1]), 0.0, 1e-12);
  }
  EXPECT_EQ(lines, 2);
}

TEST(Singular, WindingNumberOfASquare) {
  const std::vector<Point2> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(winding_number(sq, {0.5, 0.5}), 1);
  EXPECT_EQ(winding_number(sq, {1.5, 0.5}), 0);
  std::vector<Point2> rev(sq.rbegin(), sq.rend());
  EXPECT_EQ(winding_number(rev, {0.5, 0.5}), -1);
}
