#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace cuspidal;

namespace {

// Random robot satisfying simplifying rule k (1..7).
RobotParams rule_robot(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(0.2, 3.0), off(0.1, 2.0), ang(0.3, 2.8);
  RobotParams p = RobotParams::orthogonal_robot(1.0, len(rng), len(rng), off(rng), off(rng));
  switch (k) {
    case 1: p.alpha2 = 0.0; break;
    case 2: p.alpha3 = 0.0; break;
    case 3: p.d2 = 0.0; p.alpha2 = ang(rng); break;
    case 4: p.d3 = 0.0; p.alpha3 = ang(rng); break;
    case 5: p.alpha3 = ang(rng); p.r2 = 0.0; p.r3 = 0.0; break;
    case 6: p.r2 = 0.0; break;
    case 7: {
      std::uniform_real_distribution<double> frac(0.1, 0.9);
      p.r3 = 0.0;
      p.d3 = frac(rng);
      const double kk = p.r2 / (p.d2 - p.d3);
      p.d4 = p.d3 * std::sqrt(1 + kk * kk) * (1.05 + frac(rng));
      break;
    }
  }
  return p;
}

}  // namespace

TEST(Classify, RuleGeneratorsMatchTheirRule) {
  std::mt19937_64 rng(41);
  for (int k = 1; k <= 7; ++k) {
    for (int s = 0; s < 5; ++s) {
      const auto rules = check_simplifying_conditions(rule_robot(k, rng));
      EXPECT_NE(std::find(rules.begin(), rules.end(), k), rules.end()) << "rule " << k;
    }
  }
  EXPECT_TRUE(check_simplifying_conditions(test::example_robot()).empty());
}

TEST(Classify, SimplifyingRulesGiveNoCusps) {
  std::mt19937_64 rng(42);
  for (int k = 1; k <= 7; ++k) {
    for (int s = 0; s < 5; ++s) {
      const RobotParams p = rule_robot(k, rng);
      EXPECT_EQ(count_cusps_numeric(p), 0) << "rule " << k << " d3 " << p.d3 << " d4 " << p.d4 << " r2 " << p.r2;
      const ClassificationResult r = classify(p);
      EXPECT_EQ(r.verdict, Verdict::NonCuspidal);
      EXPECT_EQ(r.method, ClassifyMethod::Rule);
    }
  }
}

TEST(Classify, ClosedFormAgreesWithNumericCount) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> len(0.2, 3.0), off(0.05, 2.0);
  int compared = 0;
  while (compared < 60) {
    const RobotParams p = RobotParams::orthogonal_robot(1.0, len(rng), len(rng), off(rng));
    const double eps = 1e-3;
    const double c1 = c1_value(1.0, p.d3, p.r2);
    if (std::abs(p.d4 - c1) < eps || std::abs(p.d3 - 1.0) < eps) continue;
    if (p.d3 < 1.0 && std::abs(p.d4 - *bifurcation_value(2, p.d3, p.r2)) < eps) continue;
    const Verdict v = is_cuspidal_closed_form(p);
    ASSERT_NE(v, Verdict::Indeterminate);
    EXPECT_EQ(v == Verdict::Cuspidal, count_cusps_numeric(p) > 0) << "d3 " << p.d3 << " d4 " << p.d4 << " r2 " << p.r2;
    ++compared;
  }
}

TEST(Classify, CountChangesAcrossTransitionSurfaces) {
  // just below and above C1 at a fixed (d3, r2)
  const double d3 = 2.0, r2 = 1.0;
  const double c1 = c1_value(1.0, d3, r2);
  EXPECT_EQ(count_cusps_numeric(RobotParams::orthogonal_robot(1, d3, 0.97 * c1, r2)), 0);
  EXPECT_GT(count_cusps_numeric(RobotParams::orthogonal_robot(1, d3, 1.03 * c1, r2)), 0);
  // across C2 for d3 < 1
  const double d3b = 0.5, r2b = 0.5;
  const double c2 = *bifurcation_value(2, d3b, r2b);
  EXPECT_GT(count_cusps_numeric(RobotParams::orthogonal_robot(1, d3b, 0.97 * c2, r2b)), 0);
  EXPECT_EQ(count_cusps_numeric(RobotParams::orthogonal_robot(1, d3b, 1.03 * c2, r2b)), 0);
}

TEST(Classify, ExampleRobotIsCuspidalWithFourCusps) {
  const ClassificationResult r = classify(test::example_robot());
  EXPECT_EQ(r.verdict, Verdict::Cuspidal);
  EXPECT_EQ(r.cusp_count, 4);
  ASSERT_TRUE(r.closed_form.has_value());
  EXPECT_EQ(*r.closed_form, Verdict::Cuspidal);
  EXPECT_TRUE(r.anomalies.empty());
}

TEST(Classify, OffsetWristRobotHasEightCusps) {
  const RobotParams p = RobotParams::orthogonal_robot(1.0, 0.91, 0.94, 0.3, 0.9);
  EXPECT_EQ(count_cusps_numeric(p, 512), 8);
  EXPECT_EQ(classify(p).verdict, Verdict::Cuspidal);
}

TEST(Classify, ScaleInvariance) {
  const RobotParams p = test::example_robot();
  EXPECT_EQ(count_cusps_numeric(p.scaled(7.0)), count_cusps_numeric(p));
  EXPECT_EQ(is_cuspidal_closed_form(p.scaled(0.2)), is_cuspidal_closed_form(p));
}

TEST(Classify, ClosedFormPreconditions) {
  RobotParams p = test::example_robot();
  p.r3 = 0.5;
  EXPECT_THROW(is_cuspidal_closed_form(p), Error);
  p = test::example_robot();
  p.alpha2 = 1.0;
  EXPECT_THROW(is_cuspidal_closed_form(p), Error);
  EXPECT_THROW(bifurcation_value(5, 1.0, 1.0), Error);
  EXPECT_FALSE(bifurcation_value(3, 0.5, 1.0).has_value());
  // inside the band the verdict is withheld
  const double c1 = c1_value(1.0, 2.0, 1.0);
  EXPECT_EQ(is_cuspidal_closed_form(RobotParams::orthogonal_robot(1, 2.0, c1, 1.0)), Verdict::Indeterminate);
}

TEST(Classify, CoarseAtlasDomainsAreConsistent) {
  const Atlas a = atlas_scan(1.0, 0.0, {0.2, 3.0}, {0.2, 3.0}, 12);
  ASSERT_EQ(a.counts.size(), 144u);
  int cells = 0;
  for (const AtlasDomain& d : a.domains) {
    cells += d.cells;
    EXPECT_TRUE(d.cusp_count == 0 || d.cusp_count == 2 || d.cusp_count == 4);
  }
  EXPECT_EQ(cells, 144);
  for (int j = 0; j < a.ny; ++j)
    for (int i = 0; i < a.nx; ++i)
      EXPECT_EQ(a.count_at(i, j), count_cusps_numeric(atlas_robot(a.d3_at(i), a.d4_at(j), 1.0, 0.0)));
}
