#pragma once

#include <array>
#include <random>

#include "cuspidal/cuspidal.hpp"

namespace cuspidal::test {

// Reference robot of the cuspidal study: d2 = 1, d3 = 2, d4 = 1.5, r2 = 1.
inline RobotParams example_robot() { return RobotParams::orthogonal_robot(1.0, 2.0, 1.5, 1.0, 0.0); }

// Printed solutions at P(rho = 2.5, z = 0.5), rounded to 0.1 rad.
inline const std::array<JointConfig, 4>& printed_solutions() {
  static const std::array<JointConfig, 4> q = {JointConfig(-1.8, -2.8, 1.9), JointConfig(-0.9, -0.7, 2.5),
                                               JointConfig(-2.9, -3.0, -0.2), JointConfig(0.2, -0.3, -1.9)};
  return q;
}

// Closest computed solution to a reference configuration.
inline const IkSolution* closest(const IkSolutionSet& s, const JointConfig& ref) {
  const IkSolution* best = nullptr;
  double bd = 1e300;
  for (const IkSolution& sol : s.solutions) {
    const double d = torus_distance(sol.q, ref);
    if (d < bd) {
      bd = d;
      best = &sol;
    }
  }
  return best;
}

inline double max_joint_error(const JointConfig& a, const JointConfig& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(angle_diff(a[i], b[i])));
  return m;
}

// Orthogonal robot with random lengths and a random r3 (zero half the time).
inline RobotParams random_robot(std::mt19937_64& rng, bool mixed_r3 = true) {
  std::uniform_real_distribution<double> len(0.2, 3.0), off(0.0, 2.0), coin(0.0, 1.0);
  RobotParams p = RobotParams::orthogonal_robot(1.0, len(rng), len(rng), off(rng), 0.0);
  if (mixed_r3 && coin(rng) < 0.5) p.r3 = off(rng);
  return p;
}

inline JointConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-kPi, kPi);
  return JointConfig(a(rng), a(rng), a(rng));
}

// Solutions of (rho, z)(theta2, theta3) = target found without the quartic:
// every cell of an n x n torus grid where both residual components change
// sign seeds a 2x2 Newton solve; converged points are deduplicated.
inline std::vector<Point2> brute_force_planar_solutions(const RobotParams& p, double rho, double z, int n) {
  const double h = kTwoPi / n;
  auto F = [&](double t2, double t3) {
    const PlanarEval e = planar_eval(p, t2, t3);
    return std::array<double, 2>{e.R() - rho * rho, e.z - z};
  };
  std::vector<std::array<double, 2>> g(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[i * n + j] = F(-kPi + i * h, -kPi + j * h);
  auto sign_change = [&](int i, int j, int c) {
    bool pos = false, neg = false;
    for (int di = 0; di < 2; ++di)
      for (int dj = 0; dj < 2; ++dj) {
        const double v = g[((i + di) % n) * n + (j + dj) % n][c];
        pos |= v >= 0;
        neg |= v <= 0;
      }
    return pos && neg;
  };
  std::vector<Point2> out;
  const double scale = p.length_scale();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!sign_change(i, j, 0) || !sign_change(i, j, 1)) continue;
      double t2 = -kPi + (i + 0.5) * h, t3 = -kPi + (j + 0.5) * h;
      bool ok = false;
      for (int it = 0; it < 30; ++it) {
        const PlanarEval e = planar_eval(p, t2, t3);
        const double f0 = e.R() - rho * rho, f1 = e.z - z;
        if (std::hypot(f0 / (scale * scale), f1 / scale) < 1e-13) {
          ok = true;
          break;
        }
        const double a = e.R2(), b = e.R3(), c = e.z2, d = e.z3;
        const double det = a * d - b * c;
        if (det == 0.0) break;
        t2 -= (d * f0 - b * f1) / det;
        t3 -= (-c * f0 + a * f1) / det;
      }
      if (!ok) continue;
      const Point2 s{wrap_angle(t2), wrap_angle(t3)};
      bool dup = false;
      for (const Point2& o : out) dup |= torus_distance2(o[0], o[1], s[0], s[1]) < 1e-6;
      if (!dup) out.push_back(s);
    }
  }
  return out;
}

// Distance from X = (rho, z) to the internal boundary, measured on the true
// fold curve: the nearest traced interval is re-projected onto the zero set
// and searched by golden section.
inline double ws1_distance(const RobotParams& p, const WorkspaceBoundary& wb, const Point2& X) {
  auto image_dist = [&](const Point2& q) {
    const PlanarEval e = planar_eval(p, q[0], q[1]);
    return std::hypot(e.rho() - X[0], e.z - X[1]);
  };
  double best = 1e300;
  for (const BoundarySegment& seg : wb.segments) {
    const auto& J = seg.joint;
    if (J.size() < 2) continue;
    std::size_t k0 = 0;
    double d0 = 1e300;
    for (std::size_t k = 0; k < J.size(); ++k) {
      const double d = image_dist(J[k]);
      if (d < d0) {
        d0 = d;
        k0 = k;
      }
    }
    best = std::min(best, d0);
    // a few intervals either side: traced curves may repeat a sample at a grid node
    for (std::size_t a = k0 > 3 ? k0 - 3 : 0; a < std::min(k0 + 3, J.size() - 1); ++a) {
      auto f = [&](double lam) {
        return image_dist(detail::project_to_curve(p, detail::lerp_torus(J[a], J[a + 1], lam), 20));
      };
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double lo = 0.0, hi = 1.0;
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - g * (hi - lo);
          f1 = f(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + g * (hi - lo);
          f2 = f(x2);
        }
      }
      best = std::min({best, f1, f2});
    }
  }
  return best;
}

}  // namespace cuspidal::test
