#pragma once

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cuspidal/config.hpp"
#include "cuspidal/model.hpp"
#include "cuspidal/polynomial.hpp"

namespace cuspidal {

/// Target of the inverse model. R = x^2 + y^2 and Z = z^2; the quartic
/// depends on z only through Z whenever the first two axes are orthogonal.
struct IkTarget {
  double x = 0, y = 0, z = 0;

  double R() const { return x * x + y * y; }
  double Z() const { return z * z; }
  double rho() const { return std::hypot(x, y); }

  static IkTarget from_point(const CartesianPoint& p) { return {p.x, p.y, p.z}; }
  /// Point of the half-plane y = 0 at distance rho from the first axis.
  static IkTarget planar(double rho, double z) { return {rho, 0.0, z}; }
  CartesianPoint point() const { return {x, y, z}; }
};

struct IkSolution {
  JointConfig q;
  double det = 0.0;        // det J at q
  int aspect = -1;         // filled by topology routines
  int multiplicity = 1;    // root multiplicity of tan(theta3/2)
  bool near_coincident = false;
};

struct IkSolutionSet {
  CartesianPoint target;
  std::vector<IkSolution> solutions;
  int skipped_degenerate = 0;  // roots whose theta2 could not be recovered

  std::size_t size() const { return solutions.size(); }
  bool empty() const { return solutions.empty(); }
  bool any_near_coincident() const {
    return std::any_of(solutions.begin(), solutions.end(),
                       [](const IkSolution& s) { return s.near_coincident; });
  }
};

namespace detail {

inline bool near_zero(double v) { return std::abs(v) <= 1e-12; }

struct WristTerms {
  double a, b, w;  // P in frame 2 before theta2, plus (c + r2)
};

inline WristTerms wrist_terms(const RobotParams& p, double theta3) {
  const double ca3 = std::cos(p.alpha3), sa3 = std::sin(p.alpha3);
  const double c3 = std::cos(theta3), s3 = std::sin(theta3);
  return {p.d3 + c3 * p.d4, ca3 * s3 * p.d4 - sa3 * p.r3, sa3 * s3 * p.d4 + ca3 * p.r3 + p.r2};
}

}  // namespace detail

/// Quartic in t = tan(theta3 / 2) whose real roots are the theta3 values of
/// the inverse solutions at the target. Obtained by eliminating theta2 from
/// |P|^2 and z (linear in cos/sin theta2), imposing c2^2 + s2^2 = 1 and
/// applying the half-angle substitution.
inline QuarticPoly ik_coefficients(const RobotParams& p, const IkTarget& target) {
  const double sa2 = std::sin(p.alpha2);
  double ca2 = std::cos(p.alpha2);
  const double sa3 = std::sin(p.alpha3), ca3 = std::cos(p.alpha3);
  if (detail::near_zero(sa2)) {
    throw Error(ErrorKind::Degenerate, "first two axes parallel: theta2 elimination degenerates");
  }
  if (detail::near_zero(p.d2)) {
    throw Error(ErrorKind::Degenerate, "first two axes intersect: theta2 elimination degenerates");
  }
  const bool z_even = detail::near_zero(ca2);
  if (z_even) ca2 = 0.0;

  using poly::Coeffs;
  const Coeffs D{1.0, 0.0, 1.0};   // 1 + t^2
  const Coeffs C{1.0, 0.0, -1.0};  // cos(theta3) (1 + t^2)
  const Coeffs S{0.0, 2.0, 0.0};   // sin(theta3) (1 + t^2)
  auto lin = [&](double k0, double kc, double ks) {
    Coeffs out(3);
    for (int i = 0; i < 3; ++i) out[i] = k0 * D[i] + kc * C[i] + ks * S[i];
    return out;
  };

  const double d2 = p.d2, d3 = p.d3, d4 = p.d4, r2 = p.r2, r3 = p.r3;
  const double off = ca3 * r3 + r2;
  const double K0 = target.R() + target.Z() - d2 * d2 - d3 * d3 - d4 * d4 - sa3 * sa3 * r3 * r3 -
                    off * off;
  const Coeffs KD = lin(K0, -2.0 * d3 * d4, -2.0 * sa3 * r2 * d4);
  const Coeffs aD = lin(d3, d4, 0.0);
  const Coeffs bD = lin(-sa3 * r3, 0.0, ca3 * d4);
  const Coeffs wD = lin(off, 0.0, sa3 * d4);

  const Coeffs t1 = poly::multiply(KD, KD);
  Coeffs t2;
  if (z_even) {
    t2 = poly::multiply(D, D);
    for (double& v : t2) v *= target.Z();
  } else {
    Coeffs ez = lin(target.z, 0.0, 0.0);
    ez = poly::add(ez, wD, -ca2);
    t2 = poly::multiply(ez, ez);
  }
  const Coeffs t3 = poly::add(poly::multiply(aD, aD), poly::multiply(bD, bD));

  Coeffs out(5, 0.0);
  double magnitude = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double x1 = sa2 * sa2 * t1[i];
    const double x2 = 4.0 * d2 * d2 * t2[i];
    const double x3 = -4.0 * d2 * d2 * sa2 * sa2 * t3[i];
    out[i] = x1 + x2 + x3;
    magnitude = std::max({magnitude, std::abs(x1), std::abs(x2), std::abs(x3)});
  }
  // K0 itself is a difference of squared lengths; its rounding carries into KD^2
  const double k_abs = target.R() + target.Z() + d2 * d2 + d3 * d3 + d4 * d4 + sa3 * sa3 * r3 * r3 +
                       off * off + 2.0 * d3 * d4 + 2.0 * std::abs(sa3 * r2) * d4;
  magnitude = std::max(magnitude, 4.0 * sa2 * sa2 * k_abs * k_abs);
  QuarticPoly q{out[4], out[3], out[2], out[1], out[0]};
  q.noise = 32.0 * std::numeric_limits<double>::epsilon() * magnitude;
  if (q.max_abs() <= 1e-13 * magnitude) {
    throw Error(ErrorKind::Degenerate, "inverse kinematic polynomial vanishes identically");
  }
  return q;
}

namespace detail {

/// theta2 from theta3 by the linear system in (c2, s2). Returns false when
/// the wrist term vanishes or the pair violates c2^2 + s2^2 = 1.
inline bool back_substitute(const RobotParams& p, const IkTarget& target, double theta3,
                            double spurious_tol, double& theta2, bool& degenerate) {
  degenerate = false;
  const double sa2 = std::sin(p.alpha2);
  double ca2 = std::cos(p.alpha2);
  if (near_zero(ca2)) ca2 = 0.0;
  const WristTerms wt = wrist_terms(p, theta3);
  const double N = wt.a * wt.a + wt.b * wt.b;
  const double scale = p.length_scale();
  if (N <= 1e-20 * scale * scale) {
    degenerate = true;
    return false;
  }
  const double u = (target.R() + target.z * target.z - p.d2 * p.d2 - N - wt.w * wt.w) / (2.0 * p.d2);
  const double v = (target.z - ca2 * wt.w) / sa2;
  const double c2 = (wt.a * u + wt.b * v) / N;
  const double s2 = (wt.a * v - wt.b * u) / N;
  const double n2 = c2 * c2 + s2 * s2;
  if (std::abs(n2 - 1.0) > spurious_tol) return false;
  theta2 = std::atan2(s2, c2);
  return true;
}

inline double ik_residual(const RobotParams& p, const JointConfig& q, const CartesianPoint& X) {
  const CartesianPoint f = forward_kinematics(p, q);
  return std::sqrt((f.x - X.x) * (f.x - X.x) + (f.y - X.y) * (f.y - X.y) + (f.z - X.z) * (f.z - X.z));
}

inline JointConfig newton_polish(const RobotParams& p, JointConfig q, const CartesianPoint& X,
                                 int iters = 4) {
  double res = ik_residual(p, q, X);
  for (int it = 0; it < iters && res > 0.0; ++it) {
    const Matrix3 J = jacobian(p, q);
    Eigen::FullPivLU<Matrix3> lu(J);
    if (!lu.isInvertible()) break;
    const CartesianPoint f = forward_kinematics(p, q);
    const Eigen::Vector3d dq = lu.solve(Eigen::Vector3d(f.x - X.x, f.y - X.y, f.z - X.z));
    if (!dq.allFinite() || dq.norm() > 1e-2) break;
    const JointConfig nq(q.theta1 - dq[0], q.theta2 - dq[1], q.theta3 - dq[2]);
    const double nres = ik_residual(p, nq, X);
    if (!(nres < res)) break;
    q = nq;
    res = nres;
  }
  return q;
}

}  // namespace detail

/// All inverse solutions at (x, y, z). Ordered by ascending tan(theta3/2),
/// with a theta3 = pi solution (if any) last.
inline IkSolutionSet inverse_kinematics(const RobotParams& p, const IkTarget& target,
                                        const Tolerances& tol = default_tolerances()) {
  IkSolutionSet out;
  out.target = target.point();
  const QuarticPoly q = ik_coefficients(p, target);
  const int deg = q.degree();

  struct Candidate {
    double theta3;
    int multiplicity;
  };
  std::vector<Candidate> cands;
  if (deg >= 1) {
    for (const RootCluster& r : solve_quartic(q, tol)) cands.push_back({2.0 * std::atan(r.t), r.multiplicity});
  }
  if (deg < 4 || std::abs(q.a) <= 1e-10 * q.max_abs()) {
    cands.push_back({kPi, std::max(1, 4 - std::max(deg, 0))});
  }

  const CartesianPoint X = target.point();
  const double xnorm = X.norm();
  for (const Candidate& c : cands) {
    double theta2 = 0.0;
    bool degenerate = false;
    if (!detail::back_substitute(p, target, c.theta3, tol.spurious, theta2, degenerate)) {
      if (degenerate) ++out.skipped_degenerate;
      continue;
    }
    const PlanarEval e = planar_eval(p, theta2, c.theta3);
    double theta1 = 0.0;
    if (std::hypot(e.X, e.Y) > 0.0 && target.rho() > 0.0) {
      theta1 = std::atan2(target.y, target.x) - std::atan2(e.Y, e.X);
    }
    JointConfig sol(theta1, theta2, c.theta3);
    if (c.multiplicity == 1) sol = detail::newton_polish(p, sol, X);
    if (detail::ik_residual(p, sol, X) > tol.ik_residual * (1.0 + xnorm)) continue;
    IkSolution s;
    s.q = sol;
    s.det = det_jacobian(p, sol);
    s.multiplicity = c.multiplicity;
    s.near_coincident = c.multiplicity > 1;
    // a theta3 = pi candidate can duplicate a huge finite root
    bool dup = false;
    for (const IkSolution& o : out.solutions) {
      if (torus_distance(o.q, s.q) <= 1e-12) dup = true;
    }
    if (!dup) out.solutions.push_back(s);
  }
  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < out.solutions.size(); ++j) {
      if (torus_distance(out.solutions[i].q, out.solutions[j].q) <= tol.merge) {
        out.solutions[i].near_coincident = true;
        out.solutions[j].near_coincident = true;
      }
    }
  }
  return out;
}

inline IkSolutionSet inverse_kinematics(const RobotParams& p, double x, double y, double z,
                                        const Tolerances& tol = default_tolerances()) {
  return inverse_kinematics(p, IkTarget{x, y, z}, tol);
}

/// Number of inverse solutions counted with root multiplicity.
inline int ik_count(const RobotParams& p, double rho, double z,
                    const Tolerances& tol = default_tolerances()) {
  const IkSolutionSet s = inverse_kinematics(p, IkTarget::planar(rho, z), tol);
  int n = 0;
  for (const auto& sol : s.solutions) n += sol.multiplicity;
  return n;
}

}  // namespace cuspidal
