#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "cuspidal/error.hpp"

namespace cuspidal {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Calibrated twist angles: with these signs the zero set of det(J) is the
// zero set of the closed-form orthogonal determinant and the inverse model at
// (rho, z) = (2.5, 0.5) reproduces the textbook postures of the 3-R example.
inline constexpr double kDefaultAlpha2 = -kPi / 2.0;
inline constexpr double kDefaultAlpha3 = kPi / 2.0;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Signed shortest difference b - a on the circle.
inline double angle_diff(double a, double b) { return wrap_angle(b - a); }

struct JointRange {
  double lo = -kPi;
  double hi = kPi;
  bool contains(double a) const { return a >= lo && a <= hi; }
};

/// Geometry of a 3-R chain in modified Denavit-Hartenberg form with
/// alpha1 = d1 = r1 = 0. P sits at (d4, 0, 0) in frame 3.
struct RobotParams {
  double d2 = 1.0;
  double d3 = 0.0;
  double d4 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double alpha2 = kDefaultAlpha2;
  double alpha3 = kDefaultAlpha3;
  std::optional<std::array<JointRange, 3>> joint_limits;

  static bool is_right_angle(double a) {
    return std::abs(std::abs(wrap_angle(a)) - kPi / 2.0) <= 1e-12;
  }

  bool orthogonal() const { return is_right_angle(alpha2) && is_right_angle(alpha3); }

  /// Orthogonal with no offset along the last axis: det(J) factors as
  /// (d3 + c3 d4) times a regular part.
  bool has_wrist_factor() const { return is_right_angle(alpha3) && std::abs(r3) <= 1e-12; }

  /// Length used to make tolerances dimensionless.
  double length_scale() const {
    return std::abs(d2) + std::abs(d3) + std::abs(d4) + std::abs(r2) + std::abs(r3);
  }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(d2) || !finite(d3) || !finite(d4) || !finite(r2) || !finite(r3) ||
        !finite(alpha2) || !finite(alpha3)) {
      throw Error(ErrorKind::InvalidInput, "robot parameters must be finite");
    }
    if (d2 < 0.0 || d3 < 0.0 || d4 < 0.0) {
      throw Error(ErrorKind::InvalidInput, "link lengths d2, d3, d4 must be non-negative");
    }
    if (!(d4 > 0.0)) {
      throw Error(ErrorKind::InvalidInput, "d4 must be positive (P on the last joint axis)");
    }
    if (joint_limits) {
      for (const auto& r : *joint_limits) {
        if (!(r.lo < r.hi)) throw Error(ErrorKind::InvalidInput, "joint limit with lo >= hi");
      }
    }
  }

  /// All lengths multiplied by s; angles untouched.
  RobotParams scaled(double s) const {
    RobotParams q = *this;
    q.d2 *= s;
    q.d3 *= s;
    q.d4 *= s;
    q.r2 *= s;
    q.r3 *= s;
    return q;
  }

  /// Lengths divided by d2 (or by the total length when d2 vanishes).
  RobotParams normalized() const {
    const double s = d2 > 0.0 ? d2 : length_scale();
    return scaled(1.0 / s);
  }

  static RobotParams orthogonal_robot(double d2, double d3, double d4, double r2, double r3 = 0.0) {
    RobotParams p;
    p.d2 = d2;
    p.d3 = d3;
    p.d4 = d4;
    p.r2 = r2;
    p.r3 = r3;
    return p;
  }
};

/// Point of the joint-space torus, each angle kept in (-pi, pi].
struct JointConfig {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;

  JointConfig() = default;
  JointConfig(double t1, double t2, double t3)
      : theta1(wrap_angle(t1)), theta2(wrap_angle(t2)), theta3(wrap_angle(t3)) {}

  JointConfig normalized() const { return {theta1, theta2, theta3}; }
  double operator[](int i) const { return i == 0 ? theta1 : (i == 1 ? theta2 : theta3); }
  Eigen::Vector3d vec() const { return {theta1, theta2, theta3}; }
};

/// Geodesic distance on the flat 3-torus.
inline double torus_distance(const JointConfig& a, const JointConfig& b) {
  const double d1 = angle_diff(a.theta1, b.theta1);
  const double d2 = angle_diff(a.theta2, b.theta2);
  const double d3 = angle_diff(a.theta3, b.theta3);
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

/// Distance on the (theta2, theta3) torus only.
inline double torus_distance2(double a2, double a3, double b2, double b3) {
  const double d2 = angle_diff(a2, b2);
  const double d3 = angle_diff(a3, b3);
  return std::sqrt(d2 * d2 + d3 * d3);
}

inline bool torus_equal(const JointConfig& a, const JointConfig& b, double tol = 1e-12) {
  return torus_distance(a, b) <= tol;
}

struct CartesianPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double rho() const { return std::hypot(x, y); }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Eigen::Vector3d vec() const { return {x, y, z}; }
};

/// Values and first derivatives of the cross-section map
/// (theta2, theta3) -> (R = rho^2, z), plus the intermediate planar
/// coordinates (X, Y) of P in the frame rotated by theta1. Templated on the
/// scalar so derivatives can be taken by complex step.
template <class T>
struct PlanarEvalT {
  T X{}, Y{}, z{};
  T X2{}, Y2{}, z2{};  // d/dtheta2
  T X3{}, Y3{}, z3{};  // d/dtheta3
  // d/dtheta2 divided by the wrist factor (d3 + c3 d4); valid when the
  // robot has_wrist_factor().
  T X2r{}, Y2r{}, z2r{};
  T wrist{};  // d3 + c3 d4

  T R() const { return X * X + Y * Y; }
  double rho() const { return std::hypot(X, Y); }
  T R2() const { return T(2.0) * (X * X2 + Y * Y2); }
  T R3() const { return T(2.0) * (X * X3 + Y * Y3); }
  /// det(J) of the full 3x3 positional Jacobian.
  T det() const { return -(X * X2 + Y * Y2) * z3 + (X * X3 + Y * Y3) * z2; }
  /// det(J) with the wrist factor removed.
  T det_reduced() const { return -(X * X2r + Y * Y2r) * z3 + (X * X3 + Y * Y3) * z2r; }
};

using PlanarEval = PlanarEvalT<double>;

template <class T>
PlanarEvalT<T> planar_eval_t(const RobotParams& p, T theta2, T theta3) {
  using std::cos;
  using std::sin;
  const double ca2 = std::cos(p.alpha2), sa2 = std::sin(p.alpha2);
  const double ca3 = std::cos(p.alpha3), sa3 = std::sin(p.alpha3);
  const T c2 = cos(theta2), s2 = sin(theta2);
  const T c3 = cos(theta3), s3 = sin(theta3);

  // P expressed in frame 2 (before the theta2 rotation).
  const T a = p.d3 + c3 * p.d4;
  const T b = ca3 * s3 * p.d4 - sa3 * p.r3;
  const T c = sa3 * s3 * p.d4 + ca3 * p.r3;
  const T a3 = -s3 * p.d4;
  const T b3 = ca3 * c3 * p.d4;
  const T c3d = sa3 * c3 * p.d4;

  const T u = c2 * a - s2 * b;
  const T v = s2 * a + c2 * b;
  const T w = c + p.r2;
  const T u3 = c2 * a3 - s2 * b3;
  const T v3 = s2 * a3 + c2 * b3;

  PlanarEvalT<T> e;
  e.wrist = a;
  e.X = p.d2 + u;
  e.Y = ca2 * v - sa2 * w;
  e.z = sa2 * v + ca2 * w;
  e.X2 = -v;
  e.Y2 = ca2 * u;
  e.z2 = sa2 * u;
  e.X3 = u3;
  e.Y3 = ca2 * v3 - sa2 * c3d;
  e.z3 = sa2 * v3 + ca2 * c3d;
  e.X2r = -s2;
  e.Y2r = ca2 * c2;
  e.z2r = sa2 * c2;
  return e;
}

inline PlanarEval planar_eval(const RobotParams& p, double theta2, double theta3) {
  return planar_eval_t<double>(p, theta2, theta3);
}

inline CartesianPoint forward_kinematics(const RobotParams& p, const JointConfig& q) {
  const PlanarEval e = planar_eval(p, q.theta2, q.theta3);
  const double c1 = std::cos(q.theta1), s1 = std::sin(q.theta1);
  return {c1 * e.X - s1 * e.Y, s1 * e.X + c1 * e.Y, e.z};
}

using Matrix3 = Eigen::Matrix3d;

/// Analytic d(x, y, z)/d(theta1, theta2, theta3).
inline Matrix3 jacobian(const RobotParams& p, const JointConfig& q) {
  const PlanarEval e = planar_eval(p, q.theta2, q.theta3);
  const double c1 = std::cos(q.theta1), s1 = std::sin(q.theta1);
  Matrix3 J;
  J(0, 0) = -(s1 * e.X + c1 * e.Y);
  J(1, 0) = c1 * e.X - s1 * e.Y;
  J(2, 0) = 0.0;
  J(0, 1) = c1 * e.X2 - s1 * e.Y2;
  J(1, 1) = s1 * e.X2 + c1 * e.Y2;
  J(2, 1) = e.z2;
  J(0, 2) = c1 * e.X3 - s1 * e.Y3;
  J(1, 2) = s1 * e.X3 + c1 * e.Y3;
  J(2, 2) = e.z3;
  return J;
}

inline double det_jacobian(const RobotParams& p, double theta2, double theta3) {
  return planar_eval(p, theta2, theta3).det();
}

inline double det_jacobian(const RobotParams& p, const JointConfig& q) {
  return det_jacobian(p, q.theta2, q.theta3);
}

/// Closed-form determinant for orthogonal robots,
/// (d3 + c3 d4)(c2 (s3 d3 - c3 r2) + s3 d2), evaluated in the calibrated
/// twist convention (theta3 is mirrored when alpha3 = -pi/2).
inline double det_jacobian_orthogonal(const RobotParams& p, double theta2, double theta3) {
  if (!p.orthogonal()) {
    throw Error(ErrorKind::Precondition, "closed-form determinant requires an orthogonal robot");
  }
  const double t3 = std::sin(p.alpha3) > 0.0 ? theta3 : -theta3;
  const double c2 = std::cos(theta2);
  const double c3 = std::cos(t3), s3 = std::sin(t3);
  return (p.d3 + c3 * p.d4) * (c2 * (s3 * p.d3 - c3 * p.r2) + s3 * p.d2);
}

/// Function whose zero set is traced as the regular singularity locus: det(J)
/// itself, or det(J) / (d3 + c3 d4) when the wrist factor is present.
template <class T>
T singular_function_t(const RobotParams& p, T theta2, T theta3) {
  const PlanarEvalT<T> e = planar_eval_t<T>(p, theta2, theta3);
  return p.has_wrist_factor() ? e.det_reduced() : e.det();
}

inline double singular_function(const RobotParams& p, double theta2, double theta3) {
  return singular_function_t<double>(p, theta2, theta3);
}

/// Exact gradient of singular_function by complex step.
inline std::array<double, 2> singular_gradient(const RobotParams& p, double theta2, double theta3) {
  constexpr double h = 1e-30;
  using C = std::complex<double>;
  const C g2 = singular_function_t<C>(p, C(theta2, h), C(theta3, 0.0));
  const C g3 = singular_function_t<C>(p, C(theta2, 0.0), C(theta3, h));
  return {g2.imag() / h, g3.imag() / h};
}

/// Largest |det J| over a coarse grid of the (theta2, theta3) torus; used to
/// make determinant tolerances dimensionless.
inline double det_scale(const RobotParams& p, int n = 96) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double t2 = -kPi + kTwoPi * (i + 0.5) / n;
      const double t3 = -kPi + kTwoPi * (j + 0.5) / n;
      m = std::max(m, std::abs(det_jacobian(p, t2, t3)));
    }
  }
  return m > 0.0 ? m : 1.0;
}

inline double singular_function_scale(const RobotParams& p, int n = 96) {
  if (!p.has_wrist_factor()) return det_scale(p, n);
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double t2 = -kPi + kTwoPi * (i + 0.5) / n;
      const double t3 = -kPi + kTwoPi * (j + 0.5) / n;
      m = std::max(m, std::abs(singular_function(p, t2, t3)));
    }
  }
  return m > 0.0 ? m : 1.0;
}

/// Ratio det(J) / closed-form determinant, estimated at the configuration of
/// largest closed-form magnitude on a coarse grid.
inline double closed_form_calibration(const RobotParams& p) {
  double best = 0.0, ratio = 0.0;
  for (int i = 0; i < 24; ++i) {
    for (int j = 0; j < 24; ++j) {
      const double t2 = -kPi + kTwoPi * (i + 0.37) / 24;
      const double t3 = -kPi + kTwoPi * (j + 0.61) / 24;
      const double f = det_jacobian_orthogonal(p, t2, t3);
      if (std::abs(f) > best) {
        best = std::abs(f);
        ratio = det_jacobian(p, t2, t3) / f;
      }
    }
  }
  return ratio;
}

/// Maximum reach |P| over the torus, bounded analytically.
inline double reach_bound(const RobotParams& p) {
  return p.d2 + p.d3 + p.d4 + std::abs(p.r2) + std::abs(p.r3);
}

}  // namespace cuspidal
