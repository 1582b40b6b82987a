#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cuspidal/config.hpp"
#include "cuspidal/ik.hpp"
#include "cuspidal/model.hpp"

namespace cuspidal {

using Point2 = std::array<double, 2>;

enum class CurveKind {
  Regular,    // zero set of the regular part of det J; folds and cusps live here
  WristLine,  // theta3 = +-acos(-d3/d4): a whole line collapsing to one workspace point
};

struct SingularityCurve {
  std::vector<Point2> points;  // (theta2, theta3), wrapped to (-pi, pi]
  bool closed = true;
  std::string label;
  CurveKind kind = CurveKind::Regular;
};

struct CuspPoint {
  double rho = 0, z = 0;
  double theta2 = 0, theta3 = 0;
  double t = 0;            // tan(theta3 / 2)
  int multiplicity = 0;    // root cluster multiplicity of the inverse quartic at (rho, z)
  bool confirmed = false;  // triple-root test passed
  bool verifiable = true;  // false when the quartic elimination degenerates
  int curve = -1;
  double position = 0;     // fractional sample index along the curve
  double speed_ratio = 0;  // |d(rho,z)/ds| / median along the curve
};

struct CuspDetection {
  std::vector<CuspPoint> cusps;
  std::vector<Point2> fold_backs;  // (rho, z) of stationary points on a doubly covered arc
  std::vector<std::string> anomalies;
};

struct BoundaryCurveImage {
  int curve = -1;
  std::vector<Point2> image;  // (rho, z)
  bool internal = false;
  int votes_internal = 0;
  int votes_external = 0;
};

/// Piece of an internal boundary between two consecutive cusps (BS_j).
struct BoundarySegment {
  int id = 0;  // 1-based
  int curve = -1;
  int cusp_begin = -1;  // indices into the cusp list, -1 for a cusp-free closed curve
  int cusp_end = -1;
  std::vector<Point2> joint;  // (theta2, theta3)
  std::vector<Point2> image;  // (rho, z)
};

struct WorkspaceBoundary {
  std::vector<BoundaryCurveImage> curves;
  std::vector<BoundarySegment> segments;
};

struct SingularitySet {
  std::vector<SingularityCurve> curves;
  WorkspaceBoundary boundary;
  std::vector<CuspPoint> cusps;
  std::vector<Point2> fold_backs;
  std::vector<std::string> anomalies;
  bool constant_sign = false;
  int grid_n = 0;
};

namespace detail {

inline Point2 wrap2(double a, double b) { return {wrap_angle(a), wrap_angle(b)}; }

/// b - a on the torus, componentwise shortest.
inline Point2 torus_delta(const Point2& a, const Point2& b) {
  return {angle_diff(a[0], b[0]), angle_diff(a[1], b[1])};
}

inline double sgn(double v) { return v >= 0.0 ? 1.0 : -1.0; }

/// Newton projection onto g = 0 along the gradient.
inline Point2 project_to_curve(const RobotParams& p, Point2 q, int iters = 8) {
  for (int k = 0; k < iters; ++k) {
    const double g = singular_function(p, q[0], q[1]);
    const auto gr = singular_gradient(p, q[0], q[1]);
    const double n2 = gr[0] * gr[0] + gr[1] * gr[1];
    if (n2 == 0.0) break;
    const double s = g / n2;
    q = wrap2(q[0] - s * gr[0], q[1] - s * gr[1]);
    if (std::abs(s) * std::sqrt(n2) < 1e-16) break;
  }
  return q;
}

/// Local image kinematics of a point on the regular singular curve.
struct CurveFrame {
  Point2 tangent{};    // unit tangent of g = 0 in joint space (orientation fixed by caller)
  Point2 velocity{};   // d(rho, z) along the tangent
  Point2 direction{};  // unit vector spanning the image of d(rho, z) (rank one on the curve)
  double rho = 0, z = 0;
  bool valid = false;
};

inline CurveFrame curve_frame(const RobotParams& p, const Point2& q, double orientation) {
  CurveFrame f;
  const PlanarEval e = planar_eval(p, q[0], q[1]);
  const double rho = e.rho();
  f.rho = rho;
  f.z = e.z;
  const auto gr = singular_gradient(p, q[0], q[1]);
  const double gn = std::hypot(gr[0], gr[1]);
  if (gn == 0.0 || rho <= 1e-12) return f;
  f.tangent = {-orientation * gr[1] / gn, orientation * gr[0] / gn};
  const double rho2 = (e.X * e.X2 + e.Y * e.Y2) / rho;
  const double rho3 = (e.X * e.X3 + e.Y * e.Y3) / rho;
  f.velocity = {rho2 * f.tangent[0] + rho3 * f.tangent[1], e.z2 * f.tangent[0] + e.z3 * f.tangent[1]};
  const double n2 = std::hypot(rho2, e.z2), n3 = std::hypot(rho3, e.z3);
  if (n2 >= n3 && n2 > 0.0) {
    f.direction = {rho2 / n2, e.z2 / n2};
  } else if (n3 > 0.0) {
    f.direction = {rho3 / n3, e.z3 / n3};
  } else {
    return f;
  }
  f.valid = true;
  return f;
}

inline double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Point2& a) { return std::hypot(a[0], a[1]); }

/// Signed image speed: velocity projected on a reference image direction.
inline double signed_speed(const RobotParams& p, const Point2& q, double orientation,
                           const Point2& ref_direction, Point2* direction_out = nullptr) {
  const CurveFrame f = curve_frame(p, q, orientation);
  if (!f.valid) return 0.0;
  Point2 d = f.direction;
  if (dot(d, ref_direction) < 0.0) d = {-d[0], -d[1]};
  if (direction_out) *direction_out = d;
  return dot(f.velocity, d);
}

}  // namespace detail

/// Contours of the regular singular function on the periodic (theta2, theta3)
/// grid, chained into closed curves; crossings refined on grid edges. For
/// orthogonal robots without r3 the wrist lines theta3 = +-acos(-d3/d4)
/// (present when d3 <= d4) are appended as separate curves.
inline std::vector<SingularityCurve> trace_singularity_curves(
    const RobotParams& p, int grid_n, const Tolerances& tol = default_tolerances()) {
  if (grid_n < 8) throw Error(ErrorKind::Precondition, "grid_n too small");
  const int n = grid_n;
  const double h = kTwoPi / n;
  auto node = [&](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };

  std::vector<double> G(static_cast<std::size_t>(n) * n);
  double gscale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = singular_function(p, -kPi + i * h, -kPi + j * h);
      G[node(i, j)] = v;
      gscale = std::max(gscale, std::abs(v));
    }
  if (gscale == 0.0) return {};
  const double gtol = tol.trace_refine * gscale;

  // edge id: 2 * node + dir, dir 0 along theta2 (i -> i+1), 1 along theta3
  auto edge_id = [&](int i, int j, int dir) { return 2 * node(i, j) + dir; };
  auto crosses = [&](int i, int j, int dir) {
    const double a = G[node(i, j)];
    const double b = dir == 0 ? G[node(i + 1, j)] : G[node(i, j + 1)];
    return detail::sgn(a) != detail::sgn(b);
  };

  const std::size_t ne = 2 * static_cast<std::size_t>(n) * n;
  std::vector<std::array<int, 2>> adj(ne, {-1, -1});
  auto link = [&](int e1, int e2) {
    auto put = [&](int a, int b) {
      if (adj[a][0] < 0) adj[a][0] = b;
      else adj[a][1] = b;
    };
    put(e1, e2);
    put(e2, e1);
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // corners c0=(i,j) c1=(i+1,j) c2=(i+1,j+1) c3=(i,j+1)
      const std::array<int, 4> e{edge_id(i, j, 0), edge_id(i + 1, j, 1), edge_id(i, j + 1, 0),
                                 edge_id(i, j, 1)};
      const std::array<bool, 4> x{crosses(i, j, 0), crosses(i + 1, j, 1), crosses(i, j + 1, 0),
                                  crosses(i, j, 1)};
      const int cnt = x[0] + x[1] + x[2] + x[3];
      if (cnt == 2) {
        int a = -1, b = -1;
        for (int k = 0; k < 4; ++k)
          if (x[k]) (a < 0 ? a : b) = e[k];
        link(a, b);
      } else if (cnt == 4) {
        const double gc = singular_function(p, -kPi + (i + 0.5) * h, -kPi + (j + 0.5) * h);
        if (detail::sgn(gc) == detail::sgn(G[node(i, j)])) {
          link(e[0], e[1]);  // around c1
          link(e[2], e[3]);  // around c3
        } else {
          link(e[3], e[0]);  // around c0
          link(e[1], e[2]);  // around c2
        }
      }
    }
  }

  auto crossing_point = [&](int eid) -> Point2 {
    const int nd = eid / 2, dir = eid % 2;
    const int i = nd / n, j = nd % n;
    const double t2 = -kPi + i * h, t3 = -kPi + j * h;
    auto at = [&](double lam) {
      return dir == 0 ? Point2{t2 + lam * h, t3} : Point2{t2, t3 + lam * h};
    };
    double lo = 0.0, hi = 1.0;
    double flo = G[nd];
    double fhi = dir == 0 ? G[node(i + 1, j)] : G[node(i, j + 1)];
    double lam = 0.5;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      lam = (lo * fhi - hi * flo) / (fhi - flo);  // regula falsi, Illinois variant
      if (!(lam > lo && lam < hi)) lam = 0.5 * (lo + hi);
      const Point2 q = at(lam);
      const double f = singular_function(p, q[0], q[1]);
      if (std::abs(f) <= gtol * 1e-3 || hi - lo < 1e-16) break;
      if (detail::sgn(f) == detail::sgn(flo)) {
        lo = lam;
        flo = f;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = lam;
        fhi = f;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    const Point2 q = at(lam);
    return detail::wrap2(q[0], q[1]);
  };

  std::vector<SingularityCurve> curves;
  std::vector<char> seen(ne, 0);
  for (std::size_t e0 = 0; e0 < ne; ++e0) {
    if (seen[e0] || adj[e0][0] < 0) continue;
    SingularityCurve c;
    int prev = -1, cur = static_cast<int>(e0);
    bool closed = false;
    while (true) {
      seen[cur] = 1;
      c.points.push_back(crossing_point(cur));
      int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
      if (adj[cur][0] == prev && adj[cur][1] == prev) next = -1;
      if (next < 0) break;
      if (next == static_cast<int>(e0)) {
        closed = true;
        break;
      }
      if (seen[next]) break;
      prev = cur;
      cur = next;
    }
    c.closed = closed;
    c.kind = CurveKind::Regular;
    if (c.points.size() >= 3) curves.push_back(std::move(c));
  }
  for (std::size_t k = 0; k < curves.size(); ++k) curves[k].label = "S" + std::to_string(k + 1);

  if (p.has_wrist_factor() && p.d3 <= p.d4) {
    const double th = std::acos(std::clamp(-p.d3 / p.d4, -1.0, 1.0));
    std::vector<double> lines{th};
    if (std::abs(wrap_angle(-th) - wrap_angle(th)) > 1e-12) lines.push_back(-th);
    int k = 1;
    for (double t3 : lines) {
      SingularityCurve c;
      c.kind = CurveKind::WristLine;
      c.closed = true;
      c.label = "L" + std::to_string(k++);
      for (int i = 0; i < n; ++i) c.points.push_back(detail::wrap2(-kPi + i * h, t3));
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

namespace detail {

struct Bracket {
  Point2 a, b;
  double orientation;
  Point2 ref;  // image direction aligned at a
  double position;
};

inline Point2 lerp_torus(const Point2& a, const Point2& b, double lam) {
  const Point2 d = torus_delta(a, b);
  return wrap2(a[0] + lam * d[0], a[1] + lam * d[1]);
}

/// Orientation (+1/-1) making the gradient-based tangent agree with the
/// chord from a to b.
inline double orientation_along(const RobotParams& p, const Point2& q, const Point2& a,
                                const Point2& b) {
  const auto gr = singular_gradient(p, q[0], q[1]);
  const Point2 chord = torus_delta(a, b);
  const double d = -gr[1] * chord[0] + gr[0] * chord[1];
  return d >= 0.0 ? 1.0 : -1.0;
}

/// Newton on {g = 0, signed image speed = 0} with a frozen image direction.
inline bool polish_cusp(const RobotParams& p, Point2& q, double orientation, Point2 ref,
                        double gscale, double vscale) {
  Point2 x = q;
  for (int it = 0; it < 30; ++it) {
    Point2 dref = ref;
    const double s0 = signed_speed(p, x, orientation, ref, &dref);
    ref = dref;
    const double g0 = singular_function(p, x[0], x[1]);
    const auto gr = singular_gradient(p, x[0], x[1]);
    const double hstep = 1e-7;
    const double s2 = (signed_speed(p, {x[0] + hstep, x[1]}, orientation, ref) -
                       signed_speed(p, {x[0] - hstep, x[1]}, orientation, ref)) /
                      (2 * hstep);
    const double s3 = (signed_speed(p, {x[0], x[1] + hstep}, orientation, ref) -
                       signed_speed(p, {x[0], x[1] - hstep}, orientation, ref)) /
                      (2 * hstep);
    const double f0 = g0 / gscale, f1 = s0 / vscale;
    const double a = gr[0] / gscale, b = gr[1] / gscale, c = s2 / vscale, d = s3 / vscale;
    const double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) return false;
    const double dx = (d * f0 - b * f1) / det;
    const double dy = (-c * f0 + a * f1) / det;
    x = wrap2(x[0] - dx, x[1] - dy);
    if (torus_delta(q, x)[0] * torus_delta(q, x)[0] + torus_delta(q, x)[1] * torus_delta(q, x)[1] >
        0.05 * 0.05)
      return false;
    if (std::hypot(dx, dy) < 1e-15) break;
  }
  q = x;
  return true;
}

// True when the image of the curve just past q retraces the image just before
// it: a stationary point of a doubly covered arc. A cusp instead separates its
// two branches by about (arc length)^(3/2).
inline bool image_retraces(const RobotParams& p, const Point2& q, double delta = 0.02) {
  const auto gr = singular_gradient(p, q[0], q[1]);
  const double gn = std::hypot(gr[0], gr[1]);
  if (!(gn > 0.0)) return false;
  const Point2 tan{-gr[1] / gn, gr[0] / gn};
  auto image = [&](double s) {
    const Point2 x = project_to_curve(p, wrap2(q[0] + s * tan[0], q[1] + s * tan[1]), 20);
    const PlanarEval e = planar_eval(p, x[0], x[1]);
    return Point2{e.rho(), e.z};
  };
  const Point2 back = image(-delta), here = image(0.0);
  const double reach = std::hypot(back[0] - here[0], back[1] - here[1]);
  if (!(reach > 0.0)) return false;
  auto gap = [&](double s) {
    const Point2 f = image(s);
    return std::hypot(f[0] - back[0], f[1] - back[1]);
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 4.0 * delta;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo), f1 = gap(x1), f2 = gap(x2);
  for (int it = 0; it < 100; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = gap(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = gap(x2);
    }
  }
  return std::min(f1, f2) < 1e-6 * reach;
}

}  // namespace detail

/// Cusps along the regular singular curves: points where the image velocity
/// of the curve vanishes. Each candidate is bracketed by a sign change of
/// the signed image speed (near misses are resampled), polished by Newton on
/// {g = 0, speed = 0}, then confirmed by the triple-root test of the inverse
/// quartic at its image.
inline CuspDetection detect_cusps(const RobotParams& p, const std::vector<SingularityCurve>& curves,
                                  const Tolerances& tol = default_tolerances()) {
  CuspDetection out;
  const double gscale = singular_function_scale(p, 64);

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const SingularityCurve& curve = curves[ci];
    if (curve.kind != CurveKind::Regular) continue;
    const auto& pts = curve.points;
    const int m = static_cast<int>(pts.size());
    if (m < 4) continue;

    std::vector<double> orient(m), speed(m), sigma(m);
    std::vector<Point2> dir(m);
    std::vector<char> valid(m);
    for (int k = 0; k < m; ++k) {
      const Point2& prev = pts[(k - 1 + m) % m];
      const Point2& next = pts[(k + 1) % m];
      orient[k] = detail::orientation_along(p, pts[k], prev, next);
      const detail::CurveFrame f = detail::curve_frame(p, pts[k], orient[k]);
      valid[k] = f.valid;
      speed[k] = detail::norm(f.velocity);
      dir[k] = f.direction;
      if (k > 0 && detail::dot(dir[k], dir[k - 1]) < 0.0) dir[k] = {-dir[k][0], -dir[k][1]};
      sigma[k] = detail::dot(f.velocity, dir[k]);
    }
    std::vector<double> sorted = speed;
    std::nth_element(sorted.begin(), sorted.begin() + m / 2, sorted.end());
    const double median = sorted[m / 2];
    if (!(median > 0.0)) continue;

    std::vector<detail::Bracket> brackets;
    auto pair_sigma = [&](int k, int k1, double& sa, double& sb) {
      Point2 d1 = dir[k1];
      if (detail::dot(d1, dir[k]) < 0.0) d1 = {-d1[0], -d1[1]};
      sa = sigma[k];
      sb = detail::dot(detail::curve_frame(p, pts[k1], orient[k1]).velocity, d1);
    };
    std::vector<char> bracketed(m, 0);
    for (int k = 0; k < m; ++k) {
      const int k1 = (k + 1) % m;
      if (!valid[k] || !valid[k1]) continue;
      if (orient[k] != orient[k1]) continue;
      double sa, sb;
      pair_sigma(k, k1, sa, sb);
      if ((sa > 0.0) != (sb > 0.0)) {
        brackets.push_back({pts[k], pts[k1], orient[k], dir[k], static_cast<double>(k)});
        bracketed[k] = bracketed[k1] = 1;
      }
    }
    // near misses: a local speed minimum without a sign change may hide a
    // close pair of cusps between samples
    for (int k = 0; k < m; ++k) {
      const int km = (k - 1 + m) % m, kp = (k + 1) % m;
      if (!valid[k] || bracketed[k] || bracketed[km]) continue;
      if (!(speed[k] <= speed[km] && speed[k] <= speed[kp])) continue;
      if (speed[k] > 0.05 * median) continue;
      const int sub = 64;
      Point2 prevq = pts[km];
      Point2 prevdir = dir[k];
      double prevs = detail::signed_speed(p, prevq, orient[k], prevdir, &prevdir);
      for (int s = 1; s <= 2 * sub; ++s) {
        const Point2 base = s <= sub ? detail::lerp_torus(pts[km], pts[k], double(s) / sub)
                                     : detail::lerp_torus(pts[k], pts[kp], double(s - sub) / sub);
        const Point2 q = detail::project_to_curve(p, base);
        Point2 d = prevdir;
        const double sv = detail::signed_speed(p, q, orient[k], prevdir, &d);
        if ((sv > 0.0) != (prevs > 0.0)) {
          brackets.push_back({prevq, q, orient[k], prevdir, k - 1 + s / double(sub)});
        }
        prevq = q;
        prevs = sv;
        prevdir = d;
      }
    }

    for (const detail::Bracket& br : brackets) {
      Point2 a = br.a, b = br.b, ref = br.ref;
      double sa = detail::signed_speed(p, a, br.orientation, ref, &ref);
      for (int it = 0; it < 60; ++it) {
        const Point2 mid = detail::project_to_curve(p, detail::lerp_torus(a, b, 0.5));
        Point2 dm = ref;
        const double sm = detail::signed_speed(p, mid, br.orientation, ref, &dm);
        if ((sm > 0.0) == (sa > 0.0)) {
          a = mid;
          sa = sm;
          ref = dm;
        } else {
          b = mid;
        }
        const Point2 d = detail::torus_delta(a, b);
        if (std::hypot(d[0], d[1]) < 1e-14) break;
      }
      Point2 q = detail::project_to_curve(p, detail::lerp_torus(a, b, 0.5));
      Point2 qp = q;
      if (detail::polish_cusp(p, qp, br.orientation, ref, gscale, median)) q = qp;

      const detail::CurveFrame f = detail::curve_frame(p, q, br.orientation);
      // the half-plane image folds over where the curve meets the first
      // axis (rho = 0); the speed sign flips there without a cusp
      if (!f.valid || f.rho <= 1e-6 * p.length_scale()) continue;
      const double ratio = detail::norm(f.velocity) / median;
      if (ratio > tol.cusp_velocity_ratio) continue;

      CuspPoint cp;
      cp.theta2 = q[0];
      cp.theta3 = q[1];
      cp.rho = f.rho;
      cp.z = f.z;
      cp.t = std::tan(0.5 * q[1]);
      cp.curve = static_cast<int>(ci);
      cp.position = br.position;
      cp.speed_ratio = ratio;

      bool dup = false;
      for (const CuspPoint& o : out.cusps) {
        if (torus_distance2(o.theta2, o.theta3, cp.theta2, cp.theta3) <= tol.cusp_merge) dup = true;
      }
      if (dup) continue;
      if (detail::image_retraces(p, q)) {
        out.fold_backs.push_back({cp.rho, cp.z});
        continue;
      }

      try {
        const QuarticPoly qp4 = ik_coefficients(p, IkTarget::planar(cp.rho, cp.z));
        const double radius = tol.triple_root_factor * tol.root_cluster * std::max(1.0, std::abs(cp.t));
        cp.multiplicity = root_multiplicity_at(qp4, cp.t, radius);
        cp.confirmed = cp.multiplicity >= 3;
        if (!cp.confirmed) {
          out.anomalies.push_back("cusp candidate at (rho=" + std::to_string(cp.rho) +
                                  ", z=" + std::to_string(cp.z) +
                                  ") failed the triple-root test (multiplicity " +
                                  std::to_string(cp.multiplicity) + ")");
        }
      } catch (const Error&) {
        cp.verifiable = false;
        cp.confirmed = false;
      }
      out.cusps.push_back(cp);
    }
  }
  std::sort(out.cusps.begin(), out.cusps.end(), [](const CuspPoint& a, const CuspPoint& b) {
    return a.curve != b.curve ? a.curve < b.curve : a.position < b.position;
  });
  return out;
}

/// Signed area of a polyline loop via a point-in-loop winding count.
inline int winding_number(const std::vector<Point2>& loop, const Point2& c) {
  double total = 0.0;
  const std::size_t m = loop.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Point2& a = loop[k];
    const Point2& b = loop[(k + 1) % m];
    const double a1 = std::atan2(a[1] - c[1], a[0] - c[0]);
    const double a2 = std::atan2(b[1] - c[1], b[0] - c[0]);
    total += angle_diff(a1, a2);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

/// Maps the regular curves into the (rho, z) half-plane, cuts them at their
/// cusps and classifies each piece as internal or external from
/// inverse-solution counts on both sides. Internal pieces become the segments
/// BS_j, numbered by angle around the internal boundary centroid.
inline WorkspaceBoundary workspace_boundary(const RobotParams& p,
                                            const std::vector<SingularityCurve>& curves,
                                            const std::vector<CuspPoint>& cusps,
                                            const Tolerances& tol = default_tolerances()) {
  WorkspaceBoundary wb;
  const double delta = 1e-3 * p.length_scale();

  // +1 internal, -1 external, 0 no vote: IK counts on both sides of the image
  auto side_vote = [&](const SingularityCurve& c, int k) {
    const int m = static_cast<int>(c.points.size());
    const Point2& prev = c.points[(k - 1 + m) % m];
    const Point2& next = c.points[(k + 1) % m];
    const detail::CurveFrame f =
        detail::curve_frame(p, c.points[k], detail::orientation_along(p, c.points[k], prev, next));
    const double sp = detail::norm(f.velocity);
    if (!f.valid || sp == 0.0) return 0;
    const Point2 nrm{-f.velocity[1] / sp, f.velocity[0] / sp};
    try {
      const int ca = ik_count(p, f.rho + delta * nrm[0], f.z + delta * nrm[1], tol);
      const int cb = ik_count(p, f.rho - delta * nrm[0], f.z - delta * nrm[1], tol);
      return std::min(ca, cb) == 0 ? -1 : 1;
    } catch (const Error&) {
      return 0;
    }
  };
  auto add_point = [&](BoundarySegment& s, const Point2& q) {
    s.joint.push_back(q);
    const PlanarEval e = planar_eval(p, q[0], q[1]);
    s.image.push_back({e.rho(), e.z});
  };

  // each curve is cut at its cusps; every piece is voted on separately, so a
  // curve can contribute both to the internal and the external boundary
  std::vector<BoundarySegment> segs;
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const SingularityCurve& c = curves[ci];
    if (c.kind != CurveKind::Regular) continue;
    BoundaryCurveImage img;
    img.curve = static_cast<int>(ci);
    for (const Point2& q : c.points) {
      const PlanarEval e = planar_eval(p, q[0], q[1]);
      img.image.push_back({e.rho(), e.z});
    }
    const int m = static_cast<int>(c.points.size());
    std::vector<int> on;
    for (std::size_t k = 0; k < cusps.size(); ++k)
      if (cusps[k].curve == img.curve) on.push_back(static_cast<int>(k));
    std::sort(on.begin(), on.end(),
              [&](int a, int b) { return cusps[a].position < cusps[b].position; });

    struct Piece {
      int first, last;  // sample index range, last may exceed m (wraps)
      int cb, ce;
    };
    std::vector<Piece> pieces;
    if (on.empty()) {
      pieces.push_back({0, m - 1, -1, -1});
    } else {
      for (std::size_t k = 0; k < on.size(); ++k) {
        const CuspPoint& c0 = cusps[on[k]];
        const CuspPoint& c1 = cusps[on[(k + 1) % on.size()]];
        const int first = static_cast<int>(std::floor(c0.position)) + 1;
        int last = static_cast<int>(std::floor(c1.position));
        if (on.size() == 1 || last < first) last += m;
        pieces.push_back({first, last, on[k], on[(k + 1) % on.size()]});
      }
    }
    for (const Piece& pc : pieces) {
      const int len = pc.last - pc.first + 1;
      int vin = 0, vout = 0;
      const int votes = std::min(5, std::max(1, len - 2));
      for (int v = 0; v < votes && len > 0; ++v) {
        const int k = pc.first + ((2 * v + 1) * len) / (2 * votes);
        const int vote = side_vote(c, ((k % m) + m) % m);
        if (vote > 0) ++vin;
        if (vote < 0) ++vout;
      }
      img.votes_internal += vin;
      img.votes_external += vout;
      if (vin <= vout) continue;
      BoundarySegment s;
      s.curve = img.curve;
      s.cusp_begin = pc.cb;
      s.cusp_end = pc.ce;
      if (pc.cb >= 0) add_point(s, {cusps[pc.cb].theta2, cusps[pc.cb].theta3});
      for (int idx = pc.first; idx <= pc.last; ++idx) add_point(s, c.points[((idx % m) + m) % m]);
      if (pc.ce >= 0) add_point(s, {cusps[pc.ce].theta2, cusps[pc.ce].theta3});
      segs.push_back(std::move(s));
    }
    img.internal = img.votes_internal > img.votes_external;
    wb.curves.push_back(std::move(img));
  }
  // number by angle of the middle sample around the centroid
  double cr = 0, cz = 0;
  std::size_t cnt = 0;
  for (const auto& s : segs)
    for (const auto& q : s.image) {
      cr += q[0];
      cz += q[1];
      ++cnt;
    }
  if (cnt > 0) {
    cr /= cnt;
    cz /= cnt;
  }
  std::vector<double> ang(segs.size());
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Point2& mid = segs[k].image[segs[k].image.size() / 2];
    ang[k] = std::atan2(mid[1] - cz, mid[0] - cr);
  }
  std::vector<std::size_t> order(segs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
  for (std::size_t k = 0; k < order.size(); ++k) {
    BoundarySegment s = segs[order[k]];
    s.id = static_cast<int>(k) + 1;
    wb.segments.push_back(std::move(s));
  }
  return wb;
}

/// Full singularity analysis: curves, cusps and boundary; internal curves are
/// relabelled first (S1, ...), external ones after.
inline SingularitySet analyze_singularities(const RobotParams& p, int grid_n,
                                            const Tolerances& tol = default_tolerances()) {
  SingularitySet s;
  s.grid_n = grid_n;
  std::vector<SingularityCurve> curves = trace_singularity_curves(p, grid_n, tol);
  s.constant_sign = curves.empty();
  CuspDetection det = detect_cusps(p, curves, tol);
  WorkspaceBoundary wb = workspace_boundary(p, curves, det.cusps, tol);

  // reorder regular curves: internal first
  std::vector<int> order;
  for (const auto& img : wb.curves)
    if (img.internal) order.push_back(img.curve);
  for (const auto& img : wb.curves)
    if (!img.internal) order.push_back(img.curve);
  for (std::size_t k = 0; k < curves.size(); ++k)
    if (curves[k].kind != CurveKind::Regular) order.push_back(static_cast<int>(k));
  std::vector<int> remap(curves.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) remap[order[k]] = static_cast<int>(k);
  int reg = 1;
  for (int old : order) {
    SingularityCurve c = curves[old];
    if (c.kind == CurveKind::Regular) c.label = "S" + std::to_string(reg++);
    s.curves.push_back(std::move(c));
  }
  for (auto& cp : det.cusps) cp.curve = remap[cp.curve];
  for (auto& img : wb.curves) img.curve = remap[img.curve];
  for (auto& seg : wb.segments) seg.curve = remap[seg.curve];
  std::stable_sort(wb.curves.begin(), wb.curves.end(),
                   [](const auto& a, const auto& b) { return a.curve < b.curve; });
  // cusp indices referenced by segments must follow the cusp reordering
  std::vector<int> cusp_order(det.cusps.size());
  std::iota(cusp_order.begin(), cusp_order.end(), 0);
  std::stable_sort(cusp_order.begin(), cusp_order.end(), [&](int a, int b) {
    return det.cusps[a].curve != det.cusps[b].curve ? det.cusps[a].curve < det.cusps[b].curve
                                                    : det.cusps[a].position < det.cusps[b].position;
  });
  std::vector<int> cusp_remap(det.cusps.size());
  for (std::size_t k = 0; k < cusp_order.size(); ++k) {
    cusp_remap[cusp_order[k]] = static_cast<int>(k);
    s.cusps.push_back(det.cusps[cusp_order[k]]);
  }
  for (auto& seg : wb.segments) {
    if (seg.cusp_begin >= 0) seg.cusp_begin = cusp_remap[seg.cusp_begin];
    if (seg.cusp_end >= 0) seg.cusp_end = cusp_remap[seg.cusp_end];
  }
  s.boundary = std::move(wb);
  s.fold_backs = std::move(det.fold_backs);
  s.anomalies = std::move(det.anomalies);
  return s;
}

}  // namespace cuspidal
