#pragma once

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "cuspidal/config.hpp"
#include "cuspidal/error.hpp"
#include "cuspidal/ik.hpp"
#include "cuspidal/model.hpp"
#include "cuspidal/singular.hpp"
#include "cuspidal/topo.hpp"

namespace cuspidal {

enum class PathFrame { RhoZ, Xyz };

inline const char* to_string(PathFrame f) { return f == PathFrame::RhoZ ? "rho-z" : "xyz"; }

/// Piecewise-linear workspace path. Waypoints in the rho-z frame live in the
/// half-plane y = 0 (x = rho).
struct WorkspacePath {
  PathFrame frame = PathFrame::RhoZ;
  std::vector<CartesianPoint> waypoints;

  static WorkspacePath rho_z(const std::vector<Point2>& pts) {
    WorkspacePath w;
    w.frame = PathFrame::RhoZ;
    for (const Point2& q : pts) w.waypoints.push_back({q[0], 0.0, q[1]});
    return w;
  }
  static WorkspacePath xyz(std::vector<CartesianPoint> pts) {
    WorkspacePath w;
    w.frame = PathFrame::Xyz;
    w.waypoints = std::move(pts);
    return w;
  }

  void validate() const {
    if (waypoints.size() < 2) throw Error(ErrorKind::InvalidInput, "a path needs at least 2 waypoints");
    for (const CartesianPoint& c : waypoints) {
      if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z))
        throw Error(ErrorKind::InvalidInput, "path waypoints must be finite");
      if (frame == PathFrame::RhoZ && c.x < 0.0)
        throw Error(ErrorKind::InvalidInput, "rho must be non-negative");
    }
  }

  double length() const {
    double l = 0.0;
    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k)
      l += (waypoints[k + 1].vec() - waypoints[k].vec()).norm();
    return l;
  }

  /// Point at arc length s, clamped to [0, length].
  CartesianPoint at(double s) const {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
      const Eigen::Vector3d a = waypoints[k].vec(), b = waypoints[k + 1].vec();
      const double l = (b - a).norm();
      if (s <= acc + l || k + 2 == waypoints.size()) {
        const double t = l > 0.0 ? std::clamp((s - acc) / l, 0.0, 1.0) : 0.0;
        const Eigen::Vector3d v = a + t * (b - a);
        return {v[0], v[1], v[2]};
      }
      acc += l;
    }
    return waypoints.back();
  }

  WorkspacePath reversed() const {
    WorkspacePath w = *this;
    std::reverse(w.waypoints.begin(), w.waypoints.end());
    return w;
  }
};

enum class LiftStatus { Feasible, Blocked, Stalled };

inline const char* to_string(LiftStatus s) {
  switch (s) {
    case LiftStatus::Feasible: return "feasible";
    case LiftStatus::Blocked: return "blocked";
    case LiftStatus::Stalled: return "stalled";
  }
  return "unknown";
}

struct LiftSample {
  double s = 0;
  JointConfig q;
  double det = 0;
};

struct LiftResult {
  LiftStatus status = LiftStatus::Feasible;
  std::vector<LiftSample> trajectory;
  double s_block = 0;            // arc length where the lift stopped
  CartesianPoint block_point;    // path point there
  JointConfig block_config;      // nearest singular configuration
  double min_abs_det = 0;
  double max_tracking_error = 0;
  double max_joint_jump = 0;

  bool feasible() const { return status == LiftStatus::Feasible; }
  const JointConfig& end() const { return trajectory.back().q; }
};

/// Largest joint-space move accepted in one continuation step.
inline constexpr double kMaxJointStep = 0.05;

namespace detail {

inline Eigen::Vector3d joint_vec(const JointConfig& q) { return {q.theta1, q.theta2, q.theta3}; }

inline JointConfig joint_add(const JointConfig& q, const Eigen::Vector3d& d) {
  return {q.theta1 + d[0], q.theta2 + d[1], q.theta3 + d[2]};
}

inline Eigen::Vector3d joint_delta(const JointConfig& a, const JointConfig& b) {
  return {angle_diff(a.theta1, b.theta1), angle_diff(a.theta2, b.theta2), angle_diff(a.theta3, b.theta3)};
}

/// Newton on f(q) = X. Returns false unless the residual drops below `res_tol`
/// within `iters` steps.
inline bool newton_to(const RobotParams& p, JointConfig& q, const CartesianPoint& X, double res_tol,
                      int iters) {
  for (int it = 0; it <= iters; ++it) {
    const CartesianPoint f = forward_kinematics(p, q);
    const Eigen::Vector3d r(f.x - X.x, f.y - X.y, f.z - X.z);
    if (r.norm() < res_tol) return true;
    if (it == iters) break;
    Eigen::FullPivLU<Matrix3> lu(jacobian(p, q));
    if (!lu.isInvertible()) return false;
    const Eigen::Vector3d dq = lu.solve(r);
    if (!dq.allFinite() || dq.norm() > 0.5) return false;
    q = joint_add(q, -dq);
  }
  return false;
}

/// Nearest point of det J = 0 in the (theta2, theta3) plane by Newton along
/// the gradient.
inline JointConfig project_singular(const RobotParams& p, JointConfig q) {
  constexpr double h = 1e-7;
  for (int it = 0; it < 20; ++it) {
    const double d = det_jacobian(p, q);
    const double g2 = (det_jacobian(p, q.theta2 + h, q.theta3) - det_jacobian(p, q.theta2 - h, q.theta3)) / (2 * h);
    const double g3 = (det_jacobian(p, q.theta2, q.theta3 + h) - det_jacobian(p, q.theta2, q.theta3 - h)) / (2 * h);
    const double gg = g2 * g2 + g3 * g3;
    if (gg <= 0.0) break;
    const double step = d / gg;
    q = JointConfig(q.theta1, q.theta2 - step * g2, q.theta3 - step * g3);
    if (std::abs(step) * std::sqrt(gg) < 1e-15) break;
  }
  return q;
}

}  // namespace detail

/// Continuation of one inverse branch along the path: Euler predictor,
/// Newton corrector, step halving. Stops as blocked when the steps starve
/// next to a singular configuration whose image is the current path point.
inline LiftResult lift_path(const RobotParams& p, const WorkspacePath& path, const JointConfig& q_start,
                            const Tolerances& tol = default_tolerances()) {
  path.validate();
  const double scale = p.length_scale();
  const double dscale = det_scale(p);
  const double L = path.length();
  const double res_tol = tol.newton_residual * scale;

  JointConfig q = q_start;
  const CartesianPoint X0 = path.at(0.0);
  {
    const CartesianPoint f = forward_kinematics(p, q);
    const double e = std::sqrt((f.x - X0.x) * (f.x - X0.x) + (f.y - X0.y) * (f.y - X0.y) + (f.z - X0.z) * (f.z - X0.z));
    if (e > tol.tracking * scale)
      throw Error(ErrorKind::Precondition, "start configuration does not reach the path start");
    if (!detail::newton_to(p, q, X0, res_tol, tol.newton_max_iter)) {
      throw Error(ErrorKind::Precondition, "start configuration is singular");
    }
  }

  LiftResult r;
  r.trajectory.push_back({0.0, q, det_jacobian(p, q)});
  r.min_abs_det = std::abs(r.trajectory.back().det);
  if (L == 0.0) return r;

  const double h_max = L / 50.0;
  const double h_min = tol.min_step_fraction * L;
  double s = 0.0, h = L / 200.0;
  double det_prev = r.trajectory.back().det;
  while (s < L) {
    const double s1 = std::min(L, s + h);
    const CartesianPoint Xa = path.at(s), Xb = path.at(s1);
    bool ok = false;
    JointConfig qn = q;
    Eigen::FullPivLU<Matrix3> lu(jacobian(p, q));
    if (lu.isInvertible()) {
      const Eigen::Vector3d dq = lu.solve(Eigen::Vector3d(Xb.x - Xa.x, Xb.y - Xa.y, Xb.z - Xa.z));
      if (dq.allFinite() && dq.norm() <= kMaxJointStep) {
        qn = detail::joint_add(q, dq);
        ok = detail::newton_to(p, qn, Xb, res_tol, tol.newton_max_iter);
      }
    }
    double dn = 0.0, jump = 0.0;
    if (ok) {
      dn = det_jacobian(p, qn);
      jump = detail::joint_delta(q, qn).norm();
      // a sign change of det J or a long jump means Newton switched branch
      ok = jump <= kMaxJointStep && dn != 0.0 && (dn > 0) == (det_prev > 0);
    }
    if (ok) {
      q = qn;
      s = s1;
      det_prev = dn;
      r.trajectory.push_back({s, q, dn});
      r.min_abs_det = std::min(r.min_abs_det, std::abs(dn));
      r.max_joint_jump = std::max(r.max_joint_jump, jump);
      const CartesianPoint f = forward_kinematics(p, q);
      r.max_tracking_error = std::max(r.max_tracking_error, std::sqrt((f.x - Xb.x) * (f.x - Xb.x) +
                                                                      (f.y - Xb.y) * (f.y - Xb.y) +
                                                                      (f.z - Xb.z) * (f.z - Xb.z)));
      h = std::min(2.0 * h, h_max);
      continue;
    }
    h *= 0.5;
    if (h >= h_min) continue;

    // starvation: a fold if a singular configuration next to q maps onto
    // the path point
    r.s_block = s;
    r.block_point = Xa;
    const JointConfig qs = detail::project_singular(p, q);
    r.block_config = qs;
    const CartesianPoint fs = forward_kinematics(p, qs);
    const double img = std::sqrt((fs.x - Xa.x) * (fs.x - Xa.x) + (fs.y - Xa.y) * (fs.y - Xa.y) +
                                 (fs.z - Xa.z) * (fs.z - Xa.z));
    const bool singular_here = std::abs(det_jacobian(p, qs)) < tol.singular * dscale &&
                               detail::joint_delta(q, qs).norm() < 0.05 && img < 1e-3 * scale;
    r.status = singular_here ? LiftStatus::Blocked : LiftStatus::Stalled;
    return r;
  }
  return r;
}

struct BranchLift {
  JointConfig start;
  LiftResult lift;
};

struct FeasibilityReport {
  std::vector<BranchLift> forward;
  std::vector<BranchLift> reverse;

  int feasible_forward() const {
    return static_cast<int>(std::count_if(forward.begin(), forward.end(), [](const BranchLift& b) { return b.lift.feasible(); }));
  }
  int feasible_reverse() const {
    return static_cast<int>(std::count_if(reverse.begin(), reverse.end(), [](const BranchLift& b) { return b.lift.feasible(); }));
  }
  bool blocked_everywhere() const {
    auto blocked = [](const BranchLift& b) { return b.lift.status == LiftStatus::Blocked; };
    return !forward.empty() && !reverse.empty() && std::all_of(forward.begin(), forward.end(), blocked) &&
           std::all_of(reverse.begin(), reverse.end(), blocked);
  }
};

namespace detail {

inline std::vector<BranchLift> lift_all(const RobotParams& p, const WorkspacePath& path, const Tolerances& tol) {
  std::vector<BranchLift> out;
  const CartesianPoint X0 = path.at(0.0);
  const IkSolutionSet sols = inverse_kinematics(p, IkTarget::from_point(X0), tol);
  for (const IkSolution& s : sols.solutions) {
    if (s.near_coincident) continue;  // no regular branch starts on a singularity
    out.push_back({s.q, lift_path(p, path, s.q, tol)});
  }
  return out;
}

}  // namespace detail

/// Lifts the path from every inverse solution at its start, then the
/// reversed path from every solution at its end.
inline FeasibilityReport check_feasibility(const RobotParams& p, const WorkspacePath& path,
                                           const Tolerances& tol = default_tolerances()) {
  path.validate();
  FeasibilityReport rep;
  const IkSolutionSet s0 = inverse_kinematics(p, IkTarget::from_point(path.at(0.0)), tol);
  if (s0.empty()) throw Error(ErrorKind::Unreachable, "path start is outside the workspace");
  rep.forward = detail::lift_all(p, path, tol);
  const WorkspacePath back = path.reversed();
  const IkSolutionSet s1 = inverse_kinematics(p, IkTarget::from_point(back.at(0.0)), tol);
  if (!s1.empty()) rep.reverse = detail::lift_all(p, back, tol);
  return rep;
}

struct PostureChangePlan {
  bool found = false;
  std::string reason;              // why no plan exists
  int aspect = 0;
  int grid_n = 0;
  std::vector<JointConfig> joints;  // dense verified polyline
  std::vector<double> det;
  double min_abs_det = 0;
  double clearance = 0;             // |det J| threshold kept by smoothing
  std::vector<Point2> trace;        // (rho, z) image of the joints
  std::vector<CuspPoint> cusps;     // cusps tested for encirclement
  std::vector<int> winding;         // winding number of the trace around each cusp
  int encircled = 0;
};

struct PlannerOptions {
  int grid_n = 512;
  double penalty = 0.05;          // weight of det_scale / |det J| in the edge cost
  double clearance_fraction = 0.01;
  int dense_factor = 10;
  bool free_endpoints = false;    // skip the same-pose check
};

namespace detail {

/// Clearance and sign check along a straight (theta2, theta3) segment.
inline bool segment_clear(const RobotParams& p, const Point2& a, const Point2& b, double step, int sign,
                          double clearance) {
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const double d = det_jacobian(p, a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]));
    if (d * sign < clearance) return false;
  }
  return true;
}

}  // namespace detail

/// Non-singular joint path between two postures of one aspect: Dijkstra on
/// the aspect cells (8-connected without corner cutting) with a cost
/// favouring large |det J|, greedy shortcuts keeping a clearance, and dense
/// re-verification. The workspace trace is tested against the given cusps.
inline PostureChangePlan plan_posture_change(const RobotParams& p, const JointConfig& q_start,
                                             const JointConfig& q_goal, const std::vector<CuspPoint>& cusps,
                                             const PlannerOptions& opt = {},
                                             const Tolerances& tol = default_tolerances()) {
  PostureChangePlan plan;
  plan.grid_n = opt.grid_n;
  plan.cusps = cusps;
  const double scale = p.length_scale();
  if (!opt.free_endpoints) {
    const CartesianPoint a = forward_kinematics(p, q_start), b = forward_kinematics(p, q_goal);
    const double e = std::hypot(std::hypot(a.x, a.y) - std::hypot(b.x, b.y), a.z - b.z);
    if (e > 1e-6 * scale)
      throw Error(ErrorKind::Precondition, "start and goal do not reach the same workspace point");
  }
  const AspectMap m = compute_aspects(p, opt.grid_n);
  const double dscale = det_scale(p);
  const double d0 = det_jacobian(p, q_start), d1 = det_jacobian(p, q_goal);
  if (std::abs(d0) < tol.singular * dscale || std::abs(d1) < tol.singular * dscale)
    throw Error(ErrorKind::Precondition, "start or goal configuration is singular");
  const int a0 = m.aspect_of(p, q_start), a1 = m.aspect_of(p, q_goal);
  if (!a0 || !a1) throw Error(ErrorKind::Precondition, "start or goal lies in a singular cell");
  plan.aspect = a0;
  if (a0 != a1 || (d0 > 0) != (d1 > 0)) {
    plan.reason = "start and goal lie in different aspects; a posture change between them must cross a singularity";
    return plan;
  }
  const int sign = d0 > 0 ? 1 : -1;

  // Dijkstra over cells of the aspect
  const int nc = m.n * m.n;
  std::vector<double> cell_det(nc, 0.0);
  for (int c = 0; c < nc; ++c)
    if (m.label[c] == a0) {
      const Point2 cc = m.center(c);
      cell_det[c] = std::abs(det_jacobian(p, cc[0], cc[1]));
    }
  auto cell_in = [&](int c) { return c >= 0 && m.label[c] == a0; };
  auto cell_at = [&](int c, int di, int dj) {
    int i = c / m.n + di, j = c % m.n + dj;
    if (m.periodic) {
      i = (i + m.n) % m.n;
      j = (j + m.n) % m.n;
    } else if (i < 0 || j < 0 || i >= m.n || j >= m.n) {
      return -1;
    }
    return m.index(i, j);
  };
  int cs = m.cell_of(q_start.theta2, q_start.theta3), cg = m.cell_of(q_goal.theta2, q_goal.theta3);
  if (!cell_in(cs) || !cell_in(cg)) {
    // endpoint in a straddling cell: enter the graph at the nearest aspect cell
    auto nearest = [&](const JointConfig& q) {
      int best = -1;
      double bd = 1e300;
      const int c = m.cell_of(q.theta2, q.theta3);
      for (int di = -3; di <= 3; ++di)
        for (int dj = -3; dj <= 3; ++dj) {
          const int k = cell_at(c, di, dj);
          if (!cell_in(k)) continue;
          const Point2 cc = m.center(k);
          const double d = torus_distance2(cc[0], cc[1], q.theta2, q.theta3);
          if (d < bd) bd = d, best = k;
        }
      return best;
    };
    if (!cell_in(cs)) cs = nearest(q_start);
    if (!cell_in(cg)) cg = nearest(q_goal);
    if (cs < 0 || cg < 0) throw Error(ErrorKind::Precondition, "start or goal lies in a singular cell");
  }
  std::vector<double> dist(nc, std::numeric_limits<double>::infinity());
  std::vector<int> prev(nc, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[cs] = 0.0;
  pq.push({0.0, cs});
  const double h2 = m.h2(), h3 = m.h3();
  while (!pq.empty()) {
    const auto [dc, c] = pq.top();
    pq.pop();
    if (dc > dist[c]) continue;
    if (c == cg) break;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (!di && !dj) continue;
        const int k = cell_at(c, di, dj);
        if (!cell_in(k)) continue;
        if (di && dj && (!cell_in(cell_at(c, di, 0)) || !cell_in(cell_at(c, 0, dj)))) continue;
        const double len = std::hypot(di * h2, dj * h3);
        const double dm = 0.5 * (cell_det[c] + cell_det[k]);
        const double w = len * (1.0 + opt.penalty * dscale / std::max(dm, 1e-12 * dscale));
        if (dc + w < dist[k]) {
          dist[k] = dc + w;
          prev[k] = c;
          pq.push({dist[k], k});
        }
      }
  }
  if (!std::isfinite(dist[cg])) {
    plan.reason = "start and goal cells are not connected at resolution " + std::to_string(opt.grid_n) +
                  "; retry with a finer grid";
    return plan;
  }

  // unwrapped (theta2, theta3) polyline
  std::vector<int> cells;
  for (int c = cg; c >= 0; c = prev[c]) cells.push_back(c);
  std::reverse(cells.begin(), cells.end());
  std::vector<Point2> raw{{q_start.theta2, q_start.theta3}};
  auto append = [&](const Point2& q) {
    const Point2 d = detail::torus_delta(raw.back(), q);
    raw.push_back({raw.back()[0] + d[0], raw.back()[1] + d[1]});
  };
  for (int c : cells) append(m.center(c));
  append({q_goal.theta2, q_goal.theta3});

  // greedy shortcuts that keep the clearance
  plan.clearance = std::min({opt.clearance_fraction * dscale, 0.5 * std::abs(d0), 0.5 * std::abs(d1)});
  for (const Point2& q : raw)
    plan.clearance = std::min(plan.clearance, 0.999 * std::abs(det_jacobian(p, q[0], q[1])));
  const double step = 0.25 * std::min(h2, h3);
  std::vector<Point2> smooth{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t best = i + 1;
    for (std::size_t j = raw.size() - 1; j > i + 1; --j) {
      if (detail::segment_clear(p, raw[i], raw[j], step, sign, plan.clearance)) {
        best = j;
        break;
      }
    }
    smooth.push_back(raw[best]);
    i = best;
  }

  // dense polyline, theta1 linear in arc length
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < smooth.size(); ++k)
    total += std::hypot(smooth[k + 1][0] - smooth[k][0], smooth[k + 1][1] - smooth[k][1]);
  const double dt1 = angle_diff(q_start.theta1, q_goal.theta1);
  const double dense = std::min(h2, h3) / opt.dense_factor;
  double acc = 0.0;
  plan.min_abs_det = std::numeric_limits<double>::infinity();
  bool sign_ok = true;
  auto emit = [&](const Point2& q, double s) {
    const double t1 = q_start.theta1 + (total > 0.0 ? s / total : 0.0) * dt1;
    const JointConfig jc(t1, q[0], q[1]);
    const double d = det_jacobian(p, jc);
    plan.joints.push_back(jc);
    plan.det.push_back(d);
    plan.min_abs_det = std::min(plan.min_abs_det, std::abs(d));
    if (d * sign <= 0.0) sign_ok = false;
    const PlanarEval e = planar_eval(p, q[0], q[1]);
    plan.trace.push_back({e.rho(), e.z});
  };
  emit(smooth.front(), 0.0);
  for (std::size_t k = 0; k + 1 < smooth.size(); ++k) {
    const Point2 a = smooth[k], b = smooth[k + 1];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    const int n = std::max(1, static_cast<int>(std::ceil(len / dense)));
    for (int t = 1; t <= n; ++t) {
      const double f = static_cast<double>(t) / n;
      emit({a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])}, acc + f * len);
    }
    acc += len;
  }
  plan.joints.back() = q_goal;
  if (!sign_ok || !(plan.min_abs_det > 0.0)) {
    plan.reason = "verification found a singular configuration on the smoothed path";
    plan.joints.clear();
    return plan;
  }

  std::vector<Point2> loop = plan.trace;
  for (const CuspPoint& c : cusps) {
    const int w = winding_number(loop, {c.rho, c.z});
    plan.winding.push_back(w);
    if (w != 0) ++plan.encircled;
  }
  plan.found = true;
  return plan;
}

/// Horizontal chord across the region of largest IK count, extended past
/// the two internal boundary segments it crosses, that no branch can track
/// in either direction. Scans z levels outward from z = 0.
struct BlockedChord {
  bool found = false;
  WorkspacePath path;
  double z = 0;
  FeasibilityReport report;
};

inline BlockedChord find_blocked_chord(const RobotParams& p, int levels = 40,
                                       const Tolerances& tol = default_tolerances()) {
  BlockedChord out;
  const double reach = reach_bound(p);
  const int samples = 800;
  const double dr = reach / samples;
  auto count_at = [&](double rho, double z) {
    try {
      return ik_count(p, rho, z, tol);
    } catch (const Error&) {
      return -1;
    }
  };
  int top = 0;
  for (int k = 0; k <= samples; ++k) top = std::max(top, count_at(k * dr, 0.0));
  for (int lv = 0; lv <= 2 * levels; ++lv) {
    // 0, +1, -1, +2, -2, ... times reach / (2 levels)
    const int sgn = (lv % 2) ? 1 : -1;
    const double z = sgn * ((lv + 1) / 2) * reach / (2.0 * levels);
    std::vector<int> cnt(samples + 1);
    for (int k = 0; k <= samples; ++k) cnt[k] = count_at(k * dr, z);
    for (int k = 1; k <= samples; ++k) {
      if (cnt[k] != top || cnt[k - 1] >= top) continue;
      int e = k;
      while (e <= samples && cnt[e] == top) ++e;
      if (e > samples || k < 2) break;
      // extend a few samples past both crossings while staying in the lower count
      const int lo_count = cnt[k - 1];
      int a = k - 1, b = e;
      for (int t = 0; t < 8 && a > 0 && cnt[a - 1] == lo_count; ++t) --a;
      for (int t = 0; t < 8 && b < samples && cnt[b + 1] == cnt[e]; ++t) ++b;
      if (cnt[e] != lo_count || lo_count <= 0) {
        k = e;
        continue;
      }
      WorkspacePath w = WorkspacePath::rho_z({{a * dr, z}, {b * dr, z}});
      FeasibilityReport rep = check_feasibility(p, w, tol);
      if (rep.blocked_everywhere()) {
        out.found = true;
        out.path = std::move(w);
        out.z = z;
        out.report = std::move(rep);
        return out;
      }
      k = e;
    }
  }
  return out;
}

}  // namespace cuspidal
