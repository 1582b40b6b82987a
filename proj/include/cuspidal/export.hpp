#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "cuspidal/classify.hpp"
#include "cuspidal/config.hpp"
#include "cuspidal/ik.hpp"
#include "cuspidal/path.hpp"
#include "cuspidal/robot_io.hpp"
#include "cuspidal/singular.hpp"
#include "cuspidal/topo.hpp"

namespace cuspidal::io {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline Json tolerances_json(const Tolerances& t) {
  return {{"root_cluster", t.root_cluster},
          {"root_polish", t.root_polish},
          {"triple_root_factor", t.triple_root_factor},
          {"merge", t.merge},
          {"ik_residual", t.ik_residual},
          {"spurious", t.spurious},
          {"trace_refine", t.trace_refine},
          {"cusp_velocity_ratio", t.cusp_velocity_ratio},
          {"cusp_merge", t.cusp_merge},
          {"closed_form_band", t.closed_form_band},
          {"newton_residual", t.newton_residual},
          {"newton_max_iter", t.newton_max_iter},
          {"min_step_fraction", t.min_step_fraction},
          {"singular", t.singular},
          {"tracking", t.tracking}};
}

inline Json point_json(const Point2& p) { return Json::array({p[0], p[1]}); }
inline Json joint_json(const JointConfig& q) { return Json::array({q.theta1, q.theta2, q.theta3}); }

inline Json cusp_json(const CuspPoint& c) {
  return {{"rho", c.rho},         {"z", c.z},
          {"theta2", c.theta2},   {"theta3", c.theta3},
          {"t", c.t},             {"multiplicity", c.multiplicity},
          {"confirmed", c.confirmed}, {"verifiable", c.verifiable},
          {"curve", c.curve}};
}

inline Json classification_json(const ClassificationResult& r) {
  Json j = {{"verdict", to_string(r.verdict)},
            {"cusp_count", r.cusp_count},
            {"method", to_string(r.method)},
            {"matched_rules", r.matched_rules},
            {"anomalies", r.anomalies}};
  j["closed_form"] = r.closed_form ? Json(to_string(*r.closed_form)) : Json(nullptr);
  j["domain_id"] = r.domain_id ? Json(r.domain_id) : Json(nullptr);
  return j;
}

inline Json singularities_json(const SingularitySet& s) {
  Json curves = Json::array();
  for (std::size_t k = 0; k < s.curves.size(); ++k) {
    const SingularityCurve& c = s.curves[k];
    bool internal = false;
    for (const BoundaryCurveImage& b : s.boundary.curves)
      if (b.curve == static_cast<int>(k)) internal = b.internal;
    curves.push_back({{"id", k},
                      {"label", c.label},
                      {"kind", c.kind == CurveKind::Regular ? "regular" : "wrist_line"},
                      {"closed", c.closed},
                      {"points", c.points.size()},
                      {"boundary", internal ? "WS1" : "WS2"}});
  }
  Json segs = Json::array();
  for (const BoundarySegment& b : s.boundary.segments) {
    Json e = {{"id", b.id}, {"label", "BS" + std::to_string(b.id)}, {"curve", b.curve},
              {"cusp_begin", b.cusp_begin}, {"cusp_end", b.cusp_end}, {"points", b.image.size()}};
    if (!b.image.empty()) e["midpoint"] = point_json(b.image[b.image.size() / 2]);
    segs.push_back(e);
  }
  Json cusps = Json::array();
  for (const CuspPoint& c : s.cusps) cusps.push_back(cusp_json(c));
  return {{"grid_n", s.grid_n}, {"constant_sign", s.constant_sign}, {"curves", curves},
          {"segments", segs},   {"cusps", cusps},                    {"cusp_count", s.cusps.size()},
          {"fold_backs", s.fold_backs}, {"anomalies", s.anomalies}};
}

inline Json aspects_json(const AspectMap& m) {
  Json a = Json::array();
  for (int k = 1; k <= m.count; ++k) {
    const auto cells = std::count(m.label.begin(), m.label.end(), k);
    a.push_back({{"id", k}, {"label", "A" + std::to_string(k)}, {"det_sign", m.aspect_sign[k - 1]}, {"cells", cells}});
  }
  return {{"grid_n", m.n}, {"periodic", m.periodic}, {"count", m.count}, {"aspects", a}};
}

inline Json char_surfaces_json(const CharSurfaceSet& cs, int aspect_count) {
  Json s = Json::array();
  for (const CharSurface& c : cs.surfaces) {
    Json e = {{"aspect", c.aspect}, {"segment", c.segment},
              {"label", "CS" + std::to_string(c.aspect) + "," + std::to_string(c.segment)}, {"points", c.joint.size()}};
    if (!c.joint.empty()) {
      e["start"] = point_json(c.joint.front());
      e["end"] = point_json(c.joint.back());
    }
    s.push_back(e);
  }
  Json per = Json::array();
  for (int a = 1; a <= aspect_count; ++a) per.push_back(cs.count_for_aspect(a));
  return {{"surfaces", s}, {"per_aspect", per}, {"skipped", cs.skipped}};
}

inline Json partition_json(const RegionPartition& rp) {
  Json regions = Json::array();
  for (const WorkspaceRegion& r : rp.regions)
    regions.push_back({{"id", r.id}, {"ik_count", r.ik_count}, {"cells", r.cells}});
  Json basic = Json::array();
  for (const BasicRegion& b : rp.basic)
    basic.push_back({{"label", b.label()}, {"aspect", b.aspect}, {"cells", b.cells}, {"region", b.region},
                     {"vote_share", b.vote_share}});
  return {{"workspace_regions", regions}, {"basic_regions", basic}};
}

inline Json uniqueness_json(const std::vector<UniquenessDomain>& qu, const std::vector<InjectivityReport>& inj) {
  Json out = Json::array();
  for (std::size_t k = 0; k < qu.size(); ++k) {
    Json e = {{"id", qu[k].id},       {"label", "Qu" + std::to_string(qu[k].id)},
              {"aspect", qu[k].aspect}, {"description", qu[k].description},
              {"cells", qu[k].cells}, {"components", qu[k].components}};
    if (k < inj.size()) e["injectivity"] = {{"samples", inj[k].samples}, {"violations", inj[k].violations}};
    out.push_back(e);
  }
  return out;
}

inline Json feasible_json(const std::vector<FeasibleRegion>& wf) {
  Json out = Json::array();
  for (const FeasibleRegion& w : wf) {
    Json sl = Json::array();
    for (int b : w.slits) sl.push_back("BS" + std::to_string(b));
    out.push_back({{"id", w.id}, {"label", "Wf" + std::to_string(w.id)}, {"aspect", w.aspect}, {"cells", w.cells},
                   {"slits", sl}});
  }
  return out;
}

inline Json ik_json(const IkSolutionSet& s) {
  Json sols = Json::array();
  for (const IkSolution& q : s.solutions) {
    Json e = {{"theta1", q.q.theta1}, {"theta2", q.q.theta2}, {"theta3", q.q.theta3},
              {"det", q.det},         {"multiplicity", q.multiplicity}, {"near_coincident", q.near_coincident}};
    e["aspect"] = q.aspect > 0 ? Json(q.aspect) : Json(nullptr);
    sols.push_back(e);
  }
  return {{"target", {s.target.x, s.target.y, s.target.z}}, {"count", s.solutions.size()}, {"solutions", sols}};
}

inline Json lift_json(const BranchLift& b) {
  Json e = {{"start", joint_json(b.start)},
            {"status", to_string(b.lift.status)},
            {"min_abs_det", b.lift.min_abs_det},
            {"steps", b.lift.trajectory.size()}};
  if (b.lift.feasible()) {
    e["end"] = joint_json(b.lift.end());
  } else {
    e["s_block"] = b.lift.s_block;
    const CartesianPoint& c = b.lift.block_point;
    e["block_point"] = {c.x, c.y, c.z};
  }
  return e;
}

inline Json feasibility_json(const WorkspacePath& path, const FeasibilityReport& r) {
  Json f = Json::array(), b = Json::array();
  for (const BranchLift& l : r.forward) f.push_back(lift_json(l));
  for (const BranchLift& l : r.reverse) b.push_back(lift_json(l));
  return {{"frame", to_string(path.frame)},
          {"length", path.length()},
          {"forward", f},
          {"reverse", b},
          {"feasible_forward", r.feasible_forward()},
          {"feasible_reverse", r.feasible_reverse()},
          {"blocked_everywhere", r.blocked_everywhere()}};
}

inline Json plan_json(const PostureChangePlan& p) {
  Json j = {{"found", p.found}, {"aspect", p.aspect}, {"grid_n", p.grid_n}};
  if (!p.found) {
    j["reason"] = p.reason;
    return j;
  }
  j["points"] = p.joints.size();
  j["min_abs_det"] = p.min_abs_det;
  j["clearance"] = p.clearance;
  j["start"] = joint_json(p.joints.front());
  j["goal"] = joint_json(p.joints.back());
  Json w = Json::array();
  for (std::size_t k = 0; k < p.cusps.size(); ++k)
    w.push_back({{"rho", p.cusps[k].rho}, {"z", p.cusps[k].z}, {"winding", p.winding[k]}});
  j["cusp_winding"] = w;
  j["encircled_cusps"] = p.encircled;
  return j;
}

inline Json atlas_json(const Atlas& a) {
  Json d = Json::array();
  for (const AtlasDomain& dom : a.domains)
    d.push_back({{"id", dom.id}, {"cusp_count", dom.cusp_count}, {"cells", dom.cells},
                 {"sample_robot", {{"d2", 1.0}, {"d3", dom.sample_d3}, {"d4", dom.sample_d4}, {"r2", a.r2}, {"r3", a.r3}}}});
  return {{"r2", a.r2}, {"r3", a.r3}, {"d3", {a.d3.lo, a.d3.hi}}, {"d4", {a.d4.lo, a.d4.hi}},
          {"resolution", a.nx}, {"published_numbering", a.published_numbering}, {"domains", d}};
}

inline std::string curves_csv(const SingularitySet& s, const RobotParams& p) {
  std::ostringstream o;
  o << "curve_id,s,theta2,theta3,rho,z\n";
  for (std::size_t k = 0; k < s.curves.size(); ++k) {
    double acc = 0.0;
    const auto& pts = s.curves[k].points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) {
        const Point2 d = detail::torus_delta(pts[i - 1], pts[i]);
        acc += std::hypot(d[0], d[1]);
      }
      const PlanarEval e = planar_eval(p, pts[i][0], pts[i][1]);
      o << k << ',' << fmt(acc) << ',' << fmt(pts[i][0]) << ',' << fmt(pts[i][1]) << ',' << fmt(e.rho()) << ','
        << fmt(e.z) << '\n';
    }
  }
  return o.str();
}

inline std::string cusps_csv(const std::vector<CuspPoint>& cusps) {
  std::ostringstream o;
  o << "rho,z,theta2,theta3,multiplicity\n";
  for (const CuspPoint& c : cusps)
    o << fmt(c.rho) << ',' << fmt(c.z) << ',' << fmt(c.theta2) << ',' << fmt(c.theta3) << ',' << c.multiplicity << '\n';
  return o.str();
}

/// Joint-grid raster: header rows, then one row of labels per theta2 index.
template <class T>
std::string joint_raster_csv(const AspectMap& m, const std::vector<T>& label) {
  std::ostringstream o;
  o << "resolution," << m.n << ',' << m.n << '\n';
  o << "bounds," << fmt(m.lo2) << ',' << fmt(m.hi2) << ',' << fmt(m.lo3) << ',' << fmt(m.hi3) << '\n';
  o << "periodic," << (m.periodic ? 1 : 0) << ',' << (m.periodic ? 1 : 0) << '\n';
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) o << (j ? "," : "") << static_cast<int>(label[m.index(i, j)]);
    o << '\n';
  }
  return o.str();
}

/// Workspace raster: one row of labels per rho index, z ascending.
template <class T>
std::string workspace_raster_csv(const WorkspaceGrid& g, const std::vector<T>& label) {
  std::ostringstream o;
  o << "resolution," << g.nr << ',' << g.nz << '\n';
  o << "bounds," << fmt(0.0) << ',' << fmt(g.rho_max) << ',' << fmt(g.z_min) << ',' << fmt(g.z_max) << '\n';
  o << "periodic,0,0\n";
  for (int a = 0; a < g.nr; ++a) {
    for (int b = 0; b < g.nz; ++b) o << (b ? "," : "") << static_cast<int>(label[g.index(a, b)]);
    o << '\n';
  }
  return o.str();
}

inline std::string char_surfaces_csv(const RobotParams& p, const CharSurfaceSet& cs) {
  std::ostringstream o;
  o << "aspect,segment,k,theta2,theta3,rho,z\n";
  for (const CharSurface& c : cs.surfaces)
    for (std::size_t k = 0; k < c.joint.size(); ++k) {
      const PlanarEval e = planar_eval(p, c.joint[k][0], c.joint[k][1]);
      o << c.aspect << ',' << c.segment << ',' << k << ',' << fmt(c.joint[k][0]) << ',' << fmt(c.joint[k][1]) << ','
        << fmt(e.rho()) << ',' << fmt(e.z) << '\n';
    }
  return o.str();
}

inline std::string plan_csv(const PostureChangePlan& p) {
  std::ostringstream o;
  o << "s,theta1,theta2,theta3,detJ\n";
  double s = 0.0;
  for (std::size_t k = 0; k < p.joints.size(); ++k) {
    if (k) s += torus_distance(p.joints[k - 1], p.joints[k]);
    const JointConfig& q = p.joints[k];
    o << fmt(s) << ',' << fmt(q.theta1) << ',' << fmt(q.theta2) << ',' << fmt(q.theta3) << ',' << fmt(p.det[k]) << '\n';
  }
  return o.str();
}

inline std::string lift_csv(const FeasibilityReport& r) {
  std::ostringstream o;
  o << "direction,branch,s,theta1,theta2,theta3,detJ\n";
  auto dump = [&](const char* dir, const std::vector<BranchLift>& v) {
    for (std::size_t b = 0; b < v.size(); ++b)
      for (const LiftSample& x : v[b].lift.trajectory)
        o << dir << ',' << b << ',' << fmt(x.s) << ',' << fmt(x.q.theta1) << ',' << fmt(x.q.theta2) << ','
          << fmt(x.q.theta3) << ',' << fmt(x.det) << '\n';
  };
  dump("forward", r.forward);
  dump("reverse", r.reverse);
  return o.str();
}

inline std::string atlas_csv(const Atlas& a) {
  std::ostringstream o;
  o << "d3,d4,cusp_count,domain_id\n";
  for (int j = 0; j < a.ny; ++j)
    for (int i = 0; i < a.nx; ++i)
      o << fmt(a.d3_at(i)) << ',' << fmt(a.d4_at(j)) << ',' << a.count_at(i, j) << ',' << a.domain_at(i, j) << '\n';
  return o.str();
}

}  // namespace cuspidal::io
