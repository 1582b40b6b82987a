#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "cuspidal/classify.hpp"
#include "cuspidal/path.hpp"
#include "cuspidal/singular.hpp"
#include "cuspidal/topo.hpp"

namespace cuspidal::svg {

/// Fixed-precision number so repeated runs emit identical bytes.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

inline const char* color(int k) {
  static const char* palette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
                                  "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac"};
  return palette[((k % 10) + 10) % 10];
}

class Document {
 public:
  Document(double w, double h) : w_(w), h_(h) {}

  void raw(const std::string& s) { body_ += s + "\n"; }
  void open_group(const std::string& cls) { raw("<g class=\"" + cls + "\">"); }
  void close_group() { raw("</g>"); }
  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
    raw("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
        "\" fill=\"" + fill + "\"" + extra + "/>");
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
    raw("<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
        "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>");
  }
  void polyline(const std::vector<Point2>& pts, const std::string& stroke, double width = 1.5,
                const std::string& cls = "") {
    if (pts.size() < 2) return;
    std::string s = "<polyline";
    if (!cls.empty()) s += " class=\"" + cls + "\"";
    s += " fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k) s += ' ';
      s += num(pts[k][0]) + "," + num(pts[k][1]);
    }
    raw(s + "\"/>");
  }
  void circle(double x, double y, double r, const std::string& fill, const std::string& cls = "") {
    std::string s = "<circle";
    if (!cls.empty()) s += " class=\"" + cls + "\"";
    raw(s + " cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>");
  }
  void text(double x, double y, const std::string& t, int size = 12, const std::string& anchor = "middle") {
    raw("<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
        "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + escape(t) + "</text>");
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" + num(h_) +
           "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  double w_, h_;
  std::string body_;
};

/// Affine map from a data rectangle to a pixel box (y up in data).
struct Panel {
  double x0, y0, w, h;          // pixel box
  double lo_x, hi_x, lo_y, hi_y;  // data range

  Point2 map(double x, double y) const {
    return {x0 + (x - lo_x) / (hi_x - lo_x) * w, y0 + h - (y - lo_y) / (hi_y - lo_y) * h};
  }
  Point2 map(const Point2& p) const { return map(p[0], p[1]); }

  void frame(Document& d, const std::string& title, const std::string& xl, const std::string& yl) const {
    d.rect(x0, y0, w, h, "none", " stroke=\"black\" stroke-width=\"1\"");
    d.text(x0 + w / 2, y0 - 8, title, 14);
    d.text(x0 + w / 2, y0 + h + 28, xl);
    d.text(x0 - 30, y0 + h / 2, yl);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", lo_x);
    d.text(x0, y0 + h + 14, buf, 10);
    std::snprintf(buf, sizeof buf, "%.2f", hi_x);
    d.text(x0 + w, y0 + h + 14, buf, 10);
    std::snprintf(buf, sizeof buf, "%.2f", lo_y);
    d.text(x0 - 4, y0 + h, buf, 10, "end");
    std::snprintf(buf, sizeof buf, "%.2f", hi_y);
    d.text(x0 - 4, y0 + 10, buf, 10, "end");
  }
};

inline Panel joint_panel(double x0, double y0, double size) { return {x0, y0, size, size, -kPi, kPi, -kPi, kPi}; }

inline Panel workspace_panel(const RobotParams& p, double x0, double y0, double height) {
  const double r = 1.02 * reach_bound(p);
  return {x0, y0, height / 2, height, 0.0, r, -r, r};
}

/// Pieces of a torus polyline between wrap-around jumps.
inline std::vector<std::vector<Point2>> torus_pieces(const std::vector<Point2>& pts) {
  std::vector<std::vector<Point2>> out(1);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k && (std::abs(pts[k][0] - pts[k - 1][0]) > kPi || std::abs(pts[k][1] - pts[k - 1][1]) > kPi))
      out.emplace_back();
    out.back().push_back(pts[k]);
  }
  return out;
}

inline void draw_torus_polyline(Document& d, const Panel& pn, const std::vector<Point2>& pts,
                                const std::string& stroke, double width) {
  for (const auto& piece : torus_pieces(pts)) {
    std::vector<Point2> px;
    for (const Point2& q : piece) px.push_back(pn.map(q));
    d.polyline(px, stroke, width);
  }
}

inline void draw_cusps(Document& d, const Panel& pn, const std::vector<CuspPoint>& cusps) {
  if (cusps.empty()) return;
  d.open_group("cusps");
  for (const CuspPoint& c : cusps) {
    const Point2 m = pn.map(c.rho, c.z);
    d.circle(m[0], m[1], 4, "black", "cusp");
  }
  d.close_group();
}

inline void draw_boundary(Document& d, const Panel& pn, const WorkspaceBoundary& b, bool labels) {
  for (const BoundaryCurveImage& c : b.curves) {
    std::vector<Point2> px;
    for (const Point2& q : c.image) px.push_back(pn.map(q));
    d.polyline(px, c.internal ? "#d62728" : "#1f77b4", 1.5, c.internal ? "ws1" : "ws2");
  }
  if (!labels) return;
  for (const BoundarySegment& s : b.segments) {
    if (s.image.empty()) continue;
    const Point2 m = pn.map(s.image[s.image.size() / 2]);
    d.text(m[0] + 14, m[1], "BS" + std::to_string(s.id), 11);
  }
}

/// Singularity curves on the torus and their workspace image.
inline std::string singularities(const RobotParams& p, const SingularitySet& s) {
  Document d(1000, 560);
  const Panel jp = joint_panel(70, 40, 460);
  const Panel wp = workspace_panel(p, 640, 40, 460);
  jp.frame(d, "joint space (torus)", "theta2", "theta3");
  wp.frame(d, "workspace cross-section", "rho", "z");
  for (std::size_t k = 0; k < s.curves.size(); ++k) {
    d.open_group("joint-curve");
    draw_torus_polyline(d, jp, s.curves[k].points, color(static_cast<int>(k)), 1.5);
    d.close_group();
    if (!s.curves[k].points.empty()) {
      const Point2 m = jp.map(s.curves[k].points[s.curves[k].points.size() / 3]);
      d.text(m[0] + 12, m[1] - 6, s.curves[k].label, 12);
    }
  }
  if (!s.cusps.empty()) {
    d.open_group("cusp-preimages");
    for (const CuspPoint& c : s.cusps) {
      const Point2 m = jp.map(c.theta2, c.theta3);
      d.circle(m[0], m[1], 3, "black");
    }
    d.close_group();
  }
  draw_boundary(d, wp, s.boundary, true);
  draw_cusps(d, wp, s.cusps);
  d.text(wp.x0 + wp.w + 60, wp.y0 + 20, "WS1 internal", 11);
  d.text(wp.x0 + wp.w + 60, wp.y0 + 36, "WS2 external", 11);
  return d.str();
}

/// Label raster over the joint grid, drawn at most 256 cells per side with
/// row runs merged.
inline void draw_joint_raster(Document& d, const Panel& pn, const AspectMap& m, const std::vector<int>& label,
                              const std::map<int, std::string>& fills) {
  const int n = std::min(m.n, 256);
  const double cw = pn.w / n, ch = pn.h / n;
  for (int j = 0; j < n; ++j) {
    int i = 0;
    while (i < n) {
      auto sample = [&](int ii) {
        const int ci = static_cast<int>((ii + 0.5) * m.n / n), cj = static_cast<int>((j + 0.5) * m.n / n);
        return label[m.index(ci, cj)];
      };
      const int v = sample(i);
      int e = i + 1;
      while (e < n && sample(e) == v) ++e;
      const auto f = fills.find(v);
      if (f != fills.end()) d.rect(pn.x0 + i * cw, pn.y0 + pn.h - (j + 1) * ch, (e - i) * cw, ch, f->second);
      i = e;
    }
  }
}

/// Label text at the mean (circular) position of each label's cells.
inline void draw_joint_labels(Document& d, const Panel& pn, const AspectMap& m, const std::vector<int>& label,
                              const std::map<int, std::string>& names) {
  for (const auto& [id, name] : names) {
    double sx2 = 0, sy2 = 0, sx3 = 0, sy3 = 0;
    int cnt = 0;
    for (std::size_t c = 0; c < label.size(); ++c) {
      if (label[c] != id) continue;
      const Point2 q = m.center(static_cast<int>(c));
      sx2 += std::cos(q[0]), sy2 += std::sin(q[0]), sx3 += std::cos(q[1]), sy3 += std::sin(q[1]);
      ++cnt;
    }
    if (!cnt) continue;
    const Point2 px = pn.map(std::atan2(sy2, sx2), std::atan2(sy3, sx3));
    d.text(px[0], px[1], name, 13);
  }
}

inline std::string aspects(const RobotParams& p, const AspectMap& m, const SingularitySet& s) {
  Document d(620, 560);
  const Panel jp = joint_panel(70, 40, 460);
  jp.frame(d, "aspects", "theta2", "theta3");
  std::map<int, std::string> fills, names;
  for (int a = 1; a <= m.count; ++a) {
    fills[a] = m.aspect_sign[a - 1] > 0 ? "#c6dbef" : "#fdd0a2";
    names[a] = "A" + std::to_string(a);
  }
  draw_joint_raster(d, jp, m, m.label, fills);
  for (const SingularityCurve& c : s.curves) draw_torus_polyline(d, jp, c.points, "black", 1.2);
  draw_joint_labels(d, jp, m, m.label, names);
  (void)p;
  return d.str();
}

inline std::string char_surfaces(const RobotParams& p, const AspectMap& m, const SingularitySet& s,
                                 const CharSurfaceSet& cs) {
  Document d(1000, 560);
  const Panel jp = joint_panel(70, 40, 460);
  const Panel wp = workspace_panel(p, 640, 40, 460);
  jp.frame(d, "characteristic surfaces", "theta2", "theta3");
  wp.frame(d, "internal boundary segments", "rho", "z");
  std::map<int, std::string> fills, names;
  for (int a = 1; a <= m.count; ++a) {
    fills[a] = m.aspect_sign[a - 1] > 0 ? "#deebf7" : "#fee6ce";
    names[a] = "A" + std::to_string(a);
  }
  draw_joint_raster(d, jp, m, m.label, fills);
  for (const SingularityCurve& c : s.curves) draw_torus_polyline(d, jp, c.points, "black", 1.0);
  for (const CharSurface& c : cs.surfaces) {
    d.open_group("char-surface");
    draw_torus_polyline(d, jp, c.joint, color(c.segment), 2.0);
    d.close_group();
    if (!c.joint.empty()) {
      const Point2 px = jp.map(c.joint[c.joint.size() / 2]);
      d.text(px[0], px[1] - 6, "CS" + std::to_string(c.aspect) + std::to_string(c.segment), 10);
    }
  }
  draw_joint_labels(d, jp, m, m.label, names);
  for (const BoundarySegment& b : s.boundary.segments) {
    std::vector<Point2> px;
    for (const Point2& q : b.image) px.push_back(wp.map(q));
    d.polyline(px, color(b.id), 2.0, "bs");
    if (!b.image.empty()) {
      const Point2 mm = wp.map(b.image[b.image.size() / 2]);
      d.text(mm[0] + 14, mm[1], "BS" + std::to_string(b.id), 11);
    }
  }
  for (const BoundaryCurveImage& c : s.boundary.curves)
    if (!c.internal) {
      std::vector<Point2> px;
      for (const Point2& q : c.image) px.push_back(wp.map(q));
      d.polyline(px, "#999999", 1.0, "ws2");
    }
  draw_cusps(d, wp, s.cusps);
  return d.str();
}

/// Basic regions and the uniqueness domains, one small panel per domain.
inline std::string uniqueness(const RobotParams& p, const RegionPartition& rp,
                              const std::vector<UniquenessDomain>& qu, const CharSurfaceSet& cs) {
  const int cols = 1 + static_cast<int>(qu.size());
  Document d(40 + 300.0 * cols, 360);
  const AspectMap& m = rp.aspects;
  {
    const Panel jp = joint_panel(40, 40, 260);
    jp.frame(d, "basic regions", "theta2", "theta3");
    std::map<int, std::string> fills, names;
    for (std::size_t k = 0; k < rp.basic.size(); ++k) {
      fills[static_cast<int>(k) + 1] = color(static_cast<int>(k));
      names[static_cast<int>(k) + 1] = rp.basic[k].label();
    }
    draw_joint_raster(d, jp, m, rp.ra, fills);
    for (const CharSurface& c : cs.surfaces) draw_torus_polyline(d, jp, c.joint, "black", 1.0);
    draw_joint_labels(d, jp, m, rp.ra, names);
  }
  for (std::size_t k = 0; k < qu.size(); ++k) {
    const Panel jp = joint_panel(40 + 300.0 * (k + 1), 40, 260);
    jp.frame(d, "Qu" + std::to_string(qu[k].id) + " = " + qu[k].description, "theta2", "theta3");
    std::vector<int> lab(qu[k].mask.begin(), qu[k].mask.end());
    draw_joint_raster(d, jp, m, lab, {{1, color(static_cast<int>(k))}});
  }
  (void)p;
  return d.str();
}

inline void draw_workspace_raster(Document& d, const Panel& pn, const WorkspaceGrid& g, const std::vector<int>& label,
                                  const std::map<int, std::string>& fills) {
  const double cw = pn.w / g.nr, ch = pn.h / g.nz;
  for (int b = 0; b < g.nz; ++b) {
    int a = 0;
    while (a < g.nr) {
      const int v = label[g.index(a, b)];
      int e = a + 1;
      while (e < g.nr && label[g.index(e, b)] == v) ++e;
      const auto f = fills.find(v);
      if (f != fills.end()) d.rect(pn.x0 + a * cw, pn.y0 + pn.h - (b + 1) * ch, (e - a) * cw, ch, f->second);
      a = e;
    }
  }
}

inline std::string feasible_regions(const RobotParams& p, const RegionPartition& rp,
                                    const std::vector<FeasibleRegion>& wf, const SingularitySet& s) {
  const int cols = std::max<int>(1, static_cast<int>(wf.size()));
  Document d(60 + 280.0 * cols, 560);
  for (std::size_t k = 0; k < wf.size(); ++k) {
    const Panel wp = workspace_panel(p, 60 + 280.0 * k, 40, 460);
    wp.frame(d, "Wf" + std::to_string(wf[k].id), "rho", "z");
    std::vector<int> lab(wf[k].mask.begin(), wf[k].mask.end());
    draw_workspace_raster(d, wp, rp.ws, lab, {{1, color(static_cast<int>(k))}, {2, "black"}});
    draw_boundary(d, wp, s.boundary, false);
    draw_cusps(d, wp, s.cusps);
    std::string sl = "slits:";
    for (int b : wf[k].slits) sl += " BS" + std::to_string(b);
    d.text(wp.x0 + wp.w / 2, wp.y0 + wp.h + 44, sl, 11);
  }
  return d.str();
}

inline std::string posture_plan(const RobotParams& p, const AspectMap& m, const SingularitySet& s,
                                const PostureChangePlan& plan) {
  Document d(1000, 560);
  const Panel jp = joint_panel(70, 40, 460);
  const Panel wp = workspace_panel(p, 640, 40, 460);
  jp.frame(d, "posture change in A" + std::to_string(plan.aspect), "theta2", "theta3");
  wp.frame(d, "workspace trace", "rho", "z");
  std::map<int, std::string> fills;
  for (int a = 1; a <= m.count; ++a) fills[a] = m.aspect_sign[a - 1] > 0 ? "#deebf7" : "#fee6ce";
  draw_joint_raster(d, jp, m, m.label, fills);
  std::vector<Point2> jpts;
  for (const JointConfig& q : plan.joints) jpts.push_back({q.theta2, q.theta3});
  d.open_group("plan");
  draw_torus_polyline(d, jp, jpts, "#2ca02c", 2.0);
  d.close_group();
  draw_boundary(d, wp, s.boundary, true);
  std::vector<Point2> tp;
  for (const Point2& q : plan.trace) tp.push_back(wp.map(q));
  d.polyline(tp, "#2ca02c", 2.0, "trace");
  draw_cusps(d, wp, s.cusps);
  return d.str();
}

inline std::string path_check(const RobotParams& p, const WorkspacePath& path, const FeasibilityReport& rep,
                              const SingularitySet& s) {
  Document d(420, 560);
  const Panel wp = workspace_panel(p, 70, 40, 460);
  wp.frame(d, "path feasibility", "rho", "z");
  draw_boundary(d, wp, s.boundary, true);
  draw_cusps(d, wp, s.cusps);
  std::vector<Point2> px;
  for (const CartesianPoint& c : path.waypoints) px.push_back(wp.map(std::hypot(c.x, c.y), c.z));
  d.polyline(px, "#d62728", 2.0, "path");
  for (const BranchLift& b : rep.forward)
    if (b.lift.status != LiftStatus::Feasible) {
      const Point2 m = wp.map(std::hypot(b.lift.block_point.x, b.lift.block_point.y), b.lift.block_point.z);
      d.circle(m[0], m[1], 3, "#d62728", "block");
    }
  return d.str();
}

inline std::string atlas(const Atlas& a) {
  Document d(620, 600);
  const Panel pn{70, 40, 460, 460, a.d3.lo, a.d3.hi, a.d4.lo, a.d4.hi};
  pn.frame(d, "cusp domains (r2 = " + num(a.r2) + ", r3 = " + num(a.r3) + ")", "d3", "d4");
  const double cw = pn.w / a.nx, ch = pn.h / a.ny;
  for (int j = 0; j < a.ny; ++j)
    for (int i = 0; i < a.nx; ++i)
      d.rect(pn.x0 + i * cw, pn.y0 + pn.h - (j + 1) * ch, cw, ch, color(a.domain_at(i, j) - 1));
  if (std::abs(a.r3) <= 1e-12) {
    for (int id : {1, 2, 3}) {
      std::vector<Point2> pl;
      auto flush = [&] {
        d.polyline(pl, "black", 1.5, "surface-c" + std::to_string(id));
        pl.clear();
      };
      for (int k = 0; k <= 400; ++k) {
        const double d3 = a.d3.lo + (a.d3.hi - a.d3.lo) * k / 400.0;
        const auto v = bifurcation_value(id, d3, a.r2);
        if (!v || !std::isfinite(*v) || *v < a.d4.lo || *v > a.d4.hi) {
          flush();
          continue;
        }
        pl.push_back(pn.map(d3, *v));
      }
      flush();
    }
  }
  for (const AtlasDomain& dom : a.domains) {
    const Point2 m = pn.map(dom.sample_d3, dom.sample_d4);
    d.text(m[0], m[1], std::to_string(dom.id) + " (" + std::to_string(dom.cusp_count) + ")", 12);
  }
  return d.str();
}

}  // namespace cuspidal::svg
