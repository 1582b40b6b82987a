#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cuspidal/config.hpp"
#include "cuspidal/error.hpp"
#include "cuspidal/model.hpp"
#include "cuspidal/singular.hpp"

namespace cuspidal {

enum class Verdict { Cuspidal, NonCuspidal, Indeterminate };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Cuspidal: return "cuspidal";
    case Verdict::NonCuspidal: return "non-cuspidal";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

enum class ClassifyMethod { Rule, ClosedForm, Numeric };

inline std::string to_string(ClassifyMethod m) {
  switch (m) {
    case ClassifyMethod::Rule: return "rule";
    case ClassifyMethod::ClosedForm: return "closed-form";
    case ClassifyMethod::Numeric: return "numeric";
  }
  return "numeric";
}

namespace detail {
inline bool tiny(double v) { return std::abs(v) <= 1e-12; }
}  // namespace detail

/// Geometric conditions under which a 3-R chain cannot be cuspidal. Returns
/// the matched rule numbers (1..7), ascending.
///   1 first two axes parallel       2 last two axes parallel
///   3 first two axes intersect      4 last two axes intersect
///   5 first two axes orthogonal, r2 = r3 = 0
///   6 mutually orthogonal, r2 = 0
///   7 mutually orthogonal, d3 < d2, d4^2 > d3^2 (1 + (r2 / (d2 - d3))^2)
inline std::vector<int> check_simplifying_conditions(const RobotParams& p) {
  std::vector<int> out;
  const bool par12 = detail::tiny(std::sin(p.alpha2));
  const bool par23 = detail::tiny(std::sin(p.alpha3));
  if (par12) out.push_back(1);
  if (par23) out.push_back(2);
  if (!par12 && detail::tiny(p.d2)) out.push_back(3);
  if (!par23 && detail::tiny(p.d3)) out.push_back(4);
  if (RobotParams::is_right_angle(p.alpha2) && detail::tiny(p.r2) && detail::tiny(p.r3)) out.push_back(5);
  if (p.orthogonal() && detail::tiny(p.r2)) out.push_back(6);
  // only the d3 < d2 side: above the matching curve for d3 > d2 robots keep
  // four cusps
  if (p.orthogonal() && p.d3 < p.d2 && !detail::tiny(p.d2 - p.d3)) {
    const double k = p.r2 / (p.d2 - p.d3);
    if (p.d4 * p.d4 > p.d3 * p.d3 * (1.0 + k * k)) out.push_back(7);
  }
  return out;
}

enum class Surface { C1 = 1, C2 = 2, C3 = 3, C4 = 4 };

struct SurfaceHelpers {
  double A, B;
};

/// A = sqrt((d3 + 1)^2 + r2^2), B = sqrt((d3 - 1)^2 + r2^2), with d2 = 1.
inline SurfaceHelpers surface_helpers(double d3, double r2) {
  return {std::hypot(d3 + 1.0, r2), std::hypot(d3 - 1.0, r2)};
}

/// Lower transition: d4 below it leaves a void and two solutions. Written
/// with d2 kept explicit; d2 = 1 gives the normalized surface.
inline double c1_value(double d2, double d3, double r2) {
  const double s = d3 * d3 + r2 * r2;
  const double ab = std::hypot(d3 + d2, r2) * std::hypot(d3 - d2, r2);
  const double v = 0.5 * (s - (s * s - d2 * d2 * (d3 * d3 - r2 * r2)) / ab);
  return std::sqrt(std::max(0.0, v));
}

/// d4 on one of the transition surfaces between cusp-count domains of
/// orthogonal robots with r3 = 0 and d2 = 1; nullopt outside the validity
/// range. C4 is stored as published and coincides with C2 (see README).
inline std::optional<double> bifurcation_value(int surface_id, double d3, double r2) {
  if (surface_id < 1 || surface_id > 4) {
    throw Error(ErrorKind::InvalidInput, "unknown surface id " + std::to_string(surface_id));
  }
  if (!(d3 > 0.0) || !(r2 > 0.0)) return std::nullopt;
  const SurfaceHelpers h = surface_helpers(d3, r2);
  switch (static_cast<Surface>(surface_id)) {
    case Surface::C1: return c1_value(1.0, d3, r2);
    case Surface::C2:
    case Surface::C4:
      if (d3 < 1.0) return d3 / (1.0 - d3) * h.B;
      return std::nullopt;
    case Surface::C3:
      if (d3 > 1.0) return d3 / (d3 - 1.0) * h.B;
      return std::nullopt;
  }
  return std::nullopt;
}

/// Closed-form verdict for orthogonal robots with r3 = 0. The robot is
/// cuspidal iff d4 > C1 and (d3 > d2 or d4 < d3 / (d2 - d3) * B); within
/// the band of an equality the verdict is indeterminate.
inline Verdict is_cuspidal_closed_form(const RobotParams& p,
                                       const Tolerances& tol = default_tolerances()) {
  if (!p.orthogonal() || !detail::tiny(p.r3 / std::max(1.0, p.length_scale()))) {
    throw Error(ErrorKind::Precondition, "closed form requires an orthogonal robot with r3 = 0");
  }
  if (!(p.d2 > 0.0)) throw Error(ErrorKind::Precondition, "closed form requires d2 > 0");
  const RobotParams n = p.normalized();
  const double eps = tol.closed_form_band;
  const double c1 = c1_value(1.0, n.d3, n.r2);
  if (std::abs(n.d4 - c1) <= eps) return Verdict::Indeterminate;
  if (n.d4 < c1) return Verdict::NonCuspidal;
  if (std::abs(n.d3 - 1.0) <= eps) return Verdict::Indeterminate;
  if (n.d3 > 1.0) return Verdict::Cuspidal;
  const double c2 = n.d3 / (1.0 - n.d3) * std::hypot(n.d3 - 1.0, n.r2);
  if (std::abs(n.d4 - c2) <= eps) return Verdict::Indeterminate;
  return n.d4 < c2 ? Verdict::Cuspidal : Verdict::NonCuspidal;
}

inline int cusp_grid_default() { return 256; }

/// Number of confirmed cusps found by tracing at the given resolution.
/// Candidates whose triple-root test cannot run (degenerate elimination)
/// count as cusps.
inline int count_cusps_numeric(const RobotParams& p, int grid_n = cusp_grid_default(),
                               const Tolerances& tol = default_tolerances()) {
  const RobotParams n = p.normalized();
  const auto curves = trace_singularity_curves(n, grid_n, tol);
  const CuspDetection d = detect_cusps(n, curves, tol);
  return static_cast<int>(std::count_if(d.cusps.begin(), d.cusps.end(), [](const CuspPoint& c) {
    return c.confirmed || !c.verifiable;
  }));
}

/// Published-section domain of an orthogonal r3 = 0 robot (1..5), or 0 when the
/// robot is not in that family. The 2- vs 4-cusp split below C3 relies on
/// the numeric count.
inline int closed_form_domain(const RobotParams& p, int cusp_count) {
  if (!p.orthogonal() || !detail::tiny(p.r3) || !(p.d2 > 0.0)) return 0;
  const RobotParams n = p.normalized();
  if (n.d4 < c1_value(1.0, n.d3, n.r2)) return 1;
  if (n.d3 < 1.0 && n.r2 > 0.0 && n.d4 > *bifurcation_value(2, n.d3, n.r2)) return 5;
  if (n.d3 < 1.0 && detail::tiny(n.r2)) return 5;
  if (n.d3 > 1.0 && n.r2 > 0.0 && n.d4 > *bifurcation_value(3, n.d3, n.r2)) return 4;
  return cusp_count == 2 ? 3 : 2;
}

struct ClassificationResult {
  Verdict verdict = Verdict::Indeterminate;
  int cusp_count = 0;
  ClassifyMethod method = ClassifyMethod::Numeric;
  std::vector<int> matched_rules;
  std::optional<Verdict> closed_form;
  int domain_id = 0;  // 0 when not applicable
  std::vector<std::string> anomalies;
};

inline ClassificationResult classify(const RobotParams& p, int grid_n = cusp_grid_default(),
                                     const Tolerances& tol = default_tolerances()) {
  p.validate();
  ClassificationResult r;
  r.matched_rules = check_simplifying_conditions(p);
  const RobotParams n = p.normalized();
  const auto curves = trace_singularity_curves(n, grid_n, tol);
  const CuspDetection d = detect_cusps(n, curves, tol);
  r.anomalies = d.anomalies;
  r.cusp_count = static_cast<int>(std::count_if(
      d.cusps.begin(), d.cusps.end(), [](const CuspPoint& c) { return c.confirmed || !c.verifiable; }));

  const bool closed_ok = p.orthogonal() && detail::tiny(p.r3) && p.d2 > 0.0;
  if (closed_ok) {
    r.closed_form = is_cuspidal_closed_form(p, tol);
    r.domain_id = closed_form_domain(p, r.cusp_count);
  }
  if (!r.matched_rules.empty()) {
    r.verdict = Verdict::NonCuspidal;
    r.method = ClassifyMethod::Rule;
  } else if (r.closed_form && *r.closed_form != Verdict::Indeterminate) {
    r.verdict = *r.closed_form;
    r.method = ClassifyMethod::ClosedForm;
  } else if (r.cusp_count > 0) {
    r.verdict = Verdict::Cuspidal;
    r.method = ClassifyMethod::Numeric;
  } else {
    // no cusp: conclusive only for orthogonal robots
    r.verdict = p.orthogonal() ? Verdict::NonCuspidal : Verdict::Indeterminate;
    r.method = ClassifyMethod::Numeric;
  }
  return r;
}

struct Range {
  double lo = 0, hi = 1;
};

struct AtlasDomain {
  int id = 0;
  int cusp_count = 0;
  int cells = 0;
  double mean_d3 = 0, mean_d4 = 0;
  double sample_d3 = 0, sample_d4 = 0;  // a member cell center
};

/// Cusp counts over a (d3, d4) parameter section at fixed r2, r3 (d2 = 1),
/// grouped into 4-connected domains of equal count.
struct Atlas {
  double r2 = 0, r3 = 0;
  Range d3, d4;
  int nx = 0, ny = 0;       // cells along d3 and d4
  std::vector<int> counts;  // index j * nx + i
  std::vector<int> domain;  // 1-based index into domains
  std::vector<AtlasDomain> domains;
  bool published_numbering = false;

  double d3_at(int i) const { return d3.lo + (i + 0.5) * (d3.hi - d3.lo) / nx; }
  double d4_at(int j) const { return d4.lo + (j + 0.5) * (d4.hi - d4.lo) / ny; }
  int count_at(int i, int j) const { return counts[j * nx + i]; }
  int domain_at(int i, int j) const { return domains[domain[j * nx + i] - 1].id; }
};

inline RobotParams atlas_robot(double d3, double d4, double r2, double r3) {
  return RobotParams::orthogonal_robot(1.0, d3, d4, r2, r3);
}

inline Atlas atlas_scan(double r2, double r3, Range d3r, Range d4r, int resolution,
                        int grid_n = cusp_grid_default(), const Tolerances& tol = default_tolerances()) {
  if (resolution < 1) throw Error(ErrorKind::Precondition, "resolution must be positive");
  if (!(d3r.lo < d3r.hi) || !(d4r.lo < d4r.hi) || d3r.lo < 0.0 || d4r.lo <= 0.0) {
    throw Error(ErrorKind::Precondition, "atlas ranges must be positive and non-empty");
  }
  Atlas a;
  a.r2 = r2;
  a.r3 = r3;
  a.d3 = d3r;
  a.d4 = d4r;
  a.nx = a.ny = resolution;
  a.counts.assign(static_cast<std::size_t>(a.nx) * a.ny, 0);
  for (int j = 0; j < a.ny; ++j)
    for (int i = 0; i < a.nx; ++i)
      a.counts[j * a.nx + i] = count_cusps_numeric(atlas_robot(a.d3_at(i), a.d4_at(j), r2, r3), grid_n, tol);

  a.domain.assign(a.counts.size(), 0);
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(a.counts.size()); ++start) {
    if (a.domain[start]) continue;
    AtlasDomain dom;
    dom.cusp_count = a.counts[start];
    const int label = static_cast<int>(a.domains.size()) + 1;
    stack.push_back(start);
    a.domain[start] = label;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int i = c % a.nx, j = c / a.nx;
      ++dom.cells;
      dom.mean_d3 += a.d3_at(i);
      dom.mean_d4 += a.d4_at(j);
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= a.nx || q[1] >= a.ny) continue;
        const int k = q[1] * a.nx + q[0];
        if (a.domain[k] || a.counts[k] != dom.cusp_count) continue;
        a.domain[k] = label;
        stack.push_back(k);
      }
    }
    dom.mean_d3 /= dom.cells;
    dom.mean_d4 /= dom.cells;
    dom.sample_d3 = a.d3_at(start % a.nx);
    dom.sample_d4 = a.d4_at(start / a.nx);
    dom.id = label;
    a.domains.push_back(dom);
  }

  // published numbering when the section shows the five r3 = 0 domains
  std::vector<int> pattern;
  for (const auto& d : a.domains) pattern.push_back(d.cusp_count);
  std::sort(pattern.begin(), pattern.end());
  if (detail::tiny(r3) && pattern == std::vector<int>{0, 0, 2, 4, 4}) {
    auto pick = [&](int count) {
      std::vector<AtlasDomain*> v;
      for (auto& d : a.domains)
        if (d.cusp_count == count) v.push_back(&d);
      std::sort(v.begin(), v.end(), [](auto* x, auto* y) { return x->mean_d4 < y->mean_d4; });
      return v;
    };
    auto zero = pick(0), four = pick(4), two = pick(2);
    zero[0]->id = 1;
    zero[1]->id = 5;
    four[0]->id = 2;
    four[1]->id = 4;
    two[0]->id = 3;
    a.published_numbering = true;
  }
  return a;
}

struct BoundaryDeviation {
  int cell_a = 0, cell_b = 0;  // adjacent cells of different domains
  int domain_a = 0, domain_b = 0;
  double cells_to_curve = 0;   // distance from the shared edge midpoint to the nearest curve
};

/// Distance, in cell units, between each domain-boundary edge of the atlas
/// and the nearest of the analytic surfaces C1, C2, C3 (r3 = 0 sections).
inline std::vector<BoundaryDeviation> atlas_boundary_deviation(const Atlas& a) {
  const double hx = (a.d3.hi - a.d3.lo) / a.nx, hy = (a.d4.hi - a.d4.lo) / a.ny;
  // dense polylines of the curves in cell coordinates
  std::vector<std::vector<Point2>> curves;
  const int samples = 64 * std::max(a.nx, 1);
  for (int id : {1, 2, 3}) {
    std::vector<Point2> pl;
    for (int k = 0; k <= samples; ++k) {
      const double d3 = a.d3.lo - 2 * hx + (a.d3.hi - a.d3.lo + 4 * hx) * k / samples;
      const auto v = bifurcation_value(id, d3, a.r2);
      if (!v || !std::isfinite(*v)) continue;
      pl.push_back({(d3 - a.d3.lo) / hx, (*v - a.d4.lo) / hy});
    }
    curves.push_back(std::move(pl));
  }
  auto dist_to = [&](const Point2& m) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pl : curves) {
      for (std::size_t k = 0; k + 1 < pl.size(); ++k) {
        const Point2& p0 = pl[k];
        const Point2& p1 = pl[k + 1];
        const double dx = p1[0] - p0[0], dy = p1[1] - p0[1];
        if (std::abs(dx) > 2.0 && std::abs(dy) > 1e6) continue;  // across a pole
        const double l2 = dx * dx + dy * dy;
        double t = l2 > 0 ? ((m[0] - p0[0]) * dx + (m[1] - p0[1]) * dy) / l2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(m[0] - p0[0] - t * dx, m[1] - p0[1] - t * dy));
      }
    }
    return best;
  };
  std::vector<BoundaryDeviation> out;
  for (int j = 0; j < a.ny; ++j) {
    for (int i = 0; i < a.nx; ++i) {
      const int c = j * a.nx + i;
      const int nb[2][2] = {{i + 1, j}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] >= a.nx || q[1] >= a.ny) continue;
        const int k = q[1] * a.nx + q[0];
        if (a.domain[c] == a.domain[k]) continue;
        // edge midpoint in cell coordinates (cell centers at i + 0.5)
        const Point2 mid{0.5 * (i + q[0]) + 0.5, 0.5 * (j + q[1]) + 0.5};
        out.push_back({c, k, a.domain_at(i, j), a.domain_at(q[0], q[1]), dist_to(mid)});
      }
    }
  }
  return out;
}

}  // namespace cuspidal
