#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cuspidal/config.hpp"
#include "cuspidal/ik.hpp"
#include "cuspidal/model.hpp"
#include "cuspidal/singular.hpp"

namespace cuspidal {

/// Labeled grid over (theta2, theta3). Periodic on the torus, or a box when
/// joint limits are set. Label 0 marks cells straddling det J = 0.
struct AspectMap {
  int n = 0;
  bool periodic = true;
  double lo2 = -kPi, hi2 = kPi, lo3 = -kPi, hi3 = kPi;
  std::vector<int> label;   // index i * n + j, i along theta2
  std::vector<int> sign;    // +1 / -1 for labeled cells, 0 otherwise
  std::vector<int> aspect_sign;  // per aspect id - 1
  int count = 0;

  double h2() const { return (hi2 - lo2) / n; }
  double h3() const { return (hi3 - lo3) / n; }
  int index(int i, int j) const { return i * n + j; }
  Point2 center(int i, int j) const { return {lo2 + (i + 0.5) * h2(), lo3 + (j + 0.5) * h3()}; }
  Point2 center(int idx) const { return center(idx / n, idx % n); }

  /// Cell containing (theta2, theta3); -1 outside a joint-limit box.
  int cell_of(double t2, double t3) const {
    if (periodic) {
      t2 = wrap_angle(t2);
      t3 = wrap_angle(t3);
    } else if (t2 < lo2 || t2 > hi2 || t3 < lo3 || t3 > hi3) {
      return -1;
    }
    int i = static_cast<int>(std::floor((t2 - lo2) / h2()));
    int j = static_cast<int>(std::floor((t3 - lo3) / h3()));
    if (periodic) {
      i = ((i % n) + n) % n;
      j = ((j % n) + n) % n;
    } else {
      i = std::clamp(i, 0, n - 1);
      j = std::clamp(j, 0, n - 1);
    }
    return index(i, j);
  }

  /// 4-neighbours of a cell (wrapping on the torus).
  int neighbours4(int idx, std::array<int, 4>& out) const {
    const int i = idx / n, j = idx % n;
    int k = 0;
    const int d[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (const auto& dd : d) {
      int a = i + dd[0], b = j + dd[1];
      if (periodic) {
        a = (a + n) % n;
        b = (b + n) % n;
      } else if (a < 0 || b < 0 || a >= n || b >= n) {
        continue;
      }
      out[k++] = index(a, b);
    }
    return k;
  }

  int neighbours8(int idx, std::array<int, 8>& out) const {
    const int i = idx / n, j = idx % n;
    int k = 0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (!di && !dj) continue;
        int a = i + di, b = j + dj;
        if (periodic) {
          a = (a + n) % n;
          b = (b + n) % n;
        } else if (a < 0 || b < 0 || a >= n || b >= n) {
          continue;
        }
        out[k++] = index(a, b);
      }
    return k;
  }

  /// Aspect of a configuration: the label of its cell, or for a straddling
  /// cell the nearest labeled cell carrying the same det J sign. 0 if none.
  int aspect_of(const RobotParams& p, double t2, double t3) const {
    const int c = cell_of(t2, t3);
    if (c < 0) return 0;
    if (label[c]) return label[c];
    const double d = det_jacobian(p, t2, t3);
    if (d == 0.0) return 0;
    const int s = d > 0 ? 1 : -1;
    const int ci = c / n, cj = c % n;
    for (int r = 1; r <= 3; ++r) {
      int best = 0;
      double bd = 1e300;
      for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj) {
          int a = ci + di, b = cj + dj;
          if (periodic) {
            a = (a + n) % n;
            b = (b + n) % n;
          } else if (a < 0 || b < 0 || a >= n || b >= n) {
            continue;
          }
          const int k = index(a, b);
          if (!label[k] || sign[k] != s) continue;
          const Point2 cc = center(k);
          const double dist = periodic ? torus_distance2(cc[0], cc[1], t2, t3) : std::hypot(cc[0] - t2, cc[1] - t3);
          if (dist < bd) {
            bd = dist;
            best = label[k];
          }
        }
      if (best) return best;
    }
    return 0;
  }
  int aspect_of(const RobotParams& p, const JointConfig& q) const { return aspect_of(p, q.theta2, q.theta3); }
};

/// Aspects by flood fill of cells whose four corners share a strict det J
/// sign. Positive-determinant aspects are numbered first, then by first cell.
inline AspectMap compute_aspects(const RobotParams& p, int grid_n) {
  if (grid_n < 4) throw Error(ErrorKind::Precondition, "grid_n too small");
  AspectMap m;
  m.n = grid_n;
  if (p.joint_limits) {
    m.periodic = false;
    m.lo2 = (*p.joint_limits)[1].lo;
    m.hi2 = (*p.joint_limits)[1].hi;
    m.lo3 = (*p.joint_limits)[2].lo;
    m.hi3 = (*p.joint_limits)[2].hi;
  }
  const int n = grid_n;
  const int nn = m.periodic ? n : n + 1;  // corner nodes per axis
  std::vector<double> node(static_cast<std::size_t>(nn) * nn);
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nn; ++j)
      node[i * nn + j] = det_jacobian(p, m.lo2 + i * m.h2(), m.lo3 + j * m.h3());
  auto nd = [&](int i, int j) { return m.periodic ? node[(i % n) * nn + (j % n)] : node[i * nn + j]; };

  m.label.assign(static_cast<std::size_t>(n) * n, 0);
  m.sign.assign(m.label.size(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = nd(i, j), b = nd(i + 1, j), c = nd(i, j + 1), d = nd(i + 1, j + 1);
      if (a > 0 && b > 0 && c > 0 && d > 0) m.sign[m.index(i, j)] = 1;
      else if (a < 0 && b < 0 && c < 0 && d < 0) m.sign[m.index(i, j)] = -1;
    }

  std::vector<int> comp(m.label.size(), 0), comp_sign, comp_first;
  std::vector<int> stack;
  for (int s = 0; s < static_cast<int>(comp.size()); ++s) {
    if (!m.sign[s] || comp[s]) continue;
    const int id = static_cast<int>(comp_sign.size()) + 1;
    comp_sign.push_back(m.sign[s]);
    comp_first.push_back(s);
    comp[s] = id;
    stack.push_back(s);
    std::array<int, 4> nb{};
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int k = m.neighbours4(c, nb);
      for (int t = 0; t < k; ++t) {
        if (comp[nb[t]] || m.sign[nb[t]] != m.sign[c]) continue;
        comp[nb[t]] = id;
        stack.push_back(nb[t]);
      }
    }
  }
  std::vector<int> order(comp_sign.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (comp_sign[a] != comp_sign[b]) return comp_sign[a] > comp_sign[b];
    return comp_first[a] < comp_first[b];
  });
  std::vector<int> relabel(comp_sign.size() + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    relabel[order[k] + 1] = static_cast<int>(k) + 1;
    m.aspect_sign.push_back(comp_sign[order[k]]);
  }
  for (std::size_t c = 0; c < comp.size(); ++c) m.label[c] = relabel[comp[c]];
  m.count = static_cast<int>(comp_sign.size());
  return m;
}

/// Non-singular preimages, inside one aspect, of one internal boundary
/// segment: a chained polyline CS_{aspect, segment}.
struct CharSurface {
  int aspect = 0;
  int segment = 0;  // BS id
  std::vector<Point2> joint;
  std::vector<Point2> image;
};

struct CharSurfaceSet {
  std::vector<CharSurface> surfaces;
  std::vector<std::string> skipped;  // boundary samples with anomalous IK

  int count_for_aspect(int aspect) const {
    return static_cast<int>(std::count_if(surfaces.begin(), surfaces.end(),
                                          [&](const CharSurface& c) { return c.aspect == aspect; }));
  }
};

namespace detail {

inline double joint_step(const AspectMap& m, const Point2& a, const Point2& b) {
  return m.periodic ? torus_distance2(a[0], a[1], b[0], b[1]) : std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Non-singular preimages of a boundary point whose singular preimage is q0.
inline std::vector<Point2> regular_preimages(const RobotParams& p, const Point2& q0, double det_floor,
                                             const Tolerances& tol, bool& anomalous) {
  anomalous = false;
  const PlanarEval e = planar_eval(p, q0[0], q0[1]);
  std::vector<Point2> out;
  IkSolutionSet s;
  try {
    s = inverse_kinematics(p, IkTarget::planar(e.rho(), e.z), tol);
  } catch (const Error&) {
    anomalous = true;
    return out;
  }
  for (const IkSolution& sol : s.solutions) {
    if (torus_distance2(sol.q.theta2, sol.q.theta3, q0[0], q0[1]) < 1e-3) continue;
    if (std::abs(sol.det) < det_floor) continue;
    out.push_back({sol.q.theta2, sol.q.theta3});
  }
  return out;
}

}  // namespace detail

/// Characteristic surfaces of every aspect: for each internal boundary
/// segment BS_j, the non-singular preimages of its samples, chained by
/// continuity and assigned to aspects. Gaps between consecutive samples
/// are closed by subdividing the boundary parameter.
inline CharSurfaceSet characteristic_surfaces(const RobotParams& p, const AspectMap& aspects,
                                              const WorkspaceBoundary& boundary,
                                              const Tolerances& tol = default_tolerances()) {
  CharSurfaceSet out;
  const double det_floor = 1e-6 * det_scale(p, 64);
  const double max_jump = 4.0 * std::max(aspects.h2(), aspects.h3());

  for (const BoundarySegment& seg : boundary.segments) {
    struct Chain {
      int aspect;
      std::vector<Point2> joint;
      bool open = true;
    };
    std::vector<Chain> chains;

    auto attach = [&](const std::vector<Point2>& pre) {
      std::vector<char> used(chains.size(), 0);
      for (const Point2& x : pre) {
        const int asp = aspects.aspect_of(p, x[0], x[1]);
        if (!asp) continue;
        int best = -1;
        double bd = max_jump;
        for (std::size_t c = 0; c < chains.size(); ++c) {
          if (used[c] || !chains[c].open || chains[c].aspect != asp) continue;
          const double d = detail::joint_step(aspects, chains[c].joint.back(), x);
          if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
          }
        }
        if (best < 0) {
          chains.push_back({asp, {x}, true});
          used.push_back(1);
        } else {
          chains[best].joint.push_back(x);
          used[best] = 1;
        }
      }
    };

    // boundary samples, with midpoints inserted where preimages jump
    std::vector<Point2> samples = seg.joint;
    auto preimages_at = [&](const Point2& q) {
      bool bad = false;
      auto r = detail::regular_preimages(p, q, det_floor, tol, bad);
      if (bad) out.skipped.push_back("BS" + std::to_string(seg.id) + " sample at theta=(" + std::to_string(q[0]) + ", " + std::to_string(q[1]) + ")");
      return r;
    };
    std::vector<std::vector<Point2>> pre(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) pre[k] = preimages_at(samples[k]);

    auto jump = [&](const std::vector<Point2>& a, const std::vector<Point2>& b) {
      if (a.size() != b.size()) return true;
      for (const Point2& x : a) {
        double bd = 1e300;
        for (const Point2& y : b) bd = std::min(bd, detail::joint_step(aspects, x, y));
        if (bd > 0.5 * max_jump) return true;
      }
      return false;
    };
    for (int pass = 0; pass < 6; ++pass) {
      std::vector<Point2> ns;
      std::vector<std::vector<Point2>> np;
      bool changed = false;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        ns.push_back(samples[k]);
        np.push_back(pre[k]);
        if (k + 1 == samples.size()) break;
        if (!jump(pre[k], pre[k + 1])) continue;
        const Point2 mid = detail::project_to_curve(p, detail::lerp_torus(samples[k], samples[k + 1], 0.5));
        if (detail::joint_step(aspects, samples[k], samples[k + 1]) < 1e-9) continue;
        ns.push_back(mid);
        np.push_back(preimages_at(mid));
        changed = true;
      }
      samples = std::move(ns);
      pre = std::move(np);
      if (!changed) break;
    }

    for (std::size_t k = 0; k < samples.size(); ++k) attach(pre[k]);
    for (Chain& c : chains) {
      if (c.joint.size() < 2) continue;
      CharSurface cs;
      cs.aspect = c.aspect;
      cs.segment = seg.id;
      cs.joint = c.joint;
      for (const Point2& q : c.joint) {
        const PlanarEval e = planar_eval(p, q[0], q[1]);
        cs.image.push_back({e.rho(), e.z});
      }
      out.surfaces.push_back(std::move(cs));
    }
  }
  std::stable_sort(out.surfaces.begin(), out.surfaces.end(), [](const CharSurface& a, const CharSurface& b) {
    return a.aspect != b.aspect ? a.aspect < b.aspect : a.segment < b.segment;
  });
  return out;
}

/// Uniform raster of the (rho, z) half-plane section of the workspace.
struct WorkspaceGrid {
  int nr = 0, nz = 0;
  double rho_max = 1, z_min = -1, z_max = 1;

  double hr() const { return rho_max / nr; }
  double hz() const { return (z_max - z_min) / nz; }
  Point2 center(int a, int b) const { return {(a + 0.5) * hr(), z_min + (b + 0.5) * hz()}; }
  Point2 center(int idx) const { return center(idx / nz, idx % nz); }
  int index(int a, int b) const { return a * nz + b; }
  int size() const { return nr * nz; }
  int cell_of(double rho, double z) const {
    if (rho < 0 || rho >= rho_max || z < z_min || z >= z_max) return -1;
    const int a = std::min(nr - 1, static_cast<int>(rho / hr()));
    const int b = std::min(nz - 1, static_cast<int>((z - z_min) / hz()));
    return index(a, b);
  }

  static WorkspaceGrid for_robot(const RobotParams& p, int n) {
    WorkspaceGrid g;
    const double r = 1.02 * reach_bound(p);
    g.nr = n;
    g.nz = 2 * n;
    g.rho_max = r;
    g.z_min = -r;
    g.z_max = r;
    return g;
  }
};

struct WorkspaceRegion {
  int id = 0;
  int ik_count = 0;
  int cells = 0;
};

/// A basic region Ra: a component of an aspect cut along its
/// characteristic surfaces.
struct BasicRegion {
  int aspect = 0;
  int index = 0;   // j of Ra_{aspect, j}
  int cells = 0;
  int first_cell = 0;
  int region = 0;  // workspace region id (1-based), 0 if unresolved
  double vote_share = 0;
  std::string label() const { return "Ra" + std::to_string(aspect) + std::to_string(index); }
};

struct RegionPartition {
  AspectMap aspects;
  std::vector<int> ra;        // per joint cell: 1-based index into regions_ra, 0 barrier/singular
  std::vector<char> barrier;  // per joint cell
  std::vector<int> barrier_owner;  // basic region on the center's side of the surfaces, 0 if undecided
  std::vector<std::vector<int>> surface_cells;  // barrier cells of each characteristic surface
  std::vector<std::vector<int>> surface_ra;     // basic regions bordering each surface
  std::vector<BasicRegion> basic;
  WorkspaceGrid ws;
  std::vector<int> ws_count;   // IK count per workspace cell
  std::vector<int> ws_region;  // 1-based workspace region per cell, 0 outside
  std::vector<WorkspaceRegion> regions;
  std::vector<std::vector<Point2>> ws_solutions;  // (theta2, theta3) of the IK solutions per cell

  int ra_of(int cell) const { return ra[cell]; }
};

namespace detail {

/// Cells crossed by a joint-space polyline (sub-cell stepping). When `hits`
/// is given, every cell also records the polyline segments crossing it.
inline void rasterize_polyline(const AspectMap& m, const std::vector<Point2>& pl, std::vector<char>& mark,
                               std::vector<std::vector<std::array<Point2, 2>>>* hits = nullptr,
                               std::vector<int>* cells = nullptr) {
  const double step = 0.25 * std::min(m.h2(), m.h3());
  auto put = [&](int c, std::size_t k) {
    if (c < 0) return;
    mark[c] = 1;
    if (cells && (cells->empty() || cells->back() != c)) cells->push_back(c);
    if (!hits || k + 1 >= pl.size()) return;
    auto& v = (*hits)[c];
    const std::array<Point2, 2> seg{pl[k], pl[k + 1]};
    if (v.empty() || v.back()[0] != seg[0]) v.push_back(seg);
  };
  for (std::size_t k = 0; k < pl.size(); ++k) {
    put(m.cell_of(pl[k][0], pl[k][1]), k);
    if (k + 1 == pl.size()) break;
    const Point2 d = m.periodic ? torus_delta(pl[k], pl[k + 1])
                                : Point2{pl[k + 1][0] - pl[k][0], pl[k + 1][1] - pl[k][1]};
    const int sub = static_cast<int>(std::ceil(std::hypot(d[0], d[1]) / step));
    for (int s = 1; s <= sub; ++s) {
      const double t = static_cast<double>(s) / sub;
      put(m.cell_of(pl[k][0] + t * d[0], pl[k][1] + t * d[1]), k);
    }
  }
}

inline double cross2(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Whether segment p1-p2 meets segment a-b; a and b are unwrapped next to p1
/// on the torus.
inline bool segments_cross(const AspectMap& m, const Point2& p1, const Point2& p2, Point2 a, Point2 b) {
  if (m.periodic) {
    const Point2 da = torus_delta(p1, a);
    const Point2 ab = torus_delta(a, b);
    a = {p1[0] + da[0], p1[1] + da[1]};
    b = {a[0] + ab[0], a[1] + ab[1]};
  }
  const double d1 = cross2(a, b, p1), d2 = cross2(a, b, p2);
  const double d3 = cross2(p1, p2, a), d4 = cross2(p1, p2, b);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace detail

/// Cuts each aspect along the rasterized characteristic surfaces into basic
/// regions, rasterizes the workspace IK counts, and maps every basic region
/// to the workspace region it covers (majority of sampled cells).
inline RegionPartition partition_regions(const RobotParams& p, const AspectMap& aspects,
                                         const CharSurfaceSet& cs, int ws_n = 256,
                                         const Tolerances& tol = default_tolerances()) {
  RegionPartition rp;
  rp.aspects = aspects;
  const std::size_t nc = aspects.label.size();
  rp.barrier.assign(nc, 0);
  std::vector<std::vector<std::array<Point2, 2>>> hits(nc);
  rp.surface_cells.resize(cs.surfaces.size());
  for (std::size_t k = 0; k < cs.surfaces.size(); ++k) {
    detail::rasterize_polyline(aspects, cs.surfaces[k].joint, rp.barrier, &hits, &rp.surface_cells[k]);
    std::sort(rp.surface_cells[k].begin(), rp.surface_cells[k].end());
    rp.surface_cells[k].erase(std::unique(rp.surface_cells[k].begin(), rp.surface_cells[k].end()),
                              rp.surface_cells[k].end());
  }

  // flood fill inside aspects, barriers excluded
  std::vector<int> comp(nc, 0);
  std::vector<int> comp_aspect, comp_cells, comp_first;
  std::vector<int> stack;
  for (int s = 0; s < static_cast<int>(nc); ++s) {
    if (!aspects.label[s] || rp.barrier[s] || comp[s]) continue;
    const int id = static_cast<int>(comp_aspect.size()) + 1;
    comp_aspect.push_back(aspects.label[s]);
    comp_first.push_back(s);
    comp_cells.push_back(0);
    comp[s] = id;
    stack.push_back(s);
    std::array<int, 4> nb{};
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      ++comp_cells[id - 1];
      const int k = aspects.neighbours4(c, nb);
      for (int t = 0; t < k; ++t) {
        const int q = nb[t];
        if (comp[q] || rp.barrier[q] || aspects.label[q] != aspects.label[c]) continue;
        comp[q] = id;
        stack.push_back(q);
      }
    }
  }
  // slivers trapped between rasterized surfaces are absorbed into the barrier
  std::map<int, int> aspect_cells;
  for (std::size_t c = 0; c < nc; ++c)
    if (aspects.label[c]) ++aspect_cells[aspects.label[c]];
  std::vector<char> keep(comp_aspect.size(), 0);
  for (std::size_t k = 0; k < comp_aspect.size(); ++k) {
    const int min_cells = std::max(8, static_cast<int>(0.002 * aspect_cells[comp_aspect[k]]));
    keep[k] = comp_cells[k] >= min_cells;
  }
  for (std::size_t c = 0; c < nc; ++c)
    if (comp[c] && !keep[comp[c] - 1]) {
      comp[c] = 0;
      rp.barrier[c] = 1;
    }

  // workspace raster
  rp.ws = WorkspaceGrid::for_robot(p, ws_n);
  rp.ws_count.assign(rp.ws.size(), 0);
  rp.ws_solutions.assign(rp.ws.size(), {});
  for (int c = 0; c < rp.ws.size(); ++c) {
    const Point2 x = rp.ws.center(c);
    try {
      const IkSolutionSet s = inverse_kinematics(p, IkTarget::planar(x[0], x[1]), tol);
      int cnt = 0;
      for (const auto& sol : s.solutions) {
        cnt += sol.multiplicity;
        rp.ws_solutions[c].push_back({sol.q.theta2, sol.q.theta3});
      }
      rp.ws_count[c] = cnt;
    } catch (const Error&) {
      rp.ws_count[c] = 0;
    }
  }
  rp.ws_region.assign(rp.ws.size(), 0);
  for (int s = 0; s < rp.ws.size(); ++s) {
    if (rp.ws_region[s] || rp.ws_count[s] == 0) continue;
    WorkspaceRegion reg;
    reg.id = static_cast<int>(rp.regions.size()) + 1;
    reg.ik_count = rp.ws_count[s];
    rp.ws_region[s] = reg.id;
    stack.push_back(s);
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      ++reg.cells;
      const int a = c / rp.ws.nz, b = c % rp.ws.nz;
      const int nb[4][2] = {{a - 1, b}, {a + 1, b}, {a, b - 1}, {a, b + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= rp.ws.nr || q[1] >= rp.ws.nz) continue;
        const int k = rp.ws.index(q[0], q[1]);
        if (rp.ws_region[k] || rp.ws_count[k] != reg.ik_count) continue;
        rp.ws_region[k] = reg.id;
        stack.push_back(k);
      }
    }
    rp.regions.push_back(reg);
  }
  // a region tapering into a cusp is thinner than a cell near its tip and
  // breaks into fragments; each joins the nearest large region of equal count
  {
    const int floor_cells = std::max(8, rp.ws.size() / 10000);
    std::vector<int> target(rp.regions.size() + 1);
    std::iota(target.begin(), target.end(), 0);
    std::vector<std::vector<int>> cells_of(rp.regions.size() + 1);
    for (int c = 0; c < rp.ws.size(); ++c)
      if (rp.ws_region[c]) cells_of[rp.ws_region[c]].push_back(c);
    for (const WorkspaceRegion& r : rp.regions) {
      if (r.cells >= floor_cells) continue;
      const int c0 = cells_of[r.id].front();
      const int a0 = c0 / rp.ws.nz, b0 = c0 % rp.ws.nz;
      long best = std::numeric_limits<long>::max();
      for (const WorkspaceRegion& o : rp.regions) {
        if (o.cells < floor_cells || o.ik_count != r.ik_count) continue;
        for (const int c : cells_of[o.id]) {
          const long da = c / rp.ws.nz - a0, db = c % rp.ws.nz - b0;
          if (da * da + db * db < best) {
            best = da * da + db * db;
            target[r.id] = o.id;
          }
        }
      }
    }
    std::vector<int> renum(rp.regions.size() + 1, 0);
    std::vector<WorkspaceRegion> merged;
    for (const WorkspaceRegion& r : rp.regions) {
      if (target[r.id] != r.id) continue;
      renum[r.id] = static_cast<int>(merged.size()) + 1;
      merged.push_back(r);
      merged.back().id = renum[r.id];
      merged.back().cells = 0;
    }
    for (int c = 0; c < rp.ws.size(); ++c) {
      if (!rp.ws_region[c]) continue;
      rp.ws_region[c] = renum[target[rp.ws_region[c]]];
      ++merged[rp.ws_region[c] - 1].cells;
    }
    rp.regions = std::move(merged);
  }

  // Ra -> workspace region by majority over sampled cells
  std::vector<std::vector<int>> members(comp_aspect.size());
  for (std::size_t c = 0; c < nc; ++c)
    if (comp[c]) members[comp[c] - 1].push_back(static_cast<int>(c));
  std::vector<BasicRegion> basic;
  std::vector<int> comp_to_basic(comp_aspect.size(), -1);
  for (std::size_t k = 0; k < comp_aspect.size(); ++k) {
    if (!keep[k]) continue;
    BasicRegion b;
    b.aspect = comp_aspect[k];
    b.cells = comp_cells[k];
    b.first_cell = comp_first[k];
    std::map<int, int> votes;
    const auto& mem = members[k];
    const std::size_t stride = std::max<std::size_t>(1, mem.size() / 400);
    int total = 0;
    for (std::size_t t = 0; t < mem.size(); t += stride) {
      const Point2 q = aspects.center(mem[t]);
      const PlanarEval e = planar_eval(p, q[0], q[1]);
      const int wc = rp.ws.cell_of(e.rho(), e.z);
      if (wc < 0 || !rp.ws_region[wc]) continue;
      ++votes[rp.ws_region[wc]];
      ++total;
    }
    int best = 0, bv = 0;
    for (const auto& [reg, v] : votes)
      if (v > bv) {
        bv = v;
        best = reg;
      }
    b.region = best;
    b.vote_share = total ? static_cast<double>(bv) / total : 0.0;
    comp_to_basic[k] = static_cast<int>(basic.size());
    basic.push_back(b);
  }
  // order inside each aspect: richer workspace region first, then first cell
  auto reg_count = [&](int r) { return r ? rp.regions[r - 1].ik_count : 0; };
  std::vector<int> order(basic.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (basic[a].aspect != basic[b].aspect) return basic[a].aspect < basic[b].aspect;
    if (reg_count(basic[a].region) != reg_count(basic[b].region))
      return reg_count(basic[a].region) > reg_count(basic[b].region);
    return basic[a].first_cell < basic[b].first_cell;
  });
  std::vector<int> basic_rank(basic.size());
  std::map<int, int> per_aspect;
  for (std::size_t r = 0; r < order.size(); ++r) {
    BasicRegion b = basic[order[r]];
    b.index = ++per_aspect[b.aspect];
    basic_rank[order[r]] = static_cast<int>(r);
    rp.basic.push_back(b);
  }
  rp.ra.assign(nc, 0);
  for (std::size_t c = 0; c < nc; ++c)
    if (comp[c] && comp_to_basic[comp[c] - 1] >= 0) rp.ra[c] = basic_rank[comp_to_basic[comp[c] - 1]] + 1;

  // a barrier cell belongs to the basic region on the same side of the
  // surfaces as its center: spread from the regions across cell-center
  // links that cross no surface segment
  rp.barrier_owner.assign(nc, 0);
  auto open_link = [&](int c1, int c2) {
    const Point2 p1 = aspects.center(c1);
    Point2 p2 = aspects.center(c2);
    if (aspects.periodic) {
      const Point2 d = detail::torus_delta(p1, p2);
      p2 = {p1[0] + d[0], p1[1] + d[1]};
    }
    for (int c : {c1, c2})
      for (const auto& sg : hits[c])
        if (detail::segments_cross(aspects, p1, p2, sg[0], sg[1])) return false;
    return true;
  };
  std::vector<int> frontier;
  std::array<int, 4> nb4{};
  for (std::size_t c = 0; c < nc; ++c) {
    if (!rp.barrier[c] || !aspects.label[c]) continue;
    const int k = aspects.neighbours4(static_cast<int>(c), nb4);
    for (int t = 0; t < k; ++t) {
      const int q = nb4[t];
      if (rp.ra[q] && aspects.label[q] == aspects.label[c] && open_link(static_cast<int>(c), q)) {
        if (!rp.barrier_owner[c] || rp.ra[q] < rp.barrier_owner[c]) rp.barrier_owner[c] = rp.ra[q];
      }
    }
    if (rp.barrier_owner[c]) frontier.push_back(static_cast<int>(c));
  }
  // surfaces meet at cusp preimages in wedges narrower than a cell
  std::vector<char> junction(nc, 0);
  for (const CharSurface& s : cs.surfaces) {
    if (s.joint.empty()) continue;
    for (const Point2& e : {s.joint.front(), s.joint.back()})
      for (int di = -2; di <= 2; ++di)
        for (int dj = -2; dj <= 2; ++dj) {
          const int c = aspects.cell_of(e[0] + di * aspects.h2(), e[1] + dj * aspects.h3());
          if (c >= 0 && rp.barrier[c]) junction[c] = 1;
        }
  }
  for (std::size_t c = 0; c < nc; ++c)
    if (junction[c]) rp.barrier_owner[c] = 0;
  std::erase_if(frontier, [&](int c) { return junction[c] != 0; });
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int c : frontier) {
      const int k = aspects.neighbours4(c, nb4);
      for (int t = 0; t < k; ++t) {
        const int q = nb4[t];
        if (!rp.barrier[q] || rp.barrier_owner[q] || junction[q] || aspects.label[q] != aspects.label[c]) continue;
        if (!open_link(c, q)) continue;
        rp.barrier_owner[q] = rp.barrier_owner[c];
        next.push_back(q);
      }
    }
    frontier = std::move(next);
  }

  rp.surface_ra.resize(cs.surfaces.size());
  for (std::size_t k = 0; k < cs.surfaces.size(); ++k) {
    auto& v = rp.surface_ra[k];
    for (int c : rp.surface_cells[k]) {
      if (rp.barrier_owner[c]) v.push_back(rp.barrier_owner[c]);
      const int n = aspects.neighbours4(c, nb4);
      for (int t = 0; t < n; ++t)
        if (rp.ra[nb4[t]]) v.push_back(rp.ra[nb4[t]]);
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return rp;
}

/// Maximal uniqueness domain: an aspect minus the closures of the basic
/// regions it drops.
struct UniquenessDomain {
  int id = 0;
  int aspect = 0;
  std::vector<int> kept;     // 1-based basic region indices (into partition.basic)
  std::vector<int> removed;
  std::vector<char> mask;    // per joint cell
  int cells = 0;
  int components = 0;
  std::string description;
};

namespace detail {

inline int count_components(const AspectMap& m, const std::vector<char>& mask) {
  std::vector<char> seen(mask.size(), 0);
  std::vector<int> stack;
  int comps = 0;
  std::array<int, 4> nb{};
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s] || seen[s]) continue;
    ++comps;
    seen[s] = 1;
    stack.push_back(static_cast<int>(s));
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int k = m.neighbours4(c, nb);
      for (int t = 0; t < k; ++t)
        if (mask[nb[t]] && !seen[nb[t]]) {
          seen[nb[t]] = 1;
          stack.push_back(nb[t]);
        }
    }
  }
  return comps;
}

}  // namespace detail

/// For every aspect and every choice of one survivor among the basic
/// regions that cover the same workspace region, the aspect minus the
/// closures of the others. Aspects without such duplicates are their own
/// uniqueness domain.
inline std::vector<UniquenessDomain> uniqueness_domains(const RegionPartition& rp) {
  const AspectMap& m = rp.aspects;
  std::vector<UniquenessDomain> out;
  for (int a = 1; a <= m.count; ++a) {
    // groups of basic regions of aspect a by workspace region
    std::map<int, std::vector<int>> groups;
    std::vector<int> own;
    for (std::size_t k = 0; k < rp.basic.size(); ++k) {
      if (rp.basic[k].aspect != a) continue;
      own.push_back(static_cast<int>(k) + 1);
      groups[rp.basic[k].region].push_back(static_cast<int>(k) + 1);
    }
    std::vector<std::vector<int>> dup;
    for (auto& [reg, v] : groups)
      if (reg && v.size() > 1) dup.push_back(v);
    // enumerate survivor choices, last group varying fastest
    std::size_t combos = 1;
    for (const auto& g : dup) combos *= g.size();
    for (std::size_t combo = 0; combo < combos; ++combo) {
      UniquenessDomain u;
      u.aspect = a;
      std::size_t rem = combo;
      std::vector<int> removed;
      for (std::size_t gi = dup.size(); gi-- > 0;) {
        const auto& g = dup[gi];
        const std::size_t pick = rem % g.size();
        rem /= g.size();
        for (std::size_t t = 0; t < g.size(); ++t)
          if (t != pick) removed.push_back(g[t]);
      }
      std::sort(removed.begin(), removed.end());
      for (int k : own)
        if (!std::binary_search(removed.begin(), removed.end(), k)) u.kept.push_back(k);
      u.removed = removed;

      u.mask.assign(m.label.size(), 0);
      for (std::size_t c = 0; c < m.label.size(); ++c)
        if (m.label[c] == a) u.mask[c] = 1;
      if (!removed.empty()) {
        // closure: removed cells, barrier cells on their side, every cell of
        // the surfaces bounding them, one cell of margin around those, and
        // barrier cells whose side is undecided
        auto is_removed = [&](int r) { return r && std::binary_search(removed.begin(), removed.end(), r); };
        std::vector<char> core(m.label.size(), 0);
        for (std::size_t k = 0; k < rp.surface_ra.size(); ++k)
          if (std::any_of(rp.surface_ra[k].begin(), rp.surface_ra[k].end(), is_removed))
            for (int c : rp.surface_cells[k])
              if (m.label[c] == a) core[c] = 1;
        for (std::size_t c = 0; c < m.label.size(); ++c) {
          if (m.label[c] != a) continue;
          if (is_removed(rp.ra[c]) || (rp.barrier[c] && is_removed(rp.barrier_owner[c]))) core[c] = 1;
          if (rp.barrier[c] && !rp.barrier_owner[c]) u.mask[c] = 0;
        }
        std::array<int, 8> nb{};
        for (std::size_t c = 0; c < m.label.size(); ++c) {
          if (!core[c]) continue;
          u.mask[c] = 0;
          const int k = m.neighbours8(static_cast<int>(c), nb);
          for (int t = 0; t < k; ++t)
            if (rp.barrier[nb[t]]) u.mask[nb[t]] = 0;
        }
      }
      u.cells = static_cast<int>(std::count(u.mask.begin(), u.mask.end(), 1));
      u.components = detail::count_components(m, u.mask);
      u.description = "A" + std::to_string(a);
      for (int r : removed) u.description += " - C(" + rp.basic[r - 1].label() + ")";
      out.push_back(std::move(u));
    }
  }
  // survivors in basic-region order: for the example robot
  // Qu1 = A1 - C(Ra12), Qu2 = A1 - C(Ra11), Qu3 = A2 - C(Ra22), Qu4 = A2 - C(Ra21)
  for (std::size_t k = 0; k < out.size(); ++k) out[k].id = static_cast<int>(k) + 1;
  return out;
}

/// Cells of a mask whose 8 neighbours are all in the mask.
inline std::vector<char> interior_cells(const AspectMap& m, const std::vector<char>& mask) {
  std::vector<char> in(mask.size(), 0);
  std::array<int, 8> nb{};
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (!mask[c]) continue;
    const int k = m.neighbours8(static_cast<int>(c), nb);
    bool ok = k == 8;
    for (int t = 0; ok && t < k; ++t) ok = mask[nb[t]];
    in[c] = ok;
  }
  return in;
}

struct InjectivityReport {
  int samples = 0;
  int violations = 0;
  std::vector<std::array<double, 4>> examples;  // (theta2, theta3) pairs with one image
};

/// Samples interior configurations of a uniqueness domain and checks that
/// no other inverse solution of their image lies in the domain interior.
inline InjectivityReport check_injectivity(const RobotParams& p, const AspectMap& m,
                                           const UniquenessDomain& u, int samples, unsigned seed,
                                           const Tolerances& tol = default_tolerances()) {
  InjectivityReport r;
  const std::vector<char> in = interior_cells(m, u.mask);
  std::vector<int> cells;
  for (std::size_t c = 0; c < in.size(); ++c)
    if (in[c]) cells.push_back(static_cast<int>(c));
  if (cells.empty()) return r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    const int c = cells[pick(rng)];
    const Point2 cc = m.center(c);
    const double t2 = cc[0] + (frac(rng) - 0.5) * m.h2();
    const double t3 = cc[1] + (frac(rng) - 0.5) * m.h3();
    const PlanarEval e = planar_eval(p, t2, t3);
    IkSolutionSet sols;
    try {
      sols = inverse_kinematics(p, IkTarget::planar(e.rho(), e.z), tol);
    } catch (const Error&) {
      continue;
    }
    ++r.samples;
    for (const auto& sol : sols.solutions) {
      if (torus_distance2(sol.q.theta2, sol.q.theta3, t2, t3) <= 1e-6) continue;
      const int oc = m.cell_of(sol.q.theta2, sol.q.theta3);
      if (oc >= 0 && in[oc]) {
        ++r.violations;
        if (r.examples.size() < 8) r.examples.push_back({t2, t3, sol.q.theta2, sol.q.theta3});
        break;
      }
    }
  }
  return r;
}

struct FeasibleRegion {
  int id = 0;       // matches the uniqueness domain id
  int aspect = 0;
  std::vector<char> mask;   // per workspace cell: 1 in f(Qu), 2 slit, 0 outside
  std::vector<int> slits;   // BS ids
  int cells = 0;
};

/// Workspace images of the uniqueness domains. Internal boundary segments
/// whose characteristic surface in the aspect lies mostly in the removed
/// closure cannot be crossed inside the region and are marked as slits.
inline std::vector<FeasibleRegion> feasible_regions(const RobotParams& p, const RegionPartition& rp,
                                                    const std::vector<UniquenessDomain>& qu,
                                                    const CharSurfaceSet& cs,
                                                    const WorkspaceBoundary& boundary) {
  std::vector<FeasibleRegion> out;
  const AspectMap& m = rp.aspects;
  for (const UniquenessDomain& u : qu) {
    FeasibleRegion w;
    w.id = u.id;
    w.aspect = u.aspect;
    w.mask.assign(rp.ws.size(), 0);
    for (int c = 0; c < rp.ws.size(); ++c) {
      for (const Point2& q : rp.ws_solutions[c]) {
        const int jc = m.cell_of(q[0], q[1]);
        if (jc >= 0 && u.mask[jc]) {
          w.mask[c] = 1;
          break;
        }
      }
    }
    if (!u.removed.empty()) {
      for (const CharSurface& s : cs.surfaces) {
        if (s.aspect != u.aspect) continue;
        int inside = 0;
        for (const Point2& q : s.joint) {
          const int jc = m.cell_of(q[0], q[1]);
          if (jc >= 0 && !u.mask[jc]) ++inside;
        }
        if (2 * inside > static_cast<int>(s.joint.size()) &&
            std::find(w.slits.begin(), w.slits.end(), s.segment) == w.slits.end())
          w.slits.push_back(s.segment);
      }
      std::sort(w.slits.begin(), w.slits.end());
      for (const BoundarySegment& seg : boundary.segments) {
        if (!std::binary_search(w.slits.begin(), w.slits.end(), seg.id)) continue;
        for (std::size_t k = 0; k + 1 < seg.image.size(); ++k) {
          const Point2 a = seg.image[k], b = seg.image[k + 1];
          const int sub = 1 + static_cast<int>(4.0 * std::hypot(b[0] - a[0], b[1] - a[1]) /
                                               std::min(rp.ws.hr(), rp.ws.hz()));
          for (int t = 0; t <= sub; ++t) {
            const double f = static_cast<double>(t) / sub;
            const int c = rp.ws.cell_of(a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]));
            if (c >= 0 && w.mask[c]) w.mask[c] = 2;
          }
        }
      }
    }
    w.cells = static_cast<int>(std::count(w.mask.begin(), w.mask.end(), 1));
    out.push_back(std::move(w));
  }
  (void)p;
  return out;
}

/// Everything topological for one robot at one resolution.
struct TopologyAnalysis {
  SingularitySet singularities;
  AspectMap aspects;
  CharSurfaceSet char_surfaces;
  RegionPartition partition;
  std::vector<UniquenessDomain> uniqueness;
  std::vector<FeasibleRegion> feasible;
};

inline TopologyAnalysis analyze_topology(const RobotParams& p, int grid_n, int ws_n = 256,
                                         const Tolerances& tol = default_tolerances()) {
  TopologyAnalysis t;
  t.singularities = analyze_singularities(p, grid_n, tol);
  t.aspects = compute_aspects(p, grid_n);
  t.char_surfaces = characteristic_surfaces(p, t.aspects, t.singularities.boundary, tol);
  t.partition = partition_regions(p, t.aspects, t.char_surfaces, ws_n, tol);
  t.uniqueness = uniqueness_domains(t.partition);
  t.feasible = feasible_regions(p, t.partition, t.uniqueness, t.char_surfaces, t.singularities.boundary);
  return t;
}

}  // namespace cuspidal
