#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "cuspidal/config.hpp"
#include "cuspidal/error.hpp"

namespace cuspidal {

/// a t^4 + b t^3 + c t^2 + d t + e
struct QuarticPoly {
  double a = 0, b = 0, c = 0, d = 0, e = 0;
  // absolute rounding error carried by each coefficient (cancellation in its
  // construction); 0 when the coefficients are exact
  double noise = 0;

  /// Coefficients in ascending order of power.
  std::array<double, 5> ascending() const { return {e, d, c, b, a}; }

  double max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), std::abs(e)});
  }

  /// True degree after stripping leading coefficients below 1e-12 * max|coeff|;
  /// -1 for the zero polynomial.
  int degree() const {
    const double m = max_abs();
    if (m == 0.0) return -1;
    const auto co = ascending();
    for (int k = 4; k >= 0; --k) {
      if (std::abs(co[k]) > 1e-12 * m) return k;
    }
    return -1;
  }

  double operator()(double t) const { return (((a * t + b) * t + c) * t + d) * t + e; }

  bool finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d) &&
           std::isfinite(e);
  }
};

struct RootCluster {
  double t = 0.0;
  int multiplicity = 1;
};

namespace poly {

using Coeffs = std::vector<double>;  // ascending powers

inline double eval(const Coeffs& c, double t) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * t + *it;
  return r;
}

/// sum |c_i| |t|^i, the natural magnitude for rounding error in eval().
inline double eval_magnitude(const Coeffs& c, double t) {
  double r = 0.0;
  const double at = std::abs(t);
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * at + std::abs(*it);
  return r;
}

inline Coeffs derivative(const Coeffs& c) {
  if (c.size() <= 1) return {0.0};
  Coeffs d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

inline Coeffs from_quartic(const QuarticPoly& q, int degree) {
  const auto a = q.ascending();
  return Coeffs(a.begin(), a.begin() + degree + 1);
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Taylor coefficients of c about t0: c(t) = sum_j out[j] (t - t0)^j.
inline Coeffs taylor_shift(const Coeffs& c, double t0) {
  Coeffs w = c;
  const int n = static_cast<int>(w.size()) - 1;
  for (int k = 0; k < n; ++k) {
    for (int i = n - 1; i >= k; --i) w[i] += t0 * w[i + 1];
  }
  return w;
}

/// Rounding-level magnitude of each Taylor coefficient at t0, given an
/// absolute error coeff_noise already present in every coefficient.
inline Coeffs taylor_noise(const Coeffs& c, double t0, double coeff_noise = 0.0) {
  const int n = static_cast<int>(c.size()) - 1;
  Coeffs out(n + 1, 0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int j = 0; j <= n; ++j) {
    double s = 0.0, w = 0.0;
    for (int i = j; i <= n; ++i) {
      const double k = binomial(i, j) * std::pow(std::abs(t0), i - j);
      s += k * std::abs(c[i]);
      w += k;
    }
    out[j] = 16.0 * (n + 1) * eps * s + coeff_noise * w;
  }
  return out;
}

/// Largest m such that c is, near t0, consistent with m roots inside a disc
/// of the given radius: |c_j| <= C(m, j) radius^(m-j) |c_m| + noise_j for all
/// j < m, where c_j are the Taylor coefficients at t0. Returns 0 when t0 is
/// not a root at all.
inline int cluster_multiplicity(const Coeffs& c, double t0, double radius,
                                double coeff_noise = 0.0) {
  const int n = static_cast<int>(c.size()) - 1;
  const Coeffs tc = taylor_shift(c, t0);
  const Coeffs nz = taylor_noise(c, t0, coeff_noise);
  for (int m = n; m >= 1; --m) {
    bool ok = std::abs(tc[m]) > nz[m];
    for (int j = 0; ok && j < m; ++j) {
      const double bound = binomial(m, j) * std::pow(radius, m - j) * std::abs(tc[m]) + nz[j];
      ok = std::abs(tc[j]) <= bound;
    }
    if (ok) return m;
  }
  return 0;
}

/// Root inside [lo, hi] where c changes sign; safeguarded Newton.
inline double bracketed_root(const Coeffs& c, double lo, double hi) {
  const Coeffs dc = derivative(c);
  double flo = eval(c, lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const double fx = eval(c, x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    const double d = eval(dc, x);
    double nx = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    x = nx;
  }
  return x;
}

/// Distinct real roots of c (leading coefficient nonzero), ascending, with
/// roots closer than tau * max(1, |t|) merged.
inline std::vector<double> isolate_real_roots(const Coeffs& c, double tau) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0) return {};
  if (n == 1) return {-c[0] / c[1]};

  const std::vector<double> crit = isolate_real_roots(derivative(c), tau);
  double bound = 0.0;
  for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i] / c[n]));
  bound = 1.0 + bound;

  std::vector<double> pts{-bound};
  for (double x : crit) {
    if (x > -bound && x < bound) pts.push_back(x);
  }
  pts.push_back(bound);

  std::vector<double> roots;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double fl = eval(c, pts[k]);
    const double fr = eval(c, pts[k + 1]);
    if (fl == 0.0 || fr == 0.0) continue;  // handled as critical-point roots below
    if ((fl < 0.0) != (fr < 0.0)) roots.push_back(bracketed_root(c, pts[k], pts[k + 1]));
  }
  for (double x : crit) {
    if (std::abs(eval(c, x)) <= 16.0 * (n + 1) * eps * eval_magnitude(c, x)) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());

  std::vector<double> merged;
  std::vector<int> count;
  for (double r : roots) {
    if (!merged.empty() && std::abs(r - merged.back()) <= tau * std::max(1.0, std::abs(r))) {
      const int k = count.back();
      merged.back() = (merged.back() * k + r) / (k + 1);
      ++count.back();
    } else {
      merged.push_back(r);
      count.push_back(1);
    }
  }
  return merged;
}

/// Polynomial with roots at the given values, times `lead`.
inline Coeffs from_roots(const std::vector<double>& roots, double lead = 1.0) {
  Coeffs c{lead};
  for (double r : roots) {
    Coeffs n(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      n[i + 1] += c[i];
      n[i] -= r * c[i];
    }
    c = std::move(n);
  }
  return c;
}

inline Coeffs multiply(const Coeffs& a, const Coeffs& b) {
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Coeffs add(const Coeffs& a, const Coeffs& b, double sb = 1.0) {
  Coeffs out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += sb * b[i];
  return out;
}

}  // namespace poly

namespace poly {

/// Radius within which rounding noise alone makes t0 look like an m-fold root.
inline double noise_radius(const Coeffs& c, double t0, int m, double coeff_noise) {
  const Coeffs tc = taylor_shift(c, t0);
  const Coeffs nz = taylor_noise(c, t0, coeff_noise);
  if (tc[m] == 0.0) return 0.0;
  double r = 0.0;
  for (int j = 0; j < m; ++j)
    r = std::max(r, std::pow(nz[j] / (binomial(m, j) * std::abs(tc[m])), 1.0 / (m - j)));
  return r;
}

}  // namespace poly

/// All real roots of a polynomial of degree 1..4, ascending. Roots closer than
/// the clustering tolerance come back as one entry with its multiplicity; each
/// location is polished (multiple roots via the (m-1)-th derivative).
inline std::vector<RootCluster> solve_quartic(const QuarticPoly& q,
                                              const Tolerances& tol = default_tolerances()) {
  if (!q.finite()) throw Error(ErrorKind::InvalidInput, "non-finite polynomial coefficients");
  const int deg = q.degree();
  if (deg < 1) throw Error(ErrorKind::Precondition, "solve_quartic needs degree >= 1");

  const poly::Coeffs c = poly::from_quartic(q, deg);
  const std::vector<double> locs = poly::isolate_real_roots(c, tol.root_cluster);

  std::vector<RootCluster> out;
  for (double t : locs) {
    const double radius = tol.root_cluster * std::max(1.0, std::abs(t));
    int m = std::max(1, poly::cluster_multiplicity(c, t, radius, q.noise));
    if (m >= 2) {
      poly::Coeffs dm = c;
      for (int k = 0; k < m - 1; ++k) dm = poly::derivative(dm);
      const poly::Coeffs dd = poly::derivative(dm);
      double x = t;
      for (int it = 0; it < 20; ++it) {
        const double f = poly::eval(dm, x), fp = poly::eval(dd, x);
        if (fp == 0.0) break;
        const double nx = x - f / fp;
        if (std::abs(nx - t) > radius) break;
        if (nx == x) break;
        x = nx;
      }
      if (std::abs(poly::eval(c, x)) <= std::abs(poly::eval(c, t))) t = x;
    }
    out.push_back({t, m});
  }
  // a multiple root perturbed by rounding can also surface as separate simple
  // roots next to it; fold those into the cluster
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].multiplicity < 2) continue;
    const RootCluster center = out[k];
    const double r = 2.0 * poly::noise_radius(c, center.t, center.multiplicity, q.noise);
    std::erase_if(out, [&](const RootCluster& o) {
      return o.t != center.t && o.multiplicity <= center.multiplicity && std::abs(o.t - center.t) <= r;
    });
    k = static_cast<std::size_t>(std::find_if(out.begin(), out.end(),
                                              [&](const RootCluster& o) { return o.t == center.t; }) -
                                 out.begin());
  }
  int total = 0;
  for (const auto& r : out) total += r.multiplicity;
  while (total > deg) {
    auto it = std::max_element(out.begin(), out.end(),
                               [](const RootCluster& a, const RootCluster& b) { return a.multiplicity < b.multiplicity; });
    --it->multiplicity;
    --total;
  }
  return out;
}

/// Multiplicity of the root cluster of q at t within `radius` (0 if t is not
/// a root). For |t| > 1 the test runs on the reversed polynomial in s = 1/t
/// with the same radius, which keeps roots near theta3 = pi well scaled.
inline int root_multiplicity_at(const QuarticPoly& q, double t, double radius) {
  const int deg = q.degree();
  if (deg < 1 && std::abs(t) <= 1.0) return 0;
  if (std::abs(t) > 1.0) {
    const auto a = q.ascending();
    poly::Coeffs rev(a.rbegin(), a.rend());
    while (rev.size() > 1 && rev.back() == 0.0) rev.pop_back();
    return poly::cluster_multiplicity(rev, 1.0 / t, radius, q.noise);
  }
  return poly::cluster_multiplicity(poly::from_quartic(q, deg), t, radius, q.noise);
}

}  // namespace cuspidal
