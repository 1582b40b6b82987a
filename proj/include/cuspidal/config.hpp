#pragma once

namespace cuspidal {

/// Every numerical tolerance of the library in one place. Reports print the
/// active values so runs are reproducible.
struct Tolerances {
  // polynomial roots
  double root_cluster = 1e-7;        // roots of t closer than this form one cluster
  double root_polish = 1e-10;        // |P(t)| relative to sum |a_i t^i|
  double triple_root_factor = 10.0;  // cusp confirmation radius = factor * root_cluster

  // inverse kinematics
  double merge = 1e-5;         // joint solutions closer than this are near-coincident
  double ik_residual = 1e-8;   // |f(q) - X| relative to (1 + |X|)
  double spurious = 1e-8;      // |c2^2 + s2^2 - 1| for theta2 back-substitution

  // singularity tracing and cusps
  double trace_refine = 1e-10;         // |g| relative to its grid scale on traced samples
  double cusp_velocity_ratio = 1e-3;   // of the median image speed along a curve
  double cusp_merge = 1e-6;            // duplicate cusps on the torus

  // classification
  double closed_form_band = 1e-9;

  // continuation
  double newton_residual = 1e-10;   // relative to the robot length scale
  int newton_max_iter = 8;
  double min_step_fraction = 1e-6;  // of the path length
  double singular = 1e-8;           // |det J| relative to det_scale at a blocking point
  double tracking = 1e-6;           // lift consistency relative to the length scale
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace cuspidal
