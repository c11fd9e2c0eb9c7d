#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pscwarp/curvature.hpp"
#include "pscwarp/metrics.hpp"

namespace pscwarp {

enum class PathKind { Lemma21, DeltaScaling, Concat, Reverse, Custom };

struct ConstraintViolation {
  double s = 0.0;
  std::vector<double> coords;
  std::string constraint;
  double value = 0.0;
};

/// A one-parameter family s in [0,1] of block metrics with per-sample
/// certification hooks. Immutable; evaluation pure.
struct MetricPath {
  std::function<BlockMetric(double)> at;
  PathKind kind = PathKind::Custom;
  std::string label;
  /// kind-specific pointwise constraint checks (e.g. the Lemma 2.1 bounds);
  /// returns violations found on the given grid at parameter s.
  std::function<std::vector<ConstraintViolation>(double s, GridSpec)> constraints;
};

struct Lemma21Params {
  int n = 3;              // sphere dimension of the S^n factor (disk dim n+2)
  double b = 3.0;         // half-length of the t-chart (-b, b+pi)
  double h_width = 0.3;   // h-blend window
  double eps = 0.35;      // paper's mu transition half-width
  double cap_r0 = 0.05;   // cosine-cap plateau end
  double cap_r1 = 0.5;    // cosine-cap rejoin
};

/// The two-stage Lemma 2.1 deformation of the (n+2)-torpedo block:
/// stage 1 (s in [0,1/2]) homotopes F: cos -> cosine-cap (t-localized) and the
/// alpha radial profile sin -> h; stage 2 (s in [1/2,1]) flattens alpha to 1
/// near t = pi/2. Every sample satisfies the constraints 0 <= a_r <= 1,
/// a_rr <= 0, -1 <= F_r <= 0, F_rr <= 0 by construction; psc is certified by
/// verify_path_psc.
MetricPath lemma21_path(const Lemma21Params& par = {});

MetricPath delta_scaling_path(const MetricSpec& spec, double delta0, double delta1);

MetricPath concat(const MetricPath& p1, const MetricPath& p2, double tol = 1e-10);
MetricPath reverse(const MetricPath& p);

struct PathSample {
  double s = 0.0;
  double min_R = 0.0;
  std::vector<double> argmin;
  bool pass = false;
};

struct PathReport {
  std::string kind;
  int samples = 0;
  bool pass = false;
  double min_R = 0.0;
  std::vector<PathSample> per_sample;
  std::vector<ConstraintViolation> violations;
};

/// Per-sample positivity scans plus kind-specific constraint checks.
PathReport verify_path_psc(const MetricPath& p, int n_s = 50, GridSpec grid = {});

struct PathCollarSpec {
  int axis = 1;          // chart coordinate forming the collar direction
  double lo = 0.0, hi = 0.0;
  double tol = 1e-10;
};

struct BoundaryReport {
  bool pass = false;
  double max_dev_in_collar = 0.0;   // non-constancy along the collar coordinate
  double max_dev_in_s = 0.0;        // drift of the boundary metric across s
  std::vector<double> worst;
};

/// Relative-isotopy certificate: on the collar every sampled metric must be a
/// product with the boundary metric of the s=0 sample (values constant in the
/// collar coordinate and s-independent).
BoundaryReport boundary_product_check(const MetricPath& p, const PathCollarSpec& collar,
                                      int n_s = 20, int n_pts = 40);

}  // namespace pscwarp
