#pragma once

#include <optional>
#include <string>
#include <variant>

#include "pscwarp/curvature.hpp"

namespace pscwarp {

struct RoundSpec {
  int n = 3;
};
struct TorpedoMetricSpec {
  int n = 3;
  TorpedoParams par;
};
struct DoubleTorpedoMetricSpec {
  int n = 3;
  TorpedoParams par;
};
struct MixedTorpedoSpec {
  int p = 1, q = 2;
  double eps = 0.5, delta = 0.5, b = 4.0;
};

using MetricSpec =
    std::variant<RoundSpec, TorpedoMetricSpec, DoubleTorpedoMetricSpec, MixedTorpedoSpec>;

BlockMetric round_metric(int n);
BlockMetric torpedo_metric(int n, const TorpedoParams& p);
BlockMetric double_torpedo_metric(int n, const TorpedoParams& p);
/// Eq 2.4 mixed torpedo: dt^2 + f_eps(b-t)^2 ds_p^2 + f_delta(t)^2 ds_q^2.
/// Hypothesis violations (p+q+1 < 3, or both p,q < 2) do not abort: the metric is
/// built but flagged non-certified with a warning.
BlockMetric mixed_torpedo_metric(int p, int q, double eps, double delta, double b);

BlockMetric build_metric(const MetricSpec& spec);

struct CollarSpec {
  double width = 0.2;     // overlap length checked at each side of the seam
  double tol = 1e-10;
};

/// Glue along a product collar: both pieces must be products over the same
/// cross-section on the collar (warp values constant to tol and equal across
/// pieces). Throws on mismatch, reporting the worst deviation and location.
BlockMetric glue_product_collar(const BlockMetric& m1, const BlockMetric& m2,
                                const CollarSpec& collar);

}  // namespace pscwarp
