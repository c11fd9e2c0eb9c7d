#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pscwarp/field.hpp"
#include "pscwarp/warp.hpp"

namespace pscwarp {

// --- closed-form scalar curvature evaluators -------------------------------
// Sign convention: unit round S^n has R = +n(n-1). The single/doubly warped
// forms are implementer-derived and gated behind fd_scalar_oracle agreement
// (see tests); Eq 2.1/2.2 are evaluated term-for-term as printed.

/// dt^2 + f(t)^2 ds^2_{n-1}, total dimension n.
double scalar_single_warped(const WarpFn& f, int n, double t, double guard = 1e-6);

/// dt^2 + u^2 ds_p^2 + v^2 ds_q^2, total dimension p+q+1.
double scalar_doubly_warped(const WarpFn& u, const WarpFn& v, int p, int q, double t,
                            double guard = 1e-6);

/// dr^2 + alpha^2 dt^2 + F^2 ds_n^2, total dimension n+2.
double scalar_eq21(const Field2& alpha, const Field2& F, int n, double r, double t,
                   double guard = 1e-6);

/// Eq 2.1 specialized to F = f(r).
double scalar_eq22(const Field2& alpha, const WarpFn& f, int n, double r, double t,
                   double guard = 1e-6);

/// da^2 + db^2 + u(a,b)^2 ds_p^2 + v(a,b)^2 ds_q^2, total dimension p+q+2.
double scalar_two_sphere_block(const Field2& u, const Field2& v, int p, int q, double a,
                               double b, double guard = 1e-6);

// --- block metrics ----------------------------------------------------------

struct SingleWarpShape {
  WarpFn f;
  int n = 3;
};
struct DoublyWarpShape {
  WarpFn u, v;
  int p = 1, q = 2;
};
struct TripleBlockShape {
  Field2 alpha, F;
  int n = 3;
};
struct TwoSphereBlockShape {
  Field2 u, v;
  int p = 1, q = 2;
};
class BlockMetric;
struct GluedPiece;
struct GluedShape {
  std::vector<GluedPiece> pieces;  // consecutive chart intervals in one coordinate
};

/// A multiply-warped metric over a chart (or chart partition).
class BlockMetric {
 public:
  using Shape = std::variant<SingleWarpShape, DoublyWarpShape, TripleBlockShape,
                             TwoSphereBlockShape, GluedShape>;

  BlockMetric() = default;
  explicit BlockMetric(Shape shape, std::string label = {});

  const Shape& shape() const { return *shape_; }
  const std::string& label() const { return label_; }
  int dim() const;
  bool certified = true;                 // cleared when construction hypotheses fail
  std::vector<std::string> warnings;

  /// Scalar curvature at a chart point (1 or 2 coordinates depending on shape).
  double scalar(const std::vector<double>& x, double guard = 1e-6) const;

 private:
  std::shared_ptr<const Shape> shape_;
  std::string label_;
};

struct GluedPiece {
  double lo = 0.0, hi = 1.0;  // interval in the glued coordinate
  BlockMetric metric;
  double offset = 0.0;  // glued coordinate t maps to piece coordinate t - offset
};

// --- scans ------------------------------------------------------------------

struct GridSpec {
  int per_axis = 200;
};

struct CurvatureGrid {
  std::vector<std::vector<double>> coords;  // one entry per sample
  std::vector<double> R;
  double min_R = 0.0;
  std::vector<double> argmin;
  double margin = 0.0;  // min_R (distance to zero)
  bool pass = false;
  std::vector<std::string> errors;  // per-sample evaluator failures
};

CurvatureGrid positivity_scan(const BlockMetric& m, GridSpec grid = {}, double guard = 1e-6);

// --- finite-difference tensor oracle ----------------------------------------

using MetricField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct OracleOpts {
  double h = 1e-3;
  bool richardson = false;
  double cond_threshold = 1e12;
};

/// Scalar curvature by central differences through Christoffel -> Riemann ->
/// scalar; independent of every closed form above.
double fd_scalar_oracle(const MetricField& g, const Eigen::VectorXd& x, const OracleOpts& opts = {});

// Chart builders used for oracle cross-checks (polar sphere blocks).
MetricField chart_single_warp(const WarpFn& f, int n);
MetricField chart_doubly_warp(const WarpFn& u, const WarpFn& v, int p, int q);
MetricField chart_eq21(const Field2& alpha, const Field2& F, int n);
MetricField chart_two_sphere(const Field2& u, const Field2& v, int p, int q);

}  // namespace pscwarp
