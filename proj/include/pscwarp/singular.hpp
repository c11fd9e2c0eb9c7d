#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pscwarp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> exponents;  // length k + m: parameter exponents then fiber exponents
};

enum class GermProvenance { NormalForm, Unfolding, User };

/// A k-parameter family of germs on an m-dimensional fiber, with partials to
/// third order (exact for polynomial families, FD for user callables).
class GermFamily {
 public:
  static GermFamily polynomial(int k, int m, std::vector<PolyTerm> terms,
                               GermProvenance prov = GermProvenance::User);
  static GermFamily from_function(int k, int m,
                                  std::function<double(const VectorXd&, const VectorXd&)> f,
                                  double fd_h = 1e-4);

  int k() const { return k_; }
  int m() const { return m_; }
  GermProvenance provenance() const { return prov_; }

  double value(const VectorXd& y, const VectorXd& x) const;
  VectorXd fiber_grad(const VectorXd& y, const VectorXd& x) const;
  MatrixXd fiber_hess(const VectorXd& y, const VectorXd& x) const;
  /// D^3_x f (v,v,v).
  double third_along(const VectorXd& y, const VectorXd& x, const VectorXd& v) const;
  /// d/dy_j of (grad_x f . v), the unfolding-transversality row.
  VectorXd param_deriv_of_grad_along(const VectorXd& y, const VectorXd& x,
                                     const VectorXd& v) const;

  GermFamily fix_params(const VectorXd& y0) const;  // k = 0 slice

 private:
  GermFamily() = default;
  int k_ = 0, m_ = 1;
  GermProvenance prov_ = GermProvenance::User;
  std::vector<PolyTerm> terms_;  // empty for callable-backed families
  std::function<double(const VectorXd&, const VectorXd&)> fn_;
  double fd_h_ = 1e-4;
  bool poly() const { return !terms_.empty() || fn_ == nullptr; }
};

/// q_y(z, x) = z^3 + 3 y z - sum_{i<=s} x_i^2 + sum_{i>s} x_i^2; k = 1,
/// fiber coordinates (z, x_1..x_{m-1}), 0 <= s <= m-1.
GermFamily unfolding_family(int s, int m);
/// Morse normal form of index lambda on an m-dimensional fiber (k = 0).
GermFamily morse_germ(int lambda, int m);
/// Birth-death normal form z^3 - sum_{i<=s} x_i^2 + sum x_i^2 (k = 0).
GermFamily birth_death_germ(int s, int m);

enum class SingularClass { Morse, BirthDeath, Fold, Cusp };

struct SingularPoint {
  VectorXd y;  // empty when k = 0
  VectorXd x;
  SingularClass cls = SingularClass::Morse;
  int index = 0;  // Morse/Fold index, or the floor index s for half-integer classes
  VectorXd hessian_eigs;
  VectorXd kernel;       // degenerate direction when half-integer
  double cubic = 0.0;    // cubic coefficient along the kernel
  bool half_integer() const {
    return cls == SingularClass::BirthDeath || cls == SingularClass::Cusp;
  }
};

struct ClassifyTols {
  double tol_grad = 1e-9;
  double tol_nd = 1e-7;  // relative to the largest |eigenvalue|
};

struct NotCriticalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnclassifiableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SingularPoint classify_critical(const GermFamily& f, const VectorXd& x0, ClassifyTols tols = {});
SingularPoint classify_family_point(const GermFamily& F, const VectorXd& y0, const VectorXd& x0,
                                    ClassifyTols tols = {});

struct Box {
  VectorXd lo, hi;  // k + m bounds (y first, then x)
  bool contains(const VectorXd& u) const;
};

struct TracedPoint {
  VectorXd u;  // (y, x)
  std::optional<SingularPoint> cls;
  double residual = 0.0;
};

struct TracedCurve {
  std::vector<TracedPoint> points;
  bool stalled = false;
  std::string note;
};

struct TraceOpts {
  double step = 1e-2;
  double newton_tol = 1e-10;
  int max_points = 4000;
};

/// Numerically continued solution curves of grad_x F = 0 inside the region,
/// with per-point classification (k = 1 families).
std::vector<TracedCurve> singular_set_trace(const GermFamily& F, const Box& region, int seeds,
                                            TraceOpts opts = {});

struct AdmissibleReport {
  bool pass = false;
  std::vector<std::string> failures;
};

/// Morse index <= n-2, birth-death/cusp floor index <= n-3 (dim W = n+1).
AdmissibleReport admissible_check(const std::vector<SingularPoint>& points, int n);

// --- Morse triples ------------------------------------------------------------

struct MorseTripleModel {
  GermFamily f;  // k = 0
  std::function<MatrixXd(const VectorXd&)> metric;
  std::function<VectorXd(const VectorXd&)> vector_field;
};

MorseTripleModel standard_morse_triple(int lambda, int m);

struct CompatReport {
  bool pass = false;
  double max_orthogonality_residual = 0.0;
  double max_block_residual = 0.0;
  double max_kernel_residual = 0.0;
};

/// Def 2.4 / 4.5 check at the given critical points; the Hessian-vs-metric
/// block identity is tested as d^2 f|_± = ±factor * m|_± (factor 2 matches the
/// quadratic normal forms).
CompatReport compatible_metric_check(const MorseTripleModel& t,
                                     const std::vector<VectorXd>& crit_pts, double tol,
                                     double factor = 2.0);

struct GradlikeReport {
  bool pass = false;
  double min_df_V = 0.0;          // over samples outside the critical balls
  double max_near_crit_dev = 0.0; // sup |V - grad_m f| inside the balls
  int n_outside = 0;
};

GradlikeReport gradient_like_check(const MorseTripleModel& t, const Box& region,
                                   double crit_radius, const std::vector<VectorXd>& crit_pts,
                                   int n_samples, double tol);

// --- trajectory flow ----------------------------------------------------------

enum class FlowDir { Forward, Backward };

struct FlowStop {
  std::optional<double> level;  // stop when f reaches this value
  double max_time = 50.0;
  double crit_radius = 1e-2;
  std::vector<VectorXd> crit_pts;
};

struct FlowOpts {
  double tol = 1e-9;
  bool unit_level_rate = false;  // reparameterize so f changes at unit rate
  double h0 = 1e-3;
};

struct FlowPoint {
  double t = 0.0;
  VectorXd x;
  double f = 0.0;
};

struct Polyline {
  std::vector<FlowPoint> points;
  std::string termination;  // "level", "time", "critical-point"
};

struct StepCollapseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Polyline trajectory_flow(const MorseTripleModel& t, const VectorXd& start, FlowDir dir,
                         const FlowStop& until, FlowOpts opts = {});

}  // namespace pscwarp
