#include "pscwarp/curvature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pscwarp {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << what << " must be positive, got " << v;
    throw std::domain_error(os.str());
  }
}

void require_interior(double x, double lo, double hi, double guard, const char* what) {
  if (!(x >= lo + guard && x <= hi - guard)) {
    std::ostringstream os;
    os << what << " = " << x << " violates guard margin on [" << lo << ", " << hi << "]";
    throw std::domain_error(os.str());
  }
}

}  // namespace

double scalar_single_warped(const WarpFn& f, int n, double t, double guard) {
  if (n < 2) throw std::invalid_argument("scalar_single_warped: n >= 2");
  require_interior(t, f.lo(), f.hi(), guard, "t");
  const Jet1 j = f(t);
  require_positive(j.f, "warp f");
  const double c = 1.0 - j.df * j.df;
  return (n - 1) * ((n - 2) * c / (j.f * j.f) - 2.0 * j.ddf / j.f);
}

double scalar_doubly_warped(const WarpFn& u, const WarpFn& v, int p, int q, double t,
                            double guard) {
  if (p < 0 || q < 0 || p + q + 1 < 2) throw std::invalid_argument("scalar_doubly_warped: bad dims");
  require_interior(t, std::max(u.lo(), v.lo()), std::min(u.hi(), v.hi()), guard, "t");
  const Jet1 a = u(t), b = v(t);
  require_positive(a.f, "warp u");
  require_positive(b.f, "warp v");
  double R = 0.0;
  R += p * (p - 1) * (1.0 - a.df * a.df) / (a.f * a.f) - 2.0 * p * a.ddf / a.f;
  R += q * (q - 1) * (1.0 - b.df * b.df) / (b.f * b.f) - 2.0 * q * b.ddf / b.f;
  R -= 2.0 * p * q * a.df * b.df / (a.f * b.f);
  return R;
}

double scalar_eq21(const Field2& alpha, const Field2& F, int n, double r, double t,
                   double guard) {
  if (n < 1) throw std::invalid_argument("scalar_eq21: n >= 1");
  const Rect& d = F.domain();
  require_interior(r, d.r0, d.r1, guard, "r");
  require_interior(t, d.t0, d.t1, guard, "t");
  const F2Jet a = alpha(r, t), f = F(r, t);
  require_positive(a.v, "alpha");
  require_positive(f.v, "F");
  const double a2 = a.v * a.v;
  double R = n * (n - 1) / (f.v * f.v) * (1.0 - f.dr * f.dr - f.dt * f.dt / a2);
  R -= 2.0 * n / f.v * (f.drr + f.dr * a.dr / a.v);
  R += 2.0 * n / (a2 * f.v) * (-f.dtt + f.dt * a.dt / a.v);
  R -= 2.0 * a.drr / a.v;
  return R;
}

double scalar_eq22(const Field2& alpha, const WarpFn& f, int n, double r, double t,
                   double guard) {
  if (n < 1) throw std::invalid_argument("scalar_eq22: n >= 1");
  const Rect& d = alpha.domain();
  require_interior(r, std::max(d.r0, f.lo()), std::min(d.r1, f.hi()), guard, "r");
  require_interior(t, d.t0, d.t1, guard, "t");
  const F2Jet a = alpha(r, t);
  const Jet1 j = f(r);
  require_positive(a.v, "alpha");
  require_positive(j.f, "f");
  double R = n * (n - 1) / (j.f * j.f) * (1.0 - j.df * j.df);
  R -= 2.0 * n / j.f * (j.ddf + j.df * a.dr / a.v);
  R -= 2.0 * a.drr / a.v;
  return R;
}

double scalar_two_sphere_block(const Field2& u, const Field2& v, int p, int q, double a,
                               double b, double guard) {
  if (p < 0 || q < 0) throw std::invalid_argument("scalar_two_sphere_block: bad dims");
  const Rect& d = u.domain();
  require_interior(a, d.r0, d.r1, guard, "a");
  require_interior(b, d.t0, d.t1, guard, "b");
  const F2Jet ju = u(a, b), jv = v(a, b);
  require_positive(ju.v, "u");
  require_positive(jv.v, "v");
  // flat 2D base; multiply warped product formula
  const double gu2 = ju.dr * ju.dr + ju.dt * ju.dt;
  const double gv2 = jv.dr * jv.dr + jv.dt * jv.dt;
  const double lap_u = ju.drr + ju.dtt, lap_v = jv.drr + jv.dtt;
  const double cross = ju.dr * jv.dr + ju.dt * jv.dt;
  double R = 0.0;
  R += p * (p - 1) * (1.0 - gu2) / (ju.v * ju.v) - 2.0 * p * lap_u / ju.v;
  R += q * (q - 1) * (1.0 - gv2) / (jv.v * jv.v) - 2.0 * q * lap_v / jv.v;
  R -= 2.0 * p * q * cross / (ju.v * jv.v);
  return R;
}

// --- BlockMetric -------------------------------------------------------------

BlockMetric::BlockMetric(Shape shape, std::string label)
    : shape_(std::make_shared<const Shape>(std::move(shape))), label_(std::move(label)) {}

int BlockMetric::dim() const {
  struct V {
    int operator()(const SingleWarpShape& s) const { return s.n; }
    int operator()(const DoublyWarpShape& s) const { return s.p + s.q + 1; }
    int operator()(const TripleBlockShape& s) const { return s.n + 2; }
    int operator()(const TwoSphereBlockShape& s) const { return s.p + s.q + 2; }
    int operator()(const GluedShape& s) const {
      return s.pieces.empty() ? 0 : s.pieces.front().metric.dim();
    }
  };
  return std::visit(V{}, *shape_);
}

double BlockMetric::scalar(const std::vector<double>& x, double guard) const {
  struct V {
    const std::vector<double>& x;
    double guard;
    double operator()(const SingleWarpShape& s) const {
      return scalar_single_warped(s.f, s.n, x.at(0), guard);
    }
    double operator()(const DoublyWarpShape& s) const {
      return scalar_doubly_warped(s.u, s.v, s.p, s.q, x.at(0), guard);
    }
    double operator()(const TripleBlockShape& s) const {
      return scalar_eq21(s.alpha, s.F, s.n, x.at(0), x.at(1), guard);
    }
    double operator()(const TwoSphereBlockShape& s) const {
      return scalar_two_sphere_block(s.u, s.v, s.p, s.q, x.at(0), x.at(1), guard);
    }
    double operator()(const GluedShape& s) const {
      const double t = x.at(0);
      for (const GluedPiece& pc : s.pieces) {
        if (t >= pc.lo && t <= pc.hi) {
          std::vector<double> y = x;
          y[0] = t - pc.offset;
          return pc.metric.scalar(y, guard);
        }
      }
      throw std::domain_error("glued metric: coordinate outside every piece");
    }
  };
  return std::visit(V{x, guard}, *shape_);
}

// --- positivity scan ----------------------------------------------------------

namespace {

struct ScanDomain {
  std::vector<std::pair<double, double>> axes;
};

ScanDomain scan_domain(const BlockMetric::Shape& shape) {
  struct V {
    ScanDomain operator()(const SingleWarpShape& s) const { return {{{s.f.lo(), s.f.hi()}}}; }
    ScanDomain operator()(const DoublyWarpShape& s) const {
      return {{{std::max(s.u.lo(), s.v.lo()), std::min(s.u.hi(), s.v.hi())}}};
    }
    ScanDomain operator()(const TripleBlockShape& s) const {
      const Rect& d = s.F.domain();
      return {{{d.r0, d.r1}, {d.t0, d.t1}}};
    }
    ScanDomain operator()(const TwoSphereBlockShape& s) const {
      const Rect& d = s.u.domain();
      return {{{d.r0, d.r1}, {d.t0, d.t1}}};
    }
    ScanDomain operator()(const GluedShape& s) const {
      return {{{s.pieces.front().lo, s.pieces.back().hi}}};
    }
  };
  return std::visit(V{}, shape);
}

}  // namespace

CurvatureGrid positivity_scan(const BlockMetric& m, GridSpec grid, double guard) {
  if (grid.per_axis < 16) throw std::invalid_argument("positivity_scan: grid >= 16 per axis");
  CurvatureGrid out;
  const ScanDomain dom = scan_domain(m.shape());
  const int n = grid.per_axis;
  const size_t ndim = dom.axes.size();
  // interior samples with guard margin away from chart edges
  auto coord = [&](size_t ax, int i) {
    const auto [lo, hi] = dom.axes[ax];
    const double g = std::max(guard, (hi - lo) * 1e-6);
    return lo + g + (hi - lo - 2 * g) * double(i) / double(n - 1);
  };
  out.min_R = std::numeric_limits<double>::infinity();
  std::vector<int> idx(ndim, 0);
  const size_t total = ndim == 1 ? size_t(n) : size_t(n) * size_t(n);
  out.coords.reserve(total);
  out.R.reserve(total);
  for (size_t flat = 0; flat < total; ++flat) {
    std::vector<double> x(ndim);
    if (ndim == 1) {
      x[0] = coord(0, int(flat));
    } else {
      x[0] = coord(0, int(flat / n));
      x[1] = coord(1, int(flat % n));
    }
    try {
      const double R = m.scalar(x, guard);
      out.coords.push_back(x);
      out.R.push_back(R);
      if (R < out.min_R) {
        out.min_R = R;
        out.argmin = x;
      }
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "sample (";
      for (size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
      os << "): " << e.what();
      out.errors.push_back(os.str());
    }
  }
  out.margin = out.min_R;
  out.pass = out.errors.empty() && out.min_R > 0.0 && !out.R.empty();
  return out;
}

// --- FD tensor oracle ----------------------------------------------------------

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<MatrixXd> metric_partials(const MetricField& g, const VectorXd& x, double h) {
  const int d = int(x.size());
  std::vector<MatrixXd> dg(d);
  for (int c = 0; c < d; ++c) {
    VectorXd xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    dg[c] = (g(xp) - g(xm)) / (2.0 * h);
  }
  return dg;
}

/// Christoffel symbols of the second kind: gamma[a](b,c) = Gamma^a_{bc}.
std::vector<MatrixXd> christoffel(const MetricField& g, const VectorXd& x, double h,
                                  double cond_threshold) {
  const int d = int(x.size());
  const MatrixXd g0 = g(x);
  Eigen::FullPivLU<MatrixXd> lu(g0);
  if (!lu.isInvertible() || lu.rcond() < 1.0 / cond_threshold)
    throw std::runtime_error("fd_scalar_oracle: metric is singular at the base point");
  const MatrixXd ginv = lu.inverse();
  const std::vector<MatrixXd> dg = metric_partials(g, x, h);
  std::vector<MatrixXd> gam(d, MatrixXd::Zero(d, d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int m = 0; m < d; ++m)
          s += ginv(a, m) * (dg[b](m, c) + dg[c](m, b) - dg[m](b, c));
        gam[a](b, c) = 0.5 * s;
      }
  return gam;
}

double scalar_once(const MetricField& g, const VectorXd& x, double h, double cond_threshold) {
  const int d = int(x.size());
  const MatrixXd g0 = g(x);
  Eigen::FullPivLU<MatrixXd> lu(g0);
  if (!lu.isInvertible()) throw std::runtime_error("fd_scalar_oracle: singular metric");
  const MatrixXd ginv = lu.inverse();
  const std::vector<MatrixXd> gam0 = christoffel(g, x, h, cond_threshold);
  // dgam[k][a](b,c) = d_k Gamma^a_{bc}
  std::vector<std::vector<MatrixXd>> dgam(d);
  for (int k = 0; k < d; ++k) {
    VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const auto gp = christoffel(g, xp, h, cond_threshold);
    const auto gm = christoffel(g, xm, h, cond_threshold);
    dgam[k].resize(d);
    for (int a = 0; a < d; ++a) dgam[k][a] = (gp[a] - gm[a]) / (2.0 * h);
  }
  // Ric_{ij} = d_k Gamma^k_{ij} - d_j Gamma^k_{ik} + Gamma^k_{kl} Gamma^l_{ij}
  //           - Gamma^k_{jl} Gamma^l_{ik}
  MatrixXd ric = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        s += dgam[k][k](i, j) - dgam[j][k](i, k);
        for (int l = 0; l < d; ++l)
          s += gam0[k](k, l) * gam0[l](i, j) - gam0[k](j, l) * gam0[l](i, k);
      }
      ric(i, j) = s;
    }
  return (ginv * ric).trace();
}

}  // namespace

double fd_scalar_oracle(const MetricField& g, const Eigen::VectorXd& x, const OracleOpts& opts) {
  if (x.size() < 1 || x.size() > 6)
    throw std::invalid_argument("fd_scalar_oracle: chart dimension must be 1..6");
  const double r1 = scalar_once(g, x, opts.h, opts.cond_threshold);
  if (!opts.richardson) return r1;
  const double r2 = scalar_once(g, x, opts.h / 2.0, opts.cond_threshold);
  return (4.0 * r2 - r1) / 3.0;
}

// --- chart builders -------------------------------------------------------------

namespace {

/// Fill diag block for a round k-sphere in polar coordinates theta_1..theta_k
/// scaled by warp^2, starting at matrix index `at`; angles are x[at..at+k-1].
void sphere_block(MatrixXd& m, const VectorXd& x, int at, int k, double warp2) {
  double prod = warp2;
  for (int i = 0; i < k; ++i) {
    m(at + i, at + i) = prod;
    prod *= std::sin(x[at + i]) * std::sin(x[at + i]);
  }
}

}  // namespace

MetricField chart_single_warp(const WarpFn& f, int n) {
  return [f, n](const VectorXd& x) {
    const int d = n;  // (t, theta_1..theta_{n-1})
    MatrixXd m = MatrixXd::Zero(d, d);
    m(0, 0) = 1.0;
    const double w = f(x[0]).f;
    sphere_block(m, x, 1, n - 1, w * w);
    return m;
  };
}

MetricField chart_doubly_warp(const WarpFn& u, const WarpFn& v, int p, int q) {
  return [u, v, p, q](const VectorXd& x) {
    const int d = 1 + p + q;
    MatrixXd m = MatrixXd::Zero(d, d);
    m(0, 0) = 1.0;
    const double a = u(x[0]).f, b = v(x[0]).f;
    sphere_block(m, x, 1, p, a * a);
    sphere_block(m, x, 1 + p, q, b * b);
    return m;
  };
}

MetricField chart_eq21(const Field2& alpha, const Field2& F, int n) {
  return [alpha, F, n](const VectorXd& x) {
    const int d = 2 + n;
    MatrixXd m = MatrixXd::Zero(d, d);
    m(0, 0) = 1.0;
    const double a = alpha(x[0], x[1]).v;
    const double f = F(x[0], x[1]).v;
    m(1, 1) = a * a;
    sphere_block(m, x, 2, n, f * f);
    return m;
  };
}

MetricField chart_two_sphere(const Field2& u, const Field2& v, int p, int q) {
  return [u, v, p, q](const VectorXd& x) {
    const int d = 2 + p + q;
    MatrixXd m = MatrixXd::Zero(d, d);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    const double a = u(x[0], x[1]).v, b = v(x[0], x[1]).v;
    sphere_block(m, x, 2, p, a * a);
    sphere_block(m, x, 2 + p, q, b * b);
    return m;
  };
}

}  // namespace pscwarp
