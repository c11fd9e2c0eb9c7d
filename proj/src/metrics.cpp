#include "pscwarp/metrics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pscwarp {

using std::numbers::pi;

BlockMetric round_metric(int n) {
  if (n < 2) throw std::invalid_argument("round_metric: n >= 2");
  return BlockMetric(SingleWarpShape{sine_fn(), n}, "round");
}

BlockMetric torpedo_metric(int n, const TorpedoParams& p) {
  if (n < 2) throw std::invalid_argument("torpedo_metric: n >= 2");
  return BlockMetric(SingleWarpShape{torpedo_fn(p), n}, "torpedo");
}

BlockMetric double_torpedo_metric(int n, const TorpedoParams& p) {
  if (n < 2) throw std::invalid_argument("double_torpedo_metric: n >= 2");
  return BlockMetric(SingleWarpShape{double_torpedo_fn(p), n}, "double torpedo");
}

BlockMetric mixed_torpedo_metric(int p, int q, double eps, double delta, double b) {
  if (p < 0 || q < 0) throw std::invalid_argument("mixed_torpedo: dims must be nonnegative");
  if (!(eps > 0 && delta > 0)) throw std::invalid_argument("mixed_torpedo: radii must be positive");
  if (!(b > (eps + delta) * pi / 2.0))
    throw std::invalid_argument("mixed_torpedo: need b > (eps+delta)*pi/2");
  TorpedoParams pe{eps, b, -1};
  TorpedoParams pd{delta, b, -1};
  WarpFn u = warp_reflect(torpedo_fn(pe), b);  // f_eps(b - t)
  WarpFn v = torpedo_fn(pd);                   // f_delta(t)
  BlockMetric m(DoublyWarpShape{u, v, p, q}, "mixed torpedo");
  const int n = p + q + 1;
  if (n < 3 || (p < 2 && q < 2)) {
    m.certified = false;
    m.warnings.push_back("mixed torpedo hypotheses (n >= 3 and p or q >= 2) violated;"
                         " construction proceeds uncertified");
  }
  return m;
}

BlockMetric build_metric(const MetricSpec& spec) {
  struct V {
    BlockMetric operator()(const RoundSpec& s) const { return round_metric(s.n); }
    BlockMetric operator()(const TorpedoMetricSpec& s) const { return torpedo_metric(s.n, s.par); }
    BlockMetric operator()(const DoubleTorpedoMetricSpec& s) const {
      return double_torpedo_metric(s.n, s.par);
    }
    BlockMetric operator()(const MixedTorpedoSpec& s) const {
      return mixed_torpedo_metric(s.p, s.q, s.eps, s.delta, s.b);
    }
  };
  return std::visit(V{}, spec);
}

namespace {

struct WarpPair {
  WarpFn u, v;
  int p = -1, q = -1;  // SingleWarp encoded as p = n-1, q = 0 with v constant 1
  double lo, hi;
};

WarpPair as_warp_pair(const BlockMetric& m) {
  if (auto* s = std::get_if<SingleWarpShape>(&m.shape()))
    return {s->f, constant_fn(1.0, s->f.lo(), s->f.hi()), s->n - 1, 0, s->f.lo(), s->f.hi()};
  if (auto* s = std::get_if<DoublyWarpShape>(&m.shape())) {
    const double lo = std::max(s->u.lo(), s->v.lo());
    const double hi = std::min(s->u.hi(), s->v.hi());
    return {s->u, s->v, s->p, s->q, lo, hi};
  }
  throw std::invalid_argument("glue_product_collar: pieces must be interval-warped metrics");
}

}  // namespace

BlockMetric glue_product_collar(const BlockMetric& m1, const BlockMetric& m2,
                                const CollarSpec& collar) {
  const WarpPair a = as_warp_pair(m1), b = as_warp_pair(m2);
  if (a.p != b.p || a.q != b.q) {
    std::ostringstream os;
    os << "glue_product_collar: cross-section dimensions differ: (" << a.p << "," << a.q
       << ") vs (" << b.p << "," << b.q << ")";
    throw std::invalid_argument(os.str());
  }
  const double w = collar.width;
  if (!(w > 0 && w < a.hi - a.lo && w < b.hi - b.lo))
    throw std::invalid_argument("glue_product_collar: collar width out of range");

  // check products + matching values on the collar: end of m1, start of m2
  double worst = 0.0, worst_at = a.hi;
  const int n_pts = 64;
  auto dev = [&](double d, double at) {
    if (d > worst) {
      worst = d;
      worst_at = at;
    }
  };
  for (int i = 0; i <= n_pts; ++i) {
    const double s = double(i) / n_pts;
    const double t1 = a.hi - w + s * w;
    const double t2 = b.lo + s * w;
    const Jet1 u1 = a.u(t1), v1 = a.v(t1), u2 = b.u(t2), v2 = b.v(t2);
    dev(std::abs(u1.df), t1);
    dev(std::abs(v1.df), t1);
    dev(std::abs(u2.df), t2);
    dev(std::abs(v2.df), t2);
    dev(std::abs(u1.f - u2.f), t1);
    dev(std::abs(v1.f - v2.f), t1);
  }
  if (worst > collar.tol) {
    std::ostringstream os;
    os << "glue_product_collar: collar mismatch, max deviation " << worst << " at coordinate "
       << worst_at;
    throw std::invalid_argument(os.str());
  }

  // glued chart: [a.lo, a.hi] then m2 continues, sharing the collar once
  GluedShape g;
  const double seam = a.hi;
  const double offset = b.lo + w - seam;  // glued t -> piece2 coordinate t - offset... piece2 starts at seam - w
  g.pieces.push_back({a.lo, seam, m1, 0.0});
  g.pieces.push_back({seam, seam + (b.hi - b.lo) - w, m2, -(offset)});
  BlockMetric out{BlockMetric::Shape{std::move(g)}, "glued"};
  out.certified = m1.certified && m2.certified;
  return out;
}

}  // namespace pscwarp
