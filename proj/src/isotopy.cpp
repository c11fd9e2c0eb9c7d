#include "pscwarp/isotopy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pscwarp {

using std::numbers::pi;

namespace {

// Sup distance between the warp data of two structurally identical blocks.
double block_distance(const BlockMetric& a, const BlockMetric& b, int n_pts = 64) {
  if (a.shape().index() != b.shape().index()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  auto acc = [&](double d) { worst = std::max(worst, std::abs(d)); };
  if (auto* s1 = std::get_if<SingleWarpShape>(&a.shape())) {
    auto* s2 = std::get_if<SingleWarpShape>(&b.shape());
    if (s1->n != s2->n) return std::numeric_limits<double>::infinity();
    for (int i = 1; i < n_pts; ++i) {
      const double t = s1->f.lo() + s1->f.length() * i / n_pts;
      acc(s1->f(t).f - s2->f(t).f);
    }
  } else if (auto* d1 = std::get_if<DoublyWarpShape>(&a.shape())) {
    auto* d2 = std::get_if<DoublyWarpShape>(&b.shape());
    if (d1->p != d2->p || d1->q != d2->q) return std::numeric_limits<double>::infinity();
    for (int i = 1; i < n_pts; ++i) {
      const double t = d1->u.lo() + (d1->u.hi() - d1->u.lo()) * i / n_pts;
      acc(d1->u(t).f - d2->u(t).f);
      acc(d1->v(t).f - d2->v(t).f);
    }
  } else if (auto* t1 = std::get_if<TripleBlockShape>(&a.shape())) {
    auto* t2 = std::get_if<TripleBlockShape>(&b.shape());
    if (t1->n != t2->n) return std::numeric_limits<double>::infinity();
    const Rect& d = t1->F.domain();
    const int g = 16;
    for (int i = 1; i < g; ++i)
      for (int j = 1; j < g; ++j) {
        const double r = d.r0 + (d.r1 - d.r0) * i / g;
        const double t = d.t0 + (d.t1 - d.t0) * j / g;
        acc(t1->alpha(r, t).v - t2->alpha(r, t).v);
        acc(t1->F(r, t).v - t2->F(r, t).v);
      }
  } else if (auto* w1 = std::get_if<TwoSphereBlockShape>(&a.shape())) {
    auto* w2 = std::get_if<TwoSphereBlockShape>(&b.shape());
    if (w1->p != w2->p || w1->q != w2->q) return std::numeric_limits<double>::infinity();
    const Rect& d = w1->u.domain();
    const int g = 16;
    for (int i = 1; i < g; ++i)
      for (int j = 1; j < g; ++j) {
        const double r = d.r0 + (d.r1 - d.r0) * i / g;
        const double t = d.t0 + (d.t1 - d.t0) * j / g;
        acc(w1->u(r, t).v - w2->u(r, t).v);
        acc(w1->v(r, t).v - w2->v(r, t).v);
      }
  }
  return worst;
}

}  // namespace

MetricPath lemma21_path(const Lemma21Params& par) {
  if (par.n < 2) throw std::invalid_argument("lemma21_path: n >= 2");
  if (!(par.b > pi / 2.0 + 1.0)) throw std::invalid_argument("lemma21_path: b too small");
  const double eps = par.eps;
  const double gap = 0.15, margin = 0.3;

  const WarpFn mu = plateau_bump_fn(-eps, eps, pi - eps, pi + eps);
  const WarpFn mu_loc =
      plateau_bump_fn(-par.b + margin, -eps - gap, pi + eps + gap, pi + par.b - margin);
  const WarpFn h = h_blend_fn(par.h_width);
  const WarpFn cap = cosine_cap_fn(par.cap_r0, par.cap_r1);
  const WarpFn cos_r = cosine_fn();
  const WarpFn sin_r = sine_fn();
  const WarpFn flat = plateau_bump_fn(pi / 2 - 0.6, pi / 2 - 0.3, pi / 2 + 0.3, pi / 2 + 0.6);

  const Rect dom{0.0, pi / 2.0, -par.b, pi + par.b};
  const int n = par.n;

  auto make_block = [=](double s) {
    const double s1 = std::min(2.0 * s, 1.0);
    const double s2 = std::max(0.0, 2.0 * s - 1.0);
    Field2 F = field_mix_t(warp_affine(0.0, s1, mu_loc), cos_r, cap, dom);
    WarpFn radial = warp_mix(sin_r, h, s1);
    WarpFn mu_flat = warp_product(mu, warp_affine(1.0, -s2, flat));
    Field2 alpha = field_alpha(mu_flat, radial, dom);
    return BlockMetric(TripleBlockShape{alpha, F, n}, "lemma21 block");
  };

  MetricPath path;
  path.kind = PathKind::Lemma21;
  path.label = "lemma21";
  path.at = make_block;
  path.constraints = [make_block, dom](double s, GridSpec grid) {
    std::vector<ConstraintViolation> out;
    const BlockMetric m = make_block(s);
    const auto& tb = std::get<TripleBlockShape>(m.shape());
    const double tol = 1e-10;
    const int g = grid.per_axis;
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const double r = dom.r0 + 1e-6 + (dom.r1 - dom.r0 - 2e-6) * i / (g - 1);
        const double t = dom.t0 + 1e-6 + (dom.t1 - dom.t0 - 2e-6) * j / (g - 1);
        const F2Jet a = tb.alpha(r, t), f = tb.F(r, t);
        auto flag = [&](const char* c, double v) {
          out.push_back({s, {r, t}, c, v});
        };
        if (a.dr < -tol) flag("alpha_r >= 0", a.dr);
        if (a.dr > 1.0 + tol) flag("alpha_r <= 1", a.dr);
        if (a.drr > tol) flag("alpha_rr <= 0", a.drr);
        if (f.dr < -1.0 - tol) flag("F_r >= -1", f.dr);
        if (f.dr > tol) flag("F_r <= 0", f.dr);
        if (f.drr > tol) flag("F_rr <= 0", f.drr);
      }
    return out;
  };
  return path;
}

MetricPath delta_scaling_path(const MetricSpec& spec, double delta0, double delta1) {
  if (!(delta0 > 0 && delta1 > 0))
    throw std::invalid_argument("delta_scaling_path: radii must be positive");
  struct V {
    double d;
    MetricSpec operator()(RoundSpec s) const { return s; }
    MetricSpec operator()(TorpedoMetricSpec s) const {
      s.par.delta = d;
      s.par.transition_width = -1;
      return s;
    }
    MetricSpec operator()(DoubleTorpedoMetricSpec s) const {
      s.par.delta = d;
      s.par.transition_width = -1;
      return s;
    }
    MetricSpec operator()(MixedTorpedoSpec s) const {
      s.delta = d;
      return s;
    }
  };
  if (std::holds_alternative<RoundSpec>(spec))
    throw std::invalid_argument("delta_scaling_path: metric has no delta parameter");
  MetricPath p;
  p.kind = PathKind::DeltaScaling;
  p.label = "delta scaling";
  p.at = [spec, delta0, delta1](double s) {
    const double d = delta0 + s * (delta1 - delta0);
    return build_metric(std::visit(V{d}, spec));
  };
  return p;
}

MetricPath concat(const MetricPath& p1, const MetricPath& p2, double tol) {
  const double gap = block_distance(p1.at(1.0), p2.at(0.0));
  if (!(gap <= tol))
    throw std::invalid_argument("concat: endpoint metrics differ by " + std::to_string(gap));
  MetricPath p;
  p.kind = PathKind::Concat;
  p.label = p1.label + " + " + p2.label;
  p.at = [p1, p2](double s) { return s <= 0.5 ? p1.at(2.0 * s) : p2.at(2.0 * s - 1.0); };
  if (p1.constraints || p2.constraints) {
    p.constraints = [p1, p2](double s, GridSpec g) {
      std::vector<ConstraintViolation> out;
      if (s <= 0.5 && p1.constraints) out = p1.constraints(2.0 * s, g);
      if (s > 0.5 && p2.constraints) out = p2.constraints(2.0 * s - 1.0, g);
      return out;
    };
  }
  return p;
}

MetricPath reverse(const MetricPath& p) {
  MetricPath r;
  r.kind = PathKind::Reverse;
  r.label = p.label + " reversed";
  r.at = [p](double s) { return p.at(1.0 - s); };
  if (p.constraints)
    r.constraints = [p](double s, GridSpec g) { return p.constraints(1.0 - s, g); };
  return r;
}

PathReport verify_path_psc(const MetricPath& p, int n_s, GridSpec grid) {
  if (n_s < 2) throw std::invalid_argument("verify_path_psc: n_s >= 2");
  PathReport rep;
  switch (p.kind) {
    case PathKind::Lemma21: rep.kind = "lemma21"; break;
    case PathKind::DeltaScaling: rep.kind = "delta-scaling"; break;
    case PathKind::Concat: rep.kind = "concat"; break;
    case PathKind::Reverse: rep.kind = "reverse"; break;
    default: rep.kind = "custom";
  }
  rep.samples = n_s;
  rep.min_R = std::numeric_limits<double>::infinity();
  bool all_pass = true;
  for (int i = 0; i < n_s; ++i) {
    const double s = double(i) / (n_s - 1);
    const BlockMetric m = p.at(s);
    const CurvatureGrid scan = positivity_scan(m, grid);
    PathSample ps{s, scan.min_R, scan.argmin, scan.pass};
    all_pass = all_pass && scan.pass;
    if (scan.min_R < rep.min_R) rep.min_R = scan.min_R;
    rep.per_sample.push_back(std::move(ps));
    if (p.constraints) {
      auto v = p.constraints(s, grid);
      // keep reports bounded; every violation still fails the run
      if (!v.empty()) {
        all_pass = false;
        for (size_t k = 0; k < v.size() && rep.violations.size() < 64; ++k)
          rep.violations.push_back(v[k]);
      }
    }
  }
  rep.pass = all_pass;
  return rep;
}

BoundaryReport boundary_product_check(const MetricPath& p, const PathCollarSpec& collar, int n_s,
                                      int n_pts) {
  BoundaryReport rep;
  const BlockMetric ref = p.at(0.0);

  // warp samples of a block restricted to the collar:
  // returns {value, derivative-along-collar} pairs
  auto probe = [&](const BlockMetric& m, double c) -> std::vector<std::pair<double, double>> {
    std::vector<std::pair<double, double>> out;
    if (auto* s = std::get_if<SingleWarpShape>(&m.shape())) {
      Jet1 j = s->f(c);
      out.push_back({j.f, j.df});
    } else if (auto* d = std::get_if<DoublyWarpShape>(&m.shape())) {
      Jet1 u = d->u(c), v = d->v(c);
      out.push_back({u.f, u.df});
      out.push_back({v.f, v.df});
    } else if (auto* t = std::get_if<TripleBlockShape>(&m.shape())) {
      const Rect& dm = t->F.domain();
      const int g = 12;
      for (int i = 1; i < g; ++i) {
        const double r = dm.r0 + (dm.r1 - dm.r0) * i / g;
        if (collar.axis == 1) {
          F2Jet a = t->alpha(r, c), f = t->F(r, c);
          out.push_back({a.v, a.dt});
          out.push_back({f.v, f.dt});
        } else {
          F2Jet a = t->alpha(c, r), f = t->F(c, r);
          out.push_back({a.v, a.dr});
          out.push_back({f.v, f.dr});
        }
      }
    } else {
      throw std::invalid_argument("boundary_product_check: unsupported shape");
    }
    return out;
  };

  for (int i = 0; i < n_s; ++i) {
    const double s = n_s == 1 ? 0.0 : double(i) / (n_s - 1);
    const BlockMetric m = p.at(s);
    for (int j = 0; j <= n_pts; ++j) {
      const double c = collar.lo + (collar.hi - collar.lo) * j / n_pts;
      const auto cur = probe(m, c);
      const auto base = probe(ref, c);
      for (size_t k = 0; k < cur.size(); ++k) {
        const double dev_c = std::abs(cur[k].second);
        const double dev_s = std::abs(cur[k].first - base[k].first);
        if (dev_c > rep.max_dev_in_collar) {
          rep.max_dev_in_collar = dev_c;
          rep.worst = {s, c};
        }
        if (dev_s > rep.max_dev_in_s) {
          rep.max_dev_in_s = dev_s;
          rep.worst = {s, c};
        }
      }
    }
  }
  rep.pass = rep.max_dev_in_collar <= collar.tol && rep.max_dev_in_s <= collar.tol;
  return rep;
}

}  // namespace pscwarp
