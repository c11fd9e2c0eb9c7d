#include "pscwarp/field.hpp"

#include <cmath>
#include <stdexcept>

namespace pscwarp {

Field2::Field2(Rect dom, std::function<F2Jet(double, double)> eval, std::string label)
    : dom_(dom), eval_(std::move(eval)), label_(std::move(label)) {
  if (!(dom.r0 < dom.r1 && dom.t0 < dom.t1)) throw std::invalid_argument("Field2: empty domain");
}

Field2 field_of_r(const WarpFn& f, double t0, double t1) {
  Rect dom{f.lo(), f.hi(), t0, t1};
  return Field2(dom,
                [f](double r, double) {
                  Jet1 j = f(r);
                  return F2Jet{j.f, j.df, 0.0, j.ddf, 0.0, 0.0};
                },
                f.label());
}

Field2 field_of_t(const WarpFn& f, double r0, double r1) {
  Rect dom{r0, r1, f.lo(), f.hi()};
  return Field2(dom,
                [f](double, double t) {
                  Jet1 j = f(t);
                  return F2Jet{j.f, 0.0, j.df, 0.0, 0.0, j.ddf};
                },
                f.label());
}

Field2 field_const(double c, Rect dom) {
  return Field2(dom, [c](double, double) { return F2Jet{c, 0, 0, 0, 0, 0}; }, "const");
}

Field2 field_alpha(const WarpFn& mu, const WarpFn& radial, Rect dom) {
  return Field2(dom,
                [mu, radial](double r, double t) {
                  const Jet1 m = mu(t), h = radial(r);
                  const double g = 1.0 - h.f;  // alpha = 1 - mu*(1-h)
                  return F2Jet{1.0 - m.f * g,
                               m.f * h.df,
                               -m.df * g,
                               m.f * h.ddf,
                               m.df * h.df,
                               -m.ddf * g};
                },
                "alpha");
}

Field2 field_mix_t(const WarpFn& loc, const WarpFn& base, const WarpFn& target, Rect dom) {
  return Field2(dom,
                [loc, base, target](double r, double t) {
                  const Jet1 l = loc(t), b = base(r), g = target(r);
                  const double d = g.f - b.f, d1 = g.df - b.df, d2 = g.ddf - b.ddf;
                  return F2Jet{b.f + l.f * d,
                               b.df + l.f * d1,
                               l.df * d,
                               b.ddf + l.f * d2,
                               l.df * d1,
                               l.ddf * d};
                },
                "mix");
}

Field2 field_sum(const Field2& a, const Field2& b) {
  return Field2(a.domain(),
                [a, b](double r, double t) {
                  F2Jet x = a(r, t), y = b(r, t);
                  return F2Jet{x.v + y.v,   x.dr + y.dr,   x.dt + y.dt,
                               x.drr + y.drr, x.drt + y.drt, x.dtt + y.dtt};
                },
                "sum");
}

Field2 field_scale(double c, const Field2& a) {
  return Field2(a.domain(),
                [c, a](double r, double t) {
                  F2Jet x = a(r, t);
                  return F2Jet{c * x.v, c * x.dr, c * x.dt, c * x.drr, c * x.drt, c * x.dtt};
                },
                "scale");
}

Field2 field_mul_r(const Field2& a, const WarpFn& g) {
  return Field2(a.domain(),
                [a, g](double r, double t) {
                  F2Jet x = a(r, t);
                  Jet1 j = g(r);
                  return F2Jet{x.v * j.f,
                               x.dr * j.f + x.v * j.df,
                               x.dt * j.f,
                               x.drr * j.f + 2.0 * x.dr * j.df + x.v * j.ddf,
                               x.drt * j.f + x.dt * j.df,
                               x.dtt * j.f};
                },
                "mul");
}

FieldCheckReport field_check(const Field2& F, int n, double h, double tol) {
  FieldCheckReport rep;
  const Rect& d = F.domain();
  const double rl = d.r0 + 2 * h, rh = d.r1 - 2 * h;
  const double tl = d.t0 + 2 * h, th = d.t1 - 2 * h;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double r = rl + (rh - rl) * (i + 0.5) / n;
      const double t = tl + (th - tl) * (j + 0.5) / n;
      const F2Jet c = F(r, t);
      const double vpr = F(r + h, t).v, vmr = F(r - h, t).v;
      const double vpt = F(r, t + h).v, vmt = F(r, t - h).v;
      const double vpp = F(r + h, t + h).v, vpm = F(r + h, t - h).v;
      const double vmp = F(r - h, t + h).v, vmm = F(r - h, t - h).v;
      double errs[] = {std::abs((vpr - vmr) / (2 * h) - c.dr),
                       std::abs((vpt - vmt) / (2 * h) - c.dt),
                       std::abs((vpr - 2 * c.v + vmr) / (h * h) - c.drr),
                       std::abs((vpt - 2 * c.v + vmt) / (h * h) - c.dtt),
                       std::abs((vpp - vpm - vmp + vmm) / (4 * h * h) - c.drt)};
      for (double e : errs) rep.max_err = std::max(rep.max_err, e);
    }
  }
  rep.pass = rep.max_err <= tol;
  return rep;
}

}  // namespace pscwarp
