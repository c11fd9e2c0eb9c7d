#include "pscwarp/warp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace pscwarp {

using std::numbers::pi;

WarpFn::WarpFn(double lo, double hi, WarpKind kind, std::function<Jet1(double)> eval,
               std::string label)
    : lo_(lo), hi_(hi), kind_(kind), eval_(std::move(eval)), label_(std::move(label)) {
  if (!(lo < hi)) throw std::invalid_argument("WarpFn: empty domain");
}

namespace detail {

Jet1 smoothstep(double u) {
  // exp(-1/u) underflows to 0.0 below ~1/745; treat those tails as exact.
  constexpr double tail = 1.0 / 700.0;
  if (u <= tail) return {0.0, 0.0, 0.0};
  if (u >= 1.0 - tail) return {1.0, 0.0, 0.0};
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  const double u2 = u * u, w = 1.0 - u, w2 = w * w;
  const double da = a / u2;
  const double db = -b / w2;
  const double dda = a * (1.0 / (u2 * u2) - 2.0 / (u2 * u));
  const double ddb = b * (1.0 / (w2 * w2) - 2.0 / (w2 * w));
  const double s = a + b, ds = da + db, dds = dda + ddb;
  const double psi = a / s;
  const double dpsi = (da * s - a * ds) / (s * s);
  const double ddpsi = dda / s - (2.0 * da * ds + a * dds) / (s * s) + 2.0 * a * ds * ds / (s * s * s);
  return {psi, dpsi, ddpsi};
}

double TrigProfile::value(double tau) const {
  double v = coef[0] + coef[1] * tau;
  for (size_t k = 1; 2 * k < coef.size(); ++k) {
    const double kp = double(k) * pi;
    v += coef[2 * k] * std::cos(kp * tau) + coef[2 * k + 1] * std::sin(kp * tau);
  }
  return v;
}

double TrigProfile::deriv(double tau) const {
  double v = coef[1];
  for (size_t k = 1; 2 * k < coef.size(); ++k) {
    const double kp = double(k) * pi;
    v += kp * (-coef[2 * k] * std::sin(kp * tau) + coef[2 * k + 1] * std::cos(kp * tau));
  }
  return v;
}

double TrigProfile::integral(double tau) const {
  double v = coef[0] * tau + coef[1] * tau * tau / 2.0;
  for (size_t k = 1; 2 * k < coef.size(); ++k) {
    const double kp = double(k) * pi;
    v += coef[2 * k] * std::sin(kp * tau) / kp + coef[2 * k + 1] * (1.0 - std::cos(kp * tau)) / kp;
  }
  return v;
}

double TrigProfile::integral2(double tau) const {
  double v = coef[0] * tau * tau / 2.0 + coef[1] * tau * tau * tau / 6.0;
  for (size_t k = 1; 2 * k < coef.size(); ++k) {
    const double kp = double(k) * pi;
    v += coef[2 * k] * (1.0 - std::cos(kp * tau)) / (kp * kp) +
         coef[2 * k + 1] * (kp * tau - std::sin(kp * tau)) / (kp * kp);
  }
  return v;
}

TrigProfile solve_profile6(double v0, double s0, double v1, double s1, double i0, double i1) {
  // rows: value(0), deriv(0), value(1), deriv(1), int_0^1, int_0^1 (1-tau)*
  Eigen::Matrix<double, 6, 6> A;
  Eigen::Matrix<double, 6, 1> rhs;
  const double p2 = pi * pi;
  A << 1, 0, 1, 0, 1, 0,
       0, 1, 0, pi, 0, 2 * pi,
       1, 1, -1, 0, 1, 0,
       0, 1, 0, -pi, 0, 2 * pi,
       1, 0.5, 0, 2 / pi, 0, 0,
       0.5, 1.0 / 6.0, 2 / p2, 1 / pi, 0, 1 / (2 * pi);
  rhs << v0, s0, v1, s1, i0, i1;
  Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(rhs);
  TrigProfile out;
  out.coef.assign(c.data(), c.data() + 6);
  return out;
}

TrigProfile solve_hermite8(const double left[4], const double right[4]) {
  Eigen::Matrix<double, 8, 8> A;
  Eigen::Matrix<double, 8, 1> rhs;
  auto row = [](int d, double tau, Eigen::Matrix<double, 8, 8>& M, int r) {
    // basis {1, tau, cos k pi tau, sin k pi tau}_{k=1..3}, derivative order d
    M(r, 0) = (d == 0) ? 1.0 : 0.0;
    M(r, 1) = (d == 0) ? tau : (d == 1 ? 1.0 : 0.0);
    for (int k = 1; k <= 3; ++k) {
      const double kp = k * pi;
      const double c = std::cos(kp * tau), s = std::sin(kp * tau);
      double fc = 0, fs = 0;
      switch (d) {
        case 0: fc = c; fs = s; break;
        case 1: fc = -kp * s; fs = kp * c; break;
        case 2: fc = -kp * kp * c; fs = -kp * kp * s; break;
        case 3: fc = kp * kp * kp * s; fs = -kp * kp * kp * c; break;
      }
      M(r, 2 * k) = fc;
      M(r, 2 * k + 1) = fs;
    }
  };
  for (int d = 0; d < 4; ++d) {
    row(d, 0.0, A, d);
    row(d, 1.0, A, 4 + d);
    rhs(d) = left[d];
    rhs(4 + d) = right[d];
  }
  Eigen::Matrix<double, 8, 1> c = A.fullPivLu().solve(rhs);
  TrigProfile out;
  out.coef.assign(c.data(), c.data() + 8);
  return out;
}

// Second derivative of a TrigProfile treated as a function (for hermite8 output).
static double profile_deriv2(const TrigProfile& p, double tau) {
  double v = 0.0;
  for (size_t k = 1; 2 * k < p.coef.size(); ++k) {
    const double kp = double(k) * pi;
    v += -kp * kp * (p.coef[2 * k] * std::cos(kp * tau) + p.coef[2 * k + 1] * std::sin(kp * tau));
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------

void TorpedoParams::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("torpedo: delta must be positive");
  if (!(b > delta * pi / 2.0)) throw std::invalid_argument("torpedo: need b > delta*pi/2");
  const double w = width();
  if (!(w > 0.0) || w >= delta * pi / 4.0 || w >= 0.75 * pi / 2.0)
    throw std::invalid_argument("torpedo: transition width out of range");
}

double TorpedoParams::width() const {
  if (transition_width > 0.0) return transition_width;
  return std::min(0.55, 0.9 * delta * pi / 4.0);
}

namespace {

using detail::TrigProfile;

// f1-level torpedo data: sin t on (0, a], profile on [a, pi/2], 1 beyond.
struct TorpedoCore {
  double w = 0.0, a = 0.0;
  TrigProfile m;  // -f'' on the transition, in tau = (t-a)/w

  explicit TorpedoCore(double w_) : w(w_), a(pi / 2.0 - w_) {
    const double sw = std::sin(w), cw = std::cos(w);
    m = detail::solve_profile6(cw, w * sw, 0.0, 0.0, sw / w, sw / w - (1.0 - cw) / (w * w));
    // concavity of the transition is equivalent to m >= 0
    for (int i = 0; i <= 4096; ++i) {
      if (m.value(i / 4096.0) < -1e-11)
        throw std::runtime_error("torpedo: transition profile lost concavity");
    }
  }

  Jet1 f1(double u) const {
    if (u <= a) return {std::sin(u), std::cos(u), -std::sin(u)};
    if (u >= pi / 2.0) return {1.0, 0.0, 0.0};
    const double tau = (u - a) / w;
    const double sw = std::sin(w), cw = std::cos(w);
    return {cw + w * tau * sw - w * w * m.integral2(tau),
            sw - w * m.integral(tau),
            -m.value(tau)};
  }
};

}  // namespace

WarpFn sine_fn() {
  return WarpFn(0.0, pi, WarpKind::Sine,
                [](double t) { return Jet1{std::sin(t), std::cos(t), -std::sin(t)}; }, "sin");
}

WarpFn cosine_fn() {
  return WarpFn(0.0, pi / 2.0, WarpKind::Custom,
                [](double t) { return Jet1{std::cos(t), -std::sin(t), -std::cos(t)}; }, "cos");
}

WarpFn constant_fn(double c, double lo, double hi) {
  return WarpFn(lo, hi, WarpKind::Custom, [c](double) { return Jet1{c, 0.0, 0.0}; }, "const");
}

WarpFn torpedo_fn(const TorpedoParams& p) {
  p.validate();
  auto core = std::make_shared<TorpedoCore>(p.width());
  const double d = p.delta;
  return WarpFn(0.0, p.b, WarpKind::Torpedo,
                [core, d](double t) {
                  Jet1 j = core->f1(t / d);
                  return Jet1{d * j.f, j.df, j.ddf / d};
                },
                "torpedo");
}

WarpFn double_torpedo_fn(const TorpedoParams& p) {
  p.validate();
  if (!(p.delta * pi / 2.0 < p.b / 2.0))
    throw std::invalid_argument("double torpedo: need delta*pi/2 < b/2");
  auto core = std::make_shared<TorpedoCore>(p.width());
  const double d = p.delta, b = p.b;
  return WarpFn(0.0, b, WarpKind::DoubleTorpedo,
                [core, d, b](double t) {
                  if (t <= b / 2.0) {
                    Jet1 j = core->f1(t / d);
                    return Jet1{d * j.f, j.df, j.ddf / d};
                  }
                  Jet1 j = core->f1((b - t) / d);
                  return Jet1{d * j.f, -j.df, j.ddf / d};
                },
                "double torpedo");
}

WarpFn cutoff_fn(double t0, double t1) {
  if (!(t0 < t1)) throw std::domain_error("cutoff: need t0 < t1");
  const double L = t1 - t0;
  return WarpFn(t0 - L, t1 + L, WarpKind::Cutoff,
                [t0, L](double t) {
                  Jet1 j = detail::smoothstep((t - t0) / L);
                  return Jet1{j.f, j.df / L, j.ddf / (L * L)};
                },
                "cutoff");
}

WarpFn h_blend_fn(double w) {
  if (!(w > 0.0 && w < pi / 4.0)) throw std::domain_error("h_blend: need 0 < w < pi/4");
  const double r0 = w / 2.0, r1 = 2.0 * w, L = r1 - r0;
  const double left[4] = {r0, L, 0.0, 0.0};
  const double right[4] = {std::sin(r1), L * std::cos(r1), -L * L * std::sin(r1),
                           -L * L * L * std::cos(r1)};
  auto prof = std::make_shared<TrigProfile>(detail::solve_hermite8(left, right));
  // h' in [0,1] and h'' <= 0 are what the alpha-constraints downstream rely on
  for (int i = 0; i <= 4096; ++i) {
    const double tau = i / 4096.0;
    const double h1 = prof->deriv(tau) / L;
    const double h2 = detail::profile_deriv2(*prof, tau) / (L * L);
    if (h2 > 1e-11 || h1 < -1e-11 || h1 > 1.0 + 1e-11)
      throw std::runtime_error("h_blend: blend lost monotone concavity");
  }
  return WarpFn(0.0, pi / 2.0, WarpKind::HBlend,
                [prof, r0, r1, L](double r) {
                  if (r <= r0) return Jet1{r, 1.0, 0.0};
                  if (r >= r1) return Jet1{std::sin(r), std::cos(r), -std::sin(r)};
                  const double tau = (r - r0) / L;
                  return Jet1{prof->value(tau), prof->deriv(tau) / L,
                              detail::profile_deriv2(*prof, tau) / (L * L)};
                },
                "h blend");
}

WarpFn cosine_cap_fn(double r0, double r1) {
  if (!(0.0 < r0 && r0 < r1 && r1 < pi / 2.0))
    throw std::domain_error("cosine_cap: need 0 < r0 < r1 < pi/2");
  const double L = r1 - r0;
  // n = -cap'' on the transition; same six constraints as the torpedo profile
  auto n = std::make_shared<TrigProfile>(detail::solve_profile6(
      0.0, 0.0, std::cos(r1), -L * std::sin(r1), std::sin(r1) / L, (1.0 - std::cos(r1)) / (L * L)));
  for (int i = 0; i <= 4096; ++i) {
    if (n->value(i / 4096.0) < -1e-11)
      throw std::runtime_error("cosine_cap: profile lost concavity");
  }
  return WarpFn(0.0, pi / 2.0, WarpKind::CosineCap,
                [n, r0, r1, L](double r) {
                  if (r <= r0) return Jet1{1.0, 0.0, 0.0};
                  if (r >= r1) return Jet1{std::cos(r), -std::sin(r), -std::cos(r)};
                  const double tau = (r - r0) / L;
                  return Jet1{1.0 - L * L * n->integral2(tau), -L * n->integral(tau),
                              -n->value(tau)};
                },
                "cosine cap");
}

WarpFn plateau_bump_fn(double up0, double up1, double dn0, double dn1) {
  if (!(up0 < up1 && up1 <= dn0 && dn0 < dn1))
    throw std::domain_error("plateau_bump: bad breakpoints");
  const double Lu = up1 - up0, Ld = dn1 - dn0;
  return WarpFn(up0 - 1.0, dn1 + 1.0, WarpKind::Custom,
                [=](double t) {
                  Jet1 u = detail::smoothstep((t - up0) / Lu);
                  u.df /= Lu;
                  u.ddf /= Lu * Lu;
                  Jet1 d = detail::smoothstep((t - dn0) / Ld);
                  d.df /= Ld;
                  d.ddf /= Ld * Ld;
                  // u * (1 - d)
                  return Jet1{u.f * (1.0 - d.f),
                              u.df * (1.0 - d.f) - u.f * d.df,
                              u.ddf * (1.0 - d.f) - 2.0 * u.df * d.df - u.f * d.ddf};
                },
                "plateau bump");
}

WarpFn warp_mix(const WarpFn& f, const WarpFn& g, double s, WarpKind kind) {
  const double lo = std::max(f.lo(), g.lo()), hi = std::min(f.hi(), g.hi());
  return WarpFn(lo, hi, kind,
                [f, g, s](double t) {
                  Jet1 a = f(t), b = g(t);
                  return Jet1{(1 - s) * a.f + s * b.f, (1 - s) * a.df + s * b.df,
                              (1 - s) * a.ddf + s * b.ddf};
                },
                "mix");
}

WarpFn warp_reflect(const WarpFn& f, double c) {
  return WarpFn(c - f.hi(), c - f.lo(), f.kind(),
                [f, c](double t) {
                  Jet1 j = f(c - t);
                  return Jet1{j.f, -j.df, j.ddf};
                },
                f.label() + " reflected");
}

WarpFn warp_product(const WarpFn& f, const WarpFn& g) {
  const double lo = std::max(f.lo(), g.lo()), hi = std::min(f.hi(), g.hi());
  return WarpFn(lo, hi, WarpKind::Custom,
                [f, g](double t) {
                  Jet1 a = f(t), b = g(t);
                  return Jet1{a.f * b.f, a.df * b.f + a.f * b.df,
                              a.ddf * b.f + 2.0 * a.df * b.df + a.f * b.ddf};
                },
                "product");
}

WarpFn warp_affine(double a, double b, const WarpFn& f) {
  return WarpFn(f.lo(), f.hi(), WarpKind::Custom,
                [a, b, f](double t) {
                  Jet1 j = f(t);
                  return Jet1{a + b * j.f, b * j.df, b * j.ddf};
                },
                "affine");
}

WarpFn warp_from_callable(double lo, double hi, std::function<double(double)> f, double fd_h) {
  return WarpFn(lo, hi, WarpKind::Custom,
                [f, fd_h](double t) {
                  const double fp = f(t + fd_h), fm = f(t - fd_h), f0 = f(t);
                  return Jet1{f0, (fp - fm) / (2 * fd_h), (fp - 2 * f0 + fm) / (fd_h * fd_h)};
                },
                "user");
}

JetReport jet_check(const WarpFn& f, int n_samples, double h, double tol_jet) {
  if (!(h < f.length() / 10.0)) throw std::invalid_argument("jet_check: step too large");
  JetReport rep;
  const double lo = f.lo() + 2 * h, hi = f.hi() - 2 * h;
  for (int i = 0; i < n_samples; ++i) {
    const double t = lo + (hi - lo) * (i + 0.5) / n_samples;
    const Jet1 j = f(t);
    const double fp = f(t + h).f, fm = f(t - h).f;
    const double fd1 = (fp - fm) / (2 * h);
    const double fd2 = (fp - 2 * j.f + fm) / (h * h);
    if (std::abs(fd1 - j.df) > rep.max_err1) {
      rep.max_err1 = std::abs(fd1 - j.df);
      rep.worst_t1 = t;
    }
    if (std::abs(fd2 - j.ddf) > rep.max_err2) {
      rep.max_err2 = std::abs(fd2 - j.ddf);
      rep.worst_t2 = t;
    }
  }
  rep.pass = rep.max_err1 <= tol_jet && rep.max_err2 <= tol_jet;
  return rep;
}

}  // namespace pscwarp
