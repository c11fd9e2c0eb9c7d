#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pscwarp/jet.hpp"

namespace pscwarp {

enum class WarpKind { Sine, Torpedo, DoubleTorpedo, Cutoff, HBlend, CosineCap, Custom };

/// A smooth scalar function on an interval with exact two-jet access.
/// Immutable after construction; evaluation is pure.
class WarpFn {
 public:
  WarpFn() = default;
  WarpFn(double lo, double hi, WarpKind kind, std::function<Jet1(double)> eval,
         std::string label = {});

  Jet1 operator()(double t) const { return eval_(t); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double length() const { return hi_ - lo_; }
  WarpKind kind() const { return kind_; }
  const std::string& label() const { return label_; }

 private:
  double lo_ = 0.0, hi_ = 1.0;
  WarpKind kind_ = WarpKind::Custom;
  std::function<Jet1(double)> eval_;
  std::string label_;
};

struct TorpedoParams {
  double delta = 1.0;            // tip radius
  double b = 4.0;                // domain length
  double transition_width = -1;  // f1-level window w; <0 picks the default
  void validate() const;         // throws std::invalid_argument
  double width() const;          // resolved w
};

// --- the metric zoo's scalar ingredients ---

WarpFn sine_fn();                                   // sin t on (0, pi)
WarpFn cosine_fn();                                 // cos r on (0, pi/2)
WarpFn constant_fn(double c, double lo, double hi);
WarpFn torpedo_fn(const TorpedoParams& p);
WarpFn double_torpedo_fn(const TorpedoParams& p);
WarpFn cutoff_fn(double t0, double t1);             // 0 below t0, 1 above t1
WarpFn h_blend_fn(double w);                        // r near 0, sin r beyond 2w
WarpFn cosine_cap_fn(double r0 = 0.05, double r1 = 0.5);  // 1 on [0,r0], cos r beyond r1

/// Bump that is 0 outside [up0, dn1], 1 on [up1, dn0]; all junctions C-infinity.
WarpFn plateau_bump_fn(double up0, double up1, double dn0, double dn1);

// --- combinators (jets propagate exactly) ---

WarpFn warp_mix(const WarpFn& f, const WarpFn& g, double s, WarpKind kind = WarpKind::Custom);
WarpFn warp_reflect(const WarpFn& f, double c);     // t -> f(c - t)
WarpFn warp_product(const WarpFn& f, const WarpFn& g);
WarpFn warp_affine(double a, double b, const WarpFn& f);  // a + b*f
WarpFn warp_from_callable(double lo, double hi, std::function<double(double)> f,
                          double fd_h = 1e-5);      // FD jets, no smoothness guarantee

// --- consistency reporting ---

struct JetReport {
  double max_err1 = 0.0;  // max |FD1 - f'|
  double max_err2 = 0.0;  // max |FD2 - f''|
  double worst_t1 = 0.0;
  double worst_t2 = 0.0;
  bool pass = false;
};

/// Central-difference cross-check of the stored jets, O(h^2) stencils.
JetReport jet_check(const WarpFn& f, int n_samples, double h, double tol_jet = 1e-5);

namespace detail {

/// Smooth step built from exp(-1/t): 0 at u<=0, 1 at u>=1, all derivatives
/// vanish at both ends, psi(u) + psi(1-u) = 1.
Jet1 smoothstep(double u);

/// c0 + c1*tau + sum_k (a_k cos k pi tau + b_k sin k pi tau) with closed-form
/// derivatives and iterated antiderivatives from 0.
struct TrigProfile {
  std::vector<double> coef;  // [c0, c1, a1, b1, a2, b2, ...]
  double value(double tau) const;
  double deriv(double tau) const;
  double integral(double tau) const;   // int_0^tau
  double integral2(double tau) const;  // int_0^tau int_0^s
};

/// Solve the 6-constraint profile (endpoint values/slopes + two integrals)
/// in the {1, tau, cos pi tau, sin pi tau, cos 2pi tau, sin 2pi tau} basis.
TrigProfile solve_profile6(double v0, double s0, double v1, double s1,
                           double i0, double i1);

/// 8-constraint C^3 Hermite join in an 8-term trig basis; returns function-level
/// coefficients on tau in [0,1].
TrigProfile solve_hermite8(const double left[4], const double right[4]);

}  // namespace detail

}  // namespace pscwarp
