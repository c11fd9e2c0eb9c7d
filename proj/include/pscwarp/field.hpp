#pragma once

#include <functional>
#include <string>

#include "pscwarp/jet.hpp"
#include "pscwarp/warp.hpp"

namespace pscwarp {

struct Rect {
  double r0 = 0.0, r1 = 1.0, t0 = 0.0, t1 = 1.0;
};

/// Scalar field on a rectangle with exact partials to second order.
class Field2 {
 public:
  Field2() = default;
  Field2(Rect dom, std::function<F2Jet(double, double)> eval, std::string label = {});

  F2Jet operator()(double r, double t) const { return eval_(r, t); }
  const Rect& domain() const { return dom_; }
  const std::string& label() const { return label_; }

 private:
  Rect dom_;
  std::function<F2Jet(double, double)> eval_;
  std::string label_;
};

/// F(r,t) = f(r).
Field2 field_of_r(const WarpFn& f, double t0, double t1);
/// F(r,t) = f(t).
Field2 field_of_t(const WarpFn& f, double r0, double r1);
Field2 field_const(double c, Rect dom);

/// alpha(r,t) = 1 - mu(t)*(1 - radial(r)); the Lemma-2.1 shape.
Field2 field_alpha(const WarpFn& mu, const WarpFn& radial, Rect dom);

/// F(r,t) = base(r) + loc(t)*(target(r) - base(r)); t-localized radial homotopy.
Field2 field_mix_t(const WarpFn& loc, const WarpFn& base, const WarpFn& target, Rect dom);

Field2 field_sum(const Field2& a, const Field2& b);
Field2 field_scale(double c, const Field2& a);
/// F(r,t) = a(r,t) * g(r) with exact partials.
Field2 field_mul_r(const Field2& a, const WarpFn& g);

struct FieldCheckReport {
  double max_err = 0.0;
  bool pass = false;
};

/// FD cross-check of all six stored partials on an interior grid.
FieldCheckReport field_check(const Field2& F, int n_per_axis, double h, double tol);

}  // namespace pscwarp
