#pragma once

namespace pscwarp {

/// Two-jet of a scalar function of one variable.
struct Jet1 {
  double f = 0.0;
  double df = 0.0;
  double ddf = 0.0;
};

/// Two-jet of a scalar function of two variables (r, t).
struct F2Jet {
  double v = 0.0;
  double dr = 0.0;
  double dt = 0.0;
  double drr = 0.0;
  double drt = 0.0;
  double dtt = 0.0;
};

}  // namespace pscwarp
