#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pscwarp/warp.hpp"

using namespace pscwarp;
using std::numbers::pi;

namespace {
constexpr double kJunctionTol = 1e-10;

// brute-force grid max of the second derivative
double max_ddf(const WarpFn& f, int n, double margin = 1e-6) {
  double worst = -1e300;
  for (int i = 0; i < n; ++i) {
    const double t = f.lo() + margin + (f.length() - 2 * margin) * i / (n - 1);
    worst = std::max(worst, f(t).ddf);
  }
  return worst;
}
}  // namespace

TEST_CASE("torpedo: plateau and sine regions match the defining conditions") {
  TorpedoParams p{1.0, 4.0, 0.2};
  WarpFn f = torpedo_fn(p);
  // f_1(t) = 1 for t >= pi/2
  CHECK(f(3.0).f == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f(3.0).df == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f(3.0).ddf == doctest::Approx(0.0).epsilon(1e-14));
  // f_1(t) = sin t near 0
  CHECK(f(0.1).f == doctest::Approx(std::sin(0.1)).epsilon(1e-15));
  CHECK(f(0.1).ddf == doctest::Approx(-std::sin(0.1)).epsilon(1e-15));
  // exact plateau value reached at pi/2
  CHECK(std::abs(f(pi / 2).f - 1.0) < 1e-12);
}

TEST_CASE("torpedo: scaling identity f_delta(t) = delta * f_1(t/delta)") {
  TorpedoParams p1{1.0, 4.0, 0.1};
  TorpedoParams ph{0.5, 2.0, 0.1};
  WarpFn f1 = torpedo_fn(p1);
  WarpFn fh = torpedo_fn(ph);
  for (int i = 1; i < 400; ++i) {
    const double t = 2.0 * i / 400.0;
    CHECK(std::abs(fh(t).f - 0.5 * f1(t / 0.5).f) < 1e-12);
  }
  CHECK(max_ddf(fh, 10000) <= 1e-10);
}

TEST_CASE("torpedo: concavity on a dense grid for a spread of parameters") {
  for (double delta : {1.0, 0.5, 0.25}) {
    for (double w1 : {0.1, 0.3, 0.55, 0.7}) {
      if (w1 >= delta * pi / 4.0) continue;
      TorpedoParams p{delta, 4.0 * delta, w1};
      CHECK(max_ddf(torpedo_fn(p), 10000) <= 1e-10);
    }
  }
}

TEST_CASE("torpedo: C^2 junctions at both transition ends") {
  for (double w : {0.2, 0.55}) {
    TorpedoParams p{1.0, 4.0, w};
    WarpFn f = torpedo_fn(p);
    const double a = pi / 2 - w;
    const double eps = 1e-13;
    for (double t : {a, pi / 2}) {
      const Jet1 l = f(t - eps), r = f(t + eps);
      CHECK(std::abs(l.f - r.f) < kJunctionTol);
      CHECK(std::abs(l.df - r.df) < kJunctionTol);
      CHECK(std::abs(l.ddf - r.ddf) < kJunctionTol);
    }
  }
}

TEST_CASE("torpedo: sphere-closing jets at t = 0") {
  WarpFn f = torpedo_fn(TorpedoParams{1.0, 4.0, 0.2});
  CHECK(f(1e-9).f == doctest::Approx(1e-9).epsilon(1e-9));
  CHECK(f(1e-9).df == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(f(1e-9).ddf) < 1e-8);
}

TEST_CASE("torpedo: parameter validation") {
  CHECK_THROWS_AS(torpedo_fn(TorpedoParams{1.0, 1.0, 0.2}), std::invalid_argument);   // b <= d*pi/2
  CHECK_THROWS_AS(torpedo_fn(TorpedoParams{1.0, 4.0, 0.9}), std::invalid_argument);   // w too big
  CHECK_THROWS_AS(torpedo_fn(TorpedoParams{0.25, 2.0, 0.3}), std::invalid_argument);  // w >= d*pi/4
  CHECK_THROWS_AS(torpedo_fn(TorpedoParams{-1.0, 4.0, 0.2}), std::invalid_argument);
}

TEST_CASE("double torpedo: reflection symmetry and plateau") {
  TorpedoParams p{1.0, 6.0, 0.2};
  WarpFn f = double_torpedo_fn(p);
  for (double u : {0.1, 1.0, 2.5}) {
    CHECK(f(3.0 - u).f == doctest::Approx(f(3.0 + u).f).epsilon(1e-14));
  }
  CHECK(f(5.9).f == doctest::Approx(std::sin(0.1)).epsilon(1e-14));

  TorpedoParams ph{0.5, 4.0, 0.1};
  WarpFn g = double_torpedo_fn(ph);
  for (int i = 0; i < 100; ++i) {
    const double t = 0.5 * pi / 2 + (4.0 - 0.5 * pi) * i / 99.0;
    CHECK(std::abs(g(t).f - 0.5) < 1e-13);
  }
  CHECK(max_ddf(g, 10000) <= 1e-10);
  CHECK_THROWS_AS(double_torpedo_fn(TorpedoParams{1.0, 3.0, 0.2}), std::invalid_argument);
}

TEST_CASE("cutoff: clamping, monotonicity, symmetry") {
  WarpFn mu = cutoff_fn(0.0, 1.0);
  CHECK(mu(-0.5).f == 0.0);
  CHECK(mu(1.5).f == 1.0);
  CHECK(mu(0.5).f > 0.0);
  CHECK(mu(0.5).f < 1.0);
  CHECK(mu(0.5).df > 0.0);
  for (double t : {0.2, 0.4})
    CHECK(mu(t).f + mu(1.0 - t).f == doctest::Approx(1.0).epsilon(1e-14));
  // monotone on a grid
  double prev = -1;
  for (int i = 0; i <= 500; ++i) {
    const double v = mu(-0.1 + 1.2 * i / 500.0).f;
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  CHECK_THROWS_AS(cutoff_fn(1.0, 0.0), std::domain_error);
}

TEST_CASE("h-blend: identity near 0, sine away, monotone") {
  WarpFn h = h_blend_fn(0.3);
  CHECK(h(0.1).f == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(h(1.0).f == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  double min_d = 1e300, min_v = 1e300, max_v = -1e300;
  for (int i = 1; i <= 2000; ++i) {
    const double r = pi / 2 * i / 2000.0;
    min_d = std::min(min_d, h(r).df);
    min_v = std::min(min_v, h(r).f);
    max_v = std::max(max_v, h(r).f);
  }
  CHECK(min_d >= -1e-12);
  CHECK(min_v > 0.0);
  CHECK(max_v <= 1.0 + 1e-12);
  CHECK_THROWS_AS(h_blend_fn(1.0), std::domain_error);
}

TEST_CASE("cosine cap: plateau near 0, cosine away, concave") {
  WarpFn c = cosine_cap_fn();
  CHECK(c(0.01).f == 1.0);
  CHECK(c(1.0).f == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
  CHECK(max_ddf(c, 8000) <= 1e-10);
  double min_d = 1e300;
  for (int i = 1; i < 4000; ++i) min_d = std::min(min_d, -c(pi / 2 * i / 4000.0).df);
  CHECK(min_d >= -1e-12);  // nonincreasing
}

TEST_CASE("jet_check: analytic sine passes at the pinned settings") {
  JetReport r = jet_check(sine_fn(), 200, 1e-3, 1e-5);
  CHECK(r.pass);
  CHECK(r.max_err1 < 1e-6);
}

TEST_CASE("jet_check: torpedo families pass at scale-matched steps") {
  // transition fourth derivatives scale like 1/(w^2 delta^3); h chosen so the
  // O(h^2) truncation stays inside tol_jet
  CHECK(jet_check(torpedo_fn(TorpedoParams{1.0, 4.0, -1}), 400, 1e-4, 1e-5).pass);
  CHECK(jet_check(torpedo_fn(TorpedoParams{1.0, 4.0, 0.2}), 400, 1e-4, 1e-5).pass);
  CHECK(jet_check(torpedo_fn(TorpedoParams{0.5, 2.0, 0.1}), 400, 2e-5, 1e-5).pass);
  CHECK(jet_check(double_torpedo_fn(TorpedoParams{1.0, 6.0, 0.2}), 400, 1e-4, 1e-5).pass);
  CHECK(jet_check(cutoff_fn(0.0, 1.0), 400, 1e-4, 1e-5).pass);
  CHECK(jet_check(h_blend_fn(0.3), 400, 1e-4, 1e-5).pass);
  CHECK(jet_check(cosine_cap_fn(), 400, 1e-4, 1e-5).pass);
}

TEST_CASE("jet_check: corrupted derivative is caught") {
  WarpFn bad(0.0, pi, WarpKind::Custom,
             [](double t) { return Jet1{std::sin(t), 1.1 * std::cos(t), -std::sin(t)}; });
  JetReport r = jet_check(bad, 100, 1e-3, 1e-5);
  CHECK_FALSE(r.pass);
  CHECK(r.max_err1 > 1e-3);
}

TEST_CASE("combinators: reflect and mix propagate jets") {
  WarpFn s = sine_fn();
  WarpFn r = warp_reflect(s, pi);
  CHECK(r(1.0).f == doctest::Approx(std::sin(pi - 1.0)).epsilon(1e-14));
  CHECK(r(1.0).df == doctest::Approx(-std::cos(pi - 1.0)).epsilon(1e-14));
  WarpFn m = warp_mix(s, warp_affine(0.0, 2.0, s), 0.5);
  CHECK(m(1.0).f == doctest::Approx(1.5 * std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("plateau bump: support and plateau") {
  WarpFn b = plateau_bump_fn(0.0, 1.0, 2.0, 3.0);
  CHECK(b(-0.5).f == 0.0);
  CHECK(b(1.5).f == 1.0);
  CHECK(b(3.5).f == 0.0);
  CHECK(b(0.5).f > 0.0);
  CHECK(b(0.5).f < 1.0);
}
