#include "pscwarp/assembler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pscwarp {

using std::numbers::pi;

namespace {

double sphere_volume(int k) {
  // Vol(S^k) = 2 pi^{(k+1)/2} / Gamma((k+1)/2)
  return 2.0 * std::pow(pi, (k + 1) / 2.0) / std::tgamma((k + 1) / 2.0);
}

}  // namespace

BlockMetric BoundaryModelMetric::as_block() const {
  WarpFn u = constant_fn(eps, fiber.lo(), fiber.hi());
  return BlockMetric(DoublyWarpShape{u, fiber, p, q}, "boundary model");
}

BoundaryModelMetric standard_boundary_metric(int p, int q, double eps, double delta,
                                             double rho_N, double r_out) {
  if (p < 0 || q < 1) throw std::invalid_argument("boundary metric: bad dimensions");
  if (!(rho_N > delta * pi / 2.0 * 1.02))
    throw std::invalid_argument("boundary metric: need rho_N > delta*pi/2 (standard zone)");
  if (!(r_out > rho_N)) throw std::invalid_argument("boundary metric: need r_out > rho_N");
  BoundaryModelMetric g;
  g.p = p;
  g.q = q;
  g.eps = eps;
  g.delta = delta;
  g.rho_N = rho_N;
  g.r_out = r_out;
  g.fiber = torpedo_fn(TorpedoParams{delta, r_out, -1});
  g.standard = true;
  return g;
}

RegionDecomposition decompose_regions(const MorseTripleModel& f, double c0, double c1,
                                      double rho_N) {
  const int m = f.f.m();
  const VectorXd origin = VectorXd::Zero(m);
  SingularPoint w = classify_critical(f.f, origin);
  if (w.cls != SingularClass::Morse)
    throw std::invalid_argument("decompose_regions: model critical point must be Morse");
  const int lambda = w.index;  // = p + 1
  const int p = lambda - 1, q = m - lambda - 1;
  if (p < 0 || q < 0) throw std::invalid_argument("decompose_regions: bad index/dimension");
  const double fw = f.f.value(VectorXd(), origin);
  if (std::abs(fw - 0.5) > 1e-9)
    throw std::invalid_argument("decompose_regions: normal form must have f(w) = 1/2");
  if (!(0.0 < c0 && c0 < 0.5 && 0.5 < c1 && c1 < 1.0))
    throw std::invalid_argument("decompose_regions: level ordering 0 < c0 < 1/2 < c1 < 1 violated");
  const double R_chart = std::sqrt(0.5);  // normal-form chart disk radius
  if (!(rho_N > 0.0 && rho_N < R_chart))
    throw std::invalid_argument("decompose_regions: tube radius out of range");

  RegionDecomposition d;
  d.p = p;
  d.q = q;
  d.c0 = c0;
  d.c1 = c1;
  d.rho_N = rho_N;
  d.k_N = rho_N * std::sqrt(0.5 + rho_N * rho_N);
  d.boundary_labels = {"S^p x D^{q+1}", "S^p x S^q x I", "D^{p+1} x S^q"};

  // model volumes over the (rho, r) quadrant, f = 1/2 - rho^2 + r^2
  const double vp = sphere_volume(p), vq = sphere_volume(q);
  const int N = 400;
  const double rho_max = std::sqrt(1.0), r_max = std::sqrt(1.0);
  const double da = rho_max / N, db = r_max / N;
  double v0 = 0, vw = 0, v1 = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double rho = (i + 0.5) * da, r = (j + 0.5) * db;
      if (rho * r > d.k_N) continue;
      const double fv = 0.5 - rho * rho + r * r;
      if (fv < 0.0 || fv > 1.0) continue;
      const double w2 = vp * std::pow(rho, p) * vq * std::pow(r, q) * da * db;
      if (fv < c0)
        v0 += w2;
      else if (fv <= c1)
        vw += w2;
      else
        v1 += w2;
    }
  d.vol_U0 = v0;
  d.vol_Uw = vw;
  d.vol_U1 = v1;
  return d;
}

namespace {

Field2 const_field(double c, Rect r) { return field_const(c, r); }

SeamCertificate probe_seam(const std::string& name,
                           const std::function<std::pair<double, double>(double)>& dev_at,
                           double lo, double hi) {
  SeamCertificate cert;
  cert.name = name;
  const int n = 64;
  for (int i = 0; i <= n; ++i) {
    const double s = lo + (hi - lo) * i / n;
    const auto [dv, dd] = dev_at(s);
    const double worst = std::max(std::abs(dv), std::abs(dd));
    if (worst > cert.max_dev) {
      cert.max_dev = worst;
      cert.where = s;
    }
  }
  return cert;
}

}  // namespace

ModelCobordismMetric assemble_gl_cobordism(const BoundaryModelMetric& g0,
                                           const RegionDecomposition& d, double eps,
                                           double delta) {
  if (d.q < 2)
    throw std::invalid_argument("assemble_gl_cobordism: surgery codimension q >= 2 required");
  if (!g0.standard || std::abs(g0.eps - eps) > 0 || std::abs(g0.delta - delta) > 0)
    throw std::invalid_argument(
        "assemble_gl_cobordism: g0 is not standard near the surgery sphere with the requested "
        "radii; preprocess with bend_hypersurface");
  if (g0.p != d.p || g0.q != d.q)
    throw std::invalid_argument("assemble_gl_cobordism: dimension mismatch between g0 and regions");
  const double A = d.c1 - d.c0;
  if (!(A > eps * pi / 2.0 * 1.02))
    throw std::invalid_argument("assemble_gl_cobordism: need c1 - c0 > eps*pi/2 (cap must fit)");
  if (!(d.rho_N > delta * pi / 2.0 * 1.02))
    throw std::invalid_argument("assemble_gl_cobordism: need rho_N > delta*pi/2");

  ModelCobordismMetric m;
  m.p = d.p;
  m.q = d.q;
  m.eps = eps;
  m.delta = delta;
  m.dec = d;
  m.g0 = g0;
  m.block_a = A;

  const WarpFn tor_e = torpedo_fn(TorpedoParams{eps, std::max(2.0 * A, 2.0), -1});
  const WarpFn tor_d = g0.fiber;  // standard: the delta-torpedo on (0, r_out)

  // outer: (t, r) in [0,1] x [rho_N, r_out], g0 + dt^2
  {
    Rect r{0.0, 1.0, d.rho_N, g0.r_out};
    m.outer = BlockMetric(
        TwoSphereBlockShape{const_field(eps, r), field_of_t(tor_d, r.r0, r.r1), d.p, d.q},
        "outer product");
  }
  // U_0: (t, r) in [0, c0] x [0, rho_N], g0|_N + dt^2
  {
    Rect r{0.0, d.c0, 0.0, d.rho_N};
    m.U0 = BlockMetric(
        TwoSphereBlockShape{const_field(eps, r), field_of_t(tor_d, r.r0, r.r1), d.p, d.q}, "U0");
  }
  // U_w: (a, b) in [0, A] x [0, rho_N], the standard block
  {
    Rect r{0.0, A, 0.0, d.rho_N};
    Field2 u = Field2(r,
                      [tor_e](double a, double) {
                        Jet1 j = tor_e(a);
                        return F2Jet{j.f, j.df, 0, j.ddf, 0, 0};
                      },
                      "tor_eps");
    Field2 v = Field2(r,
                      [tor_d](double, double b) {
                        Jet1 j = tor_d(b);
                        return F2Jet{j.f, 0, j.df, 0, 0, j.ddf};
                      },
                      "tor_delta");
    m.Uw = BlockMetric(TwoSphereBlockShape{u, v, d.p, d.q}, "Uw standard block");
  }
  // U_1: (t, a) in [c1, 1] x [0, A], g1 + dt^2
  {
    Rect r{d.c1, 1.0, 0.0, A};
    Field2 u = Field2(r,
                      [tor_e](double, double a) {
                        Jet1 j = tor_e(a);
                        return F2Jet{j.f, 0, j.df, 0, 0, j.ddf};
                      },
                      "tor_eps");
    m.U1 = BlockMetric(TwoSphereBlockShape{u, const_field(delta, r), d.p, d.q}, "U1");
  }

  // seam certificates (all plateau products by construction)
  m.seams.push_back(probe_seam("outer|U0 at r = rho_N",
                               [&](double t) {
                                 (void)t;
                                 Jet1 j = tor_d(d.rho_N);
                                 return std::pair{j.f - delta, j.df};
                               },
                               0.0, d.c0));
  m.seams.push_back(probe_seam("U0|Uw at f = c0",
                               [&](double b) {
                                 Jet1 j = tor_e(A);
                                 (void)b;
                                 return std::pair{j.f - eps, j.df};
                               },
                               0.0, d.rho_N));
  m.seams.push_back(probe_seam("Uw|U1 at f = c1",
                               [&](double a) {
                                 (void)a;
                                 Jet1 j = tor_d(d.rho_N);
                                 return std::pair{j.f - delta, j.df};
                               },
                               0.0, A));
  m.seams.push_back(probe_seam("U1|outer at r = rho_N",
                               [&](double t) {
                                 (void)t;
                                 Jet1 j = tor_e(A);
                                 return std::pair{j.f - eps, j.df};
                               },
                               d.c1, 1.0));
  return m;
}

BlockMetric ModelCobordismMetric::g1_handle() const {
  const WarpFn tor_e = torpedo_fn(TorpedoParams{eps, std::max(2.0 * block_a, 2.0), -1});
  return BlockMetric(
      DoublyWarpShape{tor_e, constant_fn(delta, 0.0, std::max(2.0 * block_a, 2.0)), p, q},
      "g1 handle");
}

BlockMetric ModelCobordismMetric::g1_annulus() const {
  return BlockMetric(DoublyWarpShape{constant_fn(eps, g0.fiber.lo(), g0.fiber.hi()), g0.fiber, p, q},
                     "g1 annulus");
}

// --- equivariance ---------------------------------------------------------------

namespace {

Eigen::MatrixXd haar_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  // fix signs so Q is a deterministic function of A
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (R(i, i) < 0) Q.col(i) *= -1.0;
  return Q;
}

}  // namespace

EquivarianceReport equivariance_probe(const ModelCobordismMetric& m, int n_rotations,
                                      std::uint64_t seed, bool inject_fault) {
  EquivarianceReport rep;
  rep.n_rotations = n_rotations;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto& uw = std::get<TwoSphereBlockShape>(m.Uw.shape());
  const Rect dom = uw.u.domain();
  const int dp = m.p + 1, dq = m.q + 1;

  auto metric_pair = [&](const Eigen::VectorXd& ym, const Eigen::VectorXd& yp,
                         const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
    const double a = ym.norm(), b = yp.norm();
    double uval = uw.u(a, b).v;
    const double vval = uw.v(a, b).v;
    if (inject_fault) uval *= 1.0 + 0.05 * (ym[0] / a) * (ym[0] / a);
    const Eigen::VectorXd hm = ym / a, hp = yp / b;
    const Eigen::VectorXd vm = v.head(dp), vp = v.tail(dq), wm = w.head(dp), wp = w.tail(dq);
    const double vrm = hm.dot(vm), wrm = hm.dot(wm);
    const double vrp = hp.dot(vp), wrp = hp.dot(wp);
    const double tm = (vm - vrm * hm).dot(wm - wrm * hm);
    const double tp = (vp - vrp * hp).dot(wp - wrp * hp);
    return vrm * wrm + (uval / a) * (uval / a) * tm + vrp * wrp + (vval / b) * (vval / b) * tp;
  };

  for (int rot = 0; rot < n_rotations; ++rot) {
    const Eigen::MatrixXd Qm = haar_orthogonal(dp, rng);
    const Eigen::MatrixXd Qp = haar_orthogonal(dq, rng);
    for (int pt = 0; pt < 20; ++pt) {
      const double a = dom.r0 + (0.1 + 0.8 * unif(rng)) * (dom.r1 - dom.r0);
      const double b = dom.t0 + (0.1 + 0.8 * unif(rng)) * (dom.t1 - dom.t0);
      Eigen::VectorXd ym(dp), yp(dq), v(dp + dq), w(dp + dq);
      for (int i = 0; i < dp; ++i) ym[i] = gauss(rng);
      for (int i = 0; i < dq; ++i) yp[i] = gauss(rng);
      ym *= a / ym.norm();
      yp *= b / yp.norm();
      for (int i = 0; i < dp + dq; ++i) {
        v[i] = gauss(rng);
        w[i] = gauss(rng);
      }
      const double g0v = metric_pair(ym, yp, v, w);
      Eigen::VectorXd v2(dp + dq), w2(dp + dq);
      v2.head(dp) = Qm * v.head(dp);
      v2.tail(dq) = Qp * v.tail(dq);
      w2.head(dp) = Qm * w.head(dp);
      w2.tail(dq) = Qp * w.tail(dq);
      const double g1v = metric_pair(Qm * ym, Qp * yp, v2, w2);
      rep.max_dev = std::max(rep.max_dev, std::abs(g1v - g0v));
    }
  }
  return rep;
}

// --- bending ----------------------------------------------------------------------

WarpFn bend_hypersurface(const WarpFn& fiber, const WarpFn& pushout) {
  const double rho_N = fiber.hi();
  // the push-out must fix the metric near the outer boundary
  for (int i = 0; i <= 16; ++i) {
    const double r = rho_N * (0.96 + 0.04 * i / 16.0);
    const Jet1 c = pushout(std::min(r, pushout.hi()));
    if (std::abs(c.f) > 1e-9 || std::abs(c.df) > 1e-9)
      throw std::invalid_argument("bend_hypersurface: push-out does not vanish near rho_N");
  }
  // arclength table s(rho) by composite Gauss-Legendre
  const int panels = 1024;
  static const double gl_x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
  static const double gl_w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};
  auto speed = [&](double r) {
    const double cp = pushout(r).df;
    return std::sqrt(1.0 + cp * cp);
  };
  auto table = std::make_shared<std::vector<double>>(panels + 1, 0.0);
  const double lo = fiber.lo(), dr = (rho_N - lo) / panels;
  for (int i = 0; i < panels; ++i) {
    const double a = lo + i * dr, mid = a + dr / 2.0, half = dr / 2.0;
    double s = 0.0;
    for (int g = 0; g < 4; ++g) s += gl_w[g] * speed(mid + half * gl_x[g]);
    (*table)[i + 1] = (*table)[i] + s * half;
  }
  const double S = table->back();
  auto rho_of_s = [table, lo, dr, speed, panels](double s) {
    // monotone table + Newton polish
    auto it = std::upper_bound(table->begin(), table->end(), s);
    int i = std::max(0, int(it - table->begin()) - 1);
    i = std::min(i, panels - 1);
    double r = lo + i * dr + dr * (s - (*table)[i]) / std::max((*table)[i + 1] - (*table)[i], 1e-300);
    for (int n = 0; n < 8; ++n) {
      // refine: ds = speed dr, local secant around the panel
      const double s_here = (*table)[i] + (r - (lo + i * dr)) * 0.5 *
                                              (speed(lo + i * dr) + speed(r));
      r -= (s_here - s) / speed(r);
      r = std::max(lo, std::min(lo + (i + 1) * dr + dr, r));
    }
    return r;
  };
  return WarpFn(0.0, S, WarpKind::Custom,
                [fiber, pushout, rho_of_s](double s) {
                  const double r = rho_of_s(s);
                  const Jet1 F = fiber(r);
                  const Jet1 c = pushout(r);
                  const double g2 = 1.0 + c.df * c.df;
                  return Jet1{F.f, F.df / std::sqrt(g2),
                              F.ddf / g2 - F.df * c.df * c.ddf / (g2 * g2)};
                },
                "bent fiber");
}

// --- the one-parameter family -----------------------------------------------------

namespace {

double theta_amplitude(double y, double delta_y) {
  // 1 at y = -delta_y (flat), 0 from y ~ -0.05*delta_y on (covers the cusp and beyond)
  const double u = (y + 0.9 * delta_y) / (0.85 * delta_y);
  return 1.0 - detail::smoothstep(u).f;
}

}  // namespace

FamilySlice theorem12_slice(int p, int q, const BoundaryModelMetric& g0, double y,
                            double delta_y, double eps_z) {
  FamilySlice sl;
  sl.y = y;
  const double th = theta_amplitude(y, delta_y);
  sl.theta = th;
  const double eps = g0.eps, delta = g0.delta;
  const double A = eps * pi / 2.0 * 1.1 + eps_z;
  const WarpFn tor_e = torpedo_fn(TorpedoParams{eps, std::max(2.0 * A, 2.0), -1});
  const WarpFn u_warp = warp_mix(constant_fn(eps, tor_e.lo(), tor_e.hi()), tor_e, th);
  const WarpFn tor_d = g0.fiber;

  Rect r_outer{0.0, 1.0, g0.rho_N, g0.r_out};
  sl.outer = BlockMetric(TwoSphereBlockShape{field_const(eps, r_outer),
                                             field_of_t(tor_d, r_outer.r0, r_outer.r1), p, q},
                         "outer");
  Rect r_u0{0.0, 0.3, 0.0, g0.rho_N};
  sl.U0 = BlockMetric(
      TwoSphereBlockShape{field_const(eps, r_u0), field_of_t(tor_d, r_u0.r0, r_u0.r1), p, q}, "U0");

  Rect r_box{0.0, A, 0.0, g0.rho_N};
  auto u_field = Field2(r_box,
                        [u_warp](double a, double) {
                          Jet1 j = u_warp(a);
                          return F2Jet{j.f, j.df, 0, j.ddf, 0, 0};
                        },
                        "u interp");
  auto v_field = Field2(r_box,
                        [tor_d](double, double b) {
                          Jet1 j = tor_d(b);
                          return F2Jet{j.f, 0, j.df, 0, 0, j.ddf};
                        },
                        "tor_delta");
  sl.box_w = BlockMetric(TwoSphereBlockShape{u_field, v_field, p, q}, "block w");
  sl.box_z = BlockMetric(TwoSphereBlockShape{u_field, v_field, p, q}, "block z (reversed)");

  Rect r_u1{0.7, 1.0, 0.0, g0.rho_N};
  sl.U1 = BlockMetric(
      TwoSphereBlockShape{field_const(eps, r_u1), field_of_t(tor_d, r_u1.r0, r_u1.r1), p, q},
      "top product");
  return sl;
}

BlockFamilyReport theorem12_block_family(int s, int p, int q,
                                         const std::function<BoundaryModelMetric(double)>& g0_path,
                                         double delta_y, double eps_z, int n_slices,
                                         GridSpec grid) {
  if (s != p + 1)
    throw std::invalid_argument("theorem12_block_family: fold index must equal p+1");
  if (!(delta_y > 0 && eps_z > 0))
    throw std::invalid_argument("theorem12_block_family: block parameters must be positive");
  BlockFamilyReport rep;
  rep.pass = true;
  std::vector<FamilySlice> slices;
  for (int i = 0; i < n_slices; ++i) {
    const double y = -delta_y + 2.0 * delta_y * i / (n_slices - 1);
    const BoundaryModelMetric g0 = g0_path(y);
    FamilySlice sl = theorem12_slice(p, q, g0, y, delta_y, eps_z);

    SliceCertificate cert;
    cert.y = y;
    cert.min_R = std::numeric_limits<double>::infinity();
    bool psc = true;
    for (const BlockMetric* blk : {&sl.outer, &sl.U0, &sl.box_w, &sl.box_z, &sl.U1}) {
      const CurvatureGrid scan = positivity_scan(*blk, grid);
      psc = psc && scan.pass;
      cert.min_R = std::min(cert.min_R, scan.min_R);
    }
    cert.psc_pass = psc;
    // product structure against the declared boundary metric g0(y)
    double bdev = 0.0;
    const auto& outer = std::get<TwoSphereBlockShape>(sl.outer.shape());
    for (int j = 0; j <= 32; ++j) {
      const double r = g0.rho_N + (g0.r_out - g0.rho_N) * j / 32.0;
      const F2Jet v = outer.v(0.5, r);
      bdev = std::max(bdev, std::abs(v.v - g0.fiber(r).f));
      bdev = std::max(bdev, std::abs(v.dr));  // t-constancy
      bdev = std::max(bdev, std::abs(outer.u(0.5, r).v - g0.eps));
    }
    cert.boundary_dev = bdev;
    cert.boundary_pass = bdev <= 1e-10;
    rep.pass = rep.pass && cert.psc_pass && cert.boundary_pass;
    rep.ys.push_back(y);
    rep.slices.push_back(cert);
    slices.push_back(std::move(sl));
  }

  // warp-parameter Lipschitz constant between adjacent slices
  for (size_t i = 1; i < slices.size(); ++i) {
    const auto& a = std::get<TwoSphereBlockShape>(slices[i - 1].box_w.shape());
    const auto& b = std::get<TwoSphereBlockShape>(slices[i].box_w.shape());
    const Rect d = b.u.domain();
    double dev = 0.0;
    for (int j = 0; j <= 32; ++j) {
      const double x = d.r0 + (d.r1 - d.r0) * j / 32.0;
      const double aa = std::min(x, std::get<TwoSphereBlockShape>(slices[i - 1].box_w.shape())
                                        .u.domain()
                                        .r1);
      dev = std::max(dev, std::abs(a.u(aa, d.t0 + 0.5 * (d.t1 - d.t0)).v -
                                   b.u(std::min(x, d.r1), d.t0 + 0.5 * (d.t1 - d.t0)).v));
    }
    rep.lipschitz = std::max(rep.lipschitz, dev / (rep.ys[i] - rep.ys[i - 1]));
  }

  // endpoint fidelity in warp parameters
  {
    const auto& first = std::get<TwoSphereBlockShape>(slices.front().box_w.shape());
    const auto& last = std::get<TwoSphereBlockShape>(slices.back().box_w.shape());
    const BoundaryModelMetric gm = g0_path(-delta_y);
    const double A = gm.eps * pi / 2.0 * 1.1 + eps_z;
    const WarpFn tor_e = torpedo_fn(TorpedoParams{gm.eps, std::max(2.0 * A, 2.0), -1});
    for (int j = 0; j <= 64; ++j) {
      const double a = 1e-6 + (A - 2e-6) * j / 64.0;
      const double bmid = gm.rho_N / 2.0;
      rep.endpoint_assembly_dev =
          std::max(rep.endpoint_assembly_dev, std::abs(first.u(a, bmid).v - tor_e(a).f));
      rep.endpoint_product_dev =
          std::max(rep.endpoint_product_dev, std::abs(last.u(a, bmid).v - g0_path(delta_y).eps));
    }
  }
  return rep;
}

}  // namespace pscwarp
