#include "pscwarp/singular.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pscwarp {

namespace {

double eval_term(const PolyTerm& t, const VectorXd& y, const VectorXd& x) {
  double v = t.coeff;
  const int k = int(y.size());
  for (int i = 0; i < k; ++i)
    for (int e = 0; e < t.exponents[i]; ++e) v *= y[i];
  for (int i = 0; i < int(x.size()); ++i)
    for (int e = 0; e < t.exponents[k + i]; ++e) v *= x[i];
  return v;
}

// differentiate a term by the fiber coordinate xi (index within the fiber)
PolyTerm diff_fiber(const PolyTerm& t, int k, int xi) {
  PolyTerm d = t;
  const int idx = k + xi;
  if (d.exponents[idx] == 0) {
    d.coeff = 0.0;
    return d;
  }
  d.coeff *= d.exponents[idx];
  d.exponents[idx] -= 1;
  return d;
}

PolyTerm diff_param(const PolyTerm& t, int yi) {
  PolyTerm d = t;
  if (d.exponents[yi] == 0) {
    d.coeff = 0.0;
    return d;
  }
  d.coeff *= d.exponents[yi];
  d.exponents[yi] -= 1;
  return d;
}

}  // namespace

GermFamily GermFamily::polynomial(int k, int m, std::vector<PolyTerm> terms, GermProvenance prov) {
  if (k < 0 || m < 1) throw std::invalid_argument("GermFamily: bad dimensions");
  for (const auto& t : terms)
    if (int(t.exponents.size()) != k + m)
      throw std::invalid_argument("GermFamily: term exponent length must be k+m");
  GermFamily g;
  g.k_ = k;
  g.m_ = m;
  g.terms_ = std::move(terms);
  g.prov_ = prov;
  return g;
}

GermFamily GermFamily::from_function(int k, int m,
                                     std::function<double(const VectorXd&, const VectorXd&)> f,
                                     double fd_h) {
  GermFamily g;
  g.k_ = k;
  g.m_ = m;
  g.fn_ = std::move(f);
  g.fd_h_ = fd_h;
  g.prov_ = GermProvenance::User;
  return g;
}

double GermFamily::value(const VectorXd& y, const VectorXd& x) const {
  if (fn_) return fn_(y, x);
  double v = 0.0;
  for (const auto& t : terms_) v += eval_term(t, y, x);
  return v;
}

VectorXd GermFamily::fiber_grad(const VectorXd& y, const VectorXd& x) const {
  VectorXd g = VectorXd::Zero(m_);
  if (fn_) {
    for (int i = 0; i < m_; ++i) {
      VectorXd xp = x, xm = x;
      xp[i] += fd_h_;
      xm[i] -= fd_h_;
      g[i] = (fn_(y, xp) - fn_(y, xm)) / (2 * fd_h_);
    }
    return g;
  }
  for (const auto& t : terms_)
    for (int i = 0; i < m_; ++i) {
      PolyTerm d = diff_fiber(t, k_, i);
      if (d.coeff != 0.0) g[i] += eval_term(d, y, x);
    }
  return g;
}

MatrixXd GermFamily::fiber_hess(const VectorXd& y, const VectorXd& x) const {
  MatrixXd H = MatrixXd::Zero(m_, m_);
  if (fn_) {
    const double h = fd_h_;
    const double f0 = fn_(y, x);
    for (int i = 0; i < m_; ++i) {
      for (int j = i; j < m_; ++j) {
        double v;
        if (i == j) {
          VectorXd xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          v = (fn_(y, xp) - 2 * f0 + fn_(y, xm)) / (h * h);
        } else {
          VectorXd a = x, b = x, c = x, d = x;
          a[i] += h; a[j] += h;
          b[i] += h; b[j] -= h;
          c[i] -= h; c[j] += h;
          d[i] -= h; d[j] -= h;
          v = (fn_(y, a) - fn_(y, b) - fn_(y, c) + fn_(y, d)) / (4 * h * h);
        }
        H(i, j) = H(j, i) = v;
      }
    }
    return H;
  }
  for (const auto& t : terms_)
    for (int i = 0; i < m_; ++i) {
      PolyTerm di = diff_fiber(t, k_, i);
      if (di.coeff == 0.0) continue;
      for (int j = 0; j < m_; ++j) {
        PolyTerm dij = diff_fiber(di, k_, j);
        if (dij.coeff != 0.0) H(i, j) += eval_term(dij, y, x);
      }
    }
  return H;
}

double GermFamily::third_along(const VectorXd& y, const VectorXd& x, const VectorXd& v) const {
  if (fn_) {
    // five-point directional stencil for f'''(0) along v
    const double h = std::max(fd_h_, 1e-3);
    auto fs = [&](double s) { return fn_(y, x + s * v); };
    return (fs(2 * h) - 2 * fs(h) + 2 * fs(-h) - fs(-2 * h)) / (2 * h * h * h);
  }
  double sum = 0.0;
  for (const auto& t : terms_)
    for (int i = 0; i < m_; ++i) {
      PolyTerm di = diff_fiber(t, k_, i);
      if (di.coeff == 0.0) continue;
      for (int j = 0; j < m_; ++j) {
        PolyTerm dij = diff_fiber(di, k_, j);
        if (dij.coeff == 0.0) continue;
        for (int l = 0; l < m_; ++l) {
          PolyTerm dijl = diff_fiber(dij, k_, l);
          if (dijl.coeff != 0.0) sum += eval_term(dijl, y, x) * v[i] * v[j] * v[l];
        }
      }
    }
  return sum;
}

VectorXd GermFamily::param_deriv_of_grad_along(const VectorXd& y, const VectorXd& x,
                                               const VectorXd& v) const {
  VectorXd out = VectorXd::Zero(k_);
  if (fn_) {
    for (int j = 0; j < k_; ++j) {
      VectorXd yp = y, ym = y;
      yp[j] += fd_h_;
      ym[j] -= fd_h_;
      out[j] = (fiber_grad(yp, x).dot(v) - fiber_grad(ym, x).dot(v)) / (2 * fd_h_);
    }
    return out;
  }
  for (const auto& t : terms_)
    for (int i = 0; i < m_; ++i) {
      PolyTerm di = diff_fiber(t, k_, i);
      if (di.coeff == 0.0) continue;
      for (int j = 0; j < k_; ++j) {
        PolyTerm dij = diff_param(di, j);
        if (dij.coeff != 0.0) out[j] += eval_term(dij, y, x) * v[i];
      }
    }
  return out;
}

GermFamily GermFamily::fix_params(const VectorXd& y0) const {
  if (int(y0.size()) != k_) throw std::invalid_argument("fix_params: wrong parameter size");
  if (fn_) {
    auto f = fn_;
    VectorXd y = y0;
    return from_function(0, m_, [f, y](const VectorXd&, const VectorXd& x) { return f(y, x); },
                         fd_h_);
  }
  std::vector<PolyTerm> out;
  for (const auto& t : terms_) {
    PolyTerm nt;
    nt.coeff = t.coeff;
    for (int i = 0; i < k_; ++i)
      for (int e = 0; e < t.exponents[i]; ++e) nt.coeff *= y0[i];
    nt.exponents.assign(t.exponents.begin() + k_, t.exponents.end());
    if (nt.coeff != 0.0) out.push_back(std::move(nt));
  }
  return polynomial(0, m_, std::move(out), prov_);
}

GermFamily unfolding_family(int s, int m) {
  if (!(0 <= s && s <= m - 1)) throw std::invalid_argument("unfolding_family: need 0 <= s <= m-1");
  std::vector<PolyTerm> terms;
  auto expo = [m](int yi, int zi, int xi, int xe) {
    std::vector<int> e(1 + m, 0);
    if (yi >= 0) e[0] = yi;
    e[1] += zi;
    if (xi >= 0) e[1 + 1 + xi] = xe;
    return e;
  };
  terms.push_back({1.0, expo(0, 3, -1, 0)});  // z^3
  terms.push_back({3.0, expo(1, 1, -1, 0)});  // 3 y z
  for (int i = 0; i < m - 1; ++i)
    terms.push_back({i < s ? -1.0 : 1.0, expo(0, 0, i, 2)});
  return GermFamily::polynomial(1, m, std::move(terms), GermProvenance::Unfolding);
}

GermFamily morse_germ(int lambda, int m) {
  if (!(0 <= lambda && lambda <= m)) throw std::invalid_argument("morse_germ: bad index");
  std::vector<PolyTerm> terms;
  for (int i = 0; i < m; ++i) {
    std::vector<int> e(m, 0);
    e[i] = 2;
    terms.push_back({i < lambda ? -1.0 : 1.0, std::move(e)});
  }
  return GermFamily::polynomial(0, m, std::move(terms), GermProvenance::NormalForm);
}

GermFamily birth_death_germ(int s, int m) {
  if (!(0 <= s && s <= m - 1)) throw std::invalid_argument("birth_death_germ: bad index");
  std::vector<PolyTerm> terms;
  std::vector<int> ez(m, 0);
  ez[0] = 3;
  terms.push_back({1.0, std::move(ez)});
  for (int i = 1; i < m; ++i) {
    std::vector<int> e(m, 0);
    e[i] = 2;
    terms.push_back({i - 1 < s ? -1.0 : 1.0, std::move(e)});
  }
  return GermFamily::polynomial(0, m, std::move(terms), GermProvenance::NormalForm);
}

// --- classification ------------------------------------------------------------

namespace {

struct HessSplit {
  VectorXd eigs;
  MatrixXd vecs;
  std::vector<int> neg, pos, zero;
};

HessSplit split_hessian(const MatrixXd& H, double tol_nd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  HessSplit out;
  out.eigs = es.eigenvalues();
  out.vecs = es.eigenvectors();
  const double scale = out.eigs.cwiseAbs().maxCoeff();
  const double thr = tol_nd * std::max(scale, 1e-300);
  for (int i = 0; i < out.eigs.size(); ++i) {
    if (std::abs(out.eigs[i]) <= thr)
      out.zero.push_back(i);
    else if (out.eigs[i] < 0)
      out.neg.push_back(i);
    else
      out.pos.push_back(i);
  }
  return out;
}

}  // namespace

SingularPoint classify_critical(const GermFamily& f, const VectorXd& x0, ClassifyTols tols) {
  if (f.k() != 0) throw std::invalid_argument("classify_critical: expects a k=0 germ");
  const VectorXd y;
  const VectorXd g = f.fiber_grad(y, x0);
  if (g.cwiseAbs().maxCoeff() > tols.tol_grad)
    throw NotCriticalError("classify_critical: gradient is not zero at the given point");
  const MatrixXd H = f.fiber_hess(y, x0);
  const HessSplit hs = split_hessian(H, tols.tol_nd);
  SingularPoint out;
  out.x = x0;
  out.hessian_eigs = hs.eigs;
  if (hs.eigs.cwiseAbs().maxCoeff() == 0.0)
    throw UnclassifiableError("classify_critical: vanishing Hessian");
  if (hs.zero.empty()) {
    out.cls = SingularClass::Morse;
    out.index = int(hs.neg.size());
    return out;
  }
  if (hs.zero.size() == 1) {
    const VectorXd v = hs.vecs.col(hs.zero.front());
    const double third = f.third_along(y, x0, v);
    if (std::abs(third) > tols.tol_nd) {
      out.cls = SingularClass::BirthDeath;
      out.index = int(hs.neg.size());
      out.kernel = v;
      out.cubic = third / 6.0;
      return out;
    }
    throw UnclassifiableError("classify_critical: kernel direction has vanishing cubic term");
  }
  throw UnclassifiableError("classify_critical: Hessian kernel dimension exceeds 1");
}

SingularPoint classify_family_point(const GermFamily& F, const VectorXd& y0, const VectorXd& x0,
                                    ClassifyTols tols) {
  if (F.k() < 1) throw std::invalid_argument("classify_family_point: expects k >= 1");
  const VectorXd g = F.fiber_grad(y0, x0);
  if (g.cwiseAbs().maxCoeff() > tols.tol_grad)
    throw NotCriticalError("classify_family_point: fiber gradient is not zero");
  const MatrixXd H = F.fiber_hess(y0, x0);
  const HessSplit hs = split_hessian(H, tols.tol_nd);
  SingularPoint out;
  out.y = y0;
  out.x = x0;
  out.hessian_eigs = hs.eigs;
  if (hs.zero.empty()) {
    out.cls = SingularClass::Fold;
    out.index = int(hs.neg.size());
    return out;
  }
  if (hs.zero.size() == 1) {
    const VectorXd v = hs.vecs.col(hs.zero.front());
    const double third = F.third_along(y0, x0, v);
    if (std::abs(third) <= tols.tol_nd)
      throw UnclassifiableError("classify_family_point: vanishing cubic along the kernel");
    const VectorXd trans = F.param_deriv_of_grad_along(y0, x0, v);
    if (trans.cwiseAbs().maxCoeff() <= tols.tol_nd)
      throw UnclassifiableError("classify_family_point: non-transverse unfolding");
    out.cls = SingularClass::Cusp;
    out.index = int(hs.neg.size());
    out.kernel = v;
    out.cubic = third / 6.0;
    return out;
  }
  throw UnclassifiableError("classify_family_point: fiber kernel dimension exceeds 1");
}

// --- singular set continuation ---------------------------------------------------

bool Box::contains(const VectorXd& u) const {
  for (int i = 0; i < u.size(); ++i)
    if (u[i] < lo[i] || u[i] > hi[i]) return false;
  return true;
}

namespace {

// m x (m+1) Jacobian of G(u) = grad_x F at u = (y, x), k = 1
MatrixXd trace_jacobian(const GermFamily& F, const VectorXd& u) {
  const int m = F.m();
  VectorXd y(1);
  y[0] = u[0];
  const VectorXd x = u.tail(m);
  MatrixXd J(m, m + 1);
  for (int i = 0; i < m; ++i) {
    VectorXd ei = VectorXd::Zero(m);
    ei[i] = 1.0;
    J(i, 0) = F.param_deriv_of_grad_along(y, x, ei)[0];
  }
  J.rightCols(m) = F.fiber_hess(y, x);
  return J;
}

VectorXd trace_residual(const GermFamily& F, const VectorXd& u) {
  VectorXd y(1);
  y[0] = u[0];
  return F.fiber_grad(y, u.tail(F.m()));
}

VectorXd curve_tangent(const GermFamily& F, const VectorXd& u) {
  const MatrixXd J = trace_jacobian(F, u);
  Eigen::FullPivLU<MatrixXd> lu(J);
  const MatrixXd ker = lu.kernel();
  VectorXd t = ker.col(0);
  return t / t.norm();
}

bool newton_on_curve(const GermFamily& F, VectorXd& u, const VectorXd& tangent,
                     const VectorXd& anchor, double tol, int iters = 20) {
  const int m = F.m();
  for (int it = 0; it < iters; ++it) {
    const VectorXd g = trace_residual(F, u);
    const double aug = tangent.dot(u - anchor);
    if (g.cwiseAbs().maxCoeff() < tol && std::abs(aug) < tol) return true;
    MatrixXd A(m + 1, m + 1);
    A.topRows(m) = trace_jacobian(F, u);
    A.row(m) = tangent.transpose();
    VectorXd rhs(m + 1);
    rhs.head(m) = -g;
    rhs[m] = -aug;
    const VectorXd step = A.fullPivLu().solve(rhs);
    u += step;
    if (!u.allFinite()) return false;
  }
  return trace_residual(F, u).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

std::vector<TracedCurve> singular_set_trace(const GermFamily& F, const Box& region, int seeds,
                                            TraceOpts opts) {
  if (F.k() != 1) throw std::invalid_argument("singular_set_trace: implemented for k = 1");
  const int m = F.m();
  if (int(region.lo.size()) != m + 1)
    throw std::invalid_argument("singular_set_trace: region must bound (y, x)");

  // seed lattice + fixed-y Newton polish
  std::vector<VectorXd> found;
  const int per_axis = std::max(2, int(std::round(std::pow(double(seeds), 1.0 / (m + 1)))));
  std::vector<int> idx(m + 1, 0);
  auto lattice_point = [&](const std::vector<int>& id) {
    VectorXd u(m + 1);
    for (int d = 0; d <= m; ++d)
      u[d] = region.lo[d] + (region.hi[d] - region.lo[d]) * (id[d] + 0.5) / per_axis;
    return u;
  };
  const double diam = (region.hi - region.lo).norm();
  auto known = [&](const VectorXd& u) {
    for (const auto& v : found)
      if ((u - v).norm() < 1e-4 * diam) return true;
    return false;
  };
  bool more = true;
  while (more) {
    VectorXd u = lattice_point(idx);
    // Newton in x with y fixed
    VectorXd y(1);
    y[0] = u[0];
    VectorXd x = u.tail(m);
    bool ok = false;
    for (int it = 0; it < 25; ++it) {
      const VectorXd g = F.fiber_grad(y, x);
      if (g.cwiseAbs().maxCoeff() < opts.newton_tol) {
        ok = true;
        break;
      }
      const MatrixXd H = F.fiber_hess(y, x);
      Eigen::FullPivLU<MatrixXd> lu(H);
      if (!lu.isInvertible()) break;
      x -= lu.solve(g);
      if (!x.allFinite()) break;
    }
    if (ok) {
      VectorXd sol(m + 1);
      sol[0] = y[0];
      sol.tail(m) = x;
      if (region.contains(sol) && !known(sol)) found.push_back(sol);
    }
    // advance lattice
    more = false;
    for (int d = 0; d <= m; ++d) {
      if (++idx[d] < per_axis) {
        more = true;
        break;
      }
      idx[d] = 0;
    }
  }

  std::vector<TracedCurve> curves;
  std::vector<VectorXd> covered;
  auto is_covered = [&](const VectorXd& u) {
    for (const auto& v : covered)
      if ((u - v).norm() < opts.step) return true;
    return false;
  };

  for (const VectorXd& seed : found) {
    if (is_covered(seed)) continue;
    TracedCurve curve;
    for (int dir = 0; dir < 2; ++dir) {
      VectorXd u = seed;
      VectorXd t_prev = curve_tangent(F, u) * (dir == 0 ? 1.0 : -1.0);
      double ds = opts.step;
      std::vector<TracedPoint> leg;
      for (int step = 0; step < opts.max_points; ++step) {
        VectorXd tang = curve_tangent(F, u);
        if (tang.dot(t_prev) < 0) tang = -tang;
        VectorXd pred = u + ds * tang;
        VectorXd corr = pred;
        if (!newton_on_curve(F, corr, tang, pred, opts.newton_tol)) {
          ds *= 0.5;
          if (ds < opts.step / 64.0) {
            curve.stalled = true;
            curve.note = "continuation stalled";
            break;
          }
          continue;
        }
        if (!region.contains(corr)) break;
        TracedPoint tp;
        tp.u = corr;
        tp.residual = trace_residual(F, corr).cwiseAbs().maxCoeff();
        VectorXd y(1);
        y[0] = corr[0];
        try {
          tp.cls = classify_family_point(F, y, corr.tail(m));
        } catch (const std::exception&) {
          tp.cls = std::nullopt;
        }
        leg.push_back(tp);
        covered.push_back(corr);
        t_prev = tang;
        u = corr;
        ds = std::min(ds * 1.3, opts.step);
      }
      if (dir == 0) {
        std::reverse(leg.begin(), leg.end());
        curve.points = std::move(leg);
        TracedPoint seed_pt;
        seed_pt.u = seed;
        seed_pt.residual = trace_residual(F, seed).cwiseAbs().maxCoeff();
        VectorXd y(1);
        y[0] = seed[0];
        try {
          seed_pt.cls = classify_family_point(F, y, seed.tail(m));
        } catch (const std::exception&) {
          seed_pt.cls = std::nullopt;
        }
        curve.points.push_back(seed_pt);
        covered.push_back(seed);
      } else {
        curve.points.insert(curve.points.end(), leg.begin(), leg.end());
      }
    }
    if (!curve.points.empty()) curves.push_back(std::move(curve));
  }
  return curves;
}

AdmissibleReport admissible_check(const std::vector<SingularPoint>& points, int n) {
  AdmissibleReport rep;
  rep.pass = true;
  for (const auto& p : points) {
    if (p.half_integer()) {
      if (p.index > n - 3) {
        rep.pass = false;
        rep.failures.push_back("birth-death/cusp floor index " + std::to_string(p.index) +
                               " exceeds n-3 = " + std::to_string(n - 3));
      }
    } else if (p.index > n - 2) {
      rep.pass = false;
      rep.failures.push_back("Morse/fold index " + std::to_string(p.index) +
                             " exceeds n-2 = " + std::to_string(n - 2));
    }
  }
  return rep;
}

// --- Morse triples ---------------------------------------------------------------

MorseTripleModel standard_morse_triple(int lambda, int m) {
  GermFamily f = morse_germ(lambda, m);
  MorseTripleModel t{f, [m](const VectorXd&) { return MatrixXd::Identity(m, m); },
                     [f](const VectorXd& x) { return f.fiber_grad(VectorXd(), x); }};
  return t;
}

CompatReport compatible_metric_check(const MorseTripleModel& t,
                                     const std::vector<VectorXd>& crit_pts, double tol,
                                     double factor) {
  CompatReport rep;
  const VectorXd y;
  for (const VectorXd& w : crit_pts) {
    const MatrixXd H = t.f.fiber_hess(y, w);
    const MatrixXd m = t.metric(w);
    const HessSplit hs = split_hessian(H, 1e-7);
    auto block_res = [&](const std::vector<int>& idx, double sign) {
      for (int a : idx)
        for (int b : idx) {
          const VectorXd va = hs.vecs.col(a), vb = hs.vecs.col(b);
          const double d2f = va.dot(H * vb);
          const double mm = va.dot(m * vb);
          rep.max_block_residual =
              std::max(rep.max_block_residual, std::abs(d2f - sign * factor * mm));
        }
    };
    block_res(hs.pos, +1.0);
    block_res(hs.neg, -1.0);
    auto ortho = [&](const std::vector<int>& a, const std::vector<int>& b) {
      for (int i : a)
        for (int j : b)
          rep.max_orthogonality_residual = std::max(
              rep.max_orthogonality_residual, std::abs(hs.vecs.col(i).dot(m * hs.vecs.col(j))));
    };
    ortho(hs.pos, hs.neg);
    ortho(hs.pos, hs.zero);
    ortho(hs.neg, hs.zero);
    for (int z : hs.zero) {
      const VectorXd v = hs.vecs.col(z);
      rep.max_kernel_residual = std::max(rep.max_kernel_residual, std::abs(v.dot(m * v) - 1.0));
    }
  }
  rep.pass = rep.max_orthogonality_residual <= tol && rep.max_block_residual <= tol &&
             rep.max_kernel_residual <= tol;
  return rep;
}

GradlikeReport gradient_like_check(const MorseTripleModel& t, const Box& region,
                                   double crit_radius, const std::vector<VectorXd>& crit_pts,
                                   int n_samples, double tol) {
  GradlikeReport rep;
  rep.min_df_V = std::numeric_limits<double>::infinity();
  const int m = int(region.lo.size());
  const int per_axis = std::max(2, int(std::round(std::pow(double(n_samples), 1.0 / m))));
  const VectorXd ypar;
  std::vector<int> idx(m, 0);
  bool more = true;
  while (more) {
    VectorXd x(m);
    for (int d = 0; d < m; ++d)
      x[d] = region.lo[d] + (region.hi[d] - region.lo[d]) * (idx[d] + 0.5) / per_axis;
    bool near = false;
    for (const auto& w : crit_pts)
      if ((x - w).norm() < crit_radius) near = true;
    const VectorXd df = t.f.fiber_grad(ypar, x);
    const VectorXd V = t.vector_field(x);
    if (near) {
      const VectorXd gradm = t.metric(x).fullPivLu().solve(df);
      rep.max_near_crit_dev = std::max(rep.max_near_crit_dev, (V - gradm).cwiseAbs().maxCoeff());
    } else {
      rep.min_df_V = std::min(rep.min_df_V, df.dot(V));
      ++rep.n_outside;
    }
    more = false;
    for (int d = 0; d < m; ++d) {
      if (++idx[d] < per_axis) {
        more = true;
        break;
      }
      idx[d] = 0;
    }
  }
  rep.pass = rep.min_df_V > 0.0 && rep.max_near_crit_dev <= tol;
  return rep;
}

// --- trajectory flow ---------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) pair
struct DP45 {
  static constexpr double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr double b5[7] = {35.0 / 384,     0, 500.0 / 1113, 125.0 / 192,
                                   -2187.0 / 6784, 11.0 / 84, 0};
  static constexpr double b4[7] = {5179.0 / 57600,  0,           7571.0 / 16695, 393.0 / 640,
                                   -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

}  // namespace

Polyline trajectory_flow(const MorseTripleModel& t, const VectorXd& start, FlowDir dir,
                         const FlowStop& until, FlowOpts opts) {
  const VectorXd ypar;
  const double sgn = dir == FlowDir::Forward ? 1.0 : -1.0;
  auto field = [&](const VectorXd& p) -> VectorXd {
    VectorXd V = t.vector_field(p);
    if (opts.unit_level_rate) {
      const double rate = t.f.fiber_grad(ypar, p).dot(V);
      if (std::abs(rate) < 1e-14) throw StepCollapseError("flow: level rate collapsed");
      V /= rate;
    }
    return sgn * V;
  };

  Polyline out;
  VectorXd x = start;
  double time = 0.0, h = opts.h0;
  auto fval = [&](const VectorXd& p) { return t.f.value(ypar, p); };
  out.points.push_back({time, x, fval(x)});

  auto near_crit = [&](const VectorXd& p) {
    for (const auto& w : until.crit_pts)
      if ((p - w).norm() < until.crit_radius) return true;
    return false;
  };
  if (near_crit(x)) {
    out.termination = "critical-point";
    return out;
  }

  double level_sign = until.level ? (fval(x) - *until.level > 0 ? 1.0 : -1.0) : 0.0;

  std::vector<VectorXd> ks(7);
  int rejects_in_a_row = 0;
  while (time < until.max_time) {
    h = std::min(h, until.max_time - time);
    // one embedded step
    bool ok = true;
    VectorXd x5, err;
    try {
      for (int i = 0; i < 7; ++i) {
        VectorXd xi = x;
        for (int j = 0; j < i; ++j) xi += h * DP45::a[i][j] * ks[j];
        ks[i] = field(xi);
      }
      x5 = x;
      VectorXd x4 = x;
      for (int i = 0; i < 7; ++i) {
        x5 += h * DP45::b5[i] * ks[i];
        x4 += h * DP45::b4[i] * ks[i];
      }
      err = x5 - x4;
    } catch (const StepCollapseError&) {
      if (near_crit(x)) {
        out.termination = "critical-point";
        return out;
      }
      throw;
    }
    const double scale = opts.tol * (1.0 + x.cwiseAbs().maxCoeff());
    const double enorm = err.cwiseAbs().maxCoeff() / scale;
    if (enorm > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(enorm, -0.25));
      if (h < 1e-13) throw StepCollapseError("flow: step size collapsed");
      if (++rejects_in_a_row > 60) throw StepCollapseError("flow: repeated step rejection");
      continue;
    }
    rejects_in_a_row = 0;

    // level-crossing event: shrink the step with bisection on the substep size
    if (until.level) {
      const double fx5 = fval(x5);
      const double new_sign = fx5 - *until.level > 0 ? 1.0 : -1.0;
      if (new_sign != level_sign) {
        double lo = 0.0, hi2 = h;
        VectorXd xm = x5;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi2);
          for (int i = 0; i < 7; ++i) {
            VectorXd xj = x;
            for (int j = 0; j < i; ++j) xj += mid * DP45::a[i][j] * ks[j];
            ks[i] = field(xj);
          }
          xm = x;
          for (int i = 0; i < 7; ++i) xm += mid * DP45::b5[i] * ks[i];
          const double fm = fval(xm) - *until.level;
          if ((fm > 0 ? 1.0 : -1.0) == level_sign)
            lo = mid;
          else
            hi2 = mid;
          if (hi2 - lo < 1e-14 * std::max(1.0, h)) break;
        }
        time += hi2;
        out.points.push_back({time, xm, fval(xm)});
        out.termination = "level";
        return out;
      }
    }

    time += h;
    x = x5;
    out.points.push_back({time, x, fval(x)});
    if (near_crit(x)) {
      out.termination = "critical-point";
      return out;
    }
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(enorm, 1e-10), -0.2)));
  }
  out.termination = "time";
  return out;
}

}  // namespace pscwarp
