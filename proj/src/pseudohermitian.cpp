#include "crweyl/pseudohermitian.hpp"

#include <algorithm>
#include <cmath>

namespace crweyl {

namespace {

template <class R>
CComplex<R> frac(long p, long q) {
  return CComplex<R>(from_rational<R>(Rational(p, q)));
}

template <class R>
Jet<R> zero_jet(const FrameContext<R>& ctx) {
  return Jet<R>(ctx.space(), ctx.space()->max_order());
}

// Jets indexed [a][b][k]
template <class R>
using Jet3 = std::vector<std::vector<std::vector<Jet<R>>>>;

// D_{ab}(rho_kbar)
template <class R>
Jet3<R> holo_third(const FrameContext<R>& ctx) {
  const int n = ctx.n(), N = ctx.N();
  Jet3<R> g(n, std::vector<std::vector<Jet<R>>>(n, std::vector<Jet<R>>(N)));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int k = 0; k < N; ++k) {
        g[a][b][k] = d_holo_jet(ctx, a, b, ctx.drhobar(k));
        g[b][a][k] = g[a][b][k];
      }
  return g;
}

// conj(xi^k) D_{ab}(rho_kbar)
template <class R>
JetMatrix<R> y_matrix(const FrameContext<R>& ctx, const Jet3<R>& g) {
  const int n = ctx.n(), N = ctx.N();
  JetMatrix<R> y(n, std::vector<Jet<R>>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet<R> s = zero_jet(ctx);
      for (int k = 0; k < N; ++k) s += ctx.xibar(k) * g[a][b][k];
      y[a][b] = s;
    }
  return y;
}

template <class R>
Tensor<R> torsion_from(const FrameContext<R>& ctx, const JetMatrix<R>& y) {
  const CComplex<R> i = imag_unit<R>();
  return Tensor<R>::build(ctx.n(), {IndexKind::lower(), IndexKind::lower()}, ctx.id(),
                          [&](const std::vector<int>& x) {
                            return (y[x[0]][x[1]] - ctx.r() * ctx.hhol(x[0], x[1])) * i;
                          });
}

// rho^kbar = sum_l rho^{l kbar} rho_l
template <class R>
std::vector<Jet<R>> rho_upper_bar(const FrameContext<R>& ctx) {
  std::vector<Jet<R>> out;
  for (int k = 0; k < ctx.N(); ++k) {
    Jet<R> s = zero_jet(ctx);
    for (int l = 0; l < ctx.N(); ++l) s += ctx.kinv(l, k) * ctx.drho(l);
    out.push_back(s);
  }
  return out;
}

template <class R>
bool positive_definite(std::vector<std::vector<CComplex<R>>> a, double tol) {
  const std::size_t k = a.size();
  for (std::size_t c = 0; c < k; ++c) {
    CComplex<R> p = a[c][c];
    if (to_double(p.re) <= tol || std::abs(to_double(p.im)) > 1e-8 * std::max(1.0, abs_d(p))) return false;
    for (std::size_t r = c + 1; r < k; ++r) {
      CComplex<R> f = a[r][c] / p;
      for (std::size_t j = c; j < k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return true;
}

template <class R>
double max_diff(const Tensor<R>& a, const Tensor<R>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, abs_d(a.data()[i].value() - b.data()[i].value()));
  return m;
}

// h_{a bbar} h_{g sbar} + h_{a sbar} h_{g bbar}
template <class R>
Jet<R> hh_sym(const FrameContext<R>& ctx, int a, int b, int g, int s) {
  return ctx.h(a, b) * ctx.h(g, s) + ctx.h(a, s) * ctx.h(g, b);
}

const std::vector<IndexKind>& curvature_kinds() {
  static const std::vector<IndexKind> k{IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false),
                                        IndexKind::lower(true)};
  return k;
}

template <class R>
Tensor<R> mixed_metric_tensor(const FrameContext<R>& ctx) {
  return Tensor<R>::build(ctx.n(), {IndexKind::lower(false), IndexKind::lower(true)}, ctx.id(),
                          [&](const std::vector<int>& x) { return ctx.h(x[0], x[1]); }, 1);
}

// -curly R + h^{j kbar} D_{ag}(rho_kbar) D_{bbar sbar}(rho_j) + hanti Y + hhol conj(Y) - r hhol hanti
template <class R>
Tensor<R> curvature_base(const FrameContext<R>& ctx, const Jet3<R>& g, const JetMatrix<R>& y) {
  const int N = ctx.N();
  Tensor<R> cr = curly_R(ctx);
  return Tensor<R>::build(
      ctx.n(), curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], c = x[2], s = x[3];
        Jet<R> t = -cr.at(x);
        for (int j = 0; j < N; ++j) {
          Jet<R> anti = g[b][s][j].conjugate();
          for (int k = 0; k < N; ++k) t += ctx.hamb(j, k) * g[a][c][k] * anti;
        }
        t += ctx.hanti(b, s) * y[a][c];
        t += ctx.hhol(a, c) * y[b][s].conjugate();
        t -= ctx.r() * ctx.hhol(a, c) * ctx.hanti(b, s);
        return t;
      },
      1);
}

template <class R>
void assert_tracefree_agreement(const Tensor<R>& r4, const Tensor<R>& s, const FrameContext<R>& ctx) {
  Tensor<R> tf = tracefree_part(r4, metric(ctx));
  double scale = std::max(1.0, r4.max_abs());
  if (max_diff(tf, s) > 1e-9 * scale)
    throw Error(ErrorCode::InternalInconsistency, "pseudohermitian",
                "Chern-Moser-Weyl tensor disagrees with the tracefree part of the curvature");
}

// omega_b^g(X) and conj-type omega_bbar^gbar(X)
template <class R>
std::pair<JetMatrix<R>, JetMatrix<R>> omega_at(const ConnectionCoeffs<R>& c, Direction d) {
  const int n = c.n;
  JetMatrix<R> om(n, std::vector<Jet<R>>(n)), omb = om;
  for (int b = 0; b < n; ++b)
    for (int g = 0; g < n; ++g) {
      switch (d.kind) {
        case DirKind::Hol:
          om[b][g] = c.gamma_hol(b, g, d.index);
          omb[b][g] = c.gamma_anti(b, g, d.index).conjugate();
          break;
        case DirKind::Anti:
          om[b][g] = c.gamma_anti(b, g, d.index);
          omb[b][g] = c.gamma_hol(b, g, d.index).conjugate();
          break;
        case DirKind::Char:
          om[b][g] = c.gamma_t(b, g);
          omb[b][g] = c.gamma_t(b, g).conjugate();
          break;
      }
    }
  return {om, omb};
}

template <class R>
Jet<R> apply_direction(const FrameContext<R>& ctx, Direction d, const Jet<R>& f) {
  switch (d.kind) {
    case DirKind::Hol:
      return z_hol(ctx, d.index, f);
    case DirKind::Anti:
      return z_anti(ctx, d.index, f);
    case DirKind::Char:
      break;
  }
  return t_char(ctx, f);
}

}  // namespace

template <class R>
SecondFundamentalForm<R> second_fundamental(const FrameContext<R>& ctx) {
  if (!ctx.hessian_invertible())
    throw Error(ErrorCode::HessianDegenerate, "pseudohermitian",
                "complex Hessian of rho is singular; use quadratic_modification (rho + C rho^2)");
  auto g = holo_third(ctx);
  auto up = rho_upper_bar(ctx);
  SecondFundamentalForm<R> out;
  out.IIhol = Tensor<R>::build(ctx.n(), {IndexKind::lower(), IndexKind::lower()}, ctx.id(),
                               [&](const std::vector<int>& x) {
                                 Jet<R> s = zero_jet(ctx);
                                 for (int k = 0; k < ctx.N(); ++k) s += up[k] * g[x[0]][x[1]][k];
                                 return s - ctx.hhol(x[0], x[1]);
                               });
  for (int j = 0; j < ctx.N(); ++j) out.H.push_back(-ctx.xi(j));
  return out;
}

template <class R>
Tensor<R> torsion(const FrameContext<R>& ctx) {
  auto g = holo_third(ctx);
  return torsion_from(ctx, y_matrix(ctx, g));
}

template <class R>
Tensor<R> torsion_liluk(const FrameContext<R>& ctx) {
  const int N = ctx.N();
  std::vector<std::vector<CComplex<R>>> hv(N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) hv[j].push_back(ctx.hess(j, k).value());
  if (!positive_definite(hv, 1e-12))
    throw Error(ErrorCode::NotStrictlyPSH, "pseudohermitian", "rho is not strictly plurisubharmonic at the point");
  auto up = rho_upper_bar(ctx);
  Jet<R> inv = ctx.drho2().inverse();
  const CComplex<R> mi = -imag_unit<R>();
  std::vector<std::vector<Jet<R>>> za(ctx.n()), zb(ctx.n());
  for (int a = 0; a < ctx.n(); ++a)
    for (int k = 0; k < N; ++k) {
      za[a].push_back(z_hol(ctx, a, ctx.drhobar(k)));
      zb[a].push_back(z_hol(ctx, a, up[k]));
    }
  return Tensor<R>::build(ctx.n(), {IndexKind::lower(), IndexKind::lower()}, ctx.id(),
                          [&](const std::vector<int>& x) {
                            Jet<R> s = zero_jet(ctx);
                            for (int k = 0; k < N; ++k) s += za[x[0]][k] * zb[x[1]][k];
                            return s * inv * mi;
                          });
}

template <class R>
ConnectionCoeffs<R> connection(const FrameContext<R>& ctx) {
  const int n = ctx.n();
  ConnectionCoeffs<R> c;
  c.n = n;
  c.frame = ctx.id();
  std::vector<Jet<R>> xiLow;
  for (int b = 0; b < n; ++b) {
    Jet<R> s = zero_jet(ctx);
    for (int sg = 0; sg < n; ++sg) s += ctx.h(b, sg) * ctx.xibar(ctx.greek(sg));
    xiLow.push_back(s);
  }
  Jet3<R> zh(n, std::vector<std::vector<Jet<R>>>(n, std::vector<Jet<R>>(n)));
  for (int b = 0; b < n; ++b)
    for (int s = 0; s < n; ++s)
      for (int m = 0; m < n; ++m) zh[b][s][m] = z_hol(ctx, m, ctx.h(b, s));
  const CComplex<R> mi = -imag_unit<R>();
  for (int b = 0; b < n; ++b)
    for (int g = 0; g < n; ++g) {
      for (int m = 0; m < n; ++m) {
        Jet<R> s = zero_jet(ctx);
        for (int sg = 0; sg < n; ++sg) s += ctx.hinv(g, sg) * zh[b][sg][m];
        if (g == m) s -= xiLow[b];
        c.hol.push_back(s);
        c.anti.push_back(ctx.xi(ctx.greek(g)) * ctx.h(b, m));
      }
      c.chr.push_back(z_hol(ctx, b, ctx.xi(ctx.greek(g))) * mi);
    }
  return c;
}

template <class R>
Tensor<R> curly_R(const FrameContext<R>& ctx) {
  const int N = ctx.N(), w = ctx.w();
  return Tensor<R>::build(
      ctx.n(), curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) {
        Jet<R> total = zero_jet(ctx);
        for (int mask = 0; mask < 16; ++mask) {
          std::vector<int> vars;
          Jet<R> coef;
          bool haveCoef = false;
          for (int s = 0; s < 4; ++s) {
            const bool barred = s % 2 == 1;
            const int base = barred ? N : 0;
            if (mask & (1 << s)) {
              vars.push_back(base + w);
              Jet<R> q = barred ? -ctx.qbar(x[s]) : -ctx.q(x[s]);
              coef = haveCoef ? coef * q : q;
              haveCoef = true;
            } else {
              vars.push_back(base + ctx.greek(x[s]));
            }
          }
          Jet<R> d = ctx.rho_partial(vars);
          total += haveCoef ? coef * d : d;
        }
        return total;
      },
      1);
}

template <class R>
CurvaturePack<R> curvature_general(const FrameContext<R>& ctx) {
  const int n = ctx.n();
  auto g = holo_third(ctx);
  auto y = y_matrix(ctx, g);
  Tensor<R> base = curvature_base(ctx, g, y);
  JetMatrix<R> L(n, std::vector<Jet<R>>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) L[a][b] = d_mixed_jet(ctx, a, b, ctx.log_fefferman());
  Jet<R> trL = zero_jet(ctx);
  for (int e = 0; e < n; ++e)
    for (int d = 0; d < n; ++d) trL += ctx.hinv(e, d) * L[e][d];

  CurvaturePack<R> p;
  p.R4 = Tensor<R>::build(
      n, curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) { return base.at(x) + ctx.r() * hh_sym(ctx, x[0], x[1], x[2], x[3]); }, 1);
  const CComplex<R> c1 = frac<R>(1, n + 2), c2 = frac<R>(1, (n + 1) * (n + 2));
  p.S4 = Tensor<R>::build(
      n, curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], c = x[2], s = x[3];
        Jet<R> t = base.at(x);
        t += (ctx.h(c, s) * L[a][b] + ctx.h(c, b) * L[a][s] + ctx.h(a, b) * L[c][s] + ctx.h(a, s) * L[c][b]) * c1;
        t -= hh_sym(ctx, a, b, c, s) * trL * c2;
        return t;
      },
      1);
  assert_tracefree_agreement(p.R4, p.S4, ctx);
  const CComplex<R> np1 = frac<R>(n + 1, 1);
  p.Ric = Tensor<R>::build(n, {IndexKind::lower(false), IndexKind::lower(true)}, ctx.id(),
                           [&](const std::vector<int>& x) { return ctx.r() * ctx.h(x[0], x[1]) * np1 - L[x[0]][x[1]]; });
  p.Rscal = scalar_trace(p.Ric, metric(ctx));
  p.A = torsion_from(ctx, y);
  if (ctx.hessian_invertible()) p.IIhol = second_fundamental(ctx).IIhol;
  p.Hnorm2 = ctx.r();
  return p;
}

template <class R>
CurvaturePack<R> curvature_unit_hessian(const FrameContext<R>& ctx) {
  const int n = ctx.n(), N = ctx.N();
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k)
      if (abs_d(ctx.hess(j, k).value() - CComplex<R>(R(j == k ? 1 : 0))) > 1e-12)
        throw Error(ErrorCode::NotUnitHessian, "pseudohermitian", "complex Hessian of rho is not the identity");
  Jet<R> inv = ctx.drho2().inverse();
  // h^mu_bbar = h_{bbar sbar} h^{mu sbar}
  JetMatrix<R> hup(n, std::vector<Jet<R>>(n));
  for (int m = 0; m < n; ++m)
    for (int b = 0; b < n; ++b) {
      Jet<R> s = zero_jet(ctx);
      for (int sg = 0; sg < n; ++sg) s += ctx.hanti(b, sg) * ctx.hinv(m, sg);
      hup[m][b] = s;
    }
  Jet<R> hh2 = zero_jet(ctx);
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v) {
      Jet<R> up = zero_jet(ctx);
      for (int b = 0; b < n; ++b) up += hup[v][b] * ctx.hinv(m, b);
      hh2 += ctx.hhol(m, v) * up;
    }
  // K_{a bbar} = h_{mu a} h^mu_bbar
  JetMatrix<R> K(n, std::vector<Jet<R>>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet<R> s = zero_jet(ctx);
      for (int m = 0; m < n; ++m) s += ctx.hhol(m, a) * hup[m][b];
      K[a][b] = s;
    }
  CurvaturePack<R> p;
  p.R4 = Tensor<R>::build(
      n, curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], c = x[2], s = x[3];
        return (hh_sym(ctx, a, b, c, s) - ctx.hhol(a, c) * ctx.hanti(b, s)) * inv;
      },
      1);
  const CComplex<R> c1 = frac<R>(1, n + 2), c2 = frac<R>(1, (n + 1) * (n + 2));
  p.S4 = Tensor<R>::build(
      n, curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], c = x[2], s = x[3];
        Jet<R> t = -(ctx.hhol(a, c) * ctx.hanti(b, s));
        t += (K[a][b] * ctx.h(c, s) + K[c][b] * ctx.h(a, s) + K[a][s] * ctx.h(c, b) + K[c][s] * ctx.h(a, b)) * c1;
        t -= hh2 * hh_sym(ctx, a, b, c, s) * c2;
        return t * inv;
      },
      1);
  auto gm = metric(ctx);
  p.Ric = ricci_trace(p.R4, gm);
  p.Rscal = scalar_trace(p.Ric, gm);
  p.A = torsion(ctx);
  p.IIhol = second_fundamental(ctx).IIhol;
  p.Hnorm2 = inv;
  return p;
}

template <class R>
Tensor<R> cmw_fefferman(const FrameContext<R>& ctx, double tol) {
  const int n = ctx.n();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (abs_d(d_mixed_jet(ctx, a, b, ctx.log_fefferman()).value()) > tol)
        throw Error(ErrorCode::NotApproxMongeAmpere, "pseudohermitian",
                    "D_{a bbar} log J(rho) does not vanish at the point");
  auto g = holo_third(ctx);
  return curvature_base(ctx, g, y_matrix(ctx, g));
}

template <class R>
Tensor<R> kahler_curvature_tensor(const FrameContext<R>& ctx) {
  if (!ctx.hessian_invertible())
    throw Error(ErrorCode::HessianDegenerate, "pseudohermitian",
                "complex Hessian of rho is singular; use quadratic_modification (rho + C rho^2)");
  const int N = ctx.N();
  auto g = holo_third(ctx);
  Tensor<R> cr = curly_R(ctx);
  return Tensor<R>::build(
      ctx.n(), curvature_kinds(), ctx.id(),
      [&](const std::vector<int>& x) {
        Jet<R> t = -cr.at(x);
        for (int j = 0; j < N; ++j) {
          Jet<R> anti = g[x[1]][x[3]][j].conjugate();
          for (int k = 0; k < N; ++k) t += ctx.kinv(j, k) * g[x[0]][x[2]][k] * anti;
        }
        return t;
      },
      1);
}

template <class R>
CComplex<R> kahler_curvature(const FrameContext<R>& ctx, int a, int b, int g, int s) {
  return kahler_curvature_tensor(ctx).value({a, b, g, s});
}

template <class R>
GaussResiduals gauss_check(const FrameContext<R>& ctx) {
  Tensor<R> K = kahler_curvature_tensor(ctx);
  CurvaturePack<R> p = curvature_general(ctx);
  const Tensor<R>& c = *p.IIhol;
  const CComplex<R> r = ctx.r().value();
  GaussResiduals out;
  for (const auto& x : K.indices()) {
    const int a = x[0], b = x[1], g = x[2], s = x[3];
    CComplex<R> rhs = p.R4.value(x) + r * c.value({a, g}) * conj(c.value({b, s})) -
                      r * (ctx.h(g, b).value() * ctx.h(a, s).value() + ctx.h(a, b).value() * ctx.h(g, s).value());
    out.curvature = std::max(out.curvature, abs_d(K.value(x) - rhs));
  }
  const CComplex<R> i = imag_unit<R>();
  for (const auto& x : p.A.indices())
    out.torsion = std::max(out.torsion, abs_d(p.A.value(x) - i * r * c.value(x)));
  return out;
}

template <class R>
double characteristic_residual(const FrameContext<R>& ctx) {
  const int n = ctx.n(), N = ctx.N(), w = ctx.w();
  const CComplex<R> i = imag_unit<R>();
  std::vector<CComplex<R>> t, tb;
  for (int j = 0; j < N; ++j) {
    t.push_back(i * ctx.xi(j).value());
    tb.push_back(-(i * ctx.xibar(j).value()));
  }
  CComplex<R> theta, trho;
  for (int j = 0; j < N; ++j) {
    theta += i * ctx.drhobar(j).value() * tb[j];
    trho += ctx.drho(j).value() * t[j] + ctx.drhobar(j).value() * tb[j];
  }
  double res = std::max(abs_d(theta - CComplex<R>(R(1))), abs_d(trho));
  for (int a = 0; a < n; ++a) {
    std::vector<CComplex<R>> z(N);
    z[ctx.greek(a)] = CComplex<R>(R(1));
    z[w] = -ctx.q(a).value();
    CComplex<R> dz, dzb;
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const CComplex<R> hk = ctx.hess(j, k).value();
        dz -= i * hk * z[j] * tb[k];
        dzb += i * hk * t[j] * conj(z[k]);
      }
    res = std::max({res, abs_d(dz), abs_d(dzb)});
  }
  return res;
}

template <class R>
Tensor<R> covariant_derivative(const Tensor<R>& t, Direction d, const FrameContext<R>& ctx,
                               const ConnectionCoeffs<R>& conn) {
  if (t.frame() != ctx.id() || conn.frame != ctx.id())
    throw Error(ErrorCode::FrameMismatch, "pseudohermitian", "tensor and connection come from another frame");
  if (t.order() < 1)
    throw Error(ErrorCode::ComponentNotField, "pseudohermitian",
                "tensor components carry point values only; raise FrameConfig::derivOrder");
  const int n = ctx.n();
  auto [om, omb] = omega_at(conn, d);
  return Tensor<R>::build(
      n, t.kinds(), t.frame(),
      [&](const std::vector<int>& x) {
        Jet<R> v = apply_direction(ctx, d, t.at(x));
        std::vector<int> y = x;
        for (int s = 0; s < t.rank(); ++s) {
          const IndexKind& k = t.kind(s);
          if (k.characteristic) continue;
          const auto& w = k.barred ? omb : om;
          for (int g = 0; g < n; ++g) {
            y[s] = g;
            if (k.variance == Variance::Lower) v -= w[x[s]][g] * t.at(y);
            else v += w[g][x[s]] * t.at(y);
          }
          y[s] = x[s];
        }
        return v;
      },
      t.weight());
}

template <class R>
Tensor<R> covariant_derivative(const Tensor<R>& t, Direction d, const FrameContext<R>& ctx) {
  return covariant_derivative(t, d, ctx, connection(ctx));
}

template <class R>
Tensor<R> nabla(const Tensor<R>& t, DirKind kind, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn) {
  const int count = kind == DirKind::Char ? 1 : ctx.n();
  std::vector<Tensor<R>> parts;
  for (int m = 0; m < count; ++m) parts.push_back(covariant_derivative(t, Direction{kind, m}, ctx, conn));
  auto kinds = t.kinds();
  kinds.push_back(kind == DirKind::Char ? IndexKind::chr() : IndexKind::lower(kind == DirKind::Anti));
  return Tensor<R>::build(
      ctx.n(), kinds, t.frame(),
      [&](const std::vector<int>& x) {
        std::vector<int> y(x.begin(), x.end() - 1);
        return parts[x.back()].at(y);
      },
      t.weight());
}

template <class R>
Jet<R> sublaplacian_jet(const Jet<R>& f, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn,
                        DeltaBConvention conv) {
  const int n = ctx.n();
  auto g = metric(ctx);
  Tensor<R> df = Tensor<R>::build(n, {IndexKind::lower(false)}, ctx.id(),
                                  [&](const std::vector<int>& x) { return z_hol(ctx, x[0], f); });
  Tensor<R> dfb = Tensor<R>::build(n, {IndexKind::lower(true)}, ctx.id(),
                                   [&](const std::vector<int>& x) { return z_anti(ctx, x[0], f); });
  Tensor<R> a = contract(raise(nabla(df, DirKind::Anti, ctx, conn), 1, g), 0, 1);
  Tensor<R> b = contract(raise(nabla(dfb, DirKind::Hol, ctx, conn), 1, g), 0, 1);
  Jet<R> s = a.at({}) + b.at({});
  return conv == DeltaBConvention::NegativeSum ? -s : s;
}

template <class R>
CComplex<R> sublaplacian(const ScalarField& f, const FrameContext<R>& ctx, DeltaBConvention conv) {
  const int order = std::min(ctx.space()->max_order(), ctx.budget() + 2);
  if (order < 2)
    throw Error(ErrorCode::OrderExceeded, "pseudohermitian", "sub-Laplacian needs a jet order of at least 2");
  return sublaplacian_jet(field_jet_at(ctx, f, order), ctx, connection(ctx), conv).value();
}

template <class R>
Tensor<R> cmw_divergence(const Tensor<R>& s, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn) {
  return contract(raise(nabla(s, DirKind::Hol, ctx, conn), 4, metric(ctx)), 3, 4);
}

template <class R>
Tensor<R> schouten(const CurvaturePack<R>& pack, const FrameContext<R>& ctx) {
  const int n = ctx.n();
  const CComplex<R> c1 = frac<R>(1, n + 2), c2 = frac<R>(1, 2 * (n + 1));
  return Tensor<R>::build(n, {IndexKind::lower(false), IndexKind::lower(true)}, ctx.id(),
                          [&](const std::vector<int>& x) {
                            return (pack.Ric.at(x) - pack.Rscal * ctx.h(x[0], x[1]) * c2) * c1;
                          });
}

template <class R>
Tensor<R> t_tensor(const CurvaturePack<R>& pack, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn) {
  const int n = ctx.n();
  Tensor<R> divA = contract(raise(nabla(pack.A, DirKind::Anti, ctx, conn), 2, metric(ctx)), 1, 2);
  const CComplex<R> c1 = frac<R>(1, n + 2), c2 = frac<R>(1, 2 * (n + 1)), i = imag_unit<R>();
  return Tensor<R>::build(n, {IndexKind::lower(false)}, ctx.id(), [&](const std::vector<int>& x) {
    return (z_hol(ctx, x[0], pack.Rscal) * c2 - divA.at(x) * i) * c1;
  });
}

template <class R>
Tensor<R> v_tensor_pseudo_einstein(const CurvaturePack<R>& pack, const FrameContext<R>& ctx,
                                   const ConnectionCoeffs<R>& conn) {
  const int n = ctx.n();
  Tensor<R> dA = nabla(pack.A, DirKind::Anti, ctx, conn);
  std::vector<Jet<R>> dR;
  for (int a = 0; a < n; ++a) dR.push_back(z_hol(ctx, a, pack.Rscal));
  const CComplex<R> c = imag_unit<R>() * frac<R>(1, n * (n + 1));
  return Tensor<R>::build(
      n, {IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false)}, ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], g = x[2];
        return dA.at({a, g, b}) + (dR[g] * ctx.h(a, b) + dR[a] * ctx.h(g, b)) * c;
      });
}

// value and, when the jets allow it, the derivatives along Z, Zbar and T
template <class R>
double pe_defect_jet(const CurvaturePack<R>& pack, const FrameContext<R>& ctx, bool tangential) {
  const CComplex<R> inv = frac<R>(1, ctx.n());
  double m = 0;
  for (const auto& x : pack.Ric.indices()) {
    Jet<R> d = pack.Ric.at(x) - pack.Rscal * ctx.h(x[0], x[1]) * inv;
    m = std::max(m, abs_d(d.value()));
    if (!tangential || d.order() < 1) continue;
    for (int a = 0; a < ctx.n(); ++a)
      m = std::max({m, abs_d(z_hol(ctx, a, d).value()), abs_d(z_anti(ctx, a, d).value())});
    m = std::max(m, abs_d(t_char(ctx, d).value()));
  }
  return m;
}

template <class R>
double pseudo_einstein_defect(const CurvaturePack<R>& pack, const FrameContext<R>& ctx) {
  return pe_defect_jet(pack, ctx, false);
}

template <class R>
Tensor<R> v_tensor(const CurvaturePack<R>& pack, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn) {
  const int n = ctx.n();
  Tensor<R> dA = nabla(pack.A, DirKind::Anti, ctx, conn);
  Tensor<R> dP = nabla(schouten(pack, ctx), DirKind::Hol, ctx, conn);
  Tensor<R> T = t_tensor(pack, ctx, conn);
  const CComplex<R> i = imag_unit<R>(), two_i = i * frac<R>(2, 1);
  Tensor<R> v = Tensor<R>::build(
      n, {IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false)}, ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], g = x[2];
        return dA.at({a, g, b}) + dP.at({a, b, g}) * i - T.at({g}) * ctx.h(a, b) * i -
               T.at({a}) * ctx.h(g, b) * two_i;
      });
  if (n >= 2 && pe_defect_jet(pack, ctx, true) < 1e-8) {
    Tensor<R> pe = v_tensor_pseudo_einstein(pack, ctx, conn);
    if (max_diff(v, pe) > 1e-8 * std::max(1.0, v.max_abs()))
      throw Error(ErrorCode::RouteDisagreement, "pseudohermitian",
                  "Cotton tensor disagrees with its pseudo-Einstein form");
  }
  return v;
}

#define CRWEYL_PH_INST(R)                                                                                        \
  template SecondFundamentalForm<R> second_fundamental(const FrameContext<R>&);                                 \
  template Tensor<R> torsion(const FrameContext<R>&);                                                           \
  template Tensor<R> torsion_liluk(const FrameContext<R>&);                                                     \
  template ConnectionCoeffs<R> connection(const FrameContext<R>&);                                              \
  template Tensor<R> curly_R(const FrameContext<R>&);                                                           \
  template CurvaturePack<R> curvature_general(const FrameContext<R>&);                                          \
  template CurvaturePack<R> curvature_unit_hessian(const FrameContext<R>&);                                     \
  template Tensor<R> cmw_fefferman(const FrameContext<R>&, double);                                             \
  template CComplex<R> kahler_curvature(const FrameContext<R>&, int, int, int, int);                            \
  template Tensor<R> kahler_curvature_tensor(const FrameContext<R>&);                                           \
  template GaussResiduals gauss_check(const FrameContext<R>&);                                                  \
  template double characteristic_residual(const FrameContext<R>&);                                              \
  template Tensor<R> covariant_derivative(const Tensor<R>&, Direction, const FrameContext<R>&,                  \
                                          const ConnectionCoeffs<R>&);                                          \
  template Tensor<R> covariant_derivative(const Tensor<R>&, Direction, const FrameContext<R>&);                 \
  template Tensor<R> nabla(const Tensor<R>&, DirKind, const FrameContext<R>&, const ConnectionCoeffs<R>&);      \
  template Jet<R> sublaplacian_jet(const Jet<R>&, const FrameContext<R>&, const ConnectionCoeffs<R>&,           \
                                   DeltaBConvention);                                                           \
  template CComplex<R> sublaplacian(const ScalarField&, const FrameContext<R>&, DeltaBConvention);              \
  template Tensor<R> cmw_divergence(const Tensor<R>&, const FrameContext<R>&, const ConnectionCoeffs<R>&);      \
  template Tensor<R> schouten(const CurvaturePack<R>&, const FrameContext<R>&);                                 \
  template Tensor<R> t_tensor(const CurvaturePack<R>&, const FrameContext<R>&, const ConnectionCoeffs<R>&);     \
  template Tensor<R> v_tensor(const CurvaturePack<R>&, const FrameContext<R>&, const ConnectionCoeffs<R>&);     \
  template Tensor<R> v_tensor_pseudo_einstein(const CurvaturePack<R>&, const FrameContext<R>&,                  \
                                              const ConnectionCoeffs<R>&);                                      \
  template double pseudo_einstein_defect(const CurvaturePack<R>&, const FrameContext<R>&);

CRWEYL_PH_INST(Rational)
CRWEYL_PH_INST(Real)

}  // namespace crweyl
