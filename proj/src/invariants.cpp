#include "crweyl/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace crweyl {

namespace {

using CR = CComplex<Real>;

constexpr int kBudget = 2;

template <class R>
CComplex<R> frac(long p, long q) {
  return CComplex<R>(from_rational<R>(Rational(p, q)));
}

void require_five(int n, const char* what) {
  if (n != 2) throw Error(ErrorCode::WrongDimension, "invariants", std::string(what) + " is defined for n = 2 only");
}

FrameContext<Real> rebuild(const FrameContext<Real>& ctx, const Hypersurface& s) {
  FrameConfig cfg = ctx.config();
  cfg.derivOrder = std::max(cfg.derivOrder, kBudget);
  return FrameContext<Real>(s, ctx.point().coords, cfg);
}

// contract S_{a bbar g sbar} against T^{bbar g sbar}
template <class R>
Tensor<R> contract_tail(const Tensor<R>& s, const Tensor<R>& tUpper) {
  return contract(contract(contract(tensor_product(s, tUpper), 1, 4), 1, 3), 1, 2);
}

double rel(const CR& a, const CR& b) { return abs_d(CR(a - b)) / std::max(1.0, std::max(abs_d(a), abs_d(b))); }

template <class R>
CComplex<R> i_prime_terms(const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn, const CurvaturePack<R>& pack,
                          DeltaBConvention conv) {
  auto g = metric(ctx);
  Jet<R> s2 = norm2(pack.S4, g);
  CComplex<R> lap = sublaplacian_jet(s2, ctx, conn, conv).value();
  CComplex<R> d2 = norm2(cmw_divergence(pack.S4, ctx, conn), g).value();
  CComplex<R> v = lap * frac<R>(-1, 8) + d2 * frac<R>(1, 4) + pack.Rscal.value() * s2.value() * frac<R>(1, 12);
  const double scale = std::max({1.0, abs_d(lap), abs_d(d2)});
  if (std::abs(to_double(v.im)) > 1e-9 * scale)
    throw Error(ErrorCode::InternalInconsistency, "invariants", "I' has a non-negligible imaginary part");
  return v;
}

}  // namespace

PEScale pe_scale(const FrameContext<Real>& ctx) {
  const int n = ctx.n();
  const Real J = ctx.fefferman().value().re;
  if (!(J > 0)) throw Error(ErrorCode::NotPositiveJ, "invariants", "J(rho) must be positive for the volume-normalized scale");
  const Hypersurface& s = ctx.surface();
  ScalarField J_field = fefferman_field(s);
  ScalarField rhoT = pow(J_field, Rational(-1, n + 2)) * s.rho();
  ScalarField u = ScalarField::constant(GaussRational(Rational(-1, n + 2))) * log(J_field);
  PEScale pe{u, rhoT, rebuild(ctx, s), rebuild(ctx, s.with_rho(rhoT)), {}, {}, 0, 0};
  pe.jResidual = abs_d(CR(pe.ctxTilde.fefferman().value() - CR(Real(1))));
  if (pe.jResidual > 1e-8)
    throw Error(ErrorCode::InternalInconsistency, "invariants", "J(rhoTilde) is not 1 at the point");
  pe.conn = connection(pe.ctxTilde);
  pe.pack = curvature_general(pe.ctxTilde);
  pe.peDefect = pseudo_einstein_defect(pe.pack, pe.ctxTilde);
  if (pe.peDefect > 1e-7 * std::max(1.0, pe.pack.Ric.max_abs()))
    throw Error(ErrorCode::NotPseudoEinstein, "invariants", "volume-normalized scale fails the pseudo-Einstein check");
  return pe;
}

template <class R>
Tensor<R> x_alpha_direct(const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn, const CurvaturePack<R>& pack) {
  require_five(ctx.n(), "X");
  auto g = metric(ctx);
  Tensor<R> div = cmw_divergence(pack.S4, ctx, conn);
  Tensor<R> sd = contract_tail(pack.S4, raise_all(div, g));
  Jet<R> s2 = norm2(pack.S4, g);
  const CComplex<R> half = frac<R>(1, 2), quarter = frac<R>(1, 4);
  return Tensor<R>::build(ctx.n(), {IndexKind::lower(false)}, ctx.id(), [&](const std::vector<int>& x) {
    return sd.at(x) * half + z_hol(ctx, x[0], s2) * quarter;
  });
}

std::vector<CR> x_alpha_transform(const PEScale& pe) {
  const FrameContext<Real>& ctx = pe.ctx;
  const int n = ctx.n();
  require_five(n, "X");
  const CR i = imag_unit<Real>();
  auto conn = connection(ctx);
  auto pack = curvature_general(ctx);
  auto g = metric(ctx);

  Jet<Real> u = ctx.fefferman().log() * frac<Real>(-1, n + 2);
  Jet<Real> e2u = (u * CR(Real(-2))).exp();
  std::vector<Jet<Real>> ua(n), uab(n), uup(n);
  for (int a = 0; a < n; ++a) {
    ua[a] = z_hol(ctx, a, u);
    uab[a] = z_anti(ctx, a, u);
  }
  for (int m = 0; m < n; ++m) {
    uup[m] = ctx.hinv(m, 0) * uab[0];
    for (int v = 1; v < n; ++v) uup[m] += ctx.hinv(m, v) * uab[v];
  }
  // -i A~ = -i A + u_{a,b} - u_a u_b
  JetMatrix<Real> At(n, std::vector<Jet<Real>>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet<Real> uabb = z_hol(ctx, b, ua[a]);
      for (int c = 0; c < n; ++c) uabb -= conn.gamma_hol(a, c, b) * ua[c];
      At[a][b] = pack.A.at({a, b}) + (uabb - ua[a] * ua[b]) * i;
    }
  // A~_{ag,bbar} with omega~_a^m(Z_bbar) = omega_a^m(Z_bbar) - u^m h_{a bbar}
  auto omega = [&](int a, int m, int b) { return conn.gamma_anti(a, m, b) - uup[m] * ctx.h(a, b); };
  Tensor<Real> dA = Tensor<Real>::build(
      n, {IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false)}, ctx.id(),
      [&](const std::vector<int>& x) {
        const int a = x[0], b = x[1], c = x[2];
        Jet<Real> v = z_anti(ctx, b, At[a][c]);
        for (int m = 0; m < n; ++m) v -= omega(a, m, b) * At[m][c] + omega(c, m, b) * At[a][m];
        return v;
      });
  // S.V = S.A~_{,bbar} since S is tracefree
  Tensor<Real> sv = contract_tail(pack.S4, raise_all(dA, g));
  Jet<Real> s2 = e2u * norm2(pack.S4, g);
  std::vector<CR> out(n);
  for (int a = 0; a < n; ++a)
    out[a] = (e2u * sv.at({a}) * (-i)).value() + z_hol(ctx, a, s2).value() * frac<Real>(1, 4);
  return out;
}

std::vector<CR> x_alpha(const PEScale& pe) {
  require_five(pe.ctxTilde.n(), "X");
  Tensor<Real> a = x_alpha_direct(pe.ctxTilde, pe.conn, pe.pack);
  std::vector<CR> b = x_alpha_transform(pe);
  std::vector<CR> out(a.n());
  for (int k = 0; k < a.n(); ++k) {
    out[k] = a.value({k});
    if (rel(out[k], b[k]) > 1e-6)
      throw Error(ErrorCode::RouteDisagreement, "invariants",
                  "X: direct and transformation-law routes disagree (" + std::to_string(abs_d(CR(out[k] - b[k]))) + ")");
  }
  return out;
}

template <class R>
CComplex<R> i_prime_at(const FrameContext<R>& ctx, DeltaBConvention conv) {
  require_five(ctx.n(), "I'");
  if (ctx.budget() < 2)
    throw Error(ErrorCode::OrderExceeded, "invariants", "I' needs a derivative budget of at least 2");
  auto conn = connection(ctx);
  auto pack = curvature_general(ctx);
  return i_prime_terms(ctx, conn, pack, conv);
}

Real i_prime(const PEScale& pe, DeltaBConvention conv) {
  require_five(pe.ctxTilde.n(), "I'");
  return i_prime_terms(pe.ctxTilde, pe.conn, pe.pack, conv).re;
}

Real div_x(const PEScale& pe) {
  require_five(pe.ctxTilde.n(), "div X");
  Tensor<Real> x = x_alpha_direct(pe.ctxTilde, pe.conn, pe.pack);
  auto d = nabla(x, DirKind::Anti, pe.ctxTilde, pe.conn);
  return contract(raise(d, 1, metric(pe.ctxTilde)), 0, 1).value({}).re;
}

DimFiveInvariants dim_five_invariants(const PEScale& pe, DeltaBConvention conv) {
  DimFiveInvariants out;
  out.normS2 = norm2(pe.pack.S4, metric(pe.ctxTilde)).value().re;
  out.X = x_alpha(pe);
  out.Iprime = i_prime(pe, conv);
  out.divX = div_x(pe);
  return out;
}

double conformal_law_check(const FrameContext<Real>& ctx, const ScalarField& f, DeltaBConvention conv) {
  const int n = ctx.n();
  require_five(n, "the I' transformation law");
  const auto& p = ctx.point().coords;
  CR f0 = field_eval(f, p);
  if (!(f0.re > 0)) throw Error(ErrorCode::NotPositiveFactor, "invariants", "conformal factor must be positive");
  const Hypersurface& s = ctx.surface();
  auto c0 = rebuild(ctx, s);
  auto c1 = rebuild(ctx, s.with_rho(f * s.rho()));
  auto conn = connection(c0);
  auto pack = curvature_general(c0);
  CR i0 = i_prime_terms(c0, conn, pack, conv);
  CR i1 = i_prime_at(c1, conv);
  Tensor<Real> x = x_alpha_direct(c0, conn, pack);
  Jet<Real> U = field_jet_at(c0, f, c0.space()->max_order()).log();
  CR xu;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) xu += c0.hinv(a, b).value() * conj(x.value({b})) * z_hol(c0, a, U).value();
  CR e3 = (U * CR(Real(3))).exp().value();
  return abs_d(CR(e3 * i1 - i0 - CR(Real(2) * xu.re)));
}

std::pair<Rational, Rational> ck_dk(int n, int k) {
  if (n < 2 || k < 1) throw Error(ErrorCode::BadParameter, "invariants", "c_k, d_k need n >= 2 and k >= 1");
  const Rational c1(-1, 2), d1(1, 2 * (n + 1));
  Rational c = c1, d = d1;
  for (int j = 1; j < k; ++j) {
    Rational cn = n * c1 * c + 2 * c * d1 + 2 * c1 * d;
    d = 2 * d1 * d;
    c = cn;
  }
  Rational np1k = 1, base = 1;
  const Rational q(2 - n - n * n, 2);
  for (int j = 0; j < k; ++j) {
    np1k *= n + 1;
    base *= q;
  }
  if (d != Rational(1, 2) / np1k || c != (base - 1) / (n * np1k))
    throw Error(ErrorCode::InternalInconsistency, "invariants", "c_k, d_k recursion disagrees with the closed form");
  return {c, d};
}

TubePowerFit tube_power_check(const FrameContext<Real>& ctx, int k) {
  const int n = ctx.n();
  auto g = metric(ctx);
  auto pack = curvature_general(ctx);
  Tensor<Real> sk = cmw_power(pack.S4, k, g);
  // h^{b m} = h^{b bbar} h^{m sbar} h_{bbar sbar}
  std::vector<std::vector<CR>> hup(n, std::vector<CR>(n));
  for (int b = 0; b < n; ++b)
    for (int m = 0; m < n; ++m)
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          hup[b][m] += ctx.hinv(b, x).value() * ctx.hinv(m, y).value() * ctx.hanti(x, y).value();
  auto basis1 = [&](const std::vector<int>& x) { return ctx.hhol(x[0], x[2]).value() * hup[x[1]][x[3]]; };
  auto basis2 = [&](const std::vector<int>& x) {
    return CR(Real((x[0] == x[1] && x[2] == x[3]) + (x[0] == x[3] && x[2] == x[1])));
  };
  // least squares in the hermitian inner product
  CR g11, g12, g22, r1, r2;
  for (const auto& x : sk.indices()) {
    CR b1 = basis1(x), b2 = basis2(x), v = sk.value(x);
    g11 += conj(b1) * b1;
    g12 += conj(b1) * b2;
    g22 += conj(b2) * b2;
    r1 += conj(b1) * v;
    r2 += conj(b2) * v;
  }
  CR det = g11 * g22 - g12 * conj(g12);
  TubePowerFit fit;
  fit.c = (r1 * g22 - g12 * r2) / det;
  fit.d = (g11 * r2 - conj(g12) * r1) / det;
  for (const auto& x : sk.indices())
    fit.residual = std::max(fit.residual, abs_d(CR(sk.value(x) - fit.c * basis1(x) - fit.d * basis2(x))));
  return fit;
}

template Tensor<Rational> x_alpha_direct(const FrameContext<Rational>&, const ConnectionCoeffs<Rational>&,
                                         const CurvaturePack<Rational>&);
template Tensor<Real> x_alpha_direct(const FrameContext<Real>&, const ConnectionCoeffs<Real>&,
                                     const CurvaturePack<Real>&);
template CComplex<Rational> i_prime_at(const FrameContext<Rational>&, DeltaBConvention);
template CComplex<Real> i_prime_at(const FrameContext<Real>&, DeltaBConvention);

}  // namespace crweyl
