#include <doctest.h>

#include <random>
#include <sstream>

#include "crweyl/pseudohermitian.hpp"

using namespace crweyl;

namespace {

using CR = CComplex<Real>;
using CQ = CComplex<Rational>;
using TQ = Tensor<Rational>;

ScalarField poly(const std::string& text, int N) { return ScalarField::polynomial(poly_parse(text, N)); }

Hypersurface sphere2() { return Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) - 1", 3), 2); }
Hypersurface ellipsoid_half() {
  return Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) + 1/4*z3^2 + 1/4*conj(z3)^2 - 1", 3), 2);
}
Hypersurface tube2() {
  return Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) + 1/2*z1^2 + 1/2*conj(z1)^2 + 1/2*z2^2 + "
                           "1/2*conj(z2)^2 + 1/2*z3^2 + 1/2*conj(z3)^2 - 1",
                           3),
                      2);
}

CQ gq(long re, long den = 1, long im = 0, long imden = 1) { return CQ(Rational(re, den), Rational(im, imden)); }

std::vector<CR> p0() { return {CR(sqrt(Real(Rational(1, 2)))), CR(), CR(Real(0), Real(1))}; }
std::vector<CQ> sphere_pt() { return {gq(1, 3), gq(0, 1, 2, 3), gq(2, 3)}; }
std::vector<CQ> tube_pt() { return {gq(1, 2, 1, 3), gq(0, 1, -1), gq(1, 2, 2)}; }

FrameConfig budget(int m) {
  FrameConfig c;
  c.derivOrder = m;
  return c;
}

template <class R>
double diff(const Tensor<R>& a, const Tensor<R>& b) {
  return (a - b).max_abs();
}

// componentwise, for tensors built in different contexts
template <class R>
double value_diff(const Tensor<R>& a, const Tensor<R>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, abs_d(CComplex<R>(a.data()[k].value() - b.data()[k].value())));
  return m;
}

template <class R>
double dist(const CComplex<R>& a, const CComplex<R>& b) {
  return abs_d(CComplex<R>(a - b));
}

// sum |z|^2 + Re(random holomorphic cubic) + e |z1|^4, moved through p
Hypersurface random_psh(std::mt19937_64& rng, const std::vector<CQ>& p, bool quartic) {
  std::uniform_int_distribution<int> c(-4, 4);
  std::ostringstream t;
  t << "z1*conj(z1) + z2*conj(z2) + z3*conj(z3)";
  const char* mons[] = {"z1^2", "z1*z2", "z2*z3", "z3^2", "z1^2*z2", "z2*z3^2", "z1*z2*z3", "z3^3"};
  const char* cmons[] = {"conj(z1)^2", "conj(z1)*conj(z2)", "conj(z2)*conj(z3)", "conj(z3)^2",
                         "conj(z1)^2*conj(z2)", "conj(z2)*conj(z3)^2", "conj(z1)*conj(z2)*conj(z3)", "conj(z3)^3"};
  for (int k = 0; k < 8; ++k) {
    int a = c(rng), b = c(rng);
    t << " + (" << a << "/7 + " << b << "/5*i)*" << mons[k] << " + (" << a << "/7 - " << b << "/5*i)*" << cmons[k];
  }
  if (quartic) t << " + 1/5*z1^2*conj(z1)^2";
  CPolynomial P = poly_parse(t.str(), 3);
  P -= CPolynomial::constant(3, P.eval(p));
  return Hypersurface(ScalarField::polynomial(P), 2);
}

// random real polynomial through p with a generic (possibly indefinite) Hessian
Hypersurface random_general(std::mt19937_64& rng, const std::vector<CQ>& p) {
  std::uniform_int_distribution<int> c(-4, 4);
  CPolynomial q(3);
  for (int j = 0; j < 3; ++j) {
    MultiIndex m(3);
    m.hol[j] = 1;
    m.anti[j] = 1;
    q.add_term(m, GaussRational(Rational(1, 2)));
  }
  for (int t = 0; t < 6; ++t) {
    MultiIndex m(3);
    int d = 2 + t % 3;
    for (int k = 0; k < d; ++k) {
      int v = (c(rng) + 4) % 3;
      if (c(rng) > 0) m.hol[v]++;
      else m.anti[v]++;
    }
    q.add_term(m, GaussRational(Rational(c(rng), 7), Rational(c(rng), 5)));
  }
  CPolynomial P = q + q.conjugate();
  P -= CPolynomial::constant(3, P.eval(p));
  return Hypersurface(ScalarField::polynomial(P), 2);
}

std::vector<CQ> random_pt() { return {gq(1, 2, 1, 3), gq(-1, 4), gq(2, 5, -1, 2)}; }

template <class R>
Tensor<R> metric_t(const FrameContext<R>& ctx) {
  return metric_tensor(metric(ctx));
}

}  // namespace

TEST_SUITE("pseudohermitian") {

TEST_CASE("sphere: flat data") {
  auto ctx = context_build<Rational>(sphere2(), sphere_pt());
  auto pack = curvature_general(ctx);
  CHECK(pack.S4.max_abs() == 0);
  CHECK(pack.A.max_abs() == 0);
  CHECK(pack.IIhol.has_value());
  CHECK(pack.IIhol->max_abs() == 0);
  // Ric = (n+1) r h - D log J with J = 1, r = 1
  CHECK(diff(pack.Ric, metric_t(ctx) * CQ(3)) == 0);
  CHECK(pack.Rscal.value() == CQ(6));
  CHECK(curly_R(ctx).max_abs() == 0);
  CHECK(kahler_curvature_tensor(ctx).max_abs() == 0);
  auto g = gauss_check(ctx);
  CHECK(g.curvature < 1e-12);
  CHECK(g.torsion < 1e-12);
  CHECK(characteristic_residual(ctx) < 1e-12);
  CHECK(diff(cmw_fefferman(ctx), pack.S4) == 0);
}

TEST_CASE("tube: curvature, connection and torsion against the closed forms") {
  auto ctx = context_build<Rational>(tube2(), tube_pt());
  const int n = 2;
  auto pack = curvature_general(ctx);
  TQ expect = TQ::build(n, {IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false), IndexKind::lower(true)},
                        ctx.id(), [&](const std::vector<int>& x) {
                          const int a = x[0], b = x[1], g = x[2], s = x[3];
                          return ctx.hhol(a, g) * ctx.hanti(b, s) * CQ(Rational(-1, 2)) +
                                 (ctx.h(a, b) * ctx.h(g, s) + ctx.h(a, s) * ctx.h(g, b)) * CQ(Rational(1, 2));
                        });
  CHECK(diff(pack.R4, expect) == 0);
  CHECK(diff(pack.Ric, metric_t(ctx) * CQ(Rational(n, 2))) == 0);
  CHECK(pack.Rscal.value() == CQ(Rational(n * n, 2)));
  CHECK(pseudo_einstein_defect(pack, ctx) == 0);

  auto conn = connection(ctx);
  const CQ half(Rational(1, 2)), mi(Rational(0), Rational(-1, 2));
  for (int b = 0; b < n; ++b)
    for (int g = 0; g < n; ++g) {
      CQ rg = ctx.drhobar(ctx.greek(g)).value();
      for (int m = 0; m < n; ++m) {
        CHECK(conn.gamma_hol(b, g, m).value() == half * rg * ctx.hhol(b, m).value());
        CHECK(conn.gamma_anti(b, g, m).value() == half * rg * ctx.h(b, m).value());
      }
      CHECK(conn.gamma_t(b, g).value() == (b == g ? mi : CQ()));
    }

  CHECK(diff(pack.A, torsion_liluk(ctx)) == 0);
  auto g = metric(ctx);
  CHECK(norm2(pack.S4, g).value() == CQ(Rational(2, 3)));
  CHECK(cmw_power_scalar(pack.S4, n + 1, g) == CQ(Rational(-2, 9)));
  CHECK(diff(curvature_unit_hessian(ctx).S4, pack.S4) == 0);
}

TEST_CASE("tube: the curvature tensor is parallel") {
  auto ctx = context_build<Rational>(tube2(), tube_pt(), budget(1));
  auto conn = connection(ctx);
  auto pack = curvature_general(ctx);
  CHECK(nabla(pack.R4, DirKind::Hol, ctx, conn).max_abs() == 0);
  CHECK(nabla(pack.R4, DirKind::Anti, ctx, conn).max_abs() == 0);
  CHECK(nabla(pack.R4, DirKind::Char, ctx, conn).max_abs() == 0);
  CHECK(nabla(pack.S4, DirKind::Hol, ctx, conn).max_abs() == 0);
  CHECK(cmw_divergence(pack.S4, ctx, conn).max_abs() == 0);
  // |S|^2 is constant, so S.V = 0 is forced by divS = -2iV
  auto V = v_tensor(pack, ctx, conn);
  auto gm = metric(ctx);
  Tensor<Rational> sv = contract(contract(contract(tensor_product(raise_all(pack.S4, gm), V), 1, 4), 1, 3), 1, 2);
  CHECK(sv.max_abs() == 0);
}

TEST_CASE("E(1/2) at p0: torsion by three routes") {
  auto ctx = context_build<Real>(ellipsoid_half(), p0(), budget(1));
  const CR expect(Real(0), Real(4) / 3);
  auto A = torsion(ctx);
  auto L = torsion_liluk(ctx);
  CHECK(dist(A.value({0, 0}), expect) < 1e-30);
  CHECK(dist(L.value({0, 0}), expect) < 1e-30);
  CHECK(diff(A, L) < 1e-30);
  // A_{ab} = -i h_{b sbar} Z_a(conj(xi^s))
  const CR mi(Real(0), Real(-1));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CR c;
      for (int s = 0; s < 2; ++s) c += ctx.h(b, s).value() * z_hol(ctx, a, ctx.xibar(ctx.greek(s))).value();
      CHECK(dist(A.value({a, b}), CR(mi * c)) < 1e-30);
    }
}

TEST_CASE("E(1/2) at p0: curvature invariants") {
  auto ctx = context_build<Real>(ellipsoid_half(), p0());
  auto pack = curvature_general(ctx);
  auto g = metric(ctx);
  CHECK(abs_d(CR(norm2(pack.S4, g).value() - CR(Real(8) / 2187))) < 1e-30);
  CHECK(diff(curvature_unit_hessian(ctx).S4, pack.S4) < 1e-30);
  auto gr = gauss_check(ctx);
  CHECK(gr.curvature < 1e-9);
  CHECK(gr.torsion < 1e-9);
  CHECK(characteristic_residual(ctx) < 1e-9);
  CHECK(kahler_curvature_tensor(ctx).max_abs() < 1e-30);
  // Gamma_{b}^{g}_{m} = a conj(z_b) conj(z_m) z_g / (rho_w^2 |d rho|^2)
  auto conn = connection(ctx);
  auto pt = p0();
  const CR rw = ctx.drho(2).value();
  const CR scale = CR(Real(1) / 2) / (rw * rw * ctx.drho2().value());
  for (int b = 0; b < 2; ++b)
    for (int gg = 0; gg < 2; ++gg)
      for (int m = 0; m < 2; ++m)
        CHECK(dist(conn.gamma_hol(b, gg, m).value(), CR(conj(pt[b]) * conj(pt[m]) * pt[gg] * scale)) < 1e-30);
}

TEST_CASE("Fefferman-normalized formula for S") {
  auto e = ellipsoid_half();
  ScalarField r1 = pow(fefferman_field(e), Rational(-1, 4)) * e.rho();
  // second Fefferman step: J = 1 + O(rho^2)
  ScalarField J1 = fefferman_field(e.with_rho(r1));
  ScalarField one = ScalarField::constant(1);
  ScalarField r2 = r1 * (one + (one - J1) * ScalarField::constant(GaussRational(Rational(1, 6))));
  auto c2 = context_build<Real>(e.with_rho(r2), p0());
  CHECK(dist(c2.fefferman().value(), CR(Real(1))) < 1e-30);
  CHECK(diff(cmw_fefferman(c2), curvature_general(c2).S4) < 1e-30);

  auto c1 = context_build<Real>(e.with_rho(r1), p0());
  CHECK(dist(c1.fefferman().value(), CR(Real(1))) < 1e-30);
  CHECK_THROWS_WITH_AS(cmw_fefferman(c1), doctest::Contains("log J"), Error);
  try {
    cmw_fefferman(context_build<Real>(e, p0()));
    FAIL("expected NotApproxMongeAmpere");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotApproxMongeAmpere);
  }
}

TEST_CASE("general and unit-Hessian routes agree") {
  std::mt19937_64 rng(3);
  auto pt = random_pt();
  for (int t = 0; t < 3; ++t) {
    auto s = random_psh(rng, pt, false);
    auto ctx = context_build<Rational>(s, pt);
    auto a = curvature_general(ctx);
    auto b = curvature_unit_hessian(ctx);
    CHECK(diff(a.R4, b.R4) == 0);
    CHECK(diff(a.S4, b.S4) == 0);
    CHECK(diff(a.A, b.A) == 0);
  }
  for (auto [a, d] : {std::pair{1, 3}, std::pair{2, 5}}) {
    std::ostringstream t;
    t << "z1*conj(z1) + z2*conj(z2) + z3*conj(z3) + " << a << "/" << 2 * d << "*z3^2 + " << a << "/" << 2 * d
      << "*conj(z3)^2 - 1";
    Hypersurface s(poly(t.str(), 3), 2);
    // w = i t with t^2 (1 - a) = 1/2
    Real t3 = sqrt(Real(1) / (2 * (1 - Real(Rational(a, d)))));
    auto ctx = context_build<Real>(s, {CR(Real(1) / 2), CR(Real(1) / 2), CR(Real(0), t3)});
    CHECK(diff(curvature_general(ctx).S4, curvature_unit_hessian(ctx).S4) < 1e-30);
  }
}

TEST_CASE("torsion: general route, Li-Luk and the definition agree on psh surfaces") {
  std::mt19937_64 rng(8);
  auto pt = random_pt();
  for (int t = 0; t < 3; ++t) {
    auto s = random_psh(rng, pt, true);
    auto ctx = context_build<Rational>(s, pt);
    auto A = torsion(ctx);
    CHECK(diff(A, torsion_liluk(ctx)) == 0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        CQ c;
        for (int sg = 0; sg < 2; ++sg) c += ctx.h(b, sg).value() * z_hol(ctx, a, ctx.xibar(ctx.greek(sg))).value();
        CHECK(A.value({a, b}) == CQ(Rational(0), Rational(-1)) * c);
      }
    CHECK(A.value({0, 1}) == A.value({1, 0}));
  }
}

TEST_CASE("structure identities on random surfaces") {
  std::mt19937_64 rng(21);
  auto pt = random_pt();
  for (int t = 0; t < 3; ++t) {
    auto s = random_general(rng, pt);
    auto ctx = context_build<Rational>(s, pt);
    auto pack = curvature_general(ctx);
    auto g = metric(ctx);
    CHECK(diff(ricci_trace(pack.R4, g), pack.Ric) == 0);
    CHECK(scalar_trace(pack.Ric, g).value() == pack.Rscal.value());
    CHECK(curvature_symmetry_defect(pack.R4) == 0);
    CHECK(diff(tracefree_part(pack.R4, g), pack.S4) == 0);
    CHECK(ricci_trace(pack.S4, g).max_abs() == 0);
    auto gr = gauss_check(ctx);
    CHECK(gr.curvature == 0);
    CHECK(gr.torsion == 0);
    CHECK(characteristic_residual(ctx) == 0);
  }
}

TEST_CASE("the connection is metric and the characteristic field is parallel") {
  std::mt19937_64 rng(34);
  auto pt = random_pt();
  for (int t = 0; t < 2; ++t) {
    auto ctx = context_build<Rational>(random_general(rng, pt), pt, budget(1));
    auto conn = connection(ctx);
    auto h = metric_t(ctx);
    CHECK(nabla(h, DirKind::Hol, ctx, conn).max_abs() == 0);
    CHECK(nabla(h, DirKind::Anti, ctx, conn).max_abs() == 0);
    CHECK(nabla(h, DirKind::Char, ctx, conn).max_abs() == 0);
  }
}

TEST_CASE("Hessian commutation: u_{a bbar} - u_{bbar a} = i h_{a bbar} u_0") {
  std::mt19937_64 rng(55);
  auto pt = random_pt();
  ScalarField f = poly("z1^2*conj(z2) + 3*z3*conj(z1)*conj(z3) + 1/2*z2 + conj(z2)^3", 3);
  for (int t = 0; t < 2; ++t) {
    auto ctx = context_build<Rational>(random_general(rng, pt), pt, budget(1));
    auto conn = connection(ctx);
    const int n = 2;
    auto u = field_jet_at(ctx, f, 3);
    auto du = TQ::build(n, {IndexKind::lower(false)}, ctx.id(), [&](const std::vector<int>& x) { return z_hol(ctx, x[0], u); });
    auto dub = TQ::build(n, {IndexKind::lower(true)}, ctx.id(), [&](const std::vector<int>& x) { return z_anti(ctx, x[0], u); });
    auto ab = nabla(du, DirKind::Anti, ctx, conn);
    auto ba = nabla(dub, DirKind::Hol, ctx, conn);
    CQ u0 = t_char(ctx, u).value();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        CHECK(ab.value({a, b}) - ba.value({b, a}) == CQ(Rational(0), Rational(1)) * ctx.h(a, b).value() * u0);

    // sub-Laplacian assembled from frame derivatives and explicit Christoffel symbols
    CQ s;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        CQ uab = z_anti(ctx, b, z_hol(ctx, a, u)).value();
        CQ uba = z_hol(ctx, a, z_anti(ctx, b, u)).value();
        for (int c = 0; c < n; ++c) {
          uab -= conn.gamma_anti(a, c, b).value() * z_hol(ctx, c, u).value();
          uba -= conj(conn.gamma_anti(b, c, a).value()) * z_anti(ctx, c, u).value();
        }
        s += ctx.hinv(a, b).value() * (uab + uba);
      }
    CHECK(sublaplacian(f, ctx, DeltaBConvention::NegativeSum) == -s);
    CHECK(sublaplacian(f, ctx, DeltaBConvention::PositiveSum) == s);
  }
}

TEST_CASE("invariance under rho -> rho + C rho^2 and constant rescaling") {
  std::mt19937_64 rng(89);
  auto pt = random_pt();
  auto s = random_psh(rng, pt, true);
  auto base = curvature_general(context_build<Rational>(s, pt));
  for (Rational C : {Rational(1, 2), Rational(2)}) {
    auto ctx = context_build<Rational>(quadratic_modification(s, C), pt);
    auto p = curvature_general(ctx);
    CHECK(value_diff(p.R4, base.R4) == 0);
    CHECK(value_diff(p.S4, base.S4) == 0);
    CHECK(value_diff(p.A, base.A) == 0);
    CHECK(p.Rscal.value() == base.Rscal.value());
  }
  auto c3 = context_build<Rational>(s.with_rho(ScalarField::constant(3) * s.rho()), pt);
  auto p3 = curvature_general(c3);
  CHECK(value_diff(p3.S4, base.S4 * CQ(3)) == 0);
  CHECK(value_diff(p3.Ric, base.Ric) == 0);
  CHECK(value_diff(p3.A, base.A) == 0);
  CHECK(p3.Rscal.value() * CQ(3) == base.Rscal.value());
}

TEST_CASE("V vanishes on the sphere") {
  auto ctx = context_build<Rational>(sphere2(), sphere_pt(), budget(1));
  auto conn = connection(ctx);
  auto pack = curvature_general(ctx);
  CHECK(v_tensor(pack, ctx, conn).max_abs() == 0);
  CHECK(v_tensor_pseudo_einstein(pack, ctx, conn).max_abs() == 0);
  CHECK(t_tensor(pack, ctx, conn).max_abs() == 0);
}

TEST_CASE("error conditions") {
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::UsageError;
  };
  // rho_{j kbar} = diag(-1, -1, 0) at the origin
  Hypersurface nf(poly("-1/2*i*z3 + 1/2*i*conj(z3) - z1*conj(z1) - z2*conj(z2) + 1/4*z1^2*conj(z1)^2 + "
                       "1/4*z2^2*conj(z2)^2 - z1*conj(z1)*z2*conj(z2)",
                       3),
                  2);
  auto c0 = context_build<Rational>(nf, {CQ(), CQ(), CQ()});
  CHECK(code_of([&] { torsion_liluk(c0); }) == ErrorCode::NotStrictlyPSH);
  CHECK(code_of([&] { kahler_curvature_tensor(c0); }) == ErrorCode::HessianDegenerate);

  Hypersurface mixed(poly("z1*conj(z1) - z2*conj(z2) + z3*conj(z3) - 1", 3), 2);
  auto cm = context_build<Rational>(mixed, {gq(1, 2), gq(1, 2), gq(1)});
  CHECK(code_of([&] { torsion_liluk(cm); }) == ErrorCode::NotStrictlyPSH);

  auto s2 = sphere2().with_rho(ScalarField::constant(2) * sphere2().rho());
  CHECK(code_of([&] { curvature_unit_hessian(context_build<Rational>(s2, sphere_pt())); }) == ErrorCode::NotUnitHessian);

  auto ce = context_build<Rational>(sphere2(), sphere_pt());
  auto pack = curvature_general(ce);
  CHECK(code_of([&] { nabla(pack.S4, DirKind::Hol, ce, connection(ce)); }) == ErrorCode::ComponentNotField);
}

TEST_CASE("curly R at the origin of a quartic normal form") {
  ScalarField F = poly("1/4*z1^2*conj(z1)^2 + 1/4*z2^2*conj(z2)^2 - z1*conj(z1)*z2*conj(z2)", 3);
  Hypersurface nf(poly("-1/2*i*z3 + 1/2*i*conj(z3) - z1*conj(z1) - z2*conj(z2)", 3) + F, 2);
  auto ctx = context_build<Rational>(nf, {CQ(), CQ(), CQ()});
  auto cr = curly_R(ctx);
  for (const auto& x : cr.indices()) {
    ScalarField d = field_diff(field_diff(field_diff(field_diff(F, x[0], false), x[1], true), x[2], false), x[3], true);
    CHECK(cr.value(x) == field_eval(d, std::vector<CQ>{CQ(), CQ(), CQ()}));
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(ctx.h(a, b).value() == CQ(a == b ? -1 : 0));
}

}  // TEST_SUITE
