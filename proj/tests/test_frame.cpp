#include <doctest.h>

#include <random>

#include "crweyl/frame.hpp"

using namespace crweyl;

namespace {

using CR = CComplex<Real>;
using CQ = CComplex<Rational>;

ScalarField poly(const std::string& text, int N) { return ScalarField::polynomial(poly_parse(text, N)); }

Hypersurface sphere2() { return Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) - 1", 3), 2); }
Hypersurface ellipsoid_half() {
  return Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) + 1/4*z3^2 + 1/4*conj(z3)^2 - 1", 3), 2);
}

std::vector<CR> p0() { return {CR(sqrt(Real(Rational(1, 2)))), CR(), CR(Real(0), Real(1))}; }

double dist(const CR& a, const CR& b) { return abs_d(CR(a - b)); }
double dist(const CQ& a, const CQ& b) { return abs_d(CQ(a - b)); }

CQ gq(long re, long den = 1, long im = 0, long imden = 1) { return CQ(Rational(re, den), Rational(im, imden)); }

// random real polynomial P, translated so that P(p) = 0
ScalarField random_through(std::mt19937_64& rng, const std::vector<CQ>& p) {
  const int N = static_cast<int>(p.size());
  std::uniform_int_distribution<int> c(-4, 4);
  CPolynomial q(N);
  for (int j = 0; j < N; ++j) {
    MultiIndex m(N);
    m.hol[j] = 1;
    m.anti[j] = 1;
    q.add_term(m, GaussRational(Rational(1, 2)));
  }
  for (int t = 0; t < 6; ++t) {
    MultiIndex m(N);
    int d = 2 + t % 3;
    for (int k = 0; k < d; ++k) {
      int v = (c(rng) + 4) % N;
      if (c(rng) > 0) m.hol[v]++;
      else m.anti[v]++;
    }
    q.add_term(m, GaussRational(Rational(c(rng), 7), Rational(c(rng), 5)));
  }
  CPolynomial P = q + q.conjugate();
  CPolynomial z1(N);
  MultiIndex lin(N);
  lin.hol[N - 1] = 1;
  z1.add_term(lin, GaussRational(Rational(0), Rational(1)));
  P += z1 + z1.conjugate();
  P -= CPolynomial::constant(N, P.eval(p));
  return ScalarField::polynomial(P);
}

}  // namespace

TEST_SUITE("frame") {

TEST_CASE("sphere at the north pole") {
  std::vector<CQ> pt{CQ(), CQ(), CQ(1)};
  auto ctx = context_build<Rational>(sphere2(), pt);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CHECK(ctx.h(a, b).value() == CQ(a == b ? 1 : 0));
      CHECK(ctx.hinv(a, b).value() == CQ(a == b ? 1 : 0));
      CHECK(ctx.hhol(a, b).value() == CQ());
      CHECK(d_holo(ctx, sphere2().rho(), a, b) == CQ());
    }
  auto [xi, r] = xi_and_r(ctx);
  CHECK(xi[0] == CQ());
  CHECK(xi[1] == CQ());
  CHECK(xi[2] == CQ(1));
  CHECK(r == 1);
  CHECK(fefferman_det(ctx) == 1);
  CHECK(ctx.drho2().value() == CQ(1));
  CHECK(d_mixed(ctx, ScalarField::constant(7), 0, 1) == CQ());
}

TEST_CASE("ellipsoid E(1/2) at p0 on the float backend") {
  auto s = ellipsoid_half();
  auto ctx = context_build<Real>(s, p0());
  CHECK(dist(ctx.point().rhoW, CR(Real(0), Real(Rational(-1, 2)))) < 1e-30);
  CHECK(dist(ctx.h(0, 0).value(), CR(3)) < 1e-30);
  CHECK(dist(ctx.h(1, 1).value(), CR(1)) < 1e-30);
  CHECK(dist(ctx.h(0, 1).value(), CR()) < 1e-30);
  CHECK(dist(d_mixed(ctx, s.rho(), 0, 0), CR(3)) < 1e-30);
  CHECK(dist(ctx.hinv(0, 0).value(), CR(Real(Rational(1, 3)))) < 1e-30);
  CHECK(dist(ctx.hinv(1, 1).value(), CR(1)) < 1e-30);
  CHECK(dist(d_holo(ctx, s.rho(), 0, 0), CR(-1)) < 1e-30);
  CHECK(dist(d_holo(ctx, s.rho(), 0, 1), CR()) < 1e-30);
  CHECK(dist(ctx.drho2().value(), CR(Real(Rational(3, 4)))) < 1e-30);
  CHECK(std::abs(to_double(fefferman_det(ctx)) - 0.75) < 1e-30);
  CHECK(std::abs(to_double(xi_and_r(ctx).second) - 4.0 / 3.0) < 1e-30);
  auto hamb = ambient_inverse(ctx);
  CHECK(dist(hamb[0][0], CR(Real(Rational(1, 3)))) < 1e-30);
}

TEST_CASE("ellipsoid closed forms at a rational point, exact") {
  // x^2 + y^2/2 = 1 with z1 = x, w = i y, a = 1/2
  std::vector<CQ> pt{gq(1, 3), CQ(), gq(0, 1, 4, 3)};
  auto ctx = context_build<Rational>(ellipsoid_half(), pt);
  CQ w = pt[2];
  CQ rw = conj(w) + w * CQ(Rational(1, 2));
  Rational rw2 = abs2(rw);
  Rational dr2 = abs2(pt[0]) + abs2(pt[1]) + rw2;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CQ expect = CQ(a == b ? 1 : 0) + conj(pt[a]) * pt[b] * CQ(Rational(1) / rw2);
      CHECK(ctx.h(a, b).value() == expect);
      CQ hol = conj(pt[a]) * conj(pt[b]) * CQ(Rational(1, 2)) / (rw * rw);
      CHECK(ctx.hhol(a, b).value() == hol);
    }
  CHECK(fefferman_det(ctx) == dr2);
  CHECK(ctx.drho2().value() == CQ(dr2));
  CHECK(xi_and_r(ctx).second == 1 / dr2);
  // xi^k = rho_kbar / |d rho|^2 when the Hessian is the identity
  for (int k = 0; k < 3; ++k) CHECK(ctx.xi(k).value() == ctx.drhobar(k).value() * CQ(1 / dr2));
}

TEST_CASE("fefferman determinant agrees with the symbolic bordered determinant") {
  auto s = ellipsoid_half();
  std::vector<CQ> pt{gq(1, 3), CQ(), gq(0, 1, 4, 3)};
  auto ctx = context_build<Rational>(s, pt);
  ScalarField J = fefferman_field(s);
  CHECK(field_eval(J, pt) == ctx.fefferman().value());
  auto jj = field_jet_at(ctx, J, 2);
  for (std::size_t i = 0; i < jj.size(); ++i) CHECK(jj[i] == ctx.fefferman()[i]);
}

TEST_CASE("symbolic bordered determinant with a full Hessian") {
  std::mt19937_64 rng(5);
  std::vector<CQ> pt{gq(1, 2, 1, 3), gq(-1, 4), gq(2, 5, -1, 2)};
  for (int t = 0; t < 3; ++t) {
    Hypersurface s(random_through(rng, pt), 2);
    auto ctx = context_build<Rational>(s, pt);
    CHECK(field_eval(fefferman_field(s), pt) == ctx.fefferman().value());
  }
}

TEST_CASE("constant rescaling of the defining function") {
  std::mt19937_64 rng(11);
  std::vector<CQ> pt{gq(1, 2, 1, 3), gq(-1, 4), gq(2, 5, -1, 2)};
  for (int t = 0; t < 4; ++t) {
    Hypersurface s(random_through(rng, pt), 2);
    Hypersurface s3 = s.with_rho(ScalarField::constant(3) * s.rho());
    auto c1 = context_build<Rational>(s, pt);
    auto c3 = context_build<Rational>(s3, pt);
    CHECK(fefferman_det(c3) == 81 * fefferman_det(c1));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        CHECK(c3.h(a, b).value() == c1.h(a, b).value() * CQ(3));
        CHECK(c3.hhol(a, b).value() == c1.hhol(a, b).value() * CQ(3));
      }
    for (int k = 0; k < 3; ++k) CHECK(c3.xi(k).value() * CQ(3) == c1.xi(k).value());
  }
}

TEST_CASE("rho + C rho^2 leaves the frame data unchanged on M") {
  std::mt19937_64 rng(5);
  std::vector<CQ> pt{gq(1, 3, 1, 5), gq(2, 7), gq(-1, 3, 1, 2)};
  ScalarField f = poly("z1^2*conj(z2) + 3*z3*conj(z3)^2 + conj(z1^2*conj(z2) + 3*z3*conj(z3)^2)", 3);
  for (int t = 0; t < 3; ++t) {
    Hypersurface s(random_through(rng, pt), 2);
    auto c0 = context_build<Rational>(s, pt);
    for (Rational C : {Rational(1, 2), Rational(2)}) {
      auto c1 = context_build<Rational>(quadratic_modification(s, C), pt);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          CHECK(c1.h(a, b).value() == c0.h(a, b).value());
          CHECK(c1.hhol(a, b).value() == c0.hhol(a, b).value());
          CHECK(c1.hinv(a, b).value() == c0.hinv(a, b).value());
          CHECK(d_mixed(c1, f, a, b) == d_mixed(c0, f, a, b));
          CHECK(d_holo(c1, f, a, b) == d_holo(c0, f, a, b));
        }
      for (int k = 0; k < 3; ++k) CHECK(c1.xibar(k).value() == c0.xibar(k).value());
    }
  }
}

TEST_CASE("hermiticity, symmetry and the xi equations at random points") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> c(-6, 6);
  int built = 0;
  for (int t = 0; t < 12; ++t) {
    std::vector<CQ> pt;
    for (int j = 0; j < 3; ++j) pt.push_back(CQ(Rational(c(rng), 7), Rational(c(rng), 5)));
    Hypersurface s(random_through(rng, pt), 2);
    std::optional<FrameContext<Rational>> ctx;
    try {
      ctx.emplace(s, pt, FrameConfig{});
    } catch (const Error& e) {
      continue;
    }
    ++built;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        CHECK(ctx->h(a, b).value() == conj(ctx->h(b, a).value()));
        CHECK(ctx->hhol(a, b).value() == ctx->hhol(b, a).value());
        CHECK(d_mixed(*ctx, s.rho(), a, b) == ctx->h(a, b).value());
        CHECK(d_mixed(*ctx, s.rho(), a, b) == conj(d_mixed(*ctx, s.rho(), b, a)));
        // h^{gamma bbar} from the ambient inverse inverts h
        CQ sum;
        for (int g = 0; g < 2; ++g) sum += ctx->h(a, g).value() * ctx->hamb(ctx->greek(b), ctx->greek(g)).value();
        CHECK(sum == CQ(a == b ? 1 : 0));
        CHECK(ctx->hamb(ctx->greek(a), ctx->greek(b)).value() == ctx->hinv(a, b).value());
      }
    CHECK(xi_residual(*ctx) == 0);
    CQ dxi;
    for (int j = 0; j < 3; ++j) dxi += ctx->drho(j).value() * ctx->xi(j).value();
    CHECK(dxi == CQ(1));
    CHECK(fefferman_det(*ctx) * xi_and_r(*ctx).second == ctx->hess_det().value().re);
    if (ctx->hessian_invertible()) {
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          CQ alt = ctx->kinv(j, k).value() - ctx->drho2().value() * ctx->xi(j).value() * ctx->xibar(k).value();
          CHECK(ctx->hamb(j, k).value() == alt);
        }
      CHECK(ctx->drho2().value() * ctx->r().value() == CQ(1));
    }
  }
  CHECK(built >= 6);
}

TEST_CASE("degenerate Hessian in normal form") {
  // Im w - |z|^2 + |z1|^2 |z2|^2
  auto s = Hypersurface(poly("-1/2*i*z3 + 1/2*i*conj(z3) - z1*conj(z1) - z2*conj(z2) + z1*conj(z1)*z2*conj(z2)", 3), 2);
  auto ctx = context_build<Rational>(s, std::vector<CQ>(3));
  CHECK(!ctx.hessian_invertible());
  CHECK_THROWS_AS(ctx.drho2(), Error);
  CHECK(xi_and_r(ctx).second == 0);
  CQ dxi;
  for (int j = 0; j < 3; ++j) dxi += ctx.drho(j).value() * ctx.xi(j).value();
  CHECK(dxi == CQ(1));
  CHECK(ctx.h(0, 0).value() == CQ(-1));
  CHECK(fefferman_det(ctx) == Rational(1, 4));
  CHECK(ctx.hinv(1, 1).value() == CQ(-1));
}

TEST_CASE("frame errors") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::UsageError;
  };
  CHECK(code([] { context_build<Rational>(sphere2(), std::vector<CQ>(3)); }) == ErrorCode::OffSurface);
  CHECK(code([] { context_build<Rational>(sphere2(), {CQ(1), CQ(), CQ()}); }) == ErrorCode::FrameDegenerate);
  CHECK_NOTHROW(context_build<Rational>(sphere2().with_w(0), {CQ(1), CQ(), CQ()}));
  CHECK(code([] { Hypersurface(poly("z1 + z2*conj(z2)", 2), 1); }) == ErrorCode::NotReal);
  CHECK(code([] { Hypersurface(poly("z1*conj(z1)", 1), 0); }) == ErrorCode::WrongDimension);
  CHECK(code([] { Hypersurface(poly("z1*conj(z1) + z3*conj(z3)", 3), 1); }) == ErrorCode::WrongDimension);
  // Levi-flat: Re z3 = 0
  CHECK(code([] {
          context_build<Rational>(Hypersurface(poly("z3 + conj(z3)", 3), 2), std::vector<CQ>(3));
        }) == ErrorCode::LeviDegenerate);
  FrameConfig cfg;
  cfg.derivOrder = 5;
  CHECK(code([&] { context_build<Rational>(sphere2(), {CQ(), CQ(), CQ(1)}, cfg); }) == ErrorCode::OrderExceeded);
}

}  // TEST_SUITE
