#include <doctest.h>

#include <random>

#include "crweyl/tensor.hpp"

using namespace crweyl;

namespace {

using CQ = CComplex<Rational>;
using TQ = Tensor<Rational>;

ScalarField poly(const std::string& text, int N) { return ScalarField::polynomial(poly_parse(text, N)); }

Hypersurface tube(int n) {
  std::string s;
  for (int j = 1; j <= n + 1; ++j) {
    std::string z = "z" + std::to_string(j);
    s += z + "*conj(" + z + ") + 1/2*" + z + "^2 + 1/2*conj(" + z + ")^2 + ";
  }
  return Hypersurface(poly(s + "-1", n + 1), n);
}

// sum x_j^2 = 1/2 with x_w != 0, arbitrary imaginary parts
std::vector<CQ> tube_point(int n) {
  std::vector<CQ> p(n + 1);
  p[0] = CQ(Rational(1, 2), Rational(1, 3));
  p[n] = CQ(Rational(1, 2), Rational(-2, 7));
  for (int j = 1; j < n; ++j) p[j] = CQ(Rational(0), Rational(j, 5));
  return p;
}

const std::vector<IndexKind> kCurv{IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false),
                                   IndexKind::lower(true)};

CQ rq(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-9, 9);
  return CQ(Rational(c(rng), 4), Rational(c(rng), 3));
}

TQ random_tensor(std::mt19937_64& rng, const FrameContext<Rational>& ctx, std::vector<IndexKind> kinds) {
  return TQ::build(ctx.n(), std::move(kinds), ctx.id(),
                   [&](const std::vector<int>&) { return Jet<Rational>::constant(ctx.space(), 0, rq(rng)); });
}

TQ symmetrize_curvature(const TQ& t) {
  TQ s = t + t.permuted({2, 1, 0, 3}) + t.permuted({0, 3, 2, 1}) + t.permuted({2, 3, 0, 1});
  return s * CQ(Rational(1, 4));
}

TQ tube_curvature(const FrameContext<Rational>& ctx) {
  return TQ::build(ctx.n(), kCurv, ctx.id(), [&](const std::vector<int>& i) {
    auto t = ctx.hhol(i[0], i[2]) * ctx.hanti(i[1], i[3]) * CQ(Rational(-1, 2));
    t += (ctx.h(i[0], i[1]) * ctx.h(i[2], i[3]) + ctx.h(i[0], i[3]) * ctx.h(i[2], i[1])) * CQ(Rational(1, 2));
    return t.truncated(0);
  }, 1);
}

bool all_zero(const TQ& t) {
  for (const auto& j : t.data())
    if (!j.value().is_zero()) return false;
  return true;
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("raise and lower are inverse and shift the weight") {
  std::mt19937_64 rng(3);
  auto ctx = context_build<Rational>(tube(2), tube_point(2));
  auto g = metric(ctx);
  auto t = random_tensor(rng, ctx, {IndexKind::lower(false), IndexKind::lower(true), IndexKind::upper(false),
                                    IndexKind::upper(true)});
  for (int s = 0; s < 4; ++s) {
    TQ u = t.kind(s).variance == Variance::Lower ? lower(raise(t, s, g), s, g) : raise(lower(t, s, g), s, g);
    CHECK(u.kinds() == t.kinds());
    CHECK(u.weight() == t.weight());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(u.data()[i].value() == t.data()[i].value());
  }
  auto r = raise(t, 0, g);
  CHECK(r.kind(0) == IndexKind::upper(true));
  CHECK(r.weight() == -1);
  CHECK(lower(t, 2, g).weight() == 1);
  CHECK(all_zero(lower(TQ(2, {IndexKind::upper(false)}, ctx.id(), ctx.space(), 0), 0, g)));
  CHECK_THROWS_AS(raise(r, 0, g), Error);
}

TEST_CASE("raising z on E(1/2) matches the closed form") {
  auto s = Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) + 1/4*z3^2 + 1/4*conj(z3)^2 - 1", 3), 2);
  std::vector<CQ> pt{CQ(Rational(1, 3)), CQ(), CQ(Rational(0), Rational(4, 3))};
  auto ctx = context_build<Rational>(s, pt);
  auto g = metric(ctx);
  TQ z = TQ::build(2, {IndexKind::lower(true)}, ctx.id(),
                   [&](const std::vector<int>& i) { return Jet<Rational>::constant(ctx.space(), 0, pt[i[0]]); });
  TQ up = raise(z, 0, g);
  CHECK(up.kind(0) == IndexKind::upper(false));
  CQ rw = conj(pt[2]) + pt[2] * CQ(Rational(1, 2));
  Rational dr2 = abs2(pt[0]) + abs2(pt[1]) + abs2(rw);
  for (int a = 0; a < 2; ++a) CHECK(up.value({a}) == pt[a] * CQ(abs2(rw) / dr2));
}

TEST_CASE("contractions") {
  auto ctx = context_build<Rational>(tube(3), tube_point(3));
  auto g = metric(ctx);
  TQ hh = tensor_product(metric_tensor(g), inverse_metric_tensor(g));
  TQ c = contract(contract(hh, 0, 2), 0, 1);
  CHECK(c.rank() == 0);
  CHECK(c.data()[0].value() == CQ(3));
  CHECK(c.weight() == 0);
  CHECK_THROWS_AS(contract(hh, 0, 3), Error);
  CHECK_THROWS_AS(contract(hh, 0, 1), Error);
  auto other = context_build<Rational>(tube(3), tube_point(3));
  CHECK_THROWS_AS(raise(metric_tensor(g), 0, metric(other)), Error);
  // associativity of contraction with raising
  std::mt19937_64 rng(9);
  auto t = random_tensor(rng, ctx, {IndexKind::lower(false), IndexKind::lower(true)});
  auto viaRaise = contract(raise(t, 1, g), 0, 1).data()[0].value();
  auto viaProduct =
      contract(contract(tensor_product(t, inverse_metric_tensor(g)), 0, 2), 0, 1).data()[0].value();
  CHECK(viaRaise == viaProduct);
}

TEST_CASE("tracefree projection of random curvature-type tensors") {
  std::mt19937_64 rng(17);
  auto ctx = context_build<Rational>(tube(2), tube_point(2));
  auto g = metric(ctx);
  for (int t = 0; t < 3; ++t) {
    TQ r = symmetrize_curvature(random_tensor(rng, ctx, kCurv));
    CHECK(curvature_symmetry_defect(r) == 0);
    TQ s = tracefree_part(r, g);
    TQ sh = tensor_product(s, inverse_metric_tensor(g));
    for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 3}, {2, 1}, {2, 3}})
      CHECK(all_zero(contract(contract(sh, a, 4), b > a ? b - 1 : b, 3)));
    TQ ric = ricci_trace(s, g);
    CHECK(all_zero(ric));
    TQ s2 = tracefree_part(s, g);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s2.data()[i].value() == s.data()[i].value());
  }
  TQ bad = random_tensor(rng, ctx, kCurv);
  CHECK_THROWS_AS(tracefree_part(bad, g), Error);
}

TEST_CASE("pure-trace tensors project to zero") {
  auto ctx = context_build<Rational>(tube(2), tube_point(2));
  auto g = metric(ctx);
  TQ r = TQ::build(2, kCurv, ctx.id(), [&](const std::vector<int>& i) {
    return ctx.h(i[0], i[1]) * ctx.h(i[2], i[3]) + ctx.h(i[0], i[3]) * ctx.h(i[2], i[1]);
  });
  CHECK(all_zero(tracefree_part(r, g)));
}

TEST_CASE("tube curvature gives the parallel Chern-Moser tensor") {
  for (int n : {2, 3}) {
    auto ctx = context_build<Rational>(tube(n), tube_point(n));
    auto g = metric(ctx);
    TQ r = tube_curvature(ctx);
    TQ ric = ricci_trace(r, g);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) CHECK(ric.value({a, b}) == ctx.h(a, b).value() * CQ(Rational(n, 2)));
    CHECK(scalar_trace(ric, g).value() == CQ(Rational(n * n, 2)));
    TracefreeFlags flags;
    TQ s = tracefree_part(r, g, &flags);
    CHECK(!flags.crDimensionOne);
    for (const auto& i : s.indices()) {
      CQ e = ctx.hhol(i[0], i[2]).value() * ctx.hanti(i[1], i[3]).value() * CQ(Rational(-1, 2)) +
             (ctx.h(i[0], i[1]).value() * ctx.h(i[2], i[3]).value() +
              ctx.h(i[0], i[3]).value() * ctx.h(i[2], i[1]).value()) *
                 CQ(Rational(1, 2 * (n + 1)));
      CHECK(s.value(i) == e);
      CHECK(conj(s.value(i)) == s.value({i[1], i[0], i[3], i[2]}));
    }
    auto nrm = norm2(s, g);
    CHECK(nrm.value() == CQ(Rational(n * (n - 1) * (n + 2), 4 * (n + 1))));
    // S carries weight 1, |S|^2 weight -2
    CHECK(s.weight() == 1);
    CHECK(conj(s).kinds() == std::vector<IndexKind>{IndexKind::lower(true), IndexKind::lower(false),
                                                    IndexKind::lower(true), IndexKind::lower(false)});
  }
}

TEST_CASE("chains of the Chern-Moser tensor on the tube") {
  for (int n : {2, 3}) {
    auto ctx = context_build<Rational>(tube(n), tube_point(n));
    auto g = metric(ctx);
    TQ s = tracefree_part(tube_curvature(ctx), g);
    // h^{a2 m2} is h_{bbar sbar} with both slots raised
    TQ hup = raise(raise(TQ::build(n, {IndexKind::lower(true), IndexKind::lower(true)}, ctx.id(),
                                   [&](const std::vector<int>& i) { return ctx.hanti(i[0], i[1]); }),
                         0, g),
                   1, g);
    auto ck = [&](int k) -> Rational {
      Rational base(2 - n - n * n, 2), p(1), q(1);
      for (int j = 0; j < k; ++j) {
        p *= base;
        q *= n + 1;
      }
      return (p - 1) / (n * q);
    };
    auto dk = [&](int k) -> Rational {
      Rational q(1);
      for (int j = 0; j < k; ++j) q *= n + 1;
      return Rational(1, 2) / q;
    };
    CHECK(ck(1) == Rational(-1, 2));
    CHECK(dk(1) == Rational(1, 2 * (n + 1)));
    for (int k = 1; k <= 3; ++k) {
      TQ sk = cmw_power(s, k, g);
      for (const auto& i : sk.indices()) {
        CQ e = ctx.hhol(i[0], i[2]).value() * hup.value({i[1], i[3]}) * CQ(ck(k));
        Rational dd((i[0] == i[1] && i[2] == i[3]) + (i[0] == i[3] && i[2] == i[1]));
        CHECK(sk.value(i) == e + CQ(dk(k) * dd));
      }
    }
    // S[1] acts on pairs as c|u><u| + d(1 + swap): eigenvalue nc + 2d on u, 2d on the rest of Sym^2
    Rational c1 = ck(1), d1 = dk(1);
    for (int k = 1; k <= n + 1; ++k) {
      Rational top(1), rest(1);
      for (int j = 0; j < k; ++j) {
        top *= n * c1 + 2 * d1;
        rest *= 2 * d1;
      }
      Rational expect = top + Rational(n * (n + 1) / 2 - 1) * rest;
      CHECK(cmw_power_scalar(s, k, g) == CQ(expect));
    }
    if (n == 2) CHECK(cmw_power_scalar(s, 3, g) == CQ(Rational(-2, 9)));
    CHECK(cmw_power_scalar(s, 2, g) == norm2(s, g).value());
  }
}

TEST_CASE("sphere and CR dimension one") {
  auto ctx = context_build<Rational>(
      Hypersurface(poly("z1*conj(z1) + z2*conj(z2) + z3*conj(z3) - 1", 3), 2),
      std::vector<CQ>{CQ(Rational(3, 5)), CQ(), CQ(Rational(0), Rational(4, 5))});
  auto g = metric(ctx);
  TQ r = TQ::build(2, kCurv, ctx.id(), [&](const std::vector<int>& i) {
    return ctx.h(i[0], i[1]) * ctx.h(i[2], i[3]) + ctx.h(i[0], i[3]) * ctx.h(i[2], i[1]);
  });
  TQ s = tracefree_part(r, g);
  CHECK(cmw_power_scalar(s, 3, g) == CQ());
  auto c1 = context_build<Rational>(Hypersurface(poly("z1*conj(z1) + z2*conj(z2) - 1", 2), 1),
                                    std::vector<CQ>{CQ(), CQ(1)});
  auto g1 = metric(c1);
  TracefreeFlags flags;
  TQ r1 = TQ::build(1, kCurv, c1.id(), [&](const std::vector<int>&) { return Jet<Rational>::constant(c1.space(), 0, CQ(5)); });
  TQ s1 = tracefree_part(r1, g1, &flags);
  CHECK(flags.crDimensionOne);
  CHECK(all_zero(s1));
}

TEST_CASE("labels are one-based") {
  CHECK(tensor_label("S", kCurv, {0, 0, 1, 1}) == "S_{1 1bar 2 2bar}");
  CHECK(tensor_label("V", {IndexKind::upper(false), IndexKind::lower(true)}, {0, 1}) == "V^{1}_{2bar}");
  CHECK(tensor_label("A", {IndexKind::lower(false), IndexKind::chr()}, {1, 0}) == "A_{2 0}");
}

}  // TEST_SUITE
