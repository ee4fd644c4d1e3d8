#include "crweyl/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "crweyl/invariants.hpp"
#include "crweyl/report.hpp"

namespace crweyl {

namespace {

using CR = CComplex<Real>;
using CQ = GaussRational;

std::string g3(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string g10(const CR& z) {
  char buf[96];
  const double im = to_double(z.im);
  if (std::abs(im) < 1e-300) std::snprintf(buf, sizeof buf, "%.10g", to_double(z.re));
  else std::snprintf(buf, sizeof buf, "%.10g%+.10gi", to_double(z.re), im);
  return buf;
}

CR rq(const Rational& q) { return CR(from_rational<Real>(q)); }

double dist(const CR& a, const CR& b) { return abs_d(CR(a - b)); }
double rel(const CR& a, const CR& b) { return dist(a, b) / std::max(1e-300, std::max(abs_d(a), abs_d(b))); }

template <class R>
double value_diff(const Tensor<R>& a, const Tensor<R>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, abs_d(CComplex<R>(a.data()[k].value() - b.data()[k].value())));
  return m;
}

template <class R>
double value_rel(const Tensor<R>& a, const Tensor<R>& b) {
  return value_diff(a, b) / std::max(1.0, std::max(a.max_abs(), b.max_abs()));
}

FrameConfig budget(int m) {
  FrameConfig c;
  c.derivOrder = m;
  return c;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "" : "FAILED ") + what);
  }
  CheckOutcome done() const {
    std::string d;
    for (const auto& n : notes) d += (d.empty() ? "" : "; ") + n;
    return {pass, d};
  }
};

// ---- points ----

Real uniform(std::mt19937_64& rng, double lo, double hi) { return Real(std::uniform_real_distribution<double>(lo, hi)(rng)); }

std::vector<CR> sphere_point(std::mt19937_64& rng, int N) {
  std::normal_distribution<double> g;
  for (;;) {
    std::vector<Real> x(2 * N);
    Real s = 0;
    for (auto& v : x) {
      v = Real(g(rng));
      s += v * v;
    }
    s = sqrt(s);
    std::vector<CR> p(N);
    for (int j = 0; j < N; ++j) p[j] = CR(x[2 * j] / s, x[2 * j + 1] / s);
    if (abs_d(p[N - 1]) > 0.1) return p;
  }
}

// 2 sum x_j^2 = 1, y free
std::vector<CR> tube_point(std::mt19937_64& rng, int N) {
  std::normal_distribution<double> g;
  for (;;) {
    std::vector<Real> x(N);
    Real s = 0;
    for (auto& v : x) {
      v = Real(g(rng));
      s += v * v;
    }
    s = sqrt(2 * s);
    std::vector<CR> p(N);
    for (int j = 0; j < N; ++j) p[j] = CR(x[j] / s, uniform(rng, -1, 1));
    if (abs(p[N - 1].re) > 0.05) return p;
  }
}

std::vector<CR> ellipsoid_point(std::mt19937_64& rng, const Rational& a) {
  const Real ar = from_rational<Real>(a);
  for (;;) {
    CR z1(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)), z2(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
    Real x = uniform(rng, -0.2, 0.2);
    Real y2 = (1 - abs2(z1) - abs2(z2) - (1 + ar) * x * x) / (1 - ar);
    if (y2 < Real(0.01)) continue;
    Real y = sqrt(y2);
    if (rng() & 1) y = -y;
    return {z1, z2, CR(x, y)};
  }
}

std::vector<CR> placed_point(std::mt19937_64& rng, const Hypersurface& s) {
  for (int tries = 0; tries < 100; ++tries) {
    std::vector<CR> seed(s.ambient());
    for (auto& c : seed) c = CR(uniform(rng, -1, 1), uniform(rng, -1, 1));
    try {
      auto p = point_place(s, seed, {RayKind::Radial, {}});
      if (abs_d(p.rhoW) > 0.05) return p.coords;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::NoConvergence, "catalog-cli", "could not place random points on the surface");
}

Hypersurface ellipsoid(const Rational& a) { return catalog_build("ellipsoid-rev:a=" + to_string(a)).surface; }

struct EllipsoidClosedForm {
  Real z2, d2;
  CR rw;
};

EllipsoidClosedForm ellipsoid_data(const Rational& a, const std::vector<CR>& p) {
  const CR rw = conj(p[2]) + rq(a) * p[2];
  const Real z2 = abs2(p[0]) + abs2(p[1]);
  return {z2, z2 + abs2(rw), rw};
}

Real ellipsoid_norm_s2(const Rational& a, const std::vector<CR>& p) {
  auto d = ellipsoid_data(a, p);
  return pow(from_rational<Real>(a), 4) * pow(d.z2, 4) / (6 * pow(d.d2, 6));
}

// (1/24) a^4 |z|^6 zbar_a (|d rho|^2 + 9a|z|^2 rho_wbar/rho_w) / |d rho|^13
CR ellipsoid_x(const Rational& a, const std::vector<CR>& p, int alpha) {
  auto d = ellipsoid_data(a, p);
  const Real ar = from_rational<Real>(a);
  const CR ratio = conj(d.rw) / d.rw;
  const CR inner = CR(d.d2) + CR(9 * ar * d.z2) * ratio;
  const Real pre = pow(ar, 4) * pow(d.z2, 3) / (24 * pow(d.d2, 6) * sqrt(d.d2));
  return CR(pre) * conj(p[alpha]) * inner;
}

std::vector<CR> p0() { return {CR(sqrt(Real(Rational(1, 2)))), CR(), CR(Real(0), Real(1))}; }

// ---- criteria ----

CheckOutcome sphere_vanishing() {
  Verdict v;
  std::mt19937_64 rng(101);
  for (int n = 2; n <= 3; ++n) {
    auto s = catalog_build("sphere:n=" + std::to_string(n)).surface;
    double m = 0;
    for (int k = 0; k < 100; ++k) m = std::max(m, curvature_general(context_build<Real>(s, sphere_point(rng, n + 1))).S4.max_abs());
    v.require(m < 1e-10, "n=" + std::to_string(n) + ": max|S| = " + g3(m) + " over 100 points");
  }
  return v.done();
}

CheckOutcome tube_values() {
  Verdict v;
  std::mt19937_64 rng(202);
  auto s = catalog_build("tube").surface;
  double eR = 0, eRic = 0, eS2 = 0, eNabla = 0, eI = 0, eS3 = 0;
  CR S2, I, S3;
  for (int k = 0; k < 50; ++k) {
    auto ctx = context_build<Real>(s, tube_point(rng, 3), budget(2));
    auto conn = connection(ctx);
    auto pack = curvature_general(ctx);
    auto g = metric(ctx);
    eR = std::max(eR, dist(pack.Rscal.value(), CR(Real(2))));
    eRic = std::max(eRic, (pack.Ric - metric_tensor(g)).max_abs());
    S2 = norm2(pack.S4, g).value();
    eS2 = std::max(eS2, dist(S2, rq(Rational(1, 6))));
    for (DirKind d : {DirKind::Hol, DirKind::Anti, DirKind::Char}) eNabla = std::max(eNabla, nabla(pack.S4, d, ctx, conn).max_abs());
    I = i_prime_at(ctx);
    eI = std::max(eI, dist(I, rq(Rational(1, 36))));
    S3 = cmw_power_scalar(pack.S4, 3, g);
    eS3 = std::max(eS3, dist(S3, rq(Rational(-8, 27))));
  }
  v.require(eR < 1e-10, "Rscal = 2 (max err " + g3(eR) + ")");
  v.require(eRic < 1e-10, "Ric = h (max err " + g3(eRic) + ")");
  v.require(eS2 < 1e-10, "|S|^2 = 1/6: measured " + g10(S2));
  v.require(eNabla < 1e-9, "nabla S = 0 (max " + g3(eNabla) + ")");
  v.require(eI < 1e-9, "I' = 1/36: measured " + g10(I));
  v.require(eS3 < 1e-9, "S^3 = -8/27: measured " + g10(S3));
  return v.done();
}

CheckOutcome tube_sign_n3() {
  Verdict v;
  std::mt19937_64 rng(303);
  auto s = catalog_build("tube:n=3").surface;
  // [1/(n+1) - n/2]^{n+1} at n = 3
  const Rational target = Rational(625, 256);
  double err = 0;
  bool positive = true;
  CR val;
  for (int k = 0; k < 5; ++k) {
    auto ctx = context_build<Real>(s, tube_point(rng, 4));
    val = cmw_power_scalar(curvature_general(ctx).S4, 4, metric(ctx));
    err = std::max(err, dist(val, rq(target)));
    positive = positive && val.re > 0;
  }
  v.require(err < 1e-9, "S^4 = 625/256: measured " + g10(val));
  v.require(positive, "S^4 > 0");
  return v.done();
}

const Rational kA[] = {Rational(1, 4), Rational(1, 2), Rational(3, 4)};

CheckOutcome ellipsoid_norm() {
  Verdict v;
  std::mt19937_64 rng(404);
  for (const Rational& a : kA) {
    auto s = ellipsoid(a);
    double m = 0;
    for (int k = 0; k < 20; ++k) {
      auto p = ellipsoid_point(rng, a);
      auto ctx = context_build<Real>(s, p);
      m = std::max(m, rel(norm2(curvature_general(ctx).S4, metric(ctx)).value(), CR(ellipsoid_norm_s2(a, p))));
    }
    v.require(m < 1e-9, "a=" + to_string(a) + ": max rel err " + g3(m));
  }
  return v.done();
}

CheckOutcome ellipsoid_x_closed_form() {
  Verdict v;
  std::mt19937_64 rng(404);  // the points of the |S|^2 check
  for (const Rational& a : kA) {
    auto s = ellipsoid(a);
    double m = 0;
    bool nonzero = true;
    std::string sample;
    for (int k = 0; k < 20; ++k) {
      auto p = ellipsoid_point(rng, a);
      auto pe = pe_scale(context_build<Real>(s, p));
      Tensor<Real> x = x_alpha_direct(pe.ctxTilde, pe.conn, pe.pack);
      for (int al = 0; al < 2; ++al) {
        const CR c = ellipsoid_x(a, p, al);
        m = std::max(m, dist(x.value({al}), c) / std::max(1e-300, abs_d(c)));
        if (abs_d(c) > 1e-12 && abs_d(x.value({al})) == 0) nonzero = false;
      }
      if (k == 0) sample = "X1 " + g10(x.value({0})) + " vs " + g10(ellipsoid_x(a, p, 0));
    }
    v.require(m < 1e-8, "a=" + to_string(a) + ": max rel err " + g3(m) + " (" + sample + ")");
    v.require(nonzero, "a=" + to_string(a) + ": X nonzero where the closed form is");
  }
  return v.done();
}

CheckOutcome divergence_value() {
  Verdict v;
  std::mt19937_64 rng(606);
  const Rational a(1, 2);
  const Real expect = -pow(from_rational<Real>(a), 4) * (9 * from_rational<Real>(a) * from_rational<Real>(a) + 1) / 24;
  auto s = ellipsoid(a).with_w(0);
  double m = 0;
  Real last;
  for (int k = 0; k < 10; ++k) {
    Real t = uniform(rng, 0, 1.2), f1 = uniform(rng, 0, 6.3), f2 = uniform(rng, 0, 6.3);
    std::vector<CR> p{CR(cos(t) * cos(f1), cos(t) * sin(f1)), CR(sin(t) * cos(f2), sin(t) * sin(f2)), CR()};
    last = div_x(pe_scale(context_build<Real>(s, p)));
    m = std::max(m, rel(CR(last), CR(expect)));
  }
  v.require(m < 1e-8, "div X = -13/1536 = " + g10(CR(expect)) + ": measured " + g10(CR(last)) + ", max rel err " + g3(m));
  return v.done();
}

double route_gap(const FrameContext<Real>& ctx) {
  auto a = curvature_unit_hessian(ctx);
  auto b = curvature_general(ctx);
  return std::max({value_rel(a.R4, b.R4), value_rel(a.S4, b.S4), value_rel(a.Ric, b.Ric), value_rel(a.A, b.A),
                   rel(a.Rscal.value(), b.Rscal.value()) * (abs_d(b.Rscal.value()) > 1e-30)});
}

CheckOutcome cross_formula() {
  Verdict v;
  std::mt19937_64 rng(707);
  double m = 0;
  auto sph = catalog_build("sphere").surface;
  for (int k = 0; k < 5; ++k) m = std::max(m, route_gap(context_build<Real>(sph, sphere_point(rng, 3))));
  v.require(m < 1e-9, "sphere: " + g3(m));
  m = 0;
  for (const Rational& a : kA)
    for (int k = 0; k < 3; ++k) m = std::max(m, route_gap(context_build<Real>(ellipsoid(a), ellipsoid_point(rng, a))));
  v.require(m < 1e-9, "E(a): " + g3(m));
  m = 0;
  auto tube = catalog_build("tube").surface;
  for (int k = 0; k < 5; ++k) m = std::max(m, route_gap(context_build<Real>(tube, tube_point(rng, 3))));
  v.require(m < 1e-9, "tube: " + g3(m));
  m = 0;
  for (int seed = 1; seed <= 5; ++seed) {
    auto s = catalog_build("pluriharmonic:seed=" + std::to_string(seed)).surface;
    m = std::max(m, route_gap(context_build<Real>(s, placed_point(rng, s))));
  }
  v.require(m < 1e-9, "5 pluriharmonic perturbations: " + g3(m));
  return v.done();
}

CheckOutcome torsion_routes() {
  Verdict v;
  std::mt19937_64 rng(808);
  double m = 0;
  for (const char* name : {"sphere", "ellipsoid-rev", "ellipsoid-rev:a=1/4", "ellipsoid", "tube", "pluriharmonic",
                           "pluriharmonic:seed=3"}) {
    auto s = catalog_build(name).surface;
    for (int k = 0; k < 3; ++k) {
      auto ctx = context_build<Real>(s, placed_point(rng, s));
      m = std::max(m, value_diff(torsion(ctx), torsion_liluk(ctx)));
    }
  }
  v.require(m < 1e-9, "general vs Li-Luk on psh catalog surfaces: " + g3(m));
  auto ctx = context_build<Real>(ellipsoid(Rational(1, 2)), p0());
  const CR a11 = torsion(ctx).value({0, 0});
  v.require(dist(a11, CR(Real(0), Real(-4) / 3)) < 1e-10, "E(1/2) at p0: A11 = -4i/3: measured " + g10(a11));
  return v.done();
}

CheckOutcome gauss_equations() {
  Verdict v;
  std::mt19937_64 rng(909);
  for (const char* name : {"sphere", "ellipsoid-rev", "ellipsoid", "tube", "pluriharmonic"}) {
    auto s = catalog_build(name).surface;
    GaussResiduals worst;
    for (int k = 0; k < 20; ++k) {
      auto r = gauss_check(context_build<Real>(s, placed_point(rng, s)));
      worst.curvature = std::max(worst.curvature, r.curvature);
      worst.torsion = std::max(worst.torsion, r.torsion);
    }
    v.require(worst.curvature < 1e-9 && worst.torsion < 1e-9,
              std::string(name) + ": " + g3(worst.curvature) + ", " + g3(worst.torsion));
  }
  return v.done();
}

CheckOutcome quadratic_invariance() {
  Verdict v;
  std::mt19937_64 rng(1010);
  for (const char* name : {"sphere", "ellipsoid-rev"}) {
    auto s = catalog_build(name).surface;
    double m = 0;
    for (int k = 0; k < 3; ++k) {
      auto p = placed_point(rng, s);
      auto c0 = context_build<Real>(s, p);
      auto k0 = curvature_general(c0);
      auto h0 = metric_tensor(metric(c0));
      for (Rational C : {Rational(1, 2), Rational(2)}) {
        auto c1 = context_build<Real>(quadratic_modification(s, C), p);
        auto k1 = curvature_general(c1);
        m = std::max({m, value_rel(h0, metric_tensor(metric(c1))), value_rel(k0.A, k1.A), value_rel(k0.R4, k1.R4),
                      value_rel(k0.S4, k1.S4)});
      }
    }
    v.require(m < 1e-8, std::string(name) + ": max rel change " + g3(m));
  }
  return v.done();
}

CheckOutcome conformal_law() {
  Verdict v;
  std::mt19937_64 rng(1111);
  auto s = ellipsoid(Rational(1, 2));
  for (const char* eps : {"1/20", "1/10"}) {
    const std::string half = std::string(eps) + "/2";
    ScalarField f = ScalarField::polynomial(poly_parse(
        "1 + (" + std::string(eps) + ")*(1/2)*z1 + (" + std::string(eps) + ")*(1/2)*conj(z1)", 3));
    double pos = 0, neg = 0;
    for (int k = 0; k < 10; ++k) {
      auto ctx = context_build<Real>(s, ellipsoid_point(rng, Rational(1, 2)));
      pos = std::max(pos, conformal_law_check(ctx, f, DeltaBConvention::PositiveSum));
      if (k == 0) neg = conformal_law_check(ctx, f, DeltaBConvention::NegativeSum);
    }
    v.require(pos < 1e-7, std::string("eps=") + eps + ": residual " + g3(pos) + " (positive-sum sub-Laplacian)");
    v.require(neg >= 1e-7, std::string("eps=") + eps + ": negative-sum convention rejected (residual " + g3(neg) + ")");
  }
  return v.done();
}

CheckOutcome normal_form_identification() {
  Verdict v;
  int sign = 0;
  double worst = 0;
  bool consistent = true;
  for (unsigned seed = 1; seed <= 10; ++seed) {
    auto c = normal_form_coefficients(2, seed);
    auto ctx = context_build<Rational>(normal_form_surface(2, c), std::vector<CQ>(3));
    auto S = curvature_general(ctx).S4;
    double ep = 0, em = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const CR s = convert<Real>(S.data()[k].value()), cc = convert<Real>(c[k]);
      ep = std::max(ep, dist(s, cc));
      em = std::max(em, dist(s, CR(-cc.re, -cc.im)));
    }
    const int here = ep <= em ? 1 : -1;
    if (sign == 0) sign = here;
    consistent = consistent && here == sign;
    worst = std::max(worst, std::min(ep, em));
  }
  v.require(worst < 1e-9, "S|0 = " + std::string(sign > 0 ? "+" : "-") + "c over 10 draws (max err " + g3(worst) + ")");
  v.require(consistent, "single sign across draws");
  return v.done();
}

CheckOutcome cotton_identity() {
  Verdict v;
  std::mt19937_64 rng(1313);
  auto s = ellipsoid(Rational(1, 2));
  double m = 0;
  for (int k = 0; k < 10; ++k) {
    auto pe = pe_scale(context_build<Real>(s, ellipsoid_point(rng, Rational(1, 2))));
    auto divS = cmw_divergence(pe.pack.S4, pe.ctxTilde, pe.conn);
    auto V = v_tensor(pe.pack, pe.ctxTilde, pe.conn);
    m = std::max(m, (divS + V * CR(Real(0), Real(2))).max_abs());
  }
  v.require(m < 1e-7, "|div S + 2iV| max " + g3(m) + " over 10 points");
  return v.done();
}

CR finite_wirtinger(const ScalarField& f, std::vector<CR> p, int j, bool barred, const Real& h0) {
  auto central = [&](const Real& h) {
    auto shift = [&](const CR& d) {
      auto q = p;
      q[j] += d;
      return field_eval(f, q);
    };
    CR dx = (shift(CR(h)) - shift(CR(-h))) / CR(2 * h);
    CR dy = (shift(CR(Real(0), h)) - shift(CR(Real(0), -h))) / CR(2 * h);
    const CR i(Real(0), Real(1));
    return (barred ? dx + i * dy : dx - i * dy) * CR(Real(1) / 2);
  };
  // Richardson on h, h/2, h/4
  CR d0 = central(h0), d1 = central(h0 / 2), d2 = central(h0 / 4);
  CR r1 = (CR(Real(4)) * d1 - d0) / CR(Real(3)), r2 = (CR(Real(4)) * d2 - d1) / CR(Real(3));
  return (CR(Real(16)) * r2 - r1) / CR(Real(15));
}

CheckOutcome derivative_oracle() {
  Verdict v;
  std::mt19937_64 rng(1414);
  auto rho = [](const char* n) { return catalog_build(n).surface.rho(); };
  const ScalarField sphere = rho("sphere"), e = rho("ellipsoid-rev"), J = fefferman_field(catalog_build("ellipsoid-rev").surface);
  std::vector<ScalarField> fields = {
      sphere, e, rho("tube"), rho("pluriharmonic"), rho("normal-form"), J,
      pow(J, Rational(-1, 4)) * e,
      log(fefferman_field(catalog_build("ellipsoid-rev:a=1/4").surface)),
      pow(sphere + ScalarField::constant(2), Rational(1, 3)),
      e / (sphere + ScalarField::constant(3)),
      conj(rho("pluriharmonic:seed=2") * ScalarField::coordinate(0, false)),
  };
  double worst = 0;
  int done = 0;
  while (done < 100) {
    const ScalarField& f = fields[rng() % fields.size()];
    std::vector<CR> p(3);
    for (auto& c : p) c = CR(uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6));
    const int j = static_cast<int>(rng() % 3);
    const bool barred = rng() & 1;
    CR exact, fd;
    try {
      exact = field_eval(field_diff(f, j, barred), p);
      fd = finite_wirtinger(f, p, j, barred, Real(1) / 1000);
    } catch (const Error&) {
      continue;  // outside the domain of a fractional power or log
    }
    worst = std::max(worst, dist(exact, fd) / std::max(1.0, abs_d(exact)));
    ++done;
  }
  v.require(worst < 1e-7, "field_diff vs Richardson differences, 100 triples: max rel err " + g3(worst));
  return v.done();
}

std::vector<CQ> rational_sphere_point(std::mt19937_64& rng, int N) {
  std::uniform_int_distribution<int> d(-4, 4);
  for (;;) {
    std::vector<Rational> u(2 * N - 1);
    Rational s = 0;
    for (auto& x : u) {
      x = Rational(d(rng), 3);
      s += x * x;
    }
    std::vector<Rational> x(2 * N);
    for (int k = 0; k < 2 * N - 1; ++k) x[k] = 2 * u[k] / (s + 1);
    x[2 * N - 1] = (s - 1) / (s + 1);
    std::vector<CQ> p(N);
    for (int j = 0; j < N; ++j) p[j] = CQ(x[2 * j], x[2 * j + 1]);
    if (p[N - 1].re != 0 || p[N - 1].im != 0) return p;
  }
}

// second intersection of a rational line through (1/2, 1/2, 0) with 2|x|^2 = 1
std::vector<CQ> rational_tube_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-4, 4);
  for (;;) {
    Rational dir[3] = {d(rng), d(rng), d(rng)};
    const Rational P[3] = {Rational(1, 2), Rational(1, 2), 0};
    Rational pd = P[0] * dir[0] + P[1] * dir[1], dd = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
    if (dir[2] == 0 || pd == 0) continue;
    const Rational t = -2 * pd / dd;
    std::vector<CQ> p(3);
    for (int j = 0; j < 3; ++j) p[j] = CQ(P[j] + t * dir[j], Rational(d(rng), 3));
    return p;
  }
}

CheckOutcome exact_determinism() {
  Verdict v;
  std::mt19937_64 rng(1515);
  bool sphereZero = true;
  double floatGap = 0;
  for (int n = 2; n <= 3; ++n) {
    auto s = catalog_build("sphere:n=" + std::to_string(n)).surface;
    for (int k = 0; k < 3; ++k) sphereZero = sphereZero && curvature_general(context_build<Rational>(s, rational_sphere_point(rng, n + 1))).S4.max_abs() == 0;
  }
  v.require(sphereZero, "sphere: S = 0 exactly");
  auto s = catalog_build("tube").surface;
  bool r = true, ric = true, s2 = true, nab = true, ip = true, s3 = true;
  CQ S2, I, S3;
  for (int k = 0; k < 3; ++k) {
    auto p = rational_tube_point(rng);
    auto ctx = context_build<Rational>(s, p, budget(2));
    auto conn = connection(ctx);
    auto pack = curvature_general(ctx);
    auto g = metric(ctx);
    r = r && pack.Rscal.value() == CQ(Rational(2));
    ric = ric && (pack.Ric - metric_tensor(g)).max_abs() == 0;
    S2 = norm2(pack.S4, g).value();
    s2 = s2 && S2 == CQ(Rational(1, 6));
    for (DirKind d : {DirKind::Hol, DirKind::Anti, DirKind::Char}) nab = nab && nabla(pack.S4, d, ctx, conn).max_abs() == 0;
    I = i_prime_at(ctx);
    ip = ip && I == CQ(Rational(1, 36));
    S3 = cmw_power_scalar(pack.S4, 3, g);
    s3 = s3 && S3 == CQ(Rational(-8, 27));
    std::vector<CR> pf;
    for (const auto& c : p) pf.push_back(convert<Real>(c));
    auto cf = context_build<Real>(s, pf);
    auto pf_pack = curvature_general(cf);
    floatGap = std::max({floatGap, dist(norm2(pf_pack.S4, metric(cf)).value(), convert<Real>(S2))});
    for (std::size_t j = 0; j < pack.S4.size(); ++j)
      floatGap = std::max(floatGap, dist(pf_pack.S4.data()[j].value(), convert<Real>(pack.S4.data()[j].value())));
  }
  v.require(r, "tube: Rscal = 2 exactly");
  v.require(ric, "tube: Ric = h exactly");
  v.require(s2, "tube: |S|^2 = 1/6 exactly: measured " + to_string(S2.re));
  v.require(nab, "tube: nabla S = 0 exactly");
  v.require(ip, "tube: I' = 1/36 exactly: measured " + to_string(I.re));
  v.require(s3, "tube: S^3 = -8/27 exactly: measured " + to_string(S3.re));
  v.require(floatGap < 1e-30, "float backend matches the exact values (gap " + g3(floatGap) + ")");
  return v.done();
}

CheckOutcome catalog_facts(const std::string& spec, Backend backend) {
  Verdict v;
  CatalogEntry e = catalog_build(spec);
  ReportOptions opt;
  opt.backend = backend;
  opt.scale = backend == Backend::Exact ? InvariantScale::Given : e.scale;
  InvariantReport r;
  std::vector<CR> pt;
  if (backend == Backend::Exact) {
    r = compute_report(e.surface, e.descriptor(), *e.sample.exact, opt);
    for (const auto& c : *e.sample.exact) pt.push_back(convert<Real>(c));
  } else {
    pt = sample_point(e);
    r = compute_report(e.surface, e.descriptor(), pt, opt);
  }
  int checked = 0;
  for (const auto& f : e.knownFacts) {
    const ReportValue* got = r.find(f.key);
    if (!got) {
      if (backend == Backend::Exact) continue;
      v.require(false, f.key + " missing from the report");
      continue;
    }
    ++checked;
    if (backend == Backend::Exact && f.exact && got->re.find('e') == std::string::npos &&
        got->re.find('.') == std::string::npos) {
      const CQ value(parse_rational(got->re), parse_rational(got->im));
      if (!(value == *f.exact)) v.require(false, f.key + " = " + got->re + ", expected " + to_string(f.exact->re));
      continue;
    }
    const CR value = report_value(*got), expect = f.value(pt);
    const double err = f.relative ? rel(value, expect) : dist(value, expect);
    if (!(err <= f.tol)) v.require(false, f.key + " = " + g10(value) + ", expected " + g10(expect) + " (" + f.source + ")");
  }
  if (v.pass) v.notes.push_back(std::to_string(checked) + " facts hold at the sample point");
  return v.done();
}

}  // namespace

std::vector<CComplex<Real>> sample_point(const CatalogEntry& e) {
  if (e.sample.exact) {
    std::vector<CR> p;
    for (const auto& c : *e.sample.exact) p.push_back(convert<Real>(c));
    return p;
  }
  return point_place(e.surface, e.sample.seed, e.sample.ray).coords;
}

std::vector<AcceptanceCheck> acceptance_checks() {
  return {
      {1, "sphere-vanishing", {"sphere"}, sphere_vanishing},
      {2, "tube-exact-values", {"tube"}, tube_values},
      {3, "tube-n3-sign", {"tube", "sign"}, tube_sign_n3},
      {4, "ellipsoid-cmw-norm", {"ellipsoid", "cmw"}, ellipsoid_norm},
      {5, "ellipsoid-x-closed-form", {"ellipsoid", "x"}, ellipsoid_x_closed_form},
      {6, "divergence-value", {"ellipsoid", "divx"}, divergence_value},
      {7, "cross-formula", {"routes"}, cross_formula},
      {8, "torsion-routes", {"torsion"}, torsion_routes},
      {9, "gauss-equations", {"gauss"}, gauss_equations},
      {10, "quadratic-invariance", {"invariance"}, quadratic_invariance},
      {11, "conformal-law", {"conformal"}, conformal_law},
      {12, "normal-form", {"normal-form"}, normal_form_identification},
      {13, "cotton-identity", {"cotton"}, cotton_identity},
      {14, "derivative-oracle", {"derivative"}, derivative_oracle},
      {15, "exact-determinism", {"rational", "exact"}, exact_determinism},
  };
}

std::vector<AcceptanceCheck> catalog_fact_checks(Backend backend) {
  std::vector<AcceptanceCheck> out;
  for (const char* spec : {"sphere", "sphere:n=3", "ellipsoid-rev", "ellipsoid-rev:a=1/4", "ellipsoid", "tube", "tube:n=3",
                           "pluriharmonic", "pluriharmonic:seed=2", "normal-form", "normal-form:seed=2"}) {
    const CatalogEntry e = catalog_build(spec);
    if (backend == Backend::Exact && !e.sample.exact) continue;
    std::vector<std::string> tags = {"catalog", e.name};
    if (backend == Backend::Exact) tags.push_back("rational");
    const std::string s = spec;
    out.push_back({0, "catalog:" + e.descriptor(), tags, [s, backend] { return catalog_facts(s, backend); }});
  }
  return out;
}

std::vector<AcceptanceCheck> filter_checks(std::vector<AcceptanceCheck> checks, const std::vector<std::string>& only) {
  if (only.empty()) return checks;
  std::vector<AcceptanceCheck> out;
  for (auto& c : checks) {
    bool keep = false;
    for (const auto& o : only) {
      keep = keep || o == c.name || (c.id > 0 && o == std::to_string(c.id));
      for (const auto& t : c.tags) keep = keep || o == t;
    }
    if (keep) out.push_back(std::move(c));
  }
  return out;
}

CheckResult run_check(const AcceptanceCheck& c) {
  CheckResult r{c.id, c.name, c.tags, false, "", 0};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    CheckOutcome o = c.run();
    r.pass = o.pass;
    r.detail = o.detail;
  } catch (const Error& e) {
    r.detail = std::string("error ") + error_code_name(e.code()) + " in " + e.module() + ": " + e.what();
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace crweyl
