#include "crweyl/catalog.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace crweyl {

namespace {

using CR = CComplex<Real>;
using GQ = GaussRational;

CPolynomial zz(int N, int j, int k, bool bar) {
  return CPolynomial::coordinate(N, j, false) * CPolynomial::coordinate(N, k, bar);
}

CPolynomial unit_sphere(int N) {
  CPolynomial p = CPolynomial::constant(N, GQ(Rational(-1)));
  for (int j = 0; j < N; ++j) p += zz(N, j, j, true);
  return p;
}

// Re(a z_j^2) = a/2 (z_j^2 + conj(z_j)^2)
CPolynomial re_square(int N, int j, const Rational& a) {
  return (zz(N, j, j, false) + zz(N, j, j, false).conjugate()) * GQ(a / 2);
}

Real sqrt_half() { return sqrt(Real(Rational(1, 2))); }

std::vector<CR> to_reals(const std::vector<GQ>& p) {
  std::vector<CR> out;
  for (const auto& c : p) out.push_back(convert<Real>(c));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Error bad_point(const std::string& text) {
  return Error(ErrorCode::BadParameter, "catalog-cli", "cannot parse complex literal '" + text + "'");
}

// One real magnitude: NUM, sqrt(NUM) or NUM*sqrt(NUM); exact only for NUM.
struct Magnitude {
  Real value;
  std::optional<Rational> exact;
};

Magnitude parse_magnitude(const std::string& text, const std::string& whole) {
  std::string t = trim(text);
  if (t.empty()) return {Real(1), Rational(1)};
  Magnitude out{Real(1), Rational(1)};
  for (const std::string& f : split_top(t, '*')) {
    std::string u = trim(f);
    if (u.rfind("sqrt(", 0) == 0 && u.back() == ')') {
      Rational q;
      try {
        q = parse_rational(trim(u.substr(5, u.size() - 6)));
      } catch (const Error&) {
        throw bad_point(whole);
      }
      if (q < 0) throw bad_point(whole);
      out.value *= sqrt(from_rational<Real>(q));
      out.exact.reset();
    } else {
      if (u.size() > 2 && u.front() == '(' && u.back() == ')') u = trim(u.substr(1, u.size() - 2));
      Rational q;
      try {
        q = parse_rational(u);
      } catch (const Error&) {
        throw bad_point(whole);
      }
      out.value *= from_rational<Real>(q);
      if (out.exact) *out.exact *= q;
    }
  }
  return out;
}

struct Literal {
  CR value;
  std::optional<GQ> exact;
};

Literal parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s += c;
  if (s.empty()) throw bad_point(text);
  // split into signed terms at top-level + and -, skipping exponent signs
  std::vector<std::pair<bool, std::string>> terms;
  int depth = 0;
  std::string cur;
  bool neg = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    char c = s[k];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    const bool sign = (c == '+' || c == '-') && depth == 0 && !(k > 0 && (s[k - 1] == 'e' || s[k - 1] == 'E'));
    if (sign) {
      if (!cur.empty()) terms.push_back({neg, cur});
      else if (k > 0) throw bad_point(text);
      cur.clear();
      neg = c == '-';
    } else {
      cur += c;
    }
  }
  if (cur.empty()) throw bad_point(text);
  terms.push_back({neg, cur});
  if (terms.size() > 2) throw bad_point(text);

  Literal out{CR(), GQ()};
  bool haveRe = false, haveIm = false;
  for (auto& [negative, body] : terms) {
    bool imag = body.back() == 'i';
    std::string mag = imag ? body.substr(0, body.size() - 1) : body;
    if (imag && !mag.empty() && mag.back() == '*') mag.pop_back();
    if (!imag && mag.empty()) throw bad_point(text);
    Magnitude m = parse_magnitude(mag, text);
    if (negative) {
      m.value = -m.value;
      if (m.exact) *m.exact = -*m.exact;
    }
    bool& have = imag ? haveIm : haveRe;
    if (have) throw bad_point(text);
    have = true;
    (imag ? out.value.im : out.value.re) = m.value;
    if (!m.exact) out.exact.reset();
    else if (out.exact) (imag ? out.exact->im : out.exact->re) = *m.exact;
  }
  return out;
}

// Random rational tensor with the symmetries of the quartic coefficients, made tracefree.
std::vector<GQ> quartic_coefficients(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-3, 3);
  const int n2 = n * n, n3 = n2 * n, size = n3 * n;
  auto at = [&](int a, int b, int g, int s) { return ((a * n + b) * n + g) * n + s; };
  std::vector<GQ> raw(size), sym(size), c(size);
  for (auto& x : raw) x = GQ(Rational(d(rng)), Rational(d(rng)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g)
        for (int s = 0; s < n; ++s)
          sym[at(a, b, g, s)] =
              (raw[at(a, b, g, s)] + raw[at(g, b, a, s)] + raw[at(a, s, g, b)] + raw[at(g, s, a, b)]) * GQ(Rational(1, 4));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g)
        for (int s = 0; s < n; ++s) c[at(a, b, g, s)] = (sym[at(a, b, g, s)] + conj(sym[at(b, a, s, g)])) * GQ(Rational(1, 2));
  std::vector<GQ> ric(n2);
  GQ R;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g) ric[a * n + b] += c[at(a, b, g, g)];
  for (int a = 0; a < n; ++a) R += ric[a * n + a];
  auto delta = [](int x, int y) { return GQ(Rational(x == y ? 1 : 0)); };
  const GQ k1(Rational(1, n + 2)), k2(Rational(1, (n + 1) * (n + 2)));
  std::vector<GQ> out(size);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g)
        for (int s = 0; s < n; ++s)
          out[at(a, b, g, s)] = c[at(a, b, g, s)] -
                                k1 * (ric[a * n + b] * delta(g, s) + ric[g * n + b] * delta(a, s) +
                                      ric[a * n + s] * delta(g, b) + ric[g * n + s] * delta(a, b)) +
                                k2 * R * (delta(a, b) * delta(g, s) + delta(a, s) * delta(g, b));
  return out;
}

CPolynomial pluriharmonic_psi(int N, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-3, 3);
  CPolynomial psi(N);
  // every holomorphic monomial of degree 3 and 4
  std::function<void(int, int, std::vector<int>&)> rec = [&](int j, int left, std::vector<int>& e) {
    if (j == N - 1) {
      e[j] = left;
      MultiIndex m;
      m.hol = e;
      m.anti.assign(N, 0);
      const int re = d(rng), im = d(rng);
      if (re || im) psi.add_term(m, GQ(Rational(re), Rational(im)));
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[j] = k;
      rec(j + 1, left - k, e);
    }
  };
  for (int deg = 3; deg <= 4; ++deg) {
    std::vector<int> e(N, 0);
    rec(0, deg, e);
  }
  return psi;
}

Rational param(const std::map<std::string, Rational>& p, const std::string& k) { return p.at(k); }

int int_param(const std::map<std::string, Rational>& p, const std::string& k, int lo, int hi) {
  const Rational v = p.at(k);
  if (denominator(v) != 1 || v < lo || v > hi)
    throw Error(ErrorCode::BadParameter, "catalog-cli",
                "parameter " + k + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(numerator(v).convert_to<long>());
}

KnownFact constant_fact(const std::string& key, const Rational& v, double tol, const std::string& source) {
  return {key, [v](const std::vector<CR>&) { return CR(from_rational<Real>(v)); }, tol, false, source, GQ(v)};
}

void residual_facts(CatalogEntry& e) {
  for (const char* k : {"xi_residual", "characteristic_residual"})
    e.knownFacts.push_back(constant_fact(k, 0, 1e-9, "structure equations"));
}

void gauss_facts(CatalogEntry& e) {
  for (const char* k : {"gauss_curvature_residual", "gauss_torsion_residual"})
    e.knownFacts.push_back(constant_fact(k, 0, 1e-9, "Gauss equations"));
}

void pe_facts(CatalogEntry& e) {
  for (const char* k : {"j_residual", "pe_defect"}) e.knownFacts.push_back(constant_fact(k, 0, 1e-8, "volume normalization"));
}

const std::map<std::string, std::map<std::string, Rational>>& defaults() {
  static const std::map<std::string, std::map<std::string, Rational>> d = {
      {"sphere", {{"n", 2}}},
      {"ellipsoid-rev", {{"a", Rational(1, 2)}}},
      {"ellipsoid", {{"n", 2}, {"a1", Rational(1, 4)}, {"a2", 0}, {"a3", Rational(1, 2)}, {"a4", 0}, {"a5", 0}}},
      {"tube", {{"n", 2}}},
      {"pluriharmonic", {{"eps", Rational(1, 10)}, {"seed", 1}}},
      {"normal-form", {{"n", 2}, {"seed", 1}}},
  };
  return d;
}

}  // namespace

std::string CatalogEntry::descriptor() const {
  std::ostringstream o;
  o << name;
  char sep = ':';
  for (const auto& [k, v] : params) {
    o << sep << k << '=' << to_string(v);
    sep = ',';
  }
  return o.str();
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : defaults()) out.push_back(k);
  return out;
}

std::vector<GaussRational> normal_form_coefficients(int n, unsigned seed) { return quartic_coefficients(n, seed); }

Hypersurface normal_form_surface(int n, const std::vector<GaussRational>& c) {
  const int N = n + 1;
  CPolynomial p(N);
  p += CPolynomial::coordinate(N, n, false) * GQ(Rational(0), Rational(-1, 2));
  p += CPolynomial::coordinate(N, n, true) * GQ(Rational(0), Rational(1, 2));
  for (int a = 0; a < n; ++a) p -= zz(N, a, a, true);
  std::size_t k = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 0; g < n; ++g)
        for (int s = 0; s < n; ++s, ++k) {
          if (c[k].re == 0 && c[k].im == 0) continue;
          p += zz(N, a, b, true) * zz(N, g, s, true) * (c[k] * GQ(Rational(1, 4)));
        }
  return Hypersurface(ScalarField::polynomial(p), n);
}

CatalogEntry catalog_build(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  CatalogEntry e{trim(spec.substr(0, colon)), {}, Hypersurface(ScalarField::constant(0), 1), {}, {}, {}};
  auto it = defaults().find(e.name);
  if (it == defaults().end()) {
    std::string known;
    for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::UnknownSurface, "catalog-cli", "unknown surface '" + e.name + "' (known: " + known + ")");
  }
  e.params = it->second;
  if (colon != std::string::npos && colon + 1 < spec.size()) {
    for (const std::string& kv : split_top(spec.substr(colon + 1), ',')) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::BadParameter, "catalog-cli", "expected key=value, got '" + kv + "'");
      const std::string k = trim(kv.substr(0, eq));
      if (!e.params.count(k)) throw Error(ErrorCode::BadParameter, "catalog-cli", "unknown parameter '" + k + "' for " + e.name);
      try {
        e.params[k] = parse_rational(trim(kv.substr(eq + 1)));
      } catch (const Error&) {
        throw Error(ErrorCode::BadParameter, "catalog-cli", "bad value for parameter '" + k + "'");
      }
    }
  }
  const auto& P = e.params;

  if (e.name == "sphere") {
    const int n = int_param(P, "n", 1, 8), N = n + 1;
    e.surface = Hypersurface(ScalarField::polynomial(unit_sphere(N)), n);
    std::vector<GQ> pt(N);
    pt[n] = GQ(Rational(1));
    e.sample = {pt, to_reals(pt), {}};
    e.knownFacts.push_back(constant_fact("norm_s2", 0, 1e-10, "S vanishes on the sphere"));
    e.knownFacts.push_back(constant_fact("rscal", Rational(n * (n + 1)), 1e-10, "constant curvature of the sphere"));
    if (n == 2) {
      for (const char* k : {"abs_x", "i_prime", "div_x"}) e.knownFacts.push_back(constant_fact(k, 0, 1e-10, "S = 0"));
      pe_facts(e);
    }
    residual_facts(e);
    gauss_facts(e);
  } else if (e.name == "ellipsoid-rev") {
    const Rational a = param(P, "a");
    if (a < 0 || a >= 1) throw Error(ErrorCode::BadParameter, "catalog-cli", "ellipsoid-rev needs 0 <= a < 1");
    CPolynomial p = unit_sphere(3) + re_square(3, 2, a);
    e.surface = Hypersurface(ScalarField::polynomial(p), 2);
    e.sample = {std::nullopt, {CR(sqrt_half()), CR(), CR(Real(0), Real(2))}, {RayKind::W, {}}};
    const Real ar = from_rational<Real>(a);
    auto dz = [ar](const std::vector<CR>& q) {
      const Real z2 = abs2(q[0]) + abs2(q[1]);
      const Real d2 = z2 + abs2(CR(conj(q[2]) + CR(ar) * q[2]));
      return std::pair<Real, Real>(z2, d2);
    };
    // |S|^2 = a^4 |z|^8 / (6 |d rho|^12); the volume-normalized scale multiplies it by |d rho|
    e.knownFacts.push_back({"norm_s2",
                            [ar, dz](const std::vector<CR>& q) {
                              auto [z2, d2] = dz(q);
                              return CR(pow(ar, 4) * pow(z2, 4) / (6 * pow(d2, 6)));
                            },
                            1e-9, true, "closed form for E(a)", std::nullopt});
    e.knownFacts.push_back({"norm_s2_pe",
                            [ar, dz](const std::vector<CR>& q) {
                              auto [z2, d2] = dz(q);
                              return CR(pow(ar, 4) * pow(z2, 4) / (6 * pow(d2, 5) * sqrt(d2)));
                            },
                            1e-9, true, "closed form for E(a), e^u = |d rho|^(-1/2)", std::nullopt});
    residual_facts(e);
    gauss_facts(e);
    pe_facts(e);
  } else if (e.name == "ellipsoid") {
    const int n = int_param(P, "n", 1, 4), N = n + 1;
    CPolynomial p = unit_sphere(N);
    for (int j = 0; j < N; ++j) {
      const Rational a = param(P, "a" + std::to_string(j + 1));
      if (a < 0 || a >= 1) throw Error(ErrorCode::BadParameter, "catalog-cli", "ellipsoid needs 0 <= a_j < 1");
      p += re_square(N, j, a);
    }
    for (int j = N; j < 5; ++j)
      if (param(P, "a" + std::to_string(j + 1)) != 0)
        throw Error(ErrorCode::BadParameter, "catalog-cli", "a" + std::to_string(j + 1) + " exceeds the dimension");
    e.surface = Hypersurface(ScalarField::polynomial(p), n);
    std::vector<CR> seed(N, CR(Real(1) / 2));
    seed[n] = CR(Real(0), Real(2));
    e.sample = {std::nullopt, seed, {RayKind::W, {}}};
    residual_facts(e);
    gauss_facts(e);
    if (n == 2) pe_facts(e);
  } else if (e.name == "tube") {
    const int n = int_param(P, "n", 1, 6), N = n + 1;
    CPolynomial p = unit_sphere(N);
    for (int j = 0; j < N; ++j) p += re_square(N, j, 1);
    e.surface = Hypersurface(ScalarField::polynomial(p), n);
    std::vector<GQ> pt(N, GQ(Rational(0), Rational(-1)));
    pt[0] = GQ(Rational(1, 2), Rational(1, 3));
    pt[n] = GQ(Rational(1, 2), Rational(2));
    e.sample = {pt, to_reals(pt), {}};
    e.scale = InvariantScale::Given;
    // S = c1 h h + d1 (h h + h h) with c1 = -1/2, d1 = 1/(2(n+1))
    const Rational c(-1, 2), d(1, 2 * (n + 1));
    Rational s1 = 1, s2 = 1;
    for (int j = 0; j <= n; ++j) {
      s1 *= n * c + 2 * d;
      s2 *= 2 * d;
    }
    const Rational normS2(n * (n - 1) * (n + 2), 4 * (n + 1));
    e.knownFacts.push_back(constant_fact("rscal", Rational(n * n, 2), 1e-10, "tube curvature"));
    e.knownFacts.push_back(constant_fact("norm_s2", normS2, 1e-10, "norm of the tube tensor"));
    e.knownFacts.push_back(constant_fact("s_power", s1 + Rational(n * (n + 1) / 2 - 1) * s2, 1e-9, "closed chain of the tube tensor"));
    if (n == 2) {
      e.knownFacts.push_back(constant_fact("abs_x", 0, 1e-10, "parallel S"));
      e.knownFacts.push_back(constant_fact("div_x", 0, 1e-10, "parallel S"));
      e.knownFacts.push_back(constant_fact("i_prime", Rational(n * n, 2) * normS2 / 12, 1e-9, "parallel S: I' = R|S|^2/12"));
    }
    residual_facts(e);
    gauss_facts(e);
  } else if (e.name == "pluriharmonic") {
    const Rational eps = param(P, "eps");
    const int seed = int_param(P, "seed", 0, 1 << 30);
    CPolynomial psi = pluriharmonic_psi(3, static_cast<unsigned>(seed));
    CPolynomial p = unit_sphere(3) + (psi + psi.conjugate()) * GQ(eps / 2);
    e.surface = Hypersurface(ScalarField::polynomial(p), 2);
    e.sample = {std::nullopt, {CR(Real(1) / 3), CR(Real(0), Real(1) / 4), CR(Real(1))}, {RayKind::Radial, {}}};
    e.knownFacts.push_back(constant_fact("unit_hessian_route_residual", 0, 1e-9, "second-order formula for psh perturbations"));
    residual_facts(e);
    gauss_facts(e);
  } else {  // normal-form
    const int n = int_param(P, "n", 1, 4);
    const int seed = int_param(P, "seed", 0, 1 << 30);
    auto c = normal_form_coefficients(n, static_cast<unsigned>(seed));
    e.surface = normal_form_surface(n, c);
    std::vector<GQ> pt(n + 1);
    e.sample = {pt, to_reals(pt), {}};
    e.scale = InvariantScale::Given;
    // S at the origin is -c in the lower-index convention with h = -delta there
    std::size_t k = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int g = 0; g < n; ++g)
          for (int s = 0; s < n; ++s, ++k) {
            const CR v = convert<Real>(c[k]);
            std::ostringstream key;
            key << "S_{" << a + 1 << ' ' << b + 1 << "bar " << g + 1 << ' ' << s + 1 << "bar}";
            e.knownFacts.push_back({key.str(), [v](const std::vector<CR>&) { return CR(-v.re, -v.im); }, 1e-9, false,
                                    "quartic coefficient of the normal form", GQ(-c[k].re, -c[k].im)});
          }
  }
  return e;
}

SurfacePoint<Real> point_place(const Hypersurface& s, const std::vector<CR>& seed, const RaySpec& ray, int maxIter) {
  const int N = s.ambient();
  if (static_cast<int>(seed.size()) != N)
    throw Error(ErrorCode::WrongDimension, "catalog-cli", "seed has " + std::to_string(seed.size()) + " coordinates, expected " +
                                                              std::to_string(N));
  std::vector<CR> v;
  switch (ray.kind) {
    case RayKind::Radial: v = seed; break;
    case RayKind::W:
      v.assign(N, CR());
      v[s.w()] = seed[s.w()];
      break;
    case RayKind::Vector: v = ray.v; break;
  }
  if (static_cast<int>(v.size()) != N) throw Error(ErrorCode::WrongDimension, "catalog-cli", "ray direction has the wrong length");
  bool nonzero = false;
  for (const auto& x : v) nonzero = nonzero || abs_d(x) > 0;
  if (!nonzero) throw Error(ErrorCode::NoConvergence, "catalog-cli", "ray direction is zero");

  std::vector<ScalarField> grad(N);
  for (int j = 0; j < N; ++j) grad[j] = field_diff(s.rho(), j, false);
  auto at = [&](const Real& t) {
    std::vector<CR> p(N);
    for (int j = 0; j < N; ++j) p[j] = seed[j] + CR(t) * v[j];
    return p;
  };
  auto value = [&](const Real& t) { return field_eval(s.rho(), at(t)).re; };
  const Real eps = pow(Real(2), -static_cast<int>(real_precision_bits()) + 8);

  Real t = 0, f = value(t);
  Real tNeg = 0, tPos = 0;
  bool haveNeg = false, havePos = false;
  bool converged = false;
  for (int it = 0; it <= maxIter; ++it) {
    if (f < 0) {
      tNeg = t;
      haveNeg = true;
    } else if (f > 0) {
      tPos = t;
      havePos = true;
    }
    if (abs(f) <= eps) {
      converged = true;
      break;
    }
    if (it == maxIter) break;
    auto p = at(t);
    CR df;
    for (int j = 0; j < N; ++j) df += field_eval(grad[j], p) * v[j];
    const Real slope = 2 * df.re;
    if (slope == 0) break;
    t -= f / slope;
    if (abs(t) > Real(1e6)) break;
    f = value(t);
  }
  if (!converged && haveNeg && havePos) {
    Real lo = tNeg, hi = tPos;
    for (int it = 0; it < 4 * static_cast<int>(real_precision_bits()); ++it) {
      Real mid = (lo + hi) / 2;
      Real fm = value(mid);
      if (fm < 0) lo = mid;
      else hi = mid;
      t = mid;
      f = fm;
      if (abs(fm) <= eps) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "catalog-cli", "point placement did not converge along the ray");
  SurfacePoint<Real> out;
  out.coords = at(t);
  out.residual = std::abs(to_double(f));
  out.rhoW = field_eval(grad[s.w()], out.coords);
  if (abs_d(out.rhoW) == 0)
    throw Error(ErrorCode::FrameDegenerate, "catalog-cli", "placed point has rho_w = 0");
  return out;
}

std::vector<CR> parse_point(const std::string& text) {
  std::vector<CR> out;
  for (const std::string& c : split_top(text, ',')) out.push_back(parse_complex(c).value);
  return out;
}

std::vector<GaussRational> parse_point_exact(const std::string& text) {
  std::vector<GQ> out;
  for (const std::string& c : split_top(text, ',')) {
    Literal l = parse_complex(c);
    if (!l.exact)
      throw Error(ErrorCode::BackendUnsupported, "catalog-cli", "'" + trim(c) + "' is not rational; use the float backend");
    out.push_back(*l.exact);
  }
  return out;
}

RaySpec parse_ray(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t == "radial") return {RayKind::Radial, {}};
  if (t == "w") return {RayKind::W, {}};
  return {RayKind::Vector, parse_point(t)};
}

}  // namespace crweyl
