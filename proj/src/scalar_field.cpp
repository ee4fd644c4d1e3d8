#include "crweyl/scalar_field.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>

namespace crweyl {

struct ScalarField::Node {
  Kind kind;
  std::uint64_t id = 0;
  std::vector<std::shared_ptr<const Node>> kids;
  GaussRational value;
  int coord = -1;
  bool barred = false;
  CPolynomial poly;
  int k = 0;
  Rational r;
  int nvars = 0;

  mutable std::mutex memoMu;
  mutable std::map<int, std::shared_ptr<const Node>> diffs;
};

namespace {

using NodePtr = std::shared_ptr<const ScalarField::Node>;
using Kind = ScalarField::Kind;

std::string coeff_key(const GaussRational& c) { return to_string(c.re) + "," + to_string(c.im); }

std::string key_of(const ScalarField::Node& n) {
  std::ostringstream k;
  k << static_cast<int>(n.kind) << ':';
  switch (n.kind) {
    case Kind::Constant: k << coeff_key(n.value); break;
    case Kind::Coordinate: k << n.coord << (n.barred ? "b" : ""); break;
    case Kind::Polynomial: k << poly_print(n.poly); break;
    case Kind::PowInt: k << n.k; break;
    case Kind::PowRat: k << to_string(n.r); break;
    default: break;
  }
  for (const auto& c : n.kids) k << '#' << c->id;
  return k.str();
}

class Interner {
 public:
  static Interner& instance() {
    static Interner in;
    return in;
  }

  NodePtr intern(std::shared_ptr<ScalarField::Node> n) {
    std::string key = key_of(*n);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    n->id = next_++;
    n->nvars = 0;
    if (n->kind == Kind::Coordinate) n->nvars = n->coord + 1;
    if (n->kind == Kind::Polynomial) n->nvars = n->poly.nvars();
    for (const auto& c : n->kids) n->nvars = std::max(n->nvars, c->nvars);
    NodePtr p = n;
    table_.emplace(std::move(key), p);
    return p;
  }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, NodePtr> table_;
  std::uint64_t next_ = 1;
};

std::shared_ptr<ScalarField::Node> blank(Kind kind) {
  auto n = std::make_shared<ScalarField::Node>();
  n->kind = kind;
  return n;
}

int used_vars(const CPolynomial& p) {
  int used = 0;
  for (const auto& [m, c] : p.terms())
    for (int j = 0; j < m.nvars(); ++j)
      if (m.hol[j] || m.anti[j]) used = std::max(used, j + 1);
  return used;
}

ScalarField make_poly(const CPolynomial& p) {
  if (p.is_constant()) return ScalarField::constant(p.constant_term());
  int used = used_vars(p);
  CPolynomial t(used);
  for (const auto& [m, c] : p.terms()) {
    MultiIndex mm(std::vector<int>(m.hol.begin(), m.hol.begin() + used),
                  std::vector<int>(m.anti.begin(), m.anti.begin() + used));
    t.add_term(mm, c);
  }
  if (t.terms().size() == 1) {
    const auto& [m, c] = *t.terms().begin();
    if (c == GaussRational(Rational(1)) && m.order() == 1) {
      for (int j = 0; j < used; ++j) {
        if (m.hol[j]) return ScalarField::coordinate(j, false);
        if (m.anti[j]) return ScalarField::coordinate(j, true);
      }
    }
  }
  auto n = blank(Kind::Polynomial);
  n->poly = std::move(t);
  return ScalarField(Interner::instance().intern(n));
}

ScalarField make_node(Kind kind, std::vector<ScalarField> kids, int k = 0, const Rational& r = Rational(0)) {
  auto n = blank(kind);
  for (auto& c : kids) n->kids.push_back(c.handle());
  n->k = k;
  n->r = r;
  return ScalarField(Interner::instance().intern(n));
}

bool is_const(const ScalarField& f, const GaussRational& v) {
  return f.kind() == Kind::Constant && f.node()->value == v;
}

}  // namespace

ScalarField::ScalarField() : ScalarField(constant(GaussRational())) {}

ScalarField ScalarField::constant(const GaussRational& c) {
  auto n = blank(Kind::Constant);
  n->value = c;
  return ScalarField(Interner::instance().intern(n));
}

ScalarField ScalarField::coordinate(int j, bool barred) {
  if (j < 0) throw Error(ErrorCode::VarOutOfRange, "jetring", "negative coordinate index");
  auto n = blank(Kind::Coordinate);
  n->coord = j;
  n->barred = barred;
  return ScalarField(Interner::instance().intern(n));
}

ScalarField ScalarField::polynomial(const CPolynomial& p) { return make_poly(p); }

ScalarField::Kind ScalarField::kind() const { return node_->kind; }
std::uint64_t ScalarField::id() const { return node_->id; }
int ScalarField::nvars() const { return node_->nvars; }

std::vector<ScalarField> ScalarField::children() const {
  std::vector<ScalarField> out;
  for (const auto& c : node_->kids) out.emplace_back(c);
  return out;
}

bool ScalarField::is_polynomial_like() const {
  return node_->kind == Kind::Constant || node_->kind == Kind::Coordinate || node_->kind == Kind::Polynomial;
}

CPolynomial ScalarField::as_polynomial() const {
  int nv = std::max(1, node_->nvars);
  switch (node_->kind) {
    case Kind::Constant: return CPolynomial::constant(nv, node_->value);
    case Kind::Coordinate: return CPolynomial::coordinate(nv, node_->coord, node_->barred);
    case Kind::Polynomial: return node_->poly;
    default: throw Error(ErrorCode::InternalInconsistency, "jetring", "field is not polynomial");
  }
}

std::string ScalarField::to_string() const {
  const Node& n = *node_;
  auto kid = [&](std::size_t i) { return ScalarField(n.kids[i]).to_string(); };
  switch (n.kind) {
    case Kind::Constant:
    case Kind::Coordinate:
    case Kind::Polynomial: return "(" + poly_print(as_polynomial()) + ")";
    case Kind::Add:
    case Kind::Mul: {
      std::string s = "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) s += n.kind == Kind::Add ? " + " : "*";
        s += kid(i);
      }
      return s + ")";
    }
    case Kind::Div: return "(" + kid(0) + "/" + kid(1) + ")";
    case Kind::Neg: return "(-" + kid(0) + ")";
    case Kind::Conj: return "conj" + kid(0);
    case Kind::PowInt: return kid(0) + "^" + std::to_string(n.k);
    case Kind::PowRat: return kid(0) + "^(" + crweyl::to_string(n.r) + ")";
    case Kind::Log: return "log" + kid(0);
  }
  return "?";
}

ScalarField sum(std::vector<ScalarField> terms) {
  std::vector<ScalarField> flat;
  CPolynomial acc(1);
  bool anyPoly = false;
  std::vector<ScalarField> stack(terms.rbegin(), terms.rend());
  while (!stack.empty()) {
    ScalarField t = stack.back();
    stack.pop_back();
    if (t.kind() == Kind::Add) {
      auto kids = t.children();
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    } else if (t.is_polynomial_like()) {
      acc += t.as_polynomial();
      anyPoly = true;
    } else {
      flat.push_back(t);
    }
  }
  // collect like terms c*x
  std::vector<std::pair<ScalarField, GaussRational>> like;
  for (const auto& t : flat) {
    ScalarField base = t;
    GaussRational c(Rational(1));
    for (;;) {
      if (base.kind() == Kind::Neg) {
        c = -c;
        base = base.children()[0];
      } else if (base.kind() == Kind::Mul && base.children().size() == 2 &&
                 base.children()[0].kind() == Kind::Constant) {
        c *= base.children()[0].node()->value;
        base = base.children()[1];
      } else if (base.kind() == Kind::Mul && base.children().size() == 2 &&
                 base.children()[1].kind() == Kind::Constant) {
        c *= base.children()[1].node()->value;
        base = base.children()[0];
      } else {
        break;
      }
    }
    auto it = std::find_if(like.begin(), like.end(), [&](const auto& e) { return e.first == base; });
    if (it == like.end()) like.emplace_back(base, c);
    else it->second += c;
  }
  flat.clear();
  for (const auto& [base, c] : like) {
    if (c.is_zero()) continue;
    if (c == GaussRational(Rational(1))) flat.push_back(base);
    else if (c == GaussRational(Rational(-1))) flat.push_back(-base);
    else flat.push_back(product({ScalarField::constant(c), base}));
  }
  if (anyPoly && !acc.is_zero()) flat.push_back(make_poly(acc));
  if (flat.empty()) return ScalarField::constant(0);
  if (flat.size() == 1) return flat[0];
  std::sort(flat.begin(), flat.end(), [](const ScalarField& a, const ScalarField& b) { return a.id() < b.id(); });
  return make_node(Kind::Add, std::move(flat));
}

ScalarField product(std::vector<ScalarField> factors) {
  std::vector<ScalarField> flat;
  CPolynomial acc = CPolynomial::constant(1, GaussRational(Rational(1)));
  std::vector<ScalarField> stack(factors.rbegin(), factors.rend());
  while (!stack.empty()) {
    ScalarField t = stack.back();
    stack.pop_back();
    if (t.kind() == Kind::Mul) {
      auto kids = t.children();
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    } else if (t.is_polynomial_like()) {
      acc = acc * t.as_polynomial();
    } else {
      flat.push_back(t);
    }
  }
  if (acc.is_zero()) return ScalarField::constant(0);
  bool unit = acc.is_constant() && acc.constant_term() == GaussRational(Rational(1));
  if (!unit) flat.push_back(make_poly(acc));
  if (flat.empty()) return ScalarField::constant(1);
  if (flat.size() == 1) return flat[0];
  std::sort(flat.begin(), flat.end(), [](const ScalarField& a, const ScalarField& b) { return a.id() < b.id(); });
  return make_node(Kind::Mul, std::move(flat));
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return sum({a, b}); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return sum({a, -b}); }
ScalarField operator*(const ScalarField& a, const ScalarField& b) { return product({a, b}); }

ScalarField operator-(const ScalarField& a) {
  if (a.is_polynomial_like()) return make_poly(-a.as_polynomial());
  if (a.kind() == Kind::Neg) return a.children()[0];
  return make_node(Kind::Neg, {a});
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  if (b.kind() == Kind::Constant) {
    if (b.node()->value.is_zero()) throw Error(ErrorCode::EvalSingular, "jetring", "division by the zero field");
    return a * ScalarField::constant(GaussRational(Rational(1)) / b.node()->value);
  }
  if (is_const(a, GaussRational())) return a;
  if (a == b) return ScalarField::constant(1);
  return make_node(Kind::Div, {a, b});
}

ScalarField conj(const ScalarField& f) {
  if (f.is_polynomial_like()) return make_poly(f.as_polynomial().conjugate());
  if (f.kind() == Kind::Conj) return f.children()[0];
  return make_node(Kind::Conj, {f});
}

ScalarField pow(const ScalarField& f, int k) {
  if (k == 0) return ScalarField::constant(1);
  if (k == 1) return f;
  if (f.is_polynomial_like() && (k > 0 || f.kind() == Kind::Constant)) {
    if (k < 0 && f.node()->value.is_zero()) throw Error(ErrorCode::EvalSingular, "jetring", "negative power of zero");
    return make_poly(f.as_polynomial().pow(k));
  }
  if (f.kind() == Kind::PowInt) return pow(f.children()[0], f.node()->k * k);
  return make_node(Kind::PowInt, {f}, k);
}

ScalarField pow(const ScalarField& f, const Rational& r) {
  if (denominator(r) == 1) return pow(f, numerator(r).convert_to<int>());
  if (is_const(f, GaussRational(Rational(1)))) return f;
  return make_node(Kind::PowRat, {f}, 0, r);
}

ScalarField log(const ScalarField& f) {
  if (is_const(f, GaussRational(Rational(1)))) return ScalarField::constant(0);
  return make_node(Kind::Log, {f});
}

ScalarField field_diff(const ScalarField& f, int j, bool barred) {
  const ScalarField::Node* n = f.node();
  if (j >= n->nvars) return ScalarField::constant(0);
  int key = 2 * j + (barred ? 1 : 0);
  {
    std::lock_guard<std::mutex> lock(n->memoMu);
    auto it = n->diffs.find(key);
    if (it != n->diffs.end()) return ScalarField(it->second);
  }
  auto kids = f.children();
  auto d = [&](const ScalarField& g) { return field_diff(g, j, barred); };
  ScalarField out;
  switch (n->kind) {
    case Kind::Constant: out = ScalarField::constant(0); break;
    case Kind::Coordinate:
      out = ScalarField::constant(n->coord == j && n->barred == barred ? 1 : 0);
      break;
    case Kind::Polynomial: out = make_poly(n->poly.derivative(j, barred)); break;
    case Kind::Add: {
      std::vector<ScalarField> parts;
      for (const auto& c : kids) parts.push_back(d(c));
      out = sum(parts);
      break;
    }
    case Kind::Mul: {
      std::vector<ScalarField> parts;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        ScalarField di = d(kids[i]);
        if (is_const(di, GaussRational())) continue;
        std::vector<ScalarField> fs;
        for (std::size_t m = 0; m < kids.size(); ++m) fs.push_back(m == i ? di : kids[m]);
        parts.push_back(product(fs));
      }
      out = sum(parts);
      break;
    }
    case Kind::Div: {
      const ScalarField& a = kids[0];
      const ScalarField& b = kids[1];
      out = d(a) / b - a * d(b) / pow(b, 2);
      break;
    }
    case Kind::Neg: out = -d(kids[0]); break;
    case Kind::Conj: out = conj(field_diff(kids[0], j, !barred)); break;
    case Kind::PowInt:
      out = ScalarField::constant(n->k) * pow(kids[0], n->k - 1) * d(kids[0]);
      break;
    case Kind::PowRat:
      out = ScalarField::constant(GaussRational(n->r)) * pow(kids[0], Rational(n->r - 1)) * d(kids[0]);
      break;
    case Kind::Log: out = d(kids[0]) / kids[0]; break;
  }
  std::lock_guard<std::mutex> lock(n->memoMu);
  n->diffs.emplace(key, out.handle());
  return out;
}

ScalarField field_diff(const ScalarField& f, const MultiIndex& m) {
  ScalarField g = f;
  for (int j = 0; j < m.nvars(); ++j) {
    for (int e = 0; e < m.hol[j]; ++e) g = field_diff(g, j, false);
    for (int e = 0; e < m.anti[j]; ++e) g = field_diff(g, j, true);
  }
  return g;
}

Tri field_is_real(const ScalarField& f) {
  const ScalarField::Node* n = f.node();
  auto kids = f.children();
  auto all_real = [&]() {
    for (const auto& c : kids)
      if (field_is_real(c) != Tri::True) return false;
    return true;
  };
  switch (n->kind) {
    case Kind::Constant: return n->value.im == 0 ? Tri::True : Tri::False;
    case Kind::Coordinate: return Tri::False;
    case Kind::Polynomial: return n->poly.is_real() ? Tri::True : Tri::False;
    case Kind::Add: {
      // pair each non-real summand with its conjugate
      std::vector<bool> used(kids.size(), false);
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (used[i]) continue;
        if (field_is_real(kids[i]) == Tri::True) {
          used[i] = true;
          continue;
        }
        ScalarField c = conj(kids[i]);
        bool found = false;
        for (std::size_t m = i + 1; m < kids.size(); ++m)
          if (!used[m] && kids[m] == c) {
            used[m] = used[i] = found = true;
            break;
          }
        if (!found) return Tri::Unknown;
      }
      return Tri::True;
    }
    case Kind::Mul:
    case Kind::Div:
    case Kind::PowInt: return all_real() ? Tri::True : Tri::Unknown;
    case Kind::Neg: return field_is_real(kids[0]);
    case Kind::Conj: return field_is_real(kids[0]);
    case Kind::PowRat:
    case Kind::Log: return Tri::Unknown;
  }
  return Tri::Unknown;
}

template <class R>
CComplex<R> FieldEvaluator<R>::operator()(const ScalarField& f) {
  if (static_cast<int>(point_.size()) < f.nvars())
    throw Error(ErrorCode::VarOutOfRange, "jetring", "point has fewer coordinates than the field uses");
  return eval(f.node());
}

template <class R>
CComplex<R> FieldEvaluator<R>::eval(const ScalarField::Node* n) {
  auto it = memo_.find(n);
  if (it != memo_.end()) return it->second;
  CComplex<R> v;
  auto kid = [&](std::size_t i) { return eval(n->kids[i].get()); };
  switch (n->kind) {
    case Kind::Constant: v = convert<R>(n->value); break;
    case Kind::Coordinate: v = n->barred ? conj(point_[n->coord]) : point_[n->coord]; break;
    case Kind::Polynomial: v = n->poly.eval(point_); break;
    case Kind::Add:
      for (std::size_t i = 0; i < n->kids.size(); ++i) v += kid(i);
      break;
    case Kind::Mul:
      v = CComplex<R>(R(1));
      for (std::size_t i = 0; i < n->kids.size(); ++i) v *= kid(i);
      break;
    case Kind::Div: {
      CComplex<R> b = kid(1);
      if (b.is_zero()) throw Error(ErrorCode::EvalSingular, "jetring", "division by zero in field evaluation");
      v = kid(0) / b;
      break;
    }
    case Kind::Neg: v = -kid(0); break;
    case Kind::Conj: v = conj(kid(0)); break;
    case Kind::PowInt: {
      CComplex<R> b = kid(0);
      if (n->k < 0) {
        if (b.is_zero()) throw Error(ErrorCode::EvalSingular, "jetring", "negative power of zero");
        b = CComplex<R>(R(1)) / b;
      }
      v = CComplex<R>(R(1));
      for (int m = 0; m < std::abs(n->k); ++m) v *= b;
      break;
    }
    case Kind::PowRat: v = principal_pow(kid(0), n->r); break;
    case Kind::Log: v = principal_log(kid(0)); break;
  }
  memo_.emplace(n, v);
  return v;
}

template <class R>
FieldJetEvaluator<R>::FieldJetEvaluator(std::vector<CComplex<R>> point, const JetSpace* space, int order)
    : point_(std::move(point)), space_(space), order_(order) {
  if (static_cast<int>(point_.size()) * 2 != space->nvars())
    throw Error(ErrorCode::WrongDimension, "jetring", "point dimension does not match the jet space");
  if (order > space->max_order())
    throw Error(ErrorCode::OrderExceeded, "jetring", "requested jet order exceeds the jet cap");
}

template <class R>
Jet<R> FieldJetEvaluator<R>::operator()(const ScalarField& f) {
  if (static_cast<int>(point_.size()) < f.nvars())
    throw Error(ErrorCode::VarOutOfRange, "jetring", "point has fewer coordinates than the field uses");
  return eval(f.node());
}

template <class R>
Jet<R> FieldJetEvaluator<R>::polynomial_jet(const CPolynomial& p) const {
  Jet<R> out(space_, order_);
  int N = static_cast<int>(point_.size());
  std::vector<CComplex<R>> base(2 * N);
  for (int j = 0; j < N; ++j) {
    base[j] = point_[j];
    base[j + N] = conj(point_[j]);
  }
  std::vector<std::vector<CComplex<R>>> powers(2 * N, std::vector<CComplex<R>>(1, CComplex<R>(R(1))));
  auto power = [&](int v, int e) -> const CComplex<R>& {
    auto& c = powers[v];
    while (static_cast<int>(c.size()) <= e) c.push_back(c.back() * base[v]);
    return c[e];
  };
  std::vector<int> exps(2 * N);
  for (const auto& [m, coef] : p.terms()) {
    for (int j = 0; j < N; ++j) {
      exps[j] = j < m.nvars() ? m.hol[j] : 0;
      exps[j + N] = j < m.nvars() ? m.anti[j] : 0;
    }
    CComplex<R> c = convert<R>(coef);
    // expand prod_v (x_v + d_v)^{e_v}, keeping total degree <= order
    auto rec = [&](auto&& self, int v, std::size_t idx, int deg, CComplex<R> acc) -> void {
      if (v == 2 * N) {
        out[idx] += acc;
        return;
      }
      int e = exps[v];
      if (e == 0) {
        self(self, v + 1, idx, deg, acc);
        return;
      }
      Rational binom(1);
      std::size_t cur = idx;
      for (int k = 0; k <= e && deg + k <= order_; ++k) {
        CComplex<R> x = power(v, e - k);
        if (!x.is_zero()) self(self, v + 1, cur, deg + k, acc * x * from_rational<R>(binom));
        binom = binom * (e - k) / (k + 1);
        if (deg + k < order_) cur = static_cast<std::size_t>(space_->shift(v, cur));
      }
    };
    rec(rec, 0, 0, 0, c);
  }
  return out;
}

template <class R>
Jet<R> FieldJetEvaluator<R>::eval(const ScalarField::Node* n) {
  auto it = memo_.find(n);
  if (it != memo_.end()) return it->second;
  Jet<R> v;
  auto kid = [&](std::size_t i) { return eval(n->kids[i].get()); };
  int N = static_cast<int>(point_.size());
  switch (n->kind) {
    case Kind::Constant: v = Jet<R>::constant(space_, order_, convert<R>(n->value)); break;
    case Kind::Coordinate:
      v = Jet<R>::variable(space_, order_, n->coord + (n->barred ? N : 0),
                           n->barred ? conj(point_[n->coord]) : point_[n->coord]);
      break;
    case Kind::Polynomial: v = polynomial_jet(n->poly); break;
    case Kind::Add:
      v = kid(0);
      for (std::size_t i = 1; i < n->kids.size(); ++i) v += kid(i);
      break;
    case Kind::Mul:
      v = kid(0);
      for (std::size_t i = 1; i < n->kids.size(); ++i) v = v * kid(i);
      break;
    case Kind::Div: v = kid(0) * kid(1).inverse(); break;
    case Kind::Neg: v = -kid(0); break;
    case Kind::Conj: v = kid(0).conjugate(); break;
    case Kind::PowInt: {
      Jet<R> b = kid(0);
      if (n->k < 0) b = b.inverse();
      int e = std::abs(n->k);
      Jet<R> acc = Jet<R>::constant(space_, order_, CComplex<R>(R(1)));
      while (e > 0) {
        if (e & 1) acc = acc * b;
        e >>= 1;
        if (e) b = b * b;
      }
      v = acc;
      break;
    }
    case Kind::PowRat: v = kid(0).pow(n->r); break;
    case Kind::Log: v = kid(0).log(); break;
  }
  memo_.emplace(n, v);
  return v;
}

template class FieldEvaluator<Rational>;
template class FieldEvaluator<Real>;
template class FieldJetEvaluator<Rational>;
template class FieldJetEvaluator<Real>;

}  // namespace crweyl
