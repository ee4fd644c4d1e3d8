#include "crweyl/tensor.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace crweyl {

namespace {

void require_frame(std::uint64_t a, std::uint64_t b) {
  if (a != b) throw Error(ErrorCode::FrameMismatch, "tensor", "tensors come from different frame contexts");
}

template <class R>
CComplex<R> frac(long p, long q) {
  return CComplex<R>(from_rational<R>(Rational(p, q)));
}

}  // namespace

template <class R>
LeviMetric<R> metric(const FrameContext<R>& ctx) {
  LeviMetric<R> g;
  g.n = ctx.n();
  g.frame = ctx.id();
  g.h.assign(g.n, std::vector<Jet<R>>(g.n));
  g.hinv = g.h;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      g.h[a][b] = ctx.h(a, b);
      g.hinv[a][b] = ctx.hinv(a, b);
    }
  return g;
}

template <class R>
Tensor<R>::Tensor(int n, std::vector<IndexKind> kinds, std::uint64_t frame, const JetSpace* space, int order, int weight)
    : n_(n), kinds_(std::move(kinds)), frame_(frame), weight_(weight), space_(space) {
  std::size_t count = 1;
  for (int s = 0; s < rank(); ++s) count *= static_cast<std::size_t>(dim(s));
  data_.assign(count, Jet<R>(space, order));
}

template <class R>
Tensor<R> Tensor<R>::build(int n, std::vector<IndexKind> kinds, std::uint64_t frame,
                           const std::function<Jet<R>(const Index&)>& f, int weight) {
  Tensor t;
  t.n_ = n;
  t.kinds_ = std::move(kinds);
  t.frame_ = frame;
  t.weight_ = weight;
  std::size_t count = 1;
  for (int s = 0; s < t.rank(); ++s) count *= static_cast<std::size_t>(t.dim(s));
  t.data_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) t.data_.push_back(f(t.unflatten(i)));
  t.space_ = t.data_.front().space();
  return t;
}

template <class R>
Tensor<R> Tensor<R>::scalar(std::uint64_t frame, const Jet<R>& v, int weight) {
  Tensor t;
  t.frame_ = frame;
  t.weight_ = weight;
  t.space_ = v.space();
  t.data_.push_back(v);
  return t;
}

template <class R>
int Tensor<R>::order() const {
  int o = std::numeric_limits<int>::max();
  for (const auto& j : data_) o = std::min(o, j.order());
  return o;
}

template <class R>
std::size_t Tensor<R>::offset(const Index& idx) const {
  if (static_cast<int>(idx.size()) != rank()) throw Error(ErrorCode::WrongDimension, "tensor", "index has wrong rank");
  std::size_t off = 0;
  for (int s = 0; s < rank(); ++s) {
    if (idx[s] < 0 || idx[s] >= dim(s)) throw Error(ErrorCode::WrongDimension, "tensor", "index out of range");
    off = off * static_cast<std::size_t>(dim(s)) + static_cast<std::size_t>(idx[s]);
  }
  return off;
}

template <class R>
typename Tensor<R>::Index Tensor<R>::unflatten(std::size_t flat) const {
  Index idx(rank());
  for (int s = rank() - 1; s >= 0; --s) {
    idx[s] = static_cast<int>(flat % static_cast<std::size_t>(dim(s)));
    flat /= static_cast<std::size_t>(dim(s));
  }
  return idx;
}

template <class R>
std::vector<typename Tensor<R>::Index> Tensor<R>::indices() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < data_.size(); ++i) out.push_back(unflatten(i));
  return out;
}

template <class R>
Tensor<R> Tensor<R>::truncated(int order) const {
  Tensor t = *this;
  for (auto& j : t.data_) j = j.truncated(std::min(order, j.order()));
  return t;
}

template <class R>
Tensor<R> Tensor<R>::conjugate() const {
  Tensor t = *this;
  for (auto& k : t.kinds_) k = k.conjugated();
  for (auto& j : t.data_) j = j.conjugate();
  return t;
}

template <class R>
Tensor<R> Tensor<R>::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != rank()) throw Error(ErrorCode::WrongDimension, "tensor", "bad permutation");
  std::vector<IndexKind> kinds;
  for (int p : perm) kinds.push_back(kinds_[p]);
  return build(
      n_, kinds, frame_,
      [&](const Index& out) {
        Index in(rank());
        for (int s = 0; s < rank(); ++s) in[perm[s]] = out[s];
        return at(in);
      },
      weight_);
}

template <class R>
void Tensor<R>::require_compatible(const Tensor& o, const char* what) const {
  require_frame(frame_, o.frame_);
  if (kinds_ != o.kinds_ || n_ != o.n_)
    throw Error(ErrorCode::KindMismatch, "tensor", std::string("slot kinds differ in ") + what);
}

template <class R>
Tensor<R>& Tensor<R>::operator+=(const Tensor& o) {
  require_compatible(o, "sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

template <class R>
Tensor<R>& Tensor<R>::operator-=(const Tensor& o) {
  require_compatible(o, "difference");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

template <class R>
Tensor<R>& Tensor<R>::operator*=(const CComplex<R>& s) {
  for (auto& j : data_) j *= s;
  return *this;
}

template <class R>
Tensor<R>& Tensor<R>::operator*=(const Jet<R>& s) {
  for (auto& j : data_) j = j * s;
  return *this;
}

template <class R>
double Tensor<R>::max_abs() const {
  double m = 0;
  for (const auto& j : data_) m = std::max(m, abs_d(j.value()));
  return m;
}

template <class R>
Tensor<R> raise(const Tensor<R>& t, int slot, const LeviMetric<R>& g) {
  require_frame(t.frame(), g.frame);
  const IndexKind k = t.kind(slot);
  if (k.characteristic || k.variance != Variance::Lower)
    throw Error(ErrorCode::KindMismatch, "tensor", "raise needs a lower Greek slot");
  auto kinds = t.kinds();
  kinds[slot] = IndexKind::upper(!k.barred);
  return Tensor<R>::build(
      t.n(), kinds, t.frame(),
      [&](const std::vector<int>& out) {
        std::vector<int> in = out;
        const int a = out[slot];
        Jet<R> s;
        for (int b = 0; b < t.n(); ++b) {
          in[slot] = b;
          const Jet<R>& c = k.barred ? g.hinv[a][b] : g.hinv[b][a];
          Jet<R> term = c * t.at(in);
          if (b == 0) s = term;
          else s += term;
        }
        return s;
      },
      t.weight() - 1);
}

template <class R>
Tensor<R> lower(const Tensor<R>& t, int slot, const LeviMetric<R>& g) {
  require_frame(t.frame(), g.frame);
  const IndexKind k = t.kind(slot);
  if (k.characteristic || k.variance != Variance::Upper)
    throw Error(ErrorCode::KindMismatch, "tensor", "lower needs an upper Greek slot");
  auto kinds = t.kinds();
  kinds[slot] = IndexKind::lower(!k.barred);
  return Tensor<R>::build(
      t.n(), kinds, t.frame(),
      [&](const std::vector<int>& out) {
        std::vector<int> in = out;
        const int b = out[slot];
        Jet<R> s;
        for (int a = 0; a < t.n(); ++a) {
          in[slot] = a;
          const Jet<R>& c = k.barred ? g.h[b][a] : g.h[a][b];
          Jet<R> term = c * t.at(in);
          if (a == 0) s = term;
          else s += term;
        }
        return s;
      },
      t.weight() + 1);
}

template <class R>
Tensor<R> raise_all(const Tensor<R>& t, const LeviMetric<R>& g) {
  Tensor<R> out = t;
  for (int s = 0; s < t.rank(); ++s)
    if (!t.kind(s).characteristic && t.kind(s).variance == Variance::Lower) out = raise(out, s, g);
  return out;
}

template <class R>
Tensor<R> lower_all(const Tensor<R>& t, const LeviMetric<R>& g) {
  Tensor<R> out = t;
  for (int s = 0; s < t.rank(); ++s)
    if (!t.kind(s).characteristic && t.kind(s).variance == Variance::Upper) out = lower(out, s, g);
  return out;
}

template <class R>
Tensor<R> contract(const Tensor<R>& t, int slotA, int slotB) {
  if (slotA == slotB || !t.kind(slotA).dual_to(t.kind(slotB)))
    throw Error(ErrorCode::KindMismatch, "tensor", "contraction needs an upper and a lower slot of the same bar");
  std::vector<IndexKind> kinds;
  for (int s = 0; s < t.rank(); ++s)
    if (s != slotA && s != slotB) kinds.push_back(t.kind(s));
  auto sumOver = [&](const std::vector<int>& out) {
    std::vector<int> in(t.rank());
    for (int s = 0, o = 0; s < t.rank(); ++s)
      if (s != slotA && s != slotB) in[s] = out[o++];
    Jet<R> acc;
    for (int i = 0; i < t.n(); ++i) {
      in[slotA] = in[slotB] = i;
      if (i == 0) acc = t.at(in);
      else acc += t.at(in);
    }
    return acc;
  };
  if (kinds.empty()) return Tensor<R>::scalar(t.frame(), sumOver({}), t.weight());
  return Tensor<R>::build(t.n(), kinds, t.frame(), sumOver, t.weight());
}

template <class R>
Tensor<R> tensor_product(const Tensor<R>& a, const Tensor<R>& b) {
  require_frame(a.frame(), b.frame());
  auto kinds = a.kinds();
  kinds.insert(kinds.end(), b.kinds().begin(), b.kinds().end());
  if (kinds.empty()) return Tensor<R>::scalar(a.frame(), a.data()[0] * b.data()[0], a.weight() + b.weight());
  const int ra = a.rank();
  return Tensor<R>::build(
      std::max(a.n(), b.n()), kinds, a.frame(),
      [&](const std::vector<int>& idx) {
        std::vector<int> ia(idx.begin(), idx.begin() + ra), ib(idx.begin() + ra, idx.end());
        return a.at(ia) * b.at(ib);
      },
      a.weight() + b.weight());
}

template <class R>
Jet<R> full_contract(const Tensor<R>& a, const Tensor<R>& b) {
  require_frame(a.frame(), b.frame());
  if (a.rank() != b.rank()) throw Error(ErrorCode::KindMismatch, "tensor", "full contraction needs equal ranks");
  for (int s = 0; s < a.rank(); ++s) {
    bool ok = a.kind(s).characteristic ? b.kind(s).characteristic : a.kind(s).dual_to(b.kind(s));
    if (!ok) throw Error(ErrorCode::KindMismatch, "tensor", "full contraction needs dual slots");
  }
  Jet<R> acc = a.data()[0] * b.data()[0];
  for (std::size_t i = 1; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
  return acc;
}

template <class R>
Jet<R> norm2(const Tensor<R>& t, const LeviMetric<R>& g) {
  Tensor<R> c = t.conjugate();
  for (int s = 0; s < c.rank(); ++s) {
    if (c.kind(s).characteristic) continue;
    c = c.kind(s).variance == Variance::Lower ? raise(c, s, g) : lower(c, s, g);
  }
  return full_contract(t, c);
}

template <class R>
Tensor<R> metric_tensor(const LeviMetric<R>& g) {
  return Tensor<R>::build(
      g.n, {IndexKind::lower(false), IndexKind::lower(true)}, g.frame,
      [&](const std::vector<int>& i) { return g.h[i[0]][i[1]]; }, 1);
}

template <class R>
Tensor<R> inverse_metric_tensor(const LeviMetric<R>& g) {
  return Tensor<R>::build(
      g.n, {IndexKind::upper(false), IndexKind::upper(true)}, g.frame,
      [&](const std::vector<int>& i) { return g.hinv[i[0]][i[1]]; }, -1);
}

template <class R>
Tensor<R> ricci_trace(const Tensor<R>& curv, const LeviMetric<R>& g) {
  require_frame(curv.frame(), g.frame);
  return Tensor<R>::build(
      g.n, {IndexKind::lower(false), IndexKind::lower(true)}, g.frame,
      [&](const std::vector<int>& i) {
        Jet<R> acc;
        bool first = true;
        for (int c = 0; c < g.n; ++c)
          for (int s = 0; s < g.n; ++s) {
            Jet<R> t = g.hinv[c][s] * curv.at({i[0], i[1], c, s});
            if (first) acc = t;
            else acc += t;
            first = false;
          }
        return acc;
      },
      curv.weight() - 1);
}

template <class R>
Jet<R> scalar_trace(const Tensor<R>& ric, const LeviMetric<R>& g) {
  require_frame(ric.frame(), g.frame);
  Jet<R> acc = g.hinv[0][0] * ric.at({0, 0});
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b)
      if (a || b) acc += g.hinv[a][b] * ric.at({a, b});
  return acc;
}

template <class R>
double curvature_symmetry_defect(const Tensor<R>& curv) {
  double d = 0;
  for (const auto& i : curv.indices()) {
    auto v = curv.value(i);
    d = std::max(d, abs_d(CComplex<R>(v - curv.value({i[2], i[1], i[0], i[3]}))));
    d = std::max(d, abs_d(CComplex<R>(v - curv.value({i[2], i[3], i[0], i[1]}))));
  }
  return d;
}

template <class R>
Tensor<R> tracefree_part(const Tensor<R>& curv, const LeviMetric<R>& g, TracefreeFlags* flags) {
  const std::vector<IndexKind> kinds{IndexKind::lower(false), IndexKind::lower(true), IndexKind::lower(false),
                                     IndexKind::lower(true)};
  if (curv.kinds() != kinds) throw Error(ErrorCode::KindMismatch, "tensor", "tracefree_part needs a curvature-type tensor");
  require_frame(curv.frame(), g.frame);
  if (flags) flags->crDimensionOne = g.n == 1;
  if (g.n == 1) return Tensor<R>(1, kinds, curv.frame(), curv.space(), curv.order(), curv.weight());
  if (curvature_symmetry_defect(curv) > 1e-8 * std::max(1.0, curv.max_abs()))
    throw Error(ErrorCode::SymmetryViolation, "tensor", "input lacks curvature symmetries");
  const int n = g.n;
  Tensor<R> ric = ricci_trace(curv, g);
  Jet<R> rs = scalar_trace(ric, g);
  auto c1 = frac<R>(1, n + 2);
  auto c2 = frac<R>(1, (n + 1) * (n + 2));
  return Tensor<R>::build(
      n, kinds, curv.frame(),
      [&](const std::vector<int>& i) {
        const int a = i[0], b = i[1], c = i[2], s = i[3];
        Jet<R> ricTerms = ric.at({a, b}) * g.h[c][s] + ric.at({c, b}) * g.h[a][s] + ric.at({a, s}) * g.h[c][b] +
                          ric.at({c, s}) * g.h[a][b];
        Jet<R> hh = g.h[a][b] * g.h[c][s] + g.h[a][s] * g.h[c][b];
        return curv.at(i) - ricTerms * c1 + rs * hh * c2;
      },
      curv.weight());
}

template <class R>
Tensor<R> cmw_mixed(const Tensor<R>& s, const LeviMetric<R>& g) {
  return raise(raise(s, 1, g), 3, g);
}

namespace {

template <class R>
Tensor<R> chain_step(const Tensor<R>& p, const Tensor<R>& m) {
  const int n = m.n();
  return Tensor<R>::build(
      n, m.kinds(), m.frame(),
      [&](const std::vector<int>& i) {
        Jet<R> acc;
        bool first = true;
        for (int a2 = 0; a2 < n; ++a2)
          for (int m2 = 0; m2 < n; ++m2) {
            Jet<R> t = p.at({i[0], a2, i[2], m2}) * m.at({a2, i[1], m2, i[3]});
            if (first) acc = t;
            else acc += t;
            first = false;
          }
        return acc;
      },
      p.weight() + m.weight());
}

}  // namespace

template <class R>
Tensor<R> cmw_power(const Tensor<R>& s, int k, const LeviMetric<R>& g) {
  if (k < 1) throw Error(ErrorCode::BadParameter, "tensor", "chain length must be at least 1");
  Tensor<R> m = cmw_mixed(s, g);
  Tensor<R> p = m;
  for (int i = 1; i < k; ++i) p = chain_step(p, m);
  return p;
}

template <class R>
CComplex<R> cmw_power_scalar(const Tensor<R>& s, int k, const LeviMetric<R>& g) {
  if (k < 1) throw Error(ErrorCode::BadParameter, "tensor", "chain length must be at least 1");
  Tensor<R> m = cmw_mixed(s, g);
  const int n = g.n;
  CComplex<R> acc;
  if (k == 1) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += m.value({a, a, b, b});
    return acc;
  }
  Tensor<R> p = cmw_power(s, k - 1, g);
  for (const auto& i : p.indices()) acc += p.value(i) * m.value({i[1], i[0], i[3], i[2]});
  return acc;
}

std::string tensor_label(const std::string& name, const std::vector<IndexKind>& kinds, const std::vector<int>& idx) {
  std::ostringstream os;
  os << name;
  std::size_t s = 0;
  while (s < kinds.size()) {
    bool up = !kinds[s].characteristic && kinds[s].variance == Variance::Upper;
    os << (up ? "^{" : "_{");
    bool first = true;
    while (s < kinds.size() && (!kinds[s].characteristic && kinds[s].variance == Variance::Upper) == up) {
      if (!first) os << ' ';
      first = false;
      if (kinds[s].characteristic) os << '0';
      else os << idx[s] + 1 << (kinds[s].barred ? "bar" : "");
      ++s;
    }
    os << '}';
  }
  return os.str();
}

template class Tensor<Rational>;
template class Tensor<Real>;

#define CRWEYL_TENSOR_INST(R)                                                                  \
  template LeviMetric<R> metric(const FrameContext<R>&);                                       \
  template Tensor<R> raise(const Tensor<R>&, int, const LeviMetric<R>&);                      \
  template Tensor<R> lower(const Tensor<R>&, int, const LeviMetric<R>&);                      \
  template Tensor<R> raise_all(const Tensor<R>&, const LeviMetric<R>&);                       \
  template Tensor<R> lower_all(const Tensor<R>&, const LeviMetric<R>&);                       \
  template Tensor<R> contract(const Tensor<R>&, int, int);                                     \
  template Tensor<R> tensor_product(const Tensor<R>&, const Tensor<R>&);                      \
  template Jet<R> full_contract(const Tensor<R>&, const Tensor<R>&);                          \
  template Jet<R> norm2(const Tensor<R>&, const LeviMetric<R>&);                              \
  template Tensor<R> metric_tensor(const LeviMetric<R>&);                                     \
  template Tensor<R> inverse_metric_tensor(const LeviMetric<R>&);                             \
  template Tensor<R> ricci_trace(const Tensor<R>&, const LeviMetric<R>&);                     \
  template Jet<R> scalar_trace(const Tensor<R>&, const LeviMetric<R>&);                       \
  template double curvature_symmetry_defect(const Tensor<R>&);                                 \
  template Tensor<R> tracefree_part(const Tensor<R>&, const LeviMetric<R>&, TracefreeFlags*); \
  template Tensor<R> cmw_mixed(const Tensor<R>&, const LeviMetric<R>&);                       \
  template Tensor<R> cmw_power(const Tensor<R>&, int, const LeviMetric<R>&);                  \
  template CComplex<R> cmw_power_scalar(const Tensor<R>&, int, const LeviMetric<R>&);

CRWEYL_TENSOR_INST(Rational)
CRWEYL_TENSOR_INST(Real)

}  // namespace crweyl
