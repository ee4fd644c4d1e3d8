#include "crweyl/jet.hpp"

#include <map>
#include <mutex>
#include <unordered_map>

namespace crweyl {

namespace {

constexpr int kBits = 5;
constexpr int kMaxVars = 12;

std::uint64_t pack(const std::uint8_t* e, int nvars) {
  std::uint64_t k = 0;
  for (int v = 0; v < nvars; ++v) k |= static_cast<std::uint64_t>(e[v]) << (kBits * v);
  return k;
}

void enumerate(int nvars, int degree, int v, std::vector<std::uint8_t>& cur, std::vector<std::uint8_t>& out) {
  if (v == nvars - 1) {
    cur[v] = static_cast<std::uint8_t>(degree);
    out.insert(out.end(), cur.begin(), cur.end());
    cur[v] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[v] = static_cast<std::uint8_t>(e);
    enumerate(nvars, degree - e, v + 1, cur, out);
  }
  cur[v] = 0;
}

struct SpaceKeyHash {
  std::size_t operator()(std::uint64_t k) const { return std::hash<std::uint64_t>()(k * 0x9E3779B97F4A7C15ull); }
};

}  // namespace

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int maxOrder) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[{nvars, maxOrder}];
  if (!slot) slot = std::make_shared<JetSpace>(nvars, maxOrder);
  return slot;
}

JetSpace::JetSpace(int nvars, int maxOrder) : nvars_(nvars), maxOrder_(maxOrder) {
  if (nvars < 1 || nvars > kMaxVars || nvars % 2 != 0)
    throw Error(ErrorCode::WrongDimension, "jetring", "jet space needs an even number of variables <= 12");
  if (maxOrder < 0 || maxOrder >= (1 << kBits))
    throw Error(ErrorCode::OrderExceeded, "jetring", "jet order out of range");
  std::vector<std::uint8_t> cur(nvars, 0);
  degStart_.push_back(0);
  for (int d = 0; d <= maxOrder; ++d) {
    enumerate(nvars, d, 0, cur, exps_);
    degStart_.push_back(exps_.size() / nvars);
  }
  std::size_t n = degStart_.back();
  deg_.resize(n);
  for (int d = 0; d <= maxOrder; ++d)
    for (std::size_t i = degStart_[d]; i < degStart_[d + 1]; ++i) deg_[i] = d;

  std::unordered_map<std::uint64_t, std::uint32_t, SpaceKeyHash> lookup;
  lookup.reserve(n * 2);
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = pack(exponents(i), nvars);
    lookup.emplace(keys[i], static_cast<std::uint32_t>(i));
  }

  rowStart_.resize(n + 1);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rowStart_[i] = total;
    total += count(maxOrder - deg_[i]);
  }
  rowStart_[n] = total;
  res_.resize(total);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lim = count(maxOrder - deg_[i]);
    std::uint32_t* row = &res_[rowStart_[i]];
    for (std::size_t j = 0; j < lim; ++j) row[j] = lookup.at(keys[i] + keys[j]);
  }

  shift_.assign(static_cast<std::size_t>(nvars) * n, -1);
  for (int v = 0; v < nvars; ++v) {
    std::uint64_t unitKey = std::uint64_t(1) << (kBits * v);
    for (std::size_t i = 0; i < n; ++i)
      if (deg_[i] < maxOrder) shift_[static_cast<std::size_t>(v) * n + i] = lookup.at(keys[i] + unitKey);
  }

  int half = nvars / 2;
  conj_.resize(n);
  fact_.resize(n);
  std::vector<std::uint8_t> sw(nvars);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* e = exponents(i);
    for (int v = 0; v < half; ++v) {
      sw[v] = e[v + half];
      sw[v + half] = e[v];
    }
    conj_[i] = lookup.at(pack(sw.data(), nvars));
    Rational f(1);
    for (int v = 0; v < nvars; ++v)
      for (int k = 2; k <= e[v]; ++k) f *= k;
    fact_[i] = f;
  }
}

std::size_t JetSpace::index_of(const std::vector<int>& exps) const {
  if (static_cast<int>(exps.size()) != nvars_)
    throw Error(ErrorCode::WrongDimension, "jetring", "multi-index has wrong number of variables");
  int d = 0;
  for (int e : exps) {
    if (e < 0) throw Error(ErrorCode::WrongDimension, "jetring", "negative exponent");
    d += e;
  }
  if (d > maxOrder_) throw Error(ErrorCode::OrderExceeded, "jetring", "derivative order exceeds the jet cap");
  // degree-block offset + rank within the block by linear search over the block
  std::vector<std::uint8_t> e(exps.begin(), exps.end());
  std::uint64_t key = pack(e.data(), nvars_);
  for (std::size_t i = degStart_[d]; i < degStart_[d + 1]; ++i)
    if (pack(exponents(i), nvars_) == key) return i;
  throw Error(ErrorCode::InternalInconsistency, "jetring", "monomial not found");
}

namespace {

template <class R>
bool zero(const R& x) {
  return x.is_zero();
}

template <class R>
bool zero(const CComplex<R>& z) {
  return z.re.is_zero() && z.im.is_zero();
}

template <class R>
inline void mac(CComplex<R>& out, const CComplex<R>& a, const CComplex<R>& b) {
  bool ar = a.im.is_zero();
  bool br = b.im.is_zero();
  if (ar && br) {
    out.re += a.re * b.re;
  } else if (ar) {
    out.re += a.re * b.re;
    out.im += a.re * b.im;
  } else if (br) {
    out.re += a.re * b.re;
    out.im += a.im * b.re;
  } else {
    out.re += a.re * b.re;
    out.re -= a.im * b.im;
    out.im += a.re * b.im;
    out.im += a.im * b.re;
  }
}

template <class R>
std::vector<std::uint32_t> nonzeros(const std::vector<CComplex<R>>& c, std::size_t lim) {
  std::vector<std::uint32_t> nz;
  lim = std::min(lim, c.size());
  for (std::size_t i = 0; i < lim; ++i)
    if (!zero(c[i])) nz.push_back(static_cast<std::uint32_t>(i));
  return nz;
}

template <class R>
CComplex<R> complex_exp(const CComplex<R>& z) {
  if constexpr (is_exact_v<R>) {
    if (z.is_zero()) return CComplex<R>(R(1));
    throw Error(ErrorCode::BackendUnsupported, "jetring", "exp requires the float backend");
  } else {
    R m = exp(z.re);
    return CComplex<R>(R(m * cos(z.im)), R(m * sin(z.im)));
  }
}

}  // namespace

template <class R>
CComplex<R> principal_pow(const CComplex<R>& z, const Rational& r) {
  if constexpr (is_exact_v<R>) {
    if (denominator(r) != 1)
      throw Error(ErrorCode::BackendUnsupported, "jetring", "rational power requires the float backend");
    long k = numerator(r).template convert_to<long>();
    CComplex<R> base = k < 0 ? CComplex<R>(R(1)) / z : z;
    CComplex<R> acc(R(1));
    for (long m = std::labs(k); m > 0; m >>= 1) {
      if (m & 1) acc *= base;
      if (m > 1) base *= base;
    }
    return acc;
  } else {
    if (z.re <= 0) throw Error(ErrorCode::EvalSingular, "jetring", "power base is not in the right half-plane");
    R mod = sqrt(z.re * z.re + z.im * z.im);
    R arg = atan2(z.im, z.re);
    R rr = from_rational<R>(r);
    R m = boost::multiprecision::pow(mod, rr);
    return CComplex<R>(R(m * cos(rr * arg)), R(m * sin(rr * arg)));
  }
}

template <class R>
CComplex<R> principal_log(const CComplex<R>& z) {
  if constexpr (is_exact_v<R>) {
    if (z == CComplex<R>(R(1))) return CComplex<R>();
    throw Error(ErrorCode::BackendUnsupported, "jetring", "log requires the float backend");
  } else {
    if (z.re <= 0) throw Error(ErrorCode::EvalSingular, "jetring", "log argument is not in the right half-plane");
    R mod2 = z.re * z.re + z.im * z.im;
    return CComplex<R>(R(log(mod2) / 2), R(atan2(z.im, z.re)));
  }
}

template CComplex<Rational> principal_pow(const CComplex<Rational>&, const Rational&);
template CComplex<Real> principal_pow(const CComplex<Real>&, const Rational&);
template CComplex<Rational> principal_log(const CComplex<Rational>&);
template CComplex<Real> principal_log(const CComplex<Real>&);

template <class R>
Jet<R>::Jet(const JetSpace* space, int order) : space_(space), order_(order) {
  if (!space) throw Error(ErrorCode::InternalInconsistency, "jetring", "jet without space");
  if (order < 0 || order > space->max_order())
    throw Error(ErrorCode::OrderExceeded, "jetring",
                "jet order " + std::to_string(order) + " outside 0.." + std::to_string(space->max_order()));
  c_.resize(space->count(order));
}

template <class R>
Jet<R> Jet<R>::constant(const JetSpace* space, int order, const Scalar& v) {
  Jet j(space, order);
  j.c_[0] = v;
  return j;
}

template <class R>
Jet<R> Jet<R>::variable(const JetSpace* space, int order, int var, const Scalar& v) {
  Jet j(space, order);
  j.c_[0] = v;
  if (order >= 1) j.c_[space->unit(var)] = Scalar(R(1));
  return j;
}

template <class R>
bool Jet<R>::is_zero() const {
  for (const auto& z : c_)
    if (!zero(z)) return false;
  return true;
}

template <class R>
typename Jet<R>::Scalar Jet<R>::partial(const std::vector<int>& exps) const {
  std::size_t i = space_->index_of(exps);
  if (space_->degree(i) > order_)
    throw Error(ErrorCode::OrderExceeded, "jetring", "derivative order exceeds the jet order");
  return c_[i] * from_rational<R>(space_->factorial_weight(i));
}

template <class R>
Jet<R> Jet<R>::truncated(int k) const {
  if (k >= order_) return *this;
  Jet j;
  j.space_ = space_;
  j.order_ = k;
  j.c_.assign(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(space_->count(k)));
  return j;
}

template <class R>
Jet<R> Jet<R>::derivative(int var) const {
  if (order_ < 1) throw Error(ErrorCode::OrderExceeded, "jetring", "cannot differentiate an order-0 jet");
  Jet j(space_, order_ - 1);
  for (std::size_t i = 0; i < j.c_.size(); ++i) {
    std::size_t src = static_cast<std::size_t>(space_->shift(var, i));
    if (zero(c_[src])) continue;
    int e = space_->exponents(src)[var];
    j.c_[i] = c_[src];
    if (e != 1) j.c_[i] *= R(e);
  }
  return j;
}

template <class R>
Jet<R> Jet<R>::conjugate() const {
  Jet j(space_, order_);
  for (std::size_t i = 0; i < c_.size(); ++i) j.c_[space_->conj_index(i)] = crweyl::conj(c_[i]);
  return j;
}

template <class R>
Jet<R>& Jet<R>::operator+=(const Jet& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (!zero(o.c_[i])) c_[i] += o.c_[i];
  return *this;
}

template <class R>
Jet<R>& Jet<R>::operator-=(const Jet& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (!zero(o.c_[i])) c_[i] -= o.c_[i];
  return *this;
}

template <class R>
Jet<R>& Jet<R>::operator*=(const Scalar& s) {
  for (auto& z : c_)
    if (!zero(z)) z *= s;
  return *this;
}

template <class R>
Jet<R> Jet<R>::operator-() const {
  Jet j = *this;
  for (auto& z : j.c_) {
    z.re = -z.re;
    z.im = -z.im;
  }
  return j;
}

template <class R>
Jet<R> Jet<R>::multiply(const Jet& a, const Jet& b) {
  if (a.space_ != b.space_) throw Error(ErrorCode::WrongDimension, "jetring", "jets from different spaces");
  const JetSpace* sp = a.space_;
  int order = std::min(a.order_, b.order_);
  Jet out(sp, order);
  std::size_t n = out.c_.size();
  auto na = nonzeros(a.c_, n);
  auto nb = nonzeros(b.c_, n);
  if (na.size() > nb.size()) return multiply(b, a);
  for (std::uint32_t i : na) {
    std::size_t lim = sp->count(order - sp->degree(i));
    const std::uint32_t* row = sp->product_row(i);
    const Scalar& ai = a.c_[i];
    for (std::uint32_t j : nb) {
      if (j >= lim) break;
      mac(out.c_[row[j]], ai, b.c_[j]);
    }
  }
  return out;
}

// Coefficients of h from the degree recursion
//   d * denom * h_d = [d * g_d] + sum_{e=1..d} weight(d,e) g_e h_{d-e}.
template <class R>
template <class W>
Jet<R> Jet<R>::graded_series(const Scalar& head, const Scalar& denom, bool withSource, W weight) const {
  const JetSpace* sp = space_;
  Jet h(sp, order_);
  h.c_[0] = head;
  auto nz = nonzeros(c_, c_.size());
  Scalar invDen = Scalar(R(1)) / denom;
  for (int d = 1; d <= order_; ++d) {
    std::size_t b0 = sp->block_begin(d), b1 = sp->block_end(d);
    if (withSource)
      for (std::size_t k = b0; k < b1; ++k)
        if (!zero(c_[k])) h.c_[k] = c_[k] * R(d);
    for (std::uint32_t i : nz) {
      int e = sp->degree(i);
      if (e == 0) continue;
      if (e > d) break;
      Rational w = weight(d, e);
      if (w == 0) continue;
      Scalar gw = c_[i] * from_rational<R>(w);
      const std::uint32_t* row = sp->product_row(i);
      for (std::size_t j = sp->block_begin(d - e); j < sp->block_end(d - e); ++j)
        if (!zero(h.c_[j])) mac(h.c_[row[j]], gw, h.c_[j]);
    }
    Scalar s = invDen * Scalar(from_rational<R>(Rational(1, d)));
    for (std::size_t k = b0; k < b1; ++k)
      if (!zero(h.c_[k])) h.c_[k] *= s;
  }
  return h;
}

template <class R>
Jet<R> Jet<R>::inverse() const {
  const Scalar& g0 = c_[0];
  if (zero(g0)) throw Error(ErrorCode::EvalSingular, "jetring", "inverse of a jet with zero constant term");
  return graded_series(Scalar(R(1)) / g0, g0, false, [](int d, int) { return Rational(-d); });
}

template <class R>
Jet<R> Jet<R>::log_normalized() const {
  const Scalar& g0 = c_[0];
  if (zero(g0)) throw Error(ErrorCode::EvalSingular, "jetring", "log of a jet with zero constant term");
  return graded_series(Scalar(), g0, true, [](int d, int e) { return Rational(-(d - e)); });
}

template <class R>
Jet<R> Jet<R>::log() const {
  const Scalar& g0 = c_[0];
  if (zero(g0)) throw Error(ErrorCode::EvalSingular, "jetring", "log of a jet with zero constant term");
  return graded_series(principal_log(g0), g0, true, [](int d, int e) { return Rational(-(d - e)); });
}

template <class R>
Jet<R> Jet<R>::pow(const Rational& r) const {
  const Scalar& g0 = c_[0];
  if (zero(g0)) throw Error(ErrorCode::EvalSingular, "jetring", "power of a jet with zero constant term");
  return graded_series(principal_pow(g0, r), g0, false, [r](int d, int e) { return Rational(r * e - (d - e)); });
}

template <class R>
Jet<R> Jet<R>::exp() const {
  return graded_series(complex_exp(c_[0]), Scalar(R(1)), false, [](int, int e) { return Rational(e); });
}

template class Jet<Rational>;
template class Jet<Real>;

}  // namespace crweyl
