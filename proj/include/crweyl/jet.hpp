#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "crweyl/numeric.hpp"
#include "crweyl/polynomial.hpp"

namespace crweyl {

inline constexpr int kDefaultJetCap = 8;

// Monomials in V variables of total degree <= K, laid out degree by degree.
// Variables 0..N-1 are dz_j, N..2N-1 are d(conj z_j).
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> get(int nvars, int maxOrder);

  JetSpace(int nvars, int maxOrder);

  int nvars() const { return nvars_; }
  int max_order() const { return maxOrder_; }
  // number of monomials of degree <= k
  std::size_t count(int k) const { return k < 0 ? 0 : degStart_[std::min(k, maxOrder_) + 1]; }
  std::size_t block_begin(int d) const { return degStart_[d]; }
  std::size_t block_end(int d) const { return degStart_[d + 1]; }
  int degree(std::size_t i) const { return deg_[i]; }
  const std::uint8_t* exponents(std::size_t i) const { return &exps_[i * nvars_]; }
  std::size_t index_of(const std::vector<int>& exps) const;
  std::size_t unit(int v) const { return 1 + static_cast<std::size_t>(v); }

  // index of monomial(i) * monomial(j); valid when deg(i)+deg(j) <= K
  const std::uint32_t* product_row(std::size_t i) const { return &res_[rowStart_[i]]; }
  // index of monomial(i) * x_v, or -1
  std::int32_t shift(int v, std::size_t i) const { return shift_[static_cast<std::size_t>(v) * size() + i]; }
  std::size_t conj_index(std::size_t i) const { return conj_[i]; }
  const Rational& factorial_weight(std::size_t i) const { return fact_[i]; }
  std::size_t size() const { return deg_.size(); }

 private:
  int nvars_;
  int maxOrder_;
  std::vector<std::size_t> degStart_;
  std::vector<int> deg_;
  std::vector<std::uint8_t> exps_;
  std::vector<std::size_t> rowStart_;
  std::vector<std::uint32_t> res_;
  std::vector<std::int32_t> shift_;
  std::vector<std::size_t> conj_;
  std::vector<Rational> fact_;
};

template <class R>
class Jet {
 public:
  using Scalar = CComplex<R>;

  Jet() = default;
  Jet(const JetSpace* space, int order);

  static Jet constant(const JetSpace* space, int order, const Scalar& v);
  static Jet variable(const JetSpace* space, int order, int var, const Scalar& v);

  bool valid() const { return space_ != nullptr; }
  const JetSpace* space() const { return space_; }
  int order() const { return order_; }
  std::size_t size() const { return c_.size(); }
  const Scalar& value() const { return c_[0]; }
  const Scalar& operator[](std::size_t i) const { return c_[i]; }
  Scalar& operator[](std::size_t i) { return c_[i]; }
  const std::vector<Scalar>& coeffs() const { return c_; }
  bool is_zero() const;

  // value of the partial derivative d^I at the base point
  Scalar partial(const std::vector<int>& exps) const;

  Jet truncated(int k) const;
  Jet derivative(int var) const;
  Jet conjugate() const;
  Jet inverse() const;
  // log(g / g(p)); the constant term is zero so this is exact on the exact backend
  Jet log_normalized() const;
  Jet log() const;
  Jet pow(const Rational& r) const;
  Jet exp() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Scalar& s);
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Scalar& s) { return a *= s; }
  friend Jet operator*(const Scalar& s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b) { return multiply(a, b); }
  friend Jet operator/(const Jet& a, const Jet& b) { return multiply(a, b.inverse()); }
  Jet& operator+=(const Scalar& s) {
    c_[0] += s;
    return *this;
  }

  static Jet multiply(const Jet& a, const Jet& b);

 private:
  template <class W>
  Jet graded_series(const Scalar& head, const Scalar& denom, bool withSource, W weight) const;

  const JetSpace* space_ = nullptr;
  int order_ = -1;
  std::vector<Scalar> c_;
};

// Principal branch; the float backend requires Re z > 0.
template <class R>
CComplex<R> principal_pow(const CComplex<R>& z, const Rational& r);
template <class R>
CComplex<R> principal_log(const CComplex<R>& z);

template <class R>
Jet<R> conj(const Jet<R>& j) {
  return j.conjugate();
}

extern template class Jet<Rational>;
extern template class Jet<Real>;

}  // namespace crweyl
