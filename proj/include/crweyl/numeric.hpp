#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <string>
#include <type_traits>

#include "crweyl/error.hpp"

namespace crweyl {

using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

enum class Backend { Exact, Float };

template <class R>
inline constexpr bool is_exact_v = std::is_same_v<R, Rational>;

// Working precision of newly created Real values (process wide).
unsigned real_precision_bits();
unsigned set_real_precision_bits(unsigned bits);
unsigned default_precision_bits();

class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits) : saved_(real_precision_bits()) { set_real_precision_bits(bits); }
  ~PrecisionScope() { set_real_precision_bits(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

template <class R>
R from_rational(const Rational& q) {
  if constexpr (is_exact_v<R>) {
    return q;
  } else {
    return R(q);
  }
}

template <class R>
double to_double(const R& x) {
  return x.template convert_to<double>();
}

template <class R>
struct CComplex {
  R re{0};
  R im{0};

  CComplex() = default;
  CComplex(const R& r) : re(r), im(0) {}
  CComplex(const R& r, const R& i) : re(r), im(i) {}
  CComplex(int r) : re(r), im(0) {}

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  CComplex& operator+=(const CComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  CComplex& operator-=(const CComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  CComplex& operator*=(const CComplex& o) {
    R r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  CComplex& operator*=(const R& s) {
    re *= s;
    im *= s;
    return *this;
  }
  CComplex& operator/=(const CComplex& o) {
    *this = *this / o;
    return *this;
  }

  friend CComplex operator+(CComplex a, const CComplex& b) { return a += b; }
  friend CComplex operator-(CComplex a, const CComplex& b) { return a -= b; }
  friend CComplex operator*(CComplex a, const CComplex& b) { return a *= b; }
  friend CComplex operator*(CComplex a, const R& s) { return a *= s; }
  friend CComplex operator*(const R& s, CComplex a) { return a *= s; }
  friend CComplex operator-(const CComplex& a) { return CComplex(R(-a.re), R(-a.im)); }
  friend CComplex operator/(const CComplex& a, const CComplex& b) {
    if (b.is_zero()) throw Error(ErrorCode::EvalSingular, "jetring", "division by zero");
    R d = b.re * b.re + b.im * b.im;
    return CComplex(R((a.re * b.re + a.im * b.im) / d), R((a.im * b.re - a.re * b.im) / d));
  }
  friend bool operator==(const CComplex& a, const CComplex& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const CComplex& a, const CComplex& b) { return !(a == b); }
};

using GaussRational = CComplex<Rational>;

template <class R>
CComplex<R> conj(const CComplex<R>& z) {
  return CComplex<R>(z.re, R(-z.im));
}

template <class R>
R abs2(const CComplex<R>& z) {
  return z.re * z.re + z.im * z.im;
}

template <class R>
double abs_d(const CComplex<R>& z) {
  return std::hypot(to_double(z.re), to_double(z.im));
}

template <class R>
CComplex<R> imag_unit() {
  return CComplex<R>(R(0), R(1));
}

template <class R>
CComplex<R> convert(const GaussRational& z) {
  return CComplex<R>(from_rational<R>(z.re), from_rational<R>(z.im));
}

inline CComplex<Real> to_real(const CComplex<Real>& z) { return z; }
inline CComplex<Real> to_real(const GaussRational& z) { return convert<Real>(z); }

// Exact rational for Rational input; round-trip-safe decimal otherwise.
std::string to_string(const Rational& x);
std::string to_string(const Real& x);

Rational parse_rational(const std::string& text);

}  // namespace crweyl
