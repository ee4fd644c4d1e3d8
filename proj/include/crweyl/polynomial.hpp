#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "crweyl/numeric.hpp"

namespace crweyl {

// Exponents of z_1..z_N (hol) and conj(z_1)..conj(z_N) (anti).
struct MultiIndex {
  std::vector<int> hol;
  std::vector<int> anti;

  MultiIndex() = default;
  explicit MultiIndex(int nvars) : hol(nvars, 0), anti(nvars, 0) {}
  MultiIndex(std::vector<int> h, std::vector<int> a);

  int nvars() const { return static_cast<int>(hol.size()); }
  int order() const;
  MultiIndex conjugate() const { return MultiIndex(anti, hol); }
  MultiIndex operator+(const MultiIndex& o) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;
};

class CPolynomial {
 public:
  using TermMap = std::map<MultiIndex, GaussRational>;

  CPolynomial() = default;
  explicit CPolynomial(int nvars) : nvars_(nvars) {}

  static CPolynomial constant(int nvars, const GaussRational& c);
  static CPolynomial coordinate(int nvars, int j, bool barred);

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  GaussRational constant_term() const;
  int degree() const;

  void add_term(const MultiIndex& m, const GaussRational& c);
  CPolynomial widened(int nvars) const;

  CPolynomial& operator+=(const CPolynomial& o);
  CPolynomial& operator-=(const CPolynomial& o);
  CPolynomial& operator*=(const GaussRational& c);
  friend CPolynomial operator+(CPolynomial a, const CPolynomial& b) { return a += b; }
  friend CPolynomial operator-(CPolynomial a, const CPolynomial& b) { return a -= b; }
  friend CPolynomial operator*(const CPolynomial& a, const CPolynomial& b);
  friend CPolynomial operator*(CPolynomial a, const GaussRational& c) { return a *= c; }
  CPolynomial operator-() const;
  bool operator==(const CPolynomial& o) const;

  CPolynomial pow(int k) const;
  CPolynomial conjugate() const;
  CPolynomial derivative(int j, bool barred) const;
  bool is_real() const;

  template <class R>
  CComplex<R> eval(const std::vector<CComplex<R>>& point) const;

 private:
  int nvars_ = 0;
  TermMap terms_;
};

CPolynomial poly_parse(std::string_view text, int nvars);
std::string poly_print(const CPolynomial& p);

template <class R>
CComplex<R> CPolynomial::eval(const std::vector<CComplex<R>>& point) const {
  if (static_cast<int>(point.size()) < nvars_)
    throw Error(ErrorCode::WrongDimension, "jetring", "point has fewer coordinates than the polynomial");
  std::vector<std::vector<CComplex<R>>> hp(nvars_), ap(nvars_);
  auto power = [](std::vector<CComplex<R>>& cache, const CComplex<R>& x, int k) -> const CComplex<R>& {
    if (cache.empty()) cache.push_back(CComplex<R>(R(1)));
    while (static_cast<int>(cache.size()) <= k) cache.push_back(cache.back() * x);
    return cache[k];
  };
  CComplex<R> sum;
  for (const auto& [m, c] : terms_) {
    CComplex<R> t = convert<R>(c);
    for (int j = 0; j < nvars_; ++j) {
      if (m.hol[j]) t *= power(hp[j], point[j], m.hol[j]);
      if (m.anti[j]) t *= power(ap[j], conj(point[j]), m.anti[j]);
    }
    sum += t;
  }
  return sum;
}

}  // namespace crweyl
