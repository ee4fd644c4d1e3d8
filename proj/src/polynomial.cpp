#include "crweyl/polynomial.hpp"

#include <cctype>
#include <sstream>

namespace crweyl {

MultiIndex::MultiIndex(std::vector<int> h, std::vector<int> a) : hol(std::move(h)), anti(std::move(a)) {
  if (hol.size() != anti.size())
    throw Error(ErrorCode::WrongDimension, "jetring", "multi-index halves differ in length");
}

int MultiIndex::order() const {
  int s = 0;
  for (int e : hol) s += e;
  for (int e : anti) s += e;
  return s;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  int n = std::max(nvars(), o.nvars());
  MultiIndex r(n);
  for (int j = 0; j < nvars(); ++j) {
    r.hol[j] += hol[j];
    r.anti[j] += anti[j];
  }
  for (int j = 0; j < o.nvars(); ++j) {
    r.hol[j] += o.hol[j];
    r.anti[j] += o.anti[j];
  }
  return r;
}

CPolynomial CPolynomial::constant(int nvars, const GaussRational& c) {
  CPolynomial p(nvars);
  p.add_term(MultiIndex(nvars), c);
  return p;
}

CPolynomial CPolynomial::coordinate(int nvars, int j, bool barred) {
  if (j < 0 || j >= nvars)
    throw Error(ErrorCode::VarOutOfRange, "jetring", "coordinate index out of range");
  CPolynomial p(nvars);
  MultiIndex m(nvars);
  (barred ? m.anti : m.hol)[j] = 1;
  p.add_term(m, GaussRational(Rational(1)));
  return p;
}

bool CPolynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.order() == 0);
}

GaussRational CPolynomial::constant_term() const {
  auto it = terms_.find(MultiIndex(nvars_));
  return it == terms_.end() ? GaussRational() : it->second;
}

int CPolynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.order());
  return d;
}

void CPolynomial::add_term(const MultiIndex& m, const GaussRational& c) {
  if (c.is_zero()) return;
  if (m.nvars() != nvars_) {
    if (m.nvars() > nvars_) *this = widened(m.nvars());
    if (m.nvars() < nvars_) {
      add_term(m + MultiIndex(nvars_), c);
      return;
    }
  }
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

CPolynomial CPolynomial::widened(int nvars) const {
  if (nvars <= nvars_) return *this;
  CPolynomial r(nvars);
  for (const auto& [m, c] : terms_) r.terms_.emplace(m + MultiIndex(nvars), c);
  return r;
}

CPolynomial& CPolynomial::operator+=(const CPolynomial& o) {
  if (o.nvars_ > nvars_) *this = widened(o.nvars_);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

CPolynomial& CPolynomial::operator-=(const CPolynomial& o) {
  if (o.nvars_ > nvars_) *this = widened(o.nvars_);
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

CPolynomial& CPolynomial::operator*=(const GaussRational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

CPolynomial operator*(const CPolynomial& a, const CPolynomial& b) {
  int n = std::max(a.nvars_, b.nvars_);
  CPolynomial r(n);
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) r.add_term(ma + mb, ca * cb);
  return r;
}

CPolynomial CPolynomial::operator-() const {
  CPolynomial r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

bool CPolynomial::operator==(const CPolynomial& o) const {
  if (nvars_ == o.nvars_) return terms_ == o.terms_;
  int n = std::max(nvars_, o.nvars_);
  return widened(n).terms_ == o.widened(n).terms_;
}

CPolynomial CPolynomial::pow(int k) const {
  if (k < 0) {
    if (!is_constant() || constant_term().is_zero())
      throw Error(ErrorCode::EvalSingular, "jetring", "negative power of a non-constant polynomial");
    GaussRational inv = GaussRational(Rational(1)) / constant_term();
    return CPolynomial::constant(nvars_, inv).pow(-k);
  }
  CPolynomial result = CPolynomial::constant(nvars_, GaussRational(Rational(1)));
  CPolynomial base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

CPolynomial CPolynomial::conjugate() const {
  CPolynomial r(nvars_);
  for (const auto& [m, c] : terms_) r.terms_.emplace(m.conjugate(), conj(c));
  return r;
}

CPolynomial CPolynomial::derivative(int j, bool barred) const {
  CPolynomial r(nvars_);
  if (j < 0 || j >= nvars_) return r;
  for (const auto& [m, c] : terms_) {
    int e = (barred ? m.anti : m.hol)[j];
    if (e == 0) continue;
    MultiIndex d = m;
    (barred ? d.anti : d.hol)[j] -= 1;
    r.add_term(d, c * GaussRational(Rational(e)));
  }
  return r;
}

bool CPolynomial::is_real() const { return conjugate() == *this; }

namespace {

class Parser {
 public:
  Parser(std::string_view text, int nvars) : s_(text), nvars_(nvars) {}

  CPolynomial parse() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    CPolynomial p = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError, "jetring", msg + " at offset " + std::to_string(pos_), pos_);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  CPolynomial expr() {
    CPolynomial acc = term();
    for (;;) {
      if (accept('+')) acc += term();
      else if (accept('-')) acc -= term();
      else return acc;
    }
  }

  CPolynomial term() {
    CPolynomial acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        CPolynomial d = unary();
        if (!d.is_constant() || d.constant_term().is_zero()) {
          pos_ = at;
          fail("division is only allowed by a nonzero constant");
        }
        acc *= GaussRational(Rational(1)) / d.constant_term();
      } else {
        return acc;
      }
    }
  }

  CPolynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  CPolynomial power() {
    CPolynomial base = atom();
    if (accept('^')) {
      skip();
      bool neg = false;
      if (pos_ < s_.size() && s_[pos_] == '-') {
        neg = true;
        ++pos_;
      }
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) fail("expected integer exponent");
      if (pos_ - start > 4) fail("exponent too large");
      int k = std::stoi(std::string(s_.substr(start, pos_ - start)));
      if (neg) {
        if (!base.is_constant() || base.constant_term().is_zero()) fail("negative exponent of a non-constant");
        GaussRational inv = GaussRational(Rational(1)) / base.constant_term();
        return CPolynomial::constant(nvars_, inv).pow(k);
      }
      return base.pow(k);
    }
    return base;
  }

  CPolynomial atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      CPolynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (s_.substr(pos_, 5) == "conj(") {
      pos_ += 5;
      CPolynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p.conjugate();
    }
    if (c == 'z') {
      std::size_t at = pos_;
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == start) fail("expected variable index after 'z'");
      if (pos_ - start > 3) {
        pos_ = at;
        throw Error(ErrorCode::VarOutOfRange, "jetring", "variable index too large", at);
      }
      int j = std::stoi(std::string(s_.substr(start, pos_ - start)));
      if (j < 1 || j > nvars_)
        throw Error(ErrorCode::VarOutOfRange, "jetring",
                    "variable z" + std::to_string(j) + " out of range 1.." + std::to_string(nvars_), at);
      return CPolynomial::coordinate(nvars_, j - 1, false);
    }
    if (c == 'i' && !(pos_ + 1 < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
      ++pos_;
      return CPolynomial::constant(nvars_, GaussRational(Rational(0), Rational(1)));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  // DIGITS[.DIGITS][/DIGITS][i]
  CPolynomial number() {
    std::size_t start = pos_;
    auto digits = [&]() {
      std::size_t b = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return pos_ > b;
    };
    bool any = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      any = digits() || any;
    }
    if (!any) fail("malformed number");
    if (pos_ + 1 < s_.size() && s_[pos_] == '/' && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
      ++pos_;
      digits();
    }
    Rational q;
    try {
      q = parse_rational(std::string(s_.substr(start, pos_ - start)));
    } catch (const Error&) {
      pos_ = start;
      fail("malformed number");
    }
    GaussRational v(q);
    if (pos_ < s_.size() && s_[pos_] == 'i' &&
        !(pos_ + 1 < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
      ++pos_;
      v = GaussRational(Rational(0), q);
    }
    return CPolynomial::constant(nvars_, v);
  }

  std::string_view s_;
  int nvars_;
  std::size_t pos_ = 0;
};

std::string coefficient_string(const GaussRational& c) {
  if (c.im == 0) return to_string(c.re);
  if (c.re == 0) return to_string(c.im) + "i";
  std::string im = to_string(c.im);
  if (im[0] != '-') im = "+" + im;
  return to_string(c.re) + im + "i";
}

}  // namespace

CPolynomial poly_parse(std::string_view text, int nvars) {
  if (nvars < 1) throw Error(ErrorCode::VarOutOfRange, "jetring", "nvars must be positive");
  return Parser(text, nvars).parse();
}

std::string poly_print(const CPolynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (!first) out << " + ";
    first = false;
    out << "(" << coefficient_string(c) << ")";
    for (int j = 0; j < m.nvars(); ++j) {
      if (m.hol[j] == 1) out << "*z" << j + 1;
      else if (m.hol[j] > 1) out << "*z" << j + 1 << "^" << m.hol[j];
      if (m.anti[j] == 1) out << "*conj(z" << j + 1 << ")";
      else if (m.anti[j] > 1) out << "*conj(z" << j + 1 << ")^" << m.anti[j];
    }
  }
  return out.str();
}

}  // namespace crweyl
