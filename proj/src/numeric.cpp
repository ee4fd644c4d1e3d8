#include "crweyl/numeric.hpp"

#include <atomic>
#include <cmath>

namespace crweyl {

namespace {

unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120));
}

std::atomic<unsigned> g_bits{0};

}  // namespace

unsigned default_precision_bits() { return 128; }

unsigned real_precision_bits() {
  if (g_bits == 0) set_real_precision_bits(default_precision_bits());
  return g_bits;
}

unsigned set_real_precision_bits(unsigned bits) {
  if (bits < 24) bits = 24;
  Real::default_precision(digits10_for_bits(bits));
  g_bits = bits;
  return bits;
}

namespace {
const unsigned g_initBits = real_precision_bits();
}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::VarOutOfRange: return "VarOutOfRange";
    case ErrorCode::NotReal: return "NotReal";
    case ErrorCode::EvalSingular: return "EvalSingular";
    case ErrorCode::BackendUnsupported: return "BackendUnsupported";
    case ErrorCode::OrderExceeded: return "OrderExceeded";
    case ErrorCode::OffSurface: return "OffSurface";
    case ErrorCode::FrameDegenerate: return "FrameDegenerate";
    case ErrorCode::LeviDegenerate: return "LeviDegenerate";
    case ErrorCode::FeffermanDegenerate: return "FeffermanDegenerate";
    case ErrorCode::HessianDegenerate: return "HessianDegenerate";
    case ErrorCode::NotPseudoEinstein: return "NotPseudoEinstein";
    case ErrorCode::NotApproxMongeAmpere: return "NotApproxMongeAmpere";
    case ErrorCode::NotPositiveFactor: return "NotPositiveFactor";
    case ErrorCode::NotPositiveJ: return "NotPositiveJ";
    case ErrorCode::NotStrictlyPSH: return "NotStrictlyPSH";
    case ErrorCode::NotUnitHessian: return "NotUnitHessian";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::ComponentNotField: return "ComponentNotField";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::RouteDisagreement: return "RouteDisagreement";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnknownSurface: return "UnknownSurface";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::BadGridSpec: return "BadGridSpec";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

std::string to_string(const Rational& x) {
  auto s = x.str();
  return s;
}

std::string to_string(const Real& x) {
  return x.str(0, std::ios_base::scientific);
}

Rational parse_rational(const std::string& text) {
  std::string s = text;
  std::size_t pos = 0;
  bool neg = false;
  if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
    neg = s[pos] == '-';
    ++pos;
  }
  auto bad = [&]() { return Error(ErrorCode::BadParameter, "jetring", "not a rational number: '" + text + "'"); };
  auto digits = [&](std::string& out) {
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    out = s.substr(start, pos - start);
    return pos > start;
  };
  std::string ip, fp, ep, dp;
  bool hasInt = digits(ip);
  bool hasFrac = false;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    hasFrac = digits(fp);
  }
  if (!hasInt && !hasFrac) throw bad();
  boost::multiprecision::mpz_int num(ip.empty() ? std::string("0") : ip);
  boost::multiprecision::mpz_int den(1);
  for (char c : fp) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    bool eneg = false;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
      eneg = s[pos] == '-';
      ++pos;
    }
    if (!digits(ep) || ep.size() > 4) throw bad();
    int e = std::stoi(ep);
    boost::multiprecision::mpz_int p = boost::multiprecision::pow(boost::multiprecision::mpz_int(10), e);
    if (eneg) den *= p; else num *= p;
  }
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    if (!digits(dp)) throw bad();
    boost::multiprecision::mpz_int d(dp);
    if (d == 0) throw bad();
    den *= d;
  }
  if (pos != s.size()) throw bad();
  Rational q(num, den);
  return neg ? Rational(-q) : q;
}

}  // namespace crweyl
