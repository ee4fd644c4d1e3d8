#pragma once

#include <utility>
#include <vector>

#include "crweyl/pseudohermitian.hpp"

namespace crweyl {

// Volume-normalized scale: rhoTilde = J(rho)^{-1/(n+2)} rho.
struct PEScale {
  ScalarField u;
  ScalarField rhoTilde;
  FrameContext<Real> ctx;       // rho, same point, derivative budget >= 2
  FrameContext<Real> ctxTilde;  // rhoTilde
  ConnectionCoeffs<Real> conn;  // of ctxTilde
  CurvaturePack<Real> pack;     // of ctxTilde
  double jResidual = 0;         // |J(rhoTilde) - 1|
  double peDefect = 0;          // max |Ric - (R/n) h| in the tilde scale
};

struct DimFiveInvariants {
  Real normS2;
  std::vector<CComplex<Real>> X;
  Real Iprime;
  Real divX;
};

PEScale pe_scale(const FrameContext<Real>& ctx);

// X_a = 1/2 S_{a bbar g sbar} (S_{., }^{sbar})^{bbar g sbar} + 1/4 Z_a |S|^2 for the scale of ctx.
// Needs a derivative budget of at least 1 in pack and conn.
template <class R>
Tensor<R> x_alpha_direct(const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn, const CurvaturePack<R>& pack);

// X~ from the data of rho alone: torsion and connection transformation laws, V from the
// pseudo-Einstein form, S~ = e^u S.
std::vector<CComplex<Real>> x_alpha_transform(const PEScale& pe);

// Both routes; throws RouteDisagreement when they differ by more than 1e-6.
std::vector<CComplex<Real>> x_alpha(const PEScale& pe);

// -1/8 Delta_b |S|^2 + 1/4 |S_{a bbar g sbar,}^{sbar}|^2 + 1/12 R |S|^2 for the scale of ctx (n = 2)
template <class R>
CComplex<R> i_prime_at(const FrameContext<R>& ctx, DeltaBConvention conv = kDefaultDeltaB);
Real i_prime(const PEScale& pe, DeltaBConvention conv = kDefaultDeltaB);

// Re nabla^a X_a in the tilde scale
Real div_x(const PEScale& pe);

DimFiveInvariants dim_five_invariants(const PEScale& pe, DeltaBConvention conv = kDefaultDeltaB);

// |e^{3U} I'(f rho) - I'(rho) - 2 Re X^g U_g| with U = log f, theta from rho itself
double conformal_law_check(const FrameContext<Real>& ctx, const ScalarField& f,
                           DeltaBConvention conv = kDefaultDeltaB);

// Coefficients of S[k] = c_k h_{a m} h^{b n} + d_k (delta delta + delta delta) for the tube S
std::pair<Rational, Rational> ck_dk(int n, int k);

struct TubePowerFit {
  CComplex<Real> c, d;
  double residual = 0;
};
TubePowerFit tube_power_check(const FrameContext<Real>& ctx, int k);

}  // namespace crweyl
