#pragma once

#include <optional>
#include <vector>

#include "crweyl/tensor.hpp"

namespace crweyl {

enum class DeltaBConvention { NegativeSum, PositiveSum };

// Frozen by the conformal transformation-law check.
inline constexpr DeltaBConvention kDefaultDeltaB = DeltaBConvention::PositiveSum;

template <class R>
struct SecondFundamentalForm {
  // II(Z_a, Z_b) = IIhol_{ab} xi
  Tensor<R> IIhol;
  // H = -xi, ambient components
  std::vector<Jet<R>> H;
};

// omega_b^g = hol[b][g][m] theta^m + anti[b][g][m] theta^mbar + chr[b][g] theta
template <class R>
struct ConnectionCoeffs {
  int n = 0;
  std::uint64_t frame = 0;
  std::vector<Jet<R>> hol, anti, chr;

  const Jet<R>& gamma_hol(int b, int g, int m) const { return hol[(b * n + g) * n + m]; }
  const Jet<R>& gamma_anti(int b, int g, int m) const { return anti[(b * n + g) * n + m]; }
  const Jet<R>& gamma_t(int b, int g) const { return chr[b * n + g]; }
};

template <class R>
struct CurvaturePack {
  Tensor<R> R4;   // R_{a bbar g sbar}
  Tensor<R> S4;   // S_{a bbar g sbar}
  Tensor<R> Ric;  // R_{a bbar}
  Jet<R> Rscal;
  Tensor<R> A;    // A_{a b}
  std::optional<Tensor<R>> IIhol;
  Jet<R> Hnorm2;
};

enum class DirKind { Hol, Anti, Char };

struct Direction {
  DirKind kind = DirKind::Hol;
  int index = 0;
  static Direction hol(int m) { return {DirKind::Hol, m}; }
  static Direction anti(int m) { return {DirKind::Anti, m}; }
  static Direction chr() { return {DirKind::Char, 0}; }
};

struct GaussResiduals {
  double curvature = 0;
  double torsion = 0;
};

template <class R>
SecondFundamentalForm<R> second_fundamental(const FrameContext<R>& ctx);

// -iA_{ab} = conj(xi^k) D_{ab}(rho_kbar) - r h_{ab}
template <class R>
Tensor<R> torsion(const FrameContext<R>& ctx);
// A_{ab} = -(i/|d rho|^2) Z_a(rho_kbar) Z_b(rho^kbar), strictly plurisubharmonic rho only
template <class R>
Tensor<R> torsion_liluk(const FrameContext<R>& ctx);

template <class R>
ConnectionCoeffs<R> connection(const FrameContext<R>& ctx);

// rho_{Z Zbar Z Zbar}(Z_a, Z_bbar, Z_g, Z_sbar)
template <class R>
Tensor<R> curly_R(const FrameContext<R>& ctx);

template <class R>
CurvaturePack<R> curvature_general(const FrameContext<R>& ctx);
// Valid when rho_{j kbar} = delta at the point; only second-order data enter.
template <class R>
CurvaturePack<R> curvature_unit_hessian(const FrameContext<R>& ctx);
// S for J(rho) = 1 + O(rho^3); checks D_{a bbar} log J at the point first.
template <class R>
Tensor<R> cmw_fefferman(const FrameContext<R>& ctx, double tol = 1e-6);

template <class R>
CComplex<R> kahler_curvature(const FrameContext<R>& ctx, int a, int b, int g, int s);
template <class R>
Tensor<R> kahler_curvature_tensor(const FrameContext<R>& ctx);

template <class R>
GaussResiduals gauss_check(const FrameContext<R>& ctx);

// max of |theta(T) - 1|, |T rho| and |dtheta(T, Z)| over the frame
template <class R>
double characteristic_residual(const FrameContext<R>& ctx);

template <class R>
Tensor<R> covariant_derivative(const Tensor<R>& t, Direction d, const FrameContext<R>& ctx,
                               const ConnectionCoeffs<R>& conn);
template <class R>
Tensor<R> covariant_derivative(const Tensor<R>& t, Direction d, const FrameContext<R>& ctx);
// all directions of one kind, appended as a new last slot
template <class R>
Tensor<R> nabla(const Tensor<R>& t, DirKind kind, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn);

template <class R>
Jet<R> sublaplacian_jet(const Jet<R>& f, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn,
                        DeltaBConvention conv = kDefaultDeltaB);
template <class R>
CComplex<R> sublaplacian(const ScalarField& f, const FrameContext<R>& ctx, DeltaBConvention conv = kDefaultDeltaB);

// S_{a bbar g sbar,}^{sbar}
template <class R>
Tensor<R> cmw_divergence(const Tensor<R>& s, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn);

template <class R>
Tensor<R> schouten(const CurvaturePack<R>& pack, const FrameContext<R>& ctx);
template <class R>
Tensor<R> t_tensor(const CurvaturePack<R>& pack, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn);
template <class R>
Tensor<R> v_tensor(const CurvaturePack<R>& pack, const FrameContext<R>& ctx, const ConnectionCoeffs<R>& conn);
// pseudo-Einstein shortcut A_{ag,bbar} + i(R_{,g} h_{a bbar} + R_{,a} h_{g bbar})/(n(n+1))
template <class R>
Tensor<R> v_tensor_pseudo_einstein(const CurvaturePack<R>& pack, const FrameContext<R>& ctx,
                                   const ConnectionCoeffs<R>& conn);
// max |Ric - (R/n) h|
template <class R>
double pseudo_einstein_defect(const CurvaturePack<R>& pack, const FrameContext<R>& ctx);

}  // namespace crweyl
