#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "crweyl/jet.hpp"
#include "crweyl/linalg.hpp"
#include "crweyl/scalar_field.hpp"

namespace crweyl {

// Coordinates are zero-based in the C++ API: z_{j+1} is index j.
struct FrameConfig {
  double onSurfaceTol = 1e-12;
  double frameTol = 1e-8;
  double matrixTol = 1e-10;
  double leviTol = 1e-10;
  double fefferTol = 1e-10;
  // frame derivatives that downstream tensors must still support
  int derivOrder = 0;
  int jetCap = kDefaultJetCap;
};

class Hypersurface {
 public:
  Hypersurface(ScalarField rho, int n, int wIndex = -1);

  const ScalarField& rho() const { return rho_; }
  int n() const { return n_; }
  int ambient() const { return n_ + 1; }
  int w() const { return w_; }
  // ambient index of frame direction alpha
  int greek(int alpha) const { return alpha < w_ ? alpha : alpha + 1; }

  Hypersurface with_rho(ScalarField rho) const { return Hypersurface(std::move(rho), n_, w_); }
  Hypersurface with_w(int w) const { return Hypersurface(rho_, n_, w); }

 private:
  ScalarField rho_;
  int n_;
  int w_;
};

template <class R>
struct SurfacePoint {
  std::vector<CComplex<R>> coords;
  double residual = 0;
  CComplex<R> rhoW;
};

// Jets at one point of M.  Jet orders: rho m+4, q m+3, second-order data m+2.
template <class R>
class FrameContext {
 public:
  using Scalar = CComplex<R>;
  using JetT = Jet<R>;

  FrameContext(const Hypersurface& surface, std::vector<Scalar> coords, const FrameConfig& cfg);

  const Hypersurface& surface() const { return surface_; }
  const SurfacePoint<R>& point() const { return point_; }
  const FrameConfig& config() const { return cfg_; }
  std::uint64_t id() const { return id_; }
  int n() const { return surface_.n(); }
  int N() const { return surface_.ambient(); }
  int w() const { return surface_.w(); }
  int greek(int alpha) const { return surface_.greek(alpha); }
  int budget() const { return cfg_.derivOrder; }
  const JetSpace* space() const { return space_; }

  const JetT& rho() const { return rho_; }
  // partial derivative of rho; vars are jet variables (j for z_j, N+j for conj z_j)
  JetT rho_partial(std::vector<int> vars) const;

  const JetT& q(int alpha) const { return q_[alpha]; }
  const JetT& qbar(int alpha) const { return qb_[alpha]; }
  const JetT& h(int a, int b) const { return h_[a][b]; }
  const JetT& hhol(int a, int b) const { return hhol_[a][b]; }
  const JetT& hanti(int a, int b) const { return hanti_[a][b]; }
  // h^{a bbar}
  const JetT& hinv(int a, int b) const { return hinv_[a][b]; }
  const JetT& hess(int j, int k) const { return hess_[j][k]; }
  const JetT& hess_det() const { return detHess_; }
  const JetT& fefferman() const { return J_; }
  // log(J / J(p))
  const JetT& log_fefferman() const { return logJ_; }
  const JetT& xi(int j) const { return xi_[j]; }
  const JetT& xibar(int j) const { return xib_[j]; }
  const JetT& r() const { return r_; }
  const JetT& psi(int j, int k) const { return psi_[j][k]; }
  // h^{j kbar}
  const JetT& hamb(int j, int k) const { return hamb_[j][k]; }
  const JetT& drho(int j) const { return drho_[j]; }
  const JetT& drhobar(int j) const { return drhob_[j]; }

  bool hessian_invertible() const { return kinv_.has_value(); }
  // rho^{j kbar}
  const JetT& kinv(int j, int k) const;
  // |d rho|^2 in the Kaehler metric of rho
  const JetT& drho2() const;

 private:
  Hypersurface surface_;
  FrameConfig cfg_;
  SurfacePoint<R> point_;
  std::uint64_t id_;
  const JetSpace* space_;
  JetT rho_;
  struct Cache {
    std::mutex mu;
    std::map<std::vector<int>, JetT> partials;
  };
  std::shared_ptr<Cache> cache_;
  std::vector<JetT> drho_, drhob_, q_, qb_, xi_, xib_;
  JetMatrix<R> h_, hhol_, hanti_, hinv_, hess_, psi_, hamb_;
  JetT detHess_, J_, logJ_, r_;
  std::optional<JetMatrix<R>> kinv_;
  std::optional<JetT> drho2_;
};

template <class R>
FrameContext<R> context_build(const Hypersurface& surface, const std::vector<CComplex<R>>& coords,
                              const FrameConfig& cfg = {}) {
  return FrameContext<R>(surface, coords, cfg);
}

// Frame vector fields applied to jets of functions (order drops by one).
template <class R>
Jet<R> z_hol(const FrameContext<R>& ctx, int alpha, const Jet<R>& f);
template <class R>
Jet<R> z_anti(const FrameContext<R>& ctx, int alpha, const Jet<R>& f);
// characteristic field T = i(xi^j d_j - conj(xi^j) d_jbar)
template <class R>
Jet<R> t_char(const FrameContext<R>& ctx, const Jet<R>& f);

// Second-order operators on jets (order drops by two).
template <class R>
Jet<R> d_mixed_jet(const FrameContext<R>& ctx, int alpha, int beta, const Jet<R>& f);
template <class R>
Jet<R> d_holo_jet(const FrameContext<R>& ctx, int alpha, int beta, const Jet<R>& f);
template <class R>
Jet<R> d_anti_jet(const FrameContext<R>& ctx, int alpha, int beta, const Jet<R>& f);

// Jet of an arbitrary field at the context point.
template <class R>
Jet<R> field_jet_at(const FrameContext<R>& ctx, const ScalarField& f, int order);

template <class R>
CComplex<R> d_mixed(const FrameContext<R>& ctx, const ScalarField& f, int alpha, int beta);
template <class R>
CComplex<R> d_holo(const FrameContext<R>& ctx, const ScalarField& f, int alpha, int beta);

template <class R>
std::pair<std::vector<CComplex<R>>, R> xi_and_r(const FrameContext<R>& ctx);
template <class R>
R fefferman_det(const FrameContext<R>& ctx);
template <class R>
std::vector<std::vector<CComplex<R>>> ambient_inverse(const FrameContext<R>& ctx);

// Max-norm residual of xi _| i dd-bar rho = i r dbar rho.
template <class R>
double xi_residual(const FrameContext<R>& ctx);

// The bordered-determinant field J(rho) built symbolically.
ScalarField fefferman_field(const Hypersurface& s);
// rho + C rho^2
Hypersurface quadratic_modification(const Hypersurface& s, const Rational& c);

extern template class FrameContext<Rational>;
extern template class FrameContext<Real>;

}  // namespace crweyl
