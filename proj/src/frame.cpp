#include "crweyl/frame.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace crweyl {

namespace {

std::atomic<std::uint64_t> nextContextId{1};

template <class R>
double max_abs(const std::vector<std::vector<CComplex<R>>>& m) {
  double v = 0;
  for (const auto& row : m)
    for (const auto& e : row) v = std::max(v, abs_d(e));
  return v;
}

template <class R>
CComplex<R> value_det(std::vector<std::vector<CComplex<R>>> a) {
  const std::size_t k = a.size();
  CComplex<R> det(R(1));
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (abs_d(a[r][c]) > abs_d(a[piv][c])) piv = r;
    if (a[piv][c].is_zero()) return CComplex<R>();
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < k; ++r) {
      if (a[r][c].is_zero()) continue;
      CComplex<R> f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

ScalarField field_det(const std::vector<std::vector<ScalarField>>& m) {
  const std::size_t k = m.size();
  if (k == 1) return m[0][0];
  std::vector<ScalarField> terms;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::vector<ScalarField>> minor;
    for (std::size_t r = 1; r < k; ++r) {
      std::vector<ScalarField> row;
      for (std::size_t j = 0; j < k; ++j)
        if (j != c) row.push_back(m[r][j]);
      minor.push_back(std::move(row));
    }
    ScalarField t = m[0][c] * field_det(minor);
    terms.push_back(c % 2 ? -t : t);
  }
  return sum(std::move(terms));
}

}  // namespace

Hypersurface::Hypersurface(ScalarField rho, int n, int wIndex) : rho_(std::move(rho)), n_(n), w_(wIndex < 0 ? n : wIndex) {
  if (n_ < 1) throw Error(ErrorCode::WrongDimension, "frame", "CR dimension must be at least 1");
  if (w_ < 0 || w_ > n_) throw Error(ErrorCode::WrongDimension, "frame", "wIndex out of range");
  if (rho_.nvars() > n_ + 1)
    throw Error(ErrorCode::WrongDimension, "frame", "defining function uses more than n+1 coordinates");
  if (field_is_real(rho_) == Tri::False) throw Error(ErrorCode::NotReal, "frame", "defining function is not real");
}

template <class R>
FrameContext<R>::FrameContext(const Hypersurface& surface, std::vector<Scalar> coords, const FrameConfig& cfg)
    : surface_(surface), cfg_(cfg), id_(nextContextId++), cache_(std::make_shared<Cache>()) {
  const int n = surface_.n();
  const int N = n + 1;
  const int w = surface_.w();
  if (static_cast<int>(coords.size()) != N)
    throw Error(ErrorCode::WrongDimension, "frame", "point needs n+1 coordinates");
  const int m = cfg_.derivOrder;
  const int K = m + 4;
  if (m < 0 || K > cfg_.jetCap)
    throw Error(ErrorCode::OrderExceeded, "frame", "requested derivative budget exceeds the jet cap");
  space_ = JetSpace::get(2 * N, K).get();
  point_.coords = std::move(coords);
  rho_ = field_jet(surface_.rho(), point_.coords, space_, K);

  double norm2 = 0;
  for (const auto& z : point_.coords) norm2 += abs_d(z) * abs_d(z);
  point_.residual = abs_d(rho_.value());
  if (point_.residual > cfg_.onSurfaceTol * std::max(1.0, norm2)) {
    std::ostringstream os;
    os << "point is not on the hypersurface (|rho| = " << point_.residual << ")";
    throw Error(ErrorCode::OffSurface, "frame", os.str());
  }

  for (int j = 0; j < N; ++j) {
    drho_.push_back(rho_.derivative(j));
    drhob_.push_back(rho_.derivative(N + j));
  }
  double grad = 0;
  for (const auto& d : drho_) grad += abs_d(d.value()) * abs_d(d.value());
  grad = std::sqrt(grad);
  point_.rhoW = drho_[w].value();
  if (abs_d(point_.rhoW) <= cfg_.frameTol * (1 + grad)) {
    if (grad == 0)
      throw Error(ErrorCode::FrameDegenerate, "frame", "d rho vanishes at the point");
    throw Error(ErrorCode::FrameDegenerate, "frame",
                "rho_w vanishes at the point; choose another wIndex (a coordinate with nonzero rho derivative)");
  }

  Jet<R> invW = drho_[w].inverse();
  for (int a = 0; a < n; ++a) {
    q_.push_back(drho_[greek(a)] * invW);
    qb_.push_back(q_.back().conjugate());
  }

  const int k2 = m + 2;
  hess_.assign(N, std::vector<Jet<R>>(N));
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) hess_[j][k] = drho_[j].derivative(N + k).truncated(k2);

  h_.assign(n, std::vector<Jet<R>>(n));
  hhol_ = h_;
  hanti_ = h_;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      h_[a][b] = d_mixed_jet(*this, a, b, rho_);
      hhol_[a][b] = d_holo_jet(*this, a, b, rho_);
      hanti_[a][b] = hhol_[a][b].conjugate();
    }
  }
  auto hv = values(h_);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (abs_d(hv[a][b] - conj(hv[b][a])) > cfg_.matrixTol * std::max(1.0, max_abs(hv)))
        throw Error(ErrorCode::InternalInconsistency, "frame", "Levi matrix is not hermitian");
  double hn = max_abs(hv);
  if (abs_d(value_det(hv)) <= cfg_.leviTol * std::pow(std::max(hn, 1e-300), n))
    throw Error(ErrorCode::LeviDegenerate, "frame", "Levi form is degenerate at the point");
  auto hi = jet_inverse(h_, ErrorCode::LeviDegenerate, "frame");
  hinv_.assign(n, std::vector<Jet<R>>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) hinv_[a][b] = hi[b][a];

  JetMatrix<R> border(N + 1, std::vector<Jet<R>>(N + 1));
  border[0][0] = rho_.truncated(k2);
  for (int k = 0; k < N; ++k) {
    border[0][k + 1] = drhob_[k].truncated(k2);
    border[k + 1][0] = drho_[k].truncated(k2);
    for (int j = 0; j < N; ++j) border[j + 1][k + 1] = hess_[j][k];
  }
  J_ = -jet_det(border);
  double bn = max_abs(values(border));
  if (abs_d(J_.value()) <= cfg_.fefferTol * std::max(1.0, std::pow(bn, N + 1)))
    throw Error(ErrorCode::FeffermanDegenerate, "frame", "Levi-Fefferman determinant vanishes at the point");
  if constexpr (!is_exact_v<R>) {
    if (std::abs(to_double(J_.value().im)) > 1e-10 * std::max(1.0, abs_d(J_.value())))
      throw Error(ErrorCode::InternalInconsistency, "frame", "Levi-Fefferman determinant is not real");
  }
  logJ_ = J_.log_normalized();
  detHess_ = jet_det(hess_);

  Jet<R> invJ = J_.inverse();
  auto adjT = jet_adjugate(jet_transpose(hess_));
  for (int j = 0; j < N; ++j) {
    Jet<R> s(space_, k2);
    for (int k = 0; k < N; ++k) s += adjT[j][k] * drhob_[k];
    xi_.push_back(s * invJ);
    xib_.push_back(xi_.back().conjugate());
  }
  r_ = detHess_ * invJ;

  psi_.assign(N, std::vector<Jet<R>>(N));
  Jet<R> oneMinusR = jet_one<R>(space_, k2) - r_;
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) psi_[j][k] = hess_[j][k] + oneMinusR * drho_[j] * drhob_[k];
  auto pinv = jet_inverse(psi_, ErrorCode::FeffermanDegenerate, "frame");
  hamb_.assign(N, std::vector<Jet<R>>(N));
  for (int l = 0; l < N; ++l)
    for (int k = 0; k < N; ++k) hamb_[l][k] = pinv[k][l] - xi_[l] * xib_[k];

  double tol = 1e-10;
  CComplex<R> dxi;
  for (int j = 0; j < N; ++j) dxi += drho_[j].value() * xi_[j].value();
  if (abs_d(dxi - CComplex<R>(R(1))) > tol)
    throw Error(ErrorCode::InternalInconsistency, "frame", "d rho(xi) != 1 at the point");
  double res = xi_residual(*this);
  if (res > tol * std::max(1.0, bn))
    throw Error(ErrorCode::InternalInconsistency, "frame", "xi fails its defining equation");
  if constexpr (!is_exact_v<R>) {
    if (std::abs(to_double(r_.value().im)) > tol * std::max(1.0, abs_d(r_.value())))
      throw Error(ErrorCode::InternalInconsistency, "frame", "transverse curvature is not real");
  }

  auto hessV = values(hess_);
  double hsn = max_abs(hessV);
  if (abs_d(value_det(hessV)) > cfg_.matrixTol * std::pow(std::max(hsn, 1e-300), N)) {
    auto ki = jet_inverse(hess_, ErrorCode::HessianDegenerate, "frame");
    JetMatrix<R> kinv(N, std::vector<Jet<R>>(N));
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) kinv[j][k] = ki[k][j];
    Jet<R> d2(space_, k2);
    for (int k = 0; k < N; ++k)
      for (int l = 0; l < N; ++l) d2 += drho_[k] * kinv[k][l] * drhob_[l];
    kinv_ = std::move(kinv);
    drho2_ = std::move(d2);
  }
}

template <class R>
Jet<R> FrameContext<R>::rho_partial(std::vector<int> vars) const {
  std::sort(vars.begin(), vars.end());
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->partials.find(vars);
    if (it != cache_->partials.end()) return it->second;
  }
  if (static_cast<int>(vars.size()) > rho_.order())
    throw Error(ErrorCode::OrderExceeded, "frame", "partial order exceeds the context jet order");
  Jet<R> d = rho_;
  for (int v : vars) d = d.derivative(v);
  std::lock_guard<std::mutex> lock(cache_->mu);
  return cache_->partials.emplace(vars, d).first->second;
}

template <class R>
const Jet<R>& FrameContext<R>::kinv(int j, int k) const {
  if (!kinv_) throw Error(ErrorCode::HessianDegenerate, "frame", "complex Hessian of rho is singular");
  return (*kinv_)[j][k];
}

template <class R>
const Jet<R>& FrameContext<R>::drho2() const {
  if (!drho2_) throw Error(ErrorCode::HessianDegenerate, "frame", "complex Hessian of rho is singular");
  return *drho2_;
}

template <class R>
Jet<R> z_hol(const FrameContext<R>& ctx, int alpha, const Jet<R>& f) {
  return f.derivative(ctx.greek(alpha)) - ctx.q(alpha) * f.derivative(ctx.w());
}

template <class R>
Jet<R> z_anti(const FrameContext<R>& ctx, int alpha, const Jet<R>& f) {
  const int N = ctx.N();
  return f.derivative(N + ctx.greek(alpha)) - ctx.qbar(alpha) * f.derivative(N + ctx.w());
}

template <class R>
Jet<R> t_char(const FrameContext<R>& ctx, const Jet<R>& f) {
  const int N = ctx.N();
  Jet<R> s(f.space(), f.order() - 1);
  for (int j = 0; j < N; ++j) {
    s += ctx.xi(j) * f.derivative(j);
    s -= ctx.xibar(j) * f.derivative(N + j);
  }
  return s * imag_unit<R>();
}

template <class R>
Jet<R> d_mixed_jet(const FrameContext<R>& ctx, int alpha, int beta, const Jet<R>& f) {
  const int N = ctx.N();
  const int a = ctx.greek(alpha), b = ctx.greek(beta), w = ctx.w();
  Jet<R> fa = f.derivative(a), fw = f.derivative(w);
  return fa.derivative(N + b) - ctx.q(alpha) * fw.derivative(N + b) - ctx.qbar(beta) * fa.derivative(N + w) +
         ctx.q(alpha) * ctx.qbar(beta) * fw.derivative(N + w);
}

template <class R>
Jet<R> d_holo_jet(const FrameContext<R>& ctx, int alpha, int beta, const Jet<R>& f) {
  const int a = ctx.greek(alpha), b = ctx.greek(beta), w = ctx.w();
  Jet<R> fa = f.derivative(a), fw = f.derivative(w);
  return fa.derivative(b) - ctx.q(alpha) * fw.derivative(b) - ctx.q(beta) * fa.derivative(w) +
         ctx.q(alpha) * ctx.q(beta) * fw.derivative(w);
}

template <class R>
Jet<R> d_anti_jet(const FrameContext<R>& ctx, int alpha, int beta, const Jet<R>& f) {
  const int N = ctx.N();
  const int a = N + ctx.greek(alpha), b = N + ctx.greek(beta), w = N + ctx.w();
  Jet<R> fa = f.derivative(a), fw = f.derivative(w);
  return fa.derivative(b) - ctx.qbar(alpha) * fw.derivative(b) - ctx.qbar(beta) * fa.derivative(w) +
         ctx.qbar(alpha) * ctx.qbar(beta) * fw.derivative(w);
}

template <class R>
Jet<R> field_jet_at(const FrameContext<R>& ctx, const ScalarField& f, int order) {
  if (order > ctx.space()->max_order())
    throw Error(ErrorCode::OrderExceeded, "frame", "field jet order exceeds the context jet space");
  return field_jet(f, ctx.point().coords, ctx.space(), order);
}

template <class R>
CComplex<R> d_mixed(const FrameContext<R>& ctx, const ScalarField& f, int alpha, int beta) {
  return d_mixed_jet(ctx, alpha, beta, field_jet_at(ctx, f, 2)).value();
}

template <class R>
CComplex<R> d_holo(const FrameContext<R>& ctx, const ScalarField& f, int alpha, int beta) {
  return d_holo_jet(ctx, alpha, beta, field_jet_at(ctx, f, 2)).value();
}

template <class R>
std::pair<std::vector<CComplex<R>>, R> xi_and_r(const FrameContext<R>& ctx) {
  std::vector<CComplex<R>> xi;
  for (int j = 0; j < ctx.N(); ++j) xi.push_back(ctx.xi(j).value());
  return {xi, ctx.r().value().re};
}

template <class R>
R fefferman_det(const FrameContext<R>& ctx) {
  return ctx.fefferman().value().re;
}

template <class R>
std::vector<std::vector<CComplex<R>>> ambient_inverse(const FrameContext<R>& ctx) {
  std::vector<std::vector<CComplex<R>>> out(ctx.N());
  for (int j = 0; j < ctx.N(); ++j)
    for (int k = 0; k < ctx.N(); ++k) out[j].push_back(ctx.hamb(j, k).value());
  return out;
}

template <class R>
double xi_residual(const FrameContext<R>& ctx) {
  double res = 0;
  CComplex<R> r = ctx.r().value();
  for (int k = 0; k < ctx.N(); ++k) {
    CComplex<R> s = -(r * ctx.drhobar(k).value());
    for (int j = 0; j < ctx.N(); ++j) s += ctx.hess(j, k).value() * ctx.xi(j).value();
    res = std::max(res, abs_d(s));
  }
  return res;
}

ScalarField fefferman_field(const Hypersurface& s) {
  const int N = s.ambient();
  const ScalarField& rho = s.rho();
  std::vector<std::vector<ScalarField>> b(N + 1, std::vector<ScalarField>(N + 1));
  b[0][0] = rho;
  for (int k = 0; k < N; ++k) {
    b[0][k + 1] = field_diff(rho, k, true);
    b[k + 1][0] = field_diff(rho, k, false);
  }
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) b[j + 1][k + 1] = field_diff(b[j + 1][0], k, true);
  return -field_det(b);
}

Hypersurface quadratic_modification(const Hypersurface& s, const Rational& c) {
  ScalarField k = ScalarField::constant(GaussRational(c));
  return s.with_rho(s.rho() + k * s.rho() * s.rho());
}

template class FrameContext<Rational>;
template class FrameContext<Real>;

#define CRWEYL_FRAME_INST(R)                                                                              \
  template Jet<R> z_hol(const FrameContext<R>&, int, const Jet<R>&);                                     \
  template Jet<R> z_anti(const FrameContext<R>&, int, const Jet<R>&);                                    \
  template Jet<R> t_char(const FrameContext<R>&, const Jet<R>&);                                         \
  template Jet<R> d_mixed_jet(const FrameContext<R>&, int, int, const Jet<R>&);                          \
  template Jet<R> d_holo_jet(const FrameContext<R>&, int, int, const Jet<R>&);                           \
  template Jet<R> d_anti_jet(const FrameContext<R>&, int, int, const Jet<R>&);                           \
  template Jet<R> field_jet_at(const FrameContext<R>&, const ScalarField&, int);                          \
  template CComplex<R> d_mixed(const FrameContext<R>&, const ScalarField&, int, int);                    \
  template CComplex<R> d_holo(const FrameContext<R>&, const ScalarField&, int, int);                     \
  template std::pair<std::vector<CComplex<R>>, R> xi_and_r(const FrameContext<R>&);                      \
  template R fefferman_det(const FrameContext<R>&);                                                      \
  template std::vector<std::vector<CComplex<R>>> ambient_inverse(const FrameContext<R>&);               \
  template double xi_residual(const FrameContext<R>&);

CRWEYL_FRAME_INST(Rational)
CRWEYL_FRAME_INST(Real)

}  // namespace crweyl
