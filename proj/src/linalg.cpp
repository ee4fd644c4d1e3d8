#include "crweyl/linalg.hpp"

#include <bit>

namespace crweyl {

template <class R>
Jet<R> jet_det(const JetMatrix<R>& m) {
  const std::size_t k = m.size();
  if (k == 0) throw Error(ErrorCode::WrongDimension, "frame", "empty matrix");
  const JetSpace* sp = m[0][0].space();
  int order = m[0][0].order();
  for (const auto& row : m)
    for (const auto& e : row) order = std::min(order, e.order());
  std::vector<Jet<R>> f(std::size_t{1} << k);
  std::vector<bool> live(f.size(), false);
  f[0] = jet_one<R>(sp, order);
  live[0] = true;
  for (unsigned mask = 0; mask < f.size(); ++mask) {
    if (!live[mask]) continue;
    std::size_t row = static_cast<std::size_t>(std::popcount(mask));
    if (row == k) continue;
    for (std::size_t c = 0; c < k; ++c) {
      if (mask & (1u << c)) continue;
      if (m[row][c].is_zero()) continue;
      Jet<R> t = f[mask] * m[row][c];
      unsigned above = mask >> (c + 1);
      if (std::popcount(above) % 2) t = -t;
      unsigned next = mask | (1u << c);
      if (live[next]) {
        f[next] += t;
      } else {
        f[next] = t;
        live[next] = true;
      }
    }
  }
  std::size_t full = f.size() - 1;
  return live[full] ? f[full] : Jet<R>(sp, order);
}

template <class R>
JetMatrix<R> jet_adjugate(const JetMatrix<R>& m) {
  const std::size_t k = m.size();
  const JetSpace* sp = m[0][0].space();
  int order = m[0][0].order();
  for (const auto& row : m)
    for (const auto& e : row) order = std::min(order, e.order());
  JetMatrix<R> adj(k, std::vector<Jet<R>>(k));
  if (k == 1) {
    adj[0][0] = jet_one<R>(sp, order);
    return adj;
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      JetMatrix<R> minor;
      for (std::size_t r = 0; r < k; ++r) {
        if (r == j) continue;
        std::vector<Jet<R>> row;
        for (std::size_t c = 0; c < k; ++c)
          if (c != i) row.push_back(m[r][c]);
        minor.push_back(std::move(row));
      }
      Jet<R> d = jet_det(minor);
      adj[i][j] = ((i + j) % 2) ? -d : d;
    }
  }
  return adj;
}

template <class R>
JetMatrix<R> jet_inverse(const JetMatrix<R>& m, ErrorCode code, const char* module) {
  const std::size_t k = m.size();
  const JetSpace* sp = m[0][0].space();
  int order = m[0][0].order();
  for (const auto& row : m)
    for (const auto& e : row) order = std::min(order, e.order());
  JetMatrix<R> a = m, inv(k, std::vector<Jet<R>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      a[i][j] = a[i][j].truncated(order);
      inv[i][j] = i == j ? jet_one<R>(sp, order) : Jet<R>(sp, order);
    }
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    double best = -1;
    for (std::size_t r = col; r < k; ++r) {
      double v = abs_d(a[r][col].value());
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (a[piv][col].value().is_zero()) throw Error(code, module, "matrix is singular at the point");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Jet<R> p = a[col][col].inverse();
    for (std::size_t c = 0; c < k; ++c) {
      a[col][c] = a[col][c] * p;
      inv[col][c] = inv[col][c] * p;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      Jet<R> f = a[r][col];
      for (std::size_t c = 0; c < k; ++c) {
        if (!a[col][c].is_zero()) a[r][c] -= f * a[col][c];
        if (!inv[col][c].is_zero()) inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

template <class R>
JetMatrix<R> jet_transpose(const JetMatrix<R>& m) {
  JetMatrix<R> t(m[0].size(), std::vector<Jet<R>>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

template <class R>
std::vector<std::vector<CComplex<R>>> values(const JetMatrix<R>& m) {
  std::vector<std::vector<CComplex<R>>> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const auto& e : m[i]) v[i].push_back(e.value());
  return v;
}

template Jet<Rational> jet_det(const JetMatrix<Rational>&);
template Jet<Real> jet_det(const JetMatrix<Real>&);
template JetMatrix<Rational> jet_adjugate(const JetMatrix<Rational>&);
template JetMatrix<Real> jet_adjugate(const JetMatrix<Real>&);
template JetMatrix<Rational> jet_inverse(const JetMatrix<Rational>&, ErrorCode, const char*);
template JetMatrix<Real> jet_inverse(const JetMatrix<Real>&, ErrorCode, const char*);
template JetMatrix<Rational> jet_transpose(const JetMatrix<Rational>&);
template JetMatrix<Real> jet_transpose(const JetMatrix<Real>&);
template std::vector<std::vector<CComplex<Rational>>> values(const JetMatrix<Rational>&);
template std::vector<std::vector<CComplex<Real>>> values(const JetMatrix<Real>&);

}  // namespace crweyl
