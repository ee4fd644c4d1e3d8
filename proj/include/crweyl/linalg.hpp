#pragma once

#include <vector>

#include "crweyl/jet.hpp"

namespace crweyl {

template <class R>
using JetMatrix = std::vector<std::vector<Jet<R>>>;

template <class R>
Jet<R> jet_one(const JetSpace* space, int order) {
  return Jet<R>::constant(space, order, CComplex<R>(R(1)));
}

// Determinant by dynamic programming over column subsets; division free.
template <class R>
Jet<R> jet_det(const JetMatrix<R>& m);

// adj(M) with adj(M) * M = det(M) * I.
template <class R>
JetMatrix<R> jet_adjugate(const JetMatrix<R>& m);

// Gauss-Jordan with pivoting on constant terms; throws `code` when singular at the base point.
template <class R>
JetMatrix<R> jet_inverse(const JetMatrix<R>& m, ErrorCode code, const char* module);

template <class R>
JetMatrix<R> jet_transpose(const JetMatrix<R>& m);

template <class R>
std::vector<std::vector<CComplex<R>>> values(const JetMatrix<R>& m);

extern template Jet<Rational> jet_det(const JetMatrix<Rational>&);
extern template Jet<Real> jet_det(const JetMatrix<Real>&);
extern template JetMatrix<Rational> jet_adjugate(const JetMatrix<Rational>&);
extern template JetMatrix<Real> jet_adjugate(const JetMatrix<Real>&);
extern template JetMatrix<Rational> jet_inverse(const JetMatrix<Rational>&, ErrorCode, const char*);
extern template JetMatrix<Real> jet_inverse(const JetMatrix<Real>&, ErrorCode, const char*);
extern template JetMatrix<Rational> jet_transpose(const JetMatrix<Rational>&);
extern template JetMatrix<Real> jet_transpose(const JetMatrix<Real>&);
extern template std::vector<std::vector<CComplex<Rational>>> values(const JetMatrix<Rational>&);
extern template std::vector<std::vector<CComplex<Real>>> values(const JetMatrix<Real>&);

}  // namespace crweyl
