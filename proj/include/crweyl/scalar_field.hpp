#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "crweyl/jet.hpp"
#include "crweyl/polynomial.hpp"

namespace crweyl {

// Hash-consed expression DAG over z, conj(z).  Structurally equal fields share one node.
class ScalarField {
 public:
  enum class Kind { Constant, Coordinate, Polynomial, Add, Mul, Div, Neg, Conj, PowInt, PowRat, Log };
  struct Node;

  ScalarField();
  static ScalarField constant(const GaussRational& c);
  static ScalarField constant(long v) { return constant(GaussRational(Rational(v))); }
  static ScalarField coordinate(int j, bool barred);
  static ScalarField polynomial(const CPolynomial& p);

  Kind kind() const;
  std::uint64_t id() const;
  const Node* node() const { return node_.get(); }
  const std::shared_ptr<const Node>& handle() const { return node_; }
  std::vector<ScalarField> children() const;
  // 1 + largest coordinate index used
  int nvars() const;
  bool is_polynomial_like() const;
  CPolynomial as_polynomial() const;
  std::string to_string() const;

  friend bool operator==(const ScalarField& a, const ScalarField& b) { return a.node_ == b.node_; }
  friend bool operator!=(const ScalarField& a, const ScalarField& b) { return a.node_ != b.node_; }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a);

  explicit ScalarField(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const Node> node_;
};

ScalarField sum(std::vector<ScalarField> terms);
ScalarField product(std::vector<ScalarField> factors);
ScalarField conj(const ScalarField& f);
ScalarField pow(const ScalarField& f, int k);
ScalarField pow(const ScalarField& f, const Rational& r);
ScalarField log(const ScalarField& f);

// d/dz_j (barred=false) or d/d conj(z_j), j zero-based
ScalarField field_diff(const ScalarField& f, int j, bool barred);
ScalarField field_diff(const ScalarField& f, const MultiIndex& m);

enum class Tri { True, False, Unknown };
Tri field_is_real(const ScalarField& f);

template <class R>
class FieldEvaluator {
 public:
  explicit FieldEvaluator(std::vector<CComplex<R>> point) : point_(std::move(point)) {}
  CComplex<R> operator()(const ScalarField& f);

 private:
  CComplex<R> eval(const ScalarField::Node* n);
  std::vector<CComplex<R>> point_;
  std::unordered_map<const ScalarField::Node*, CComplex<R>> memo_;
};

// Taylor jets of fields at a point; nodes are propagated once per evaluator.
template <class R>
class FieldJetEvaluator {
 public:
  FieldJetEvaluator(std::vector<CComplex<R>> point, const JetSpace* space, int order);
  Jet<R> operator()(const ScalarField& f);
  int order() const { return order_; }
  const JetSpace* space() const { return space_; }

 private:
  Jet<R> eval(const ScalarField::Node* n);
  Jet<R> polynomial_jet(const CPolynomial& p) const;
  std::vector<CComplex<R>> point_;
  const JetSpace* space_;
  int order_;
  std::unordered_map<const ScalarField::Node*, Jet<R>> memo_;
};

template <class R>
CComplex<R> field_eval(const ScalarField& f, const std::vector<CComplex<R>>& point) {
  return FieldEvaluator<R>(point)(f);
}

template <class R>
Jet<R> field_jet(const ScalarField& f, const std::vector<CComplex<R>>& point, const JetSpace* space, int order) {
  return FieldJetEvaluator<R>(point, space, order)(f);
}

extern template class FieldEvaluator<Rational>;
extern template class FieldEvaluator<Real>;
extern template class FieldJetEvaluator<Rational>;
extern template class FieldJetEvaluator<Real>;

}  // namespace crweyl
