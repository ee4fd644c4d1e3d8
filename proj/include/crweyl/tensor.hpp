#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crweyl/frame.hpp"

namespace crweyl {

enum class Variance { Upper, Lower };

// Raising flips variance and bar (h^{a bbar} turns T_bbar into T^a); the characteristic slot has one value.
struct IndexKind {
  Variance variance = Variance::Lower;
  bool barred = false;
  bool characteristic = false;

  static IndexKind lower(bool bar = false) { return {Variance::Lower, bar, false}; }
  static IndexKind upper(bool bar = false) { return {Variance::Upper, bar, false}; }
  static IndexKind chr() { return {Variance::Lower, false, true}; }

  IndexKind conjugated() const { return characteristic ? *this : IndexKind{variance, !barred, false}; }
  bool dual_to(const IndexKind& o) const {
    return !characteristic && !o.characteristic && barred == o.barred && variance != o.variance;
  }
  bool operator==(const IndexKind&) const = default;
};

template <class R>
struct LeviMetric {
  int n = 0;
  std::uint64_t frame = 0;
  JetMatrix<R> h;     // h_{a bbar}
  JetMatrix<R> hinv;  // h^{a bbar}
};

template <class R>
LeviMetric<R> metric(const FrameContext<R>& ctx);

template <class R>
class Tensor {
 public:
  using JetT = Jet<R>;
  using Index = std::vector<int>;

  Tensor() = default;
  Tensor(int n, std::vector<IndexKind> kinds, std::uint64_t frame, const JetSpace* space, int order, int weight = 0);

  static Tensor build(int n, std::vector<IndexKind> kinds, std::uint64_t frame, const std::function<JetT(const Index&)>& f,
                      int weight = 0);
  static Tensor scalar(std::uint64_t frame, const JetT& v, int weight = 0);

  int n() const { return n_; }
  int rank() const { return static_cast<int>(kinds_.size()); }
  const std::vector<IndexKind>& kinds() const { return kinds_; }
  const IndexKind& kind(int slot) const { return kinds_[slot]; }
  int dim(int slot) const { return kinds_[slot].characteristic ? 1 : n_; }
  std::uint64_t frame() const { return frame_; }
  int weight() const { return weight_; }
  void set_weight(int w) { weight_ = w; }
  const JetSpace* space() const { return space_; }
  // minimal jet order over the components
  int order() const;
  std::size_t size() const { return data_.size(); }

  JetT& at(const Index& idx) { return data_[offset(idx)]; }
  const JetT& at(const Index& idx) const { return data_[offset(idx)]; }
  CComplex<R> value(const Index& idx) const { return at(idx).value(); }
  const std::vector<JetT>& data() const { return data_; }
  std::vector<JetT>& data() { return data_; }
  // all multi-indices in row-major order
  std::vector<Index> indices() const;
  Index unflatten(std::size_t flat) const;

  Tensor truncated(int order) const;
  Tensor conjugate() const;
  // output slot i is input slot perm[i]
  Tensor permuted(const std::vector<int>& perm) const;

  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(const CComplex<R>& s);
  Tensor& operator*=(const JetT& s);
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, const CComplex<R>& s) { return a *= s; }
  friend Tensor operator*(Tensor a, const JetT& s) { return a *= s; }

  // max |component value|
  double max_abs() const;

 private:
  std::size_t offset(const Index& idx) const;
  void require_compatible(const Tensor& o, const char* what) const;

  int n_ = 0;
  std::vector<IndexKind> kinds_;
  std::uint64_t frame_ = 0;
  int weight_ = 0;
  const JetSpace* space_ = nullptr;
  std::vector<JetT> data_;
};

template <class R>
Tensor<R> raise(const Tensor<R>& t, int slot, const LeviMetric<R>& g);
template <class R>
Tensor<R> lower(const Tensor<R>& t, int slot, const LeviMetric<R>& g);
// raise (resp. lower) every Greek slot that is lower (resp. upper)
template <class R>
Tensor<R> raise_all(const Tensor<R>& t, const LeviMetric<R>& g);
template <class R>
Tensor<R> lower_all(const Tensor<R>& t, const LeviMetric<R>& g);

template <class R>
Tensor<R> contract(const Tensor<R>& t, int slotA, int slotB);
template <class R>
Tensor<R> tensor_product(const Tensor<R>& a, const Tensor<R>& b);
// sum over all slots of a[i...] b[i...]; slot kinds must be pairwise dual
template <class R>
Jet<R> full_contract(const Tensor<R>& a, const Tensor<R>& b);
template <class R>
Tensor<R> conj(const Tensor<R>& t) {
  return t.conjugate();
}

// |T|^2 = T_{...} conj(T)^{...}; weight is twice the weight of T minus the rank
template <class R>
Jet<R> norm2(const Tensor<R>& t, const LeviMetric<R>& g);

// h_{a bbar} and its inverse as tensors
template <class R>
Tensor<R> metric_tensor(const LeviMetric<R>& g);
template <class R>
Tensor<R> inverse_metric_tensor(const LeviMetric<R>& g);

// Ric_{a bbar} = h^{g sbar} R_{a bbar g sbar} for a (L, Lb, L, Lb) tensor
template <class R>
Tensor<R> ricci_trace(const Tensor<R>& curv, const LeviMetric<R>& g);
template <class R>
Jet<R> scalar_trace(const Tensor<R>& ric, const LeviMetric<R>& g);

// Max deviation of R_{a bbar g sbar} from R_{g bbar a sbar} and R_{g sbar a bbar}.
template <class R>
double curvature_symmetry_defect(const Tensor<R>& curv);

struct TracefreeFlags {
  bool crDimensionOne = false;
};

// Webster projection onto the tracefree part of a curvature-type tensor.
template <class R>
Tensor<R> tracefree_part(const Tensor<R>& curv, const LeviMetric<R>& g, TracefreeFlags* flags = nullptr);

// S with slots 2 and 4 raised: S_a^b_m^n
template <class R>
Tensor<R> cmw_mixed(const Tensor<R>& s, const LeviMetric<R>& g);
// S[k], the k-fold chain of mixed tensors
template <class R>
Tensor<R> cmw_power(const Tensor<R>& s, int k, const LeviMetric<R>& g);
// closed chain with k factors (k = n+1 gives S^{n+1})
template <class R>
CComplex<R> cmw_power_scalar(const Tensor<R>& s, int k, const LeviMetric<R>& g);

// 1-based label such as "S_{1 1bar 2 2bar}" or "V^{1}_{2bar}"
std::string tensor_label(const std::string& name, const std::vector<IndexKind>& kinds, const std::vector<int>& idx);

extern template class Tensor<Rational>;
extern template class Tensor<Real>;

}  // namespace crweyl
