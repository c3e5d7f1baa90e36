#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace lipsum {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Exponent r of the l_r norm carried by one coordinate space.
enum class NormKind { L1, L2, LInf };

NormKind dual(NormKind r);
std::string_view to_string(NormKind r);
NormKind norm_kind_from_string(std::string_view s);

/// Standard l_r norm; the infinity norm is the exact max of absolute values.
double vector_norm(std::span<const double> v, NormKind r);
double vector_norm(const Eigen::VectorXd& v, NormKind r);

/// (sum |v_i|^p)^(1/p) for real p >= 1; p = +inf gives the max norm.
double power_norm(const Eigen::VectorXd& v, double p);

/// Returns f with dual norm 1 and <f, v> = ||v||_r (the norming functional of v).
/// For v = 0 the first basis vector is returned.
Eigen::VectorXd norming_functional(const Eigen::VectorXd& v, NormKind r);

/// Multi-index real array, row-major.
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

  static DenseTensor zeros(std::vector<std::size_t> shape);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }

  std::size_t offset(std::span<const std::size_t> index) const;
  double at(std::initializer_list<std::size_t> index) const;

  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Norm assignment: one exponent per factor space and one for the codomain.
struct NormSpec {
  std::vector<NormKind> factors;
  NormKind codomain = NormKind::L2;

  friend bool operator==(const NormSpec&, const NormSpec&) = default;
};

/// n-linear map R^{d1} x ... x R^{dn} -> R^m stored as a kernel of shape
/// (d1, ..., dn, m). A scalar form is the case m = 1.
class MultilinearOperator {
 public:
  MultilinearOperator(DenseTensor kernel, NormSpec norms);

  /// Wraps a form kernel of shape (d1, ..., dn) by appending m = 1.
  static MultilinearOperator form(const DenseTensor& kernel, std::vector<NormKind> factor_norms);
  static MultilinearOperator zero(std::vector<std::size_t> dims, std::size_t m, NormSpec norms);
  /// Lambda_n(z_1, ..., z_n) = z_1 * ... * z_n on R x ... x R.
  static MultilinearOperator scalar_product(std::size_t n);

  const DenseTensor& kernel() const { return kernel_; }
  const NormSpec& norms() const { return norms_; }
  std::size_t arity() const { return dims_.size(); }
  const std::vector<std::size_t>& factor_dims() const { return dims_; }
  std::size_t codomain_dim() const { return kernel_.shape().back(); }
  std::size_t domain_size() const { return domain_size_; }
  bool is_form() const { return codomain_dim() == 1; }

  /// Kernel viewed as a (d1 * ... * dn) x m row-major matrix.
  Eigen::Map<const RowMatrix> matrix() const {
    return {kernel_.data().data(), static_cast<Eigen::Index>(domain_size_),
            static_cast<Eigen::Index>(codomain_dim())};
  }

  friend bool operator==(const MultilinearOperator&, const MultilinearOperator&) = default;

 private:
  DenseTensor kernel_;
  NormSpec norms_;
  std::vector<std::size_t> dims_;
  std::size_t domain_size_ = 0;
};

/// A point (x_1, ..., x_n) of the product space; its image under the tensor
/// map is an element of the Segre cone.
struct SegrePoint {
  std::vector<Eigen::VectorXd> factors;

  std::size_t arity() const { return factors.size(); }
  std::vector<std::size_t> dims() const;
  /// Product of the factor norms.
  double norm_product(std::span<const NormKind> norms) const;
};

struct WeightedPair {
  SegrePoint u;
  SegrePoint v;
  double weight = 1.0;
};

/// Weighted pairs (u_i, v_i) of points in a common product space.
class PairConfiguration {
 public:
  PairConfiguration() = default;
  explicit PairConfiguration(std::vector<WeightedPair> pairs);

  const std::vector<WeightedPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Appends a pair; dimensions must match the existing pairs.
  void add(WeightedPair pair);

  /// True where u_i and v_i have the same elementary tensor.
  std::vector<bool> degenerate_flags() const;
  /// Copy with degenerate pairs removed; the count dropped is returned through
  /// `dropped` and a warning is emitted when it is nonzero.
  PairConfiguration without_degenerate(std::size_t* dropped = nullptr) const;

 private:
  std::vector<WeightedPair> pairs_;
  std::vector<std::size_t> dims_;
};

/// vec(x_1 (x) ... (x) x_n) in row-major order (iterated Kronecker product).
Eigen::VectorXd elementary_vector(const SegrePoint& x);
DenseTensor elementary_tensor(const SegrePoint& x);

/// T(x_1, ..., x_n) as a length-m vector.
Eigen::VectorXd eval_operator(const MultilinearOperator& T, const SegrePoint& x);

/// Matricization with `row_modes` indexing rows and `col_modes` indexing
/// columns, each group in row-major order of the listed modes. Modes are
/// zero-based.
Eigen::MatrixXd flatten(const DenseTensor& t, std::span<const std::size_t> row_modes,
                        std::span<const std::size_t> col_modes);

/// Contracts all modes of a row-major tensor with the given vectors except mode
/// `keep`; the result has length dims[keep].
Eigen::VectorXd contract_except(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                std::span<const std::size_t> dims,
                                std::span<const Eigen::VectorXd> vectors, std::size_t keep);

/// Contracts mode `mode` of a row-major tensor with `x`, removing it.
Eigen::VectorXd contract_mode(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                              std::span<const std::size_t> dims, std::size_t mode,
                              const Eigen::VectorXd& x);

std::size_t product(std::span<const std::size_t> dims);

}  // namespace lipsum
