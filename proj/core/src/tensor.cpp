#include "lipsum/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include "lipsum/errors.hpp"

namespace lipsum {

NormKind dual(NormKind r) {
  switch (r) {
    case NormKind::L1:
      return NormKind::LInf;
    case NormKind::L2:
      return NormKind::L2;
    case NormKind::LInf:
      return NormKind::L1;
  }
  return NormKind::L2;
}

std::string_view to_string(NormKind r) {
  switch (r) {
    case NormKind::L1:
      return "1";
    case NormKind::L2:
      return "2";
    case NormKind::LInf:
      return "inf";
  }
  return "?";
}

NormKind norm_kind_from_string(std::string_view s) {
  if (s == "1") return NormKind::L1;
  if (s == "2") return NormKind::L2;
  if (s == "inf" || s == "infinity" || s == "Infinity") return NormKind::LInf;
  throw ArgumentError("norm exponent must be one of 1, 2, inf (got '" + std::string(s) + "')");
}

double vector_norm(std::span<const double> v, NormKind r) {
  switch (r) {
    case NormKind::L1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormKind::L2: {
      // Scaled accumulation keeps the result finite for large entries.
      double scale = 0.0;
      for (double x : v) scale = std::max(scale, std::abs(x));
      if (scale == 0.0) return 0.0;
      double s = 0.0;
      for (double x : v) s += (x / scale) * (x / scale);
      return scale * std::sqrt(s);
    }
    case NormKind::LInf: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
  }
  return 0.0;
}

double vector_norm(const Eigen::VectorXd& v, NormKind r) {
  return vector_norm(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), r);
}

double power_norm(const Eigen::VectorXd& v, double p) {
  if (std::isinf(p)) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  const double scale = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

Eigen::VectorXd norming_functional(const Eigen::VectorXd& v, NormKind r) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(v.size());
  if (v.size() == 0) return f;
  const double nv = vector_norm(v, r);
  if (nv == 0.0) {
    f(0) = 1.0;
    return f;
  }
  switch (r) {
    case NormKind::L2:
      f = v / nv;
      break;
    case NormKind::L1:
      for (Eigen::Index i = 0; i < v.size(); ++i) f(i) = v(i) >= 0.0 ? 1.0 : -1.0;
      break;
    case NormKind::LInf: {
      Eigen::Index best = 0;
      v.cwiseAbs().maxCoeff(&best);
      f(best) = v(best) >= 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return f;
}

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw ShapeError("tensor shape must have at least one mode");
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive");
  }
  if (product(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape product " + std::to_string(product(shape_)));
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw ArgumentError("tensor entries must be finite");
  }
}

DenseTensor DenseTensor::zeros(std::vector<std::size_t> shape) {
  const std::size_t n = product(shape);
  return DenseTensor(std::move(shape), std::vector<double>(n, 0.0));
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw ShapeError("index rank does not match tensor rank");
  std::size_t off = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (index[k] >= shape_[k]) throw ShapeError("index out of range");
    off = off * shape_[k] + index[k];
  }
  return off;
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

MultilinearOperator::MultilinearOperator(DenseTensor kernel, NormSpec norms)
    : kernel_(std::move(kernel)), norms_(std::move(norms)) {
  if (kernel_.rank() < 2) {
    throw ShapeError("operator kernel needs shape (d1, ..., dn, m) with n >= 1");
  }
  dims_.assign(kernel_.shape().begin(), kernel_.shape().end() - 1);
  if (norms_.factors.size() != dims_.size()) {
    throw ShapeError("expected " + std::to_string(dims_.size()) + " factor norms, got " +
                     std::to_string(norms_.factors.size()));
  }
  domain_size_ = product(dims_);
}

MultilinearOperator MultilinearOperator::form(const DenseTensor& kernel,
                                              std::vector<NormKind> factor_norms) {
  auto shape = kernel.shape();
  shape.push_back(1);
  return MultilinearOperator(
      DenseTensor(std::move(shape), {kernel.data().begin(), kernel.data().end()}),
      NormSpec{std::move(factor_norms), NormKind::L2});
}

MultilinearOperator MultilinearOperator::zero(std::vector<std::size_t> dims, std::size_t m,
                                              NormSpec norms) {
  dims.push_back(m);
  return MultilinearOperator(DenseTensor::zeros(std::move(dims)), std::move(norms));
}

MultilinearOperator MultilinearOperator::scalar_product(std::size_t n) {
  if (n == 0) throw ArgumentError("Lambda_n needs n >= 1");
  std::vector<std::size_t> shape(n + 1, 1);
  return MultilinearOperator(DenseTensor(std::move(shape), {1.0}),
                             NormSpec{std::vector<NormKind>(n, NormKind::L2), NormKind::L2});
}

std::vector<std::size_t> SegrePoint::dims() const {
  std::vector<std::size_t> d;
  d.reserve(factors.size());
  for (const auto& f : factors) d.push_back(static_cast<std::size_t>(f.size()));
  return d;
}

double SegrePoint::norm_product(std::span<const NormKind> norms) const {
  if (norms.size() != factors.size()) throw ShapeError("norm count does not match point arity");
  double p = 1.0;
  for (std::size_t k = 0; k < factors.size(); ++k) p *= vector_norm(factors[k], norms[k]);
  return p;
}

PairConfiguration::PairConfiguration(std::vector<WeightedPair> pairs) {
  if (pairs.empty()) throw ArgumentError("pair configuration must be nonempty");
  for (auto& p : pairs) add(std::move(p));
}

void PairConfiguration::add(WeightedPair pair) {
  if (!(pair.weight > 0.0) || !std::isfinite(pair.weight)) {
    throw ArgumentError("pair weights must be strictly positive");
  }
  const auto du = pair.u.dims();
  if (du != pair.v.dims()) throw ShapeError("pair points u and v have different dimensions");
  if (du.empty()) throw ShapeError("pair points must have at least one factor");
  if (pairs_.empty()) {
    dims_ = du;
  } else if (du != dims_) {
    throw ShapeError("pair dimensions differ from the configuration's");
  }
  pairs_.push_back(std::move(pair));
}

std::vector<bool> PairConfiguration::degenerate_flags() const {
  std::vector<bool> flags;
  flags.reserve(pairs_.size());
  for (const auto& p : pairs_) {
    const Eigen::VectorXd a = elementary_vector(p.u);
    const Eigen::VectorXd b = elementary_vector(p.v);
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    flags.push_back((a - b).cwiseAbs().maxCoeff() <= 1e-14 * scale);
  }
  return flags;
}

PairConfiguration PairConfiguration::without_degenerate(std::size_t* dropped) const {
  const auto flags = degenerate_flags();
  PairConfiguration out;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (flags[i]) {
      ++count;
    } else {
      out.add(pairs_[i]);
    }
  }
  if (count > 0) {
    std::cerr << "lipsum: warning: dropped " << count
              << " degenerate pair(s) with equal elementary tensors\n";
  }
  if (dropped != nullptr) *dropped = count;
  return out;
}

Eigen::VectorXd elementary_vector(const SegrePoint& x) {
  if (x.factors.empty()) throw ShapeError("Segre point has no factors");
  Eigen::VectorXd acc = x.factors.front();
  for (std::size_t k = 1; k < x.factors.size(); ++k) {
    const Eigen::VectorXd& f = x.factors[k];
    Eigen::VectorXd next(acc.size() * f.size());
    for (Eigen::Index i = 0; i < acc.size(); ++i) {
      next.segment(i * f.size(), f.size()) = acc(i) * f;
    }
    acc = std::move(next);
  }
  return acc;
}

DenseTensor elementary_tensor(const SegrePoint& x) {
  const Eigen::VectorXd v = elementary_vector(x);
  return DenseTensor(x.dims(), std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd eval_operator(const MultilinearOperator& T, const SegrePoint& x) {
  if (x.dims() != T.factor_dims()) {
    throw ShapeError("point dimensions do not match the operator's factor dimensions");
  }
  return T.matrix().transpose() * elementary_vector(x);
}

Eigen::MatrixXd flatten(const DenseTensor& t, std::span<const std::size_t> row_modes,
                        std::span<const std::size_t> col_modes) {
  const std::size_t n = t.rank();
  std::vector<int> seen(n, 0);
  for (std::size_t m : row_modes) {
    if (m >= n) throw ShapeError("flatten: mode out of range");
    ++seen[m];
  }
  for (std::size_t m : col_modes) {
    if (m >= n) throw ShapeError("flatten: mode out of range");
    ++seen[m];
  }
  for (int s : seen) {
    if (s != 1) throw ShapeError("flatten: split must cover every mode exactly once");
  }
  const auto& shape = t.shape();
  std::size_t rows = 1, cols = 1;
  for (std::size_t m : row_modes) rows *= shape[m];
  for (std::size_t m : col_modes) cols *= shape[m];

  Eigen::MatrixXd out(rows, cols);
  std::vector<std::size_t> idx(n, 0);
  const auto data = t.data();
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    std::size_t r = 0, c = 0;
    for (std::size_t m : row_modes) r = r * shape[m] + idx[m];
    for (std::size_t m : col_modes) c = c * shape[m] + idx[m];
    out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[flat];
    for (std::size_t k = n; k-- > 0;) {
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

Eigen::VectorXd contract_mode(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                              std::span<const std::size_t> dims, std::size_t mode,
                              const Eigen::VectorXd& x) {
  if (mode >= dims.size() || static_cast<std::size_t>(x.size()) != dims[mode]) {
    throw ShapeError("contract_mode: vector does not match mode dimension");
  }
  std::size_t pre = 1, post = 1;
  for (std::size_t k = 0; k < mode; ++k) pre *= dims[k];
  for (std::size_t k = mode + 1; k < dims.size(); ++k) post *= dims[k];
  const std::size_t d = dims[mode];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pre * post));
  for (std::size_t a = 0; a < pre; ++a) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x(static_cast<Eigen::Index>(i));
      if (xi == 0.0) continue;
      const auto src = static_cast<Eigen::Index>((a * d + i) * post);
      out.segment(static_cast<Eigen::Index>(a * post), static_cast<Eigen::Index>(post)) +=
          xi * coeffs.segment(src, static_cast<Eigen::Index>(post));
    }
  }
  return out;
}

Eigen::VectorXd contract_except(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                std::span<const std::size_t> dims,
                                std::span<const Eigen::VectorXd> vectors, std::size_t keep) {
  const std::size_t n = dims.size();
  if (vectors.size() != n || keep >= n) throw ShapeError("contract_except: arity mismatch");
  for (std::size_t l = 0; l < n; ++l) {
    if (l != keep && static_cast<std::size_t>(vectors[l].size()) != dims[l]) {
      throw ShapeError("contract_except: vector length does not match mode dimension");
    }
  }
  Eigen::VectorXd v = coeffs;
  std::size_t size = product(dims);
  // Trailing modes first: the tensor is a (size / d) x d row-major matrix.
  for (std::size_t l = n; l-- > keep + 1;) {
    const auto d = static_cast<Eigen::Index>(dims[l]);
    Eigen::Map<const RowMatrix> m(v.data(), static_cast<Eigen::Index>(size) / d, d);
    Eigen::VectorXd next = m * vectors[l];
    v = std::move(next);
    size /= dims[l];
  }
  // Leading modes: the tensor is a d x (size / d) row-major matrix.
  for (std::size_t l = 0; l < keep; ++l) {
    const auto d = static_cast<Eigen::Index>(dims[l]);
    Eigen::Map<const RowMatrix> m(v.data(), d, static_cast<Eigen::Index>(size) / d);
    Eigen::VectorXd next = m.transpose() * vectors[l];
    v = std::move(next);
    size /= dims[l];
  }
  return v;
}

}  // namespace lipsum
