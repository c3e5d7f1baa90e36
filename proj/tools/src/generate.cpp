#include "generate.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace lipsum::gen {

std::vector<NormKind> l2_norms(std::size_t n) { return std::vector<NormKind>(n, NormKind::L2); }

MultilinearOperator random_operator(Rng& rng, const std::vector<std::size_t>& dims, std::size_t m,
                                    NormSpec norms) {
  std::vector<std::size_t> shape = dims;
  shape.push_back(m);
  const Eigen::VectorXd v = rng.normal_vector(static_cast<Eigen::Index>(product(shape)));
  return MultilinearOperator(DenseTensor(std::move(shape), std::vector<double>(v.data(), v.data() + v.size())),
                             std::move(norms));
}

MultilinearOperator random_operator(Rng& rng, const std::vector<std::size_t>& dims, std::size_t m) {
  return random_operator(rng, dims, m, NormSpec{l2_norms(dims.size()), NormKind::L2});
}

SegrePoint random_point(Rng& rng, const std::vector<std::size_t>& dims,
                        const std::vector<NormKind>& norms) {
  SegrePoint x;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const double radius = 0.25 + 0.75 * rng.uniform();
    x.factors.push_back(radius * rng.unit_vector(static_cast<Eigen::Index>(dims[k]), norms[k]));
  }
  return x;
}

PairConfiguration random_configuration(Rng& rng, const std::vector<std::size_t>& dims,
                                       const std::vector<NormKind>& norms, std::size_t count) {
  PairConfiguration cfg;
  for (std::size_t i = 0; i < count; ++i) {
    SegrePoint u = random_point(rng, dims, norms);
    SegrePoint v = random_point(rng, dims, norms);
    if (i % 3 == 2) {
      for (auto& f : v.factors) f.setZero();
    }
    cfg.add(WeightedPair{std::move(u), std::move(v), 1.0});
  }
  return cfg;
}

MixedTensor random_mixed(Rng& rng, const std::vector<std::size_t>& dims, std::size_t m,
                         NormSpec norms) {
  std::vector<std::size_t> shape = dims;
  shape.push_back(m);
  const Eigen::VectorXd v = rng.normal_vector(static_cast<Eigen::Index>(product(shape)));
  return MixedTensor(DenseTensor(std::move(shape), std::vector<double>(v.data(), v.data() + v.size())),
                     std::move(norms));
}

Eigen::MatrixXd random_contraction(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) M.col(j) = rng.normal_vector(rows);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
  return M * ((0.5 + 0.5 * rng.uniform()) / s);
}

Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index j = 0; j < n; ++j) G.col(j) = rng.normal_vector(n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd Rm = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (Rm(j, j) < 0) Q.col(j) *= -1.0;
  }
  return Q;
}

DenseTensor apply_to_mode(const DenseTensor& t, std::size_t mode, const Eigen::MatrixXd& M) {
  const auto& shape = t.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < mode; ++k) outer *= shape[k];
  for (std::size_t k = mode + 1; k < shape.size(); ++k) inner *= shape[k];
  const auto d = static_cast<Eigen::Index>(shape[mode]);
  const Eigen::Index e = M.rows();
  std::vector<std::size_t> out_shape = shape;
  out_shape[mode] = static_cast<std::size_t>(e);
  std::vector<double> out(outer * static_cast<std::size_t>(e) * inner, 0.0);
  const auto data = t.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (Eigen::Index r = 0; r < e; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        const double w = M(r, c);
        if (w == 0.0) continue;
        const double* src = data.data() + (o * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)) * inner;
        double* dst = out.data() + (o * static_cast<std::size_t>(e) + static_cast<std::size_t>(r)) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
    }
  }
  return DenseTensor(std::move(out_shape), std::move(out));
}

MultilinearOperator compose(const MultilinearOperator& T, const Eigen::MatrixXd& R,
                            const std::vector<Eigen::MatrixXd>& S) {
  DenseTensor k = T.kernel();
  // T(S_1 x_1, ...) has kernel contracted with S_k^T along mode k.
  for (std::size_t mode = 0; mode < S.size(); ++mode) k = apply_to_mode(k, mode, S[mode].transpose());
  k = apply_to_mode(k, S.size(), R);
  return MultilinearOperator(std::move(k), T.norms());
}

}  // namespace lipsum::gen
