#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "lipsum/dp_norm.hpp"
#include "lipsum/random.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum::gen {

/// Gaussian kernel of shape (dims..., m).
MultilinearOperator random_operator(Rng& rng, const std::vector<std::size_t>& dims, std::size_t m,
                                    NormSpec norms);
MultilinearOperator random_operator(Rng& rng, const std::vector<std::size_t>& dims, std::size_t m);

/// Point with each factor uniform in radius inside its unit ball.
SegrePoint random_point(Rng& rng, const std::vector<std::size_t>& dims,
                        const std::vector<NormKind>& norms);

/// `count` pairs; every third pair has v = 0.
PairConfiguration random_configuration(Rng& rng, const std::vector<std::size_t>& dims,
                                       const std::vector<NormKind>& norms, std::size_t count);

MixedTensor random_mixed(Rng& rng, const std::vector<std::size_t>& dims, std::size_t m,
                         NormSpec norms);

/// Gaussian rows x cols matrix scaled to spectral norm in [0.5, 1].
Eigen::MatrixXd random_contraction(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Haar-distributed orthogonal matrix.
Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index n);

/// Kernel with mode `mode` multiplied by M (new dimension M.rows()).
DenseTensor apply_to_mode(const DenseTensor& t, std::size_t mode, const Eigen::MatrixXd& M);

/// R o T o (S_1 x ... x S_n): the factor modes are contracted with S_k and the
/// codomain mode is mapped by R.
MultilinearOperator compose(const MultilinearOperator& T, const Eigen::MatrixXd& R,
                            const std::vector<Eigen::MatrixXd>& S);

std::vector<NormKind> l2_norms(std::size_t n);

}  // namespace lipsum::gen
