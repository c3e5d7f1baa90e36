#include <gtest/gtest.h>

#include <Eigen/SVD>

#include "lipsum/errors.hpp"
#include "lipsum/random.hpp"
#include "lipsum/tensor.hpp"

using namespace lipsum;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

MultilinearOperator identity_form(std::size_t d) {
  std::vector<double> data(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) data[i * d + i] = 1.0;
  return MultilinearOperator::form(DenseTensor({d, d}, data), {NormKind::L2, NormKind::L2});
}

}  // namespace

TEST(EvalOperator, LambdaTwoMultipliesScalars) {
  const auto T = MultilinearOperator::scalar_product(2);
  const Eigen::VectorXd y = eval_operator(T, SegrePoint{{vec({3}), vec({4})}});
  ASSERT_EQ(y.size(), 1);
  EXPECT_DOUBLE_EQ(y[0], 12.0);
}

TEST(EvalOperator, ZeroFactorGivesZero) {
  Rng rng(3);
  const std::vector<double> data = [&] {
    std::vector<double> d(2 * 3 * 2);
    for (double& x : d) x = rng.normal();
    return d;
  }();
  const MultilinearOperator T(DenseTensor({2, 3, 2}, data), NormSpec{{NormKind::L2, NormKind::L1}, NormKind::L2});
  const Eigen::VectorXd y = eval_operator(T, SegrePoint{{rng.normal_vector(2), Eigen::VectorXd::Zero(3)}});
  EXPECT_EQ(y.norm(), 0.0);
}

TEST(EvalOperator, IdentityFormOnOrthogonalBasisVectors) {
  const Eigen::VectorXd y = eval_operator(identity_form(2), SegrePoint{{vec({1, 0}), vec({0, 1})}});
  EXPECT_EQ(y[0], 0.0);
  const Eigen::VectorXd d = eval_operator(identity_form(2), SegrePoint{{vec({2, 3}), vec({5, 7})}});
  EXPECT_DOUBLE_EQ(d[0], 31.0);
}

TEST(EvalOperator, WrongArityOrLengthThrows) {
  const auto T = identity_form(2);
  EXPECT_THROW(eval_operator(T, SegrePoint{{vec({1, 0})}}), ShapeError);
  EXPECT_THROW(eval_operator(T, SegrePoint{{vec({1, 0}), vec({1, 0, 0})}}), ShapeError);
}

TEST(ElementaryTensor, BasisVectors) {
  const DenseTensor t = elementary_tensor(SegrePoint{{vec({1, 0}), vec({1, 0})}});
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(std::vector<double>(t.data().begin(), t.data().end()), (std::vector<double>{1, 0, 0, 0}));
}

TEST(ElementaryTensor, Scalars) {
  const DenseTensor t = elementary_tensor(SegrePoint{{vec({2}), vec({3}), vec({5})}});
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(t.data()[0], 30.0);
}

TEST(ElementaryTensor, SignPattern) {
  const DenseTensor t = elementary_tensor(SegrePoint{{vec({1, 1}), vec({1, -1})}});
  EXPECT_EQ(std::vector<double>(t.data().begin(), t.data().end()), (std::vector<double>{1, -1, 1, -1}));
}

TEST(VectorNorm, ThreeFour) {
  const Eigen::VectorXd v = vec({3, 4});
  EXPECT_DOUBLE_EQ(vector_norm(v, NormKind::L2), 5.0);
  EXPECT_DOUBLE_EQ(vector_norm(v, NormKind::LInf), 4.0);
  EXPECT_DOUBLE_EQ(vector_norm(v, NormKind::L1), 7.0);
}

TEST(VectorNorm, NormingFunctionalAttainsNorm) {
  Rng rng(5);
  for (NormKind r : {NormKind::L1, NormKind::L2, NormKind::LInf}) {
    const Eigen::VectorXd v = rng.normal_vector(5);
    const Eigen::VectorXd f = norming_functional(v, r);
    EXPECT_NEAR(vector_norm(f, dual(r)), 1.0, 1e-12);
    EXPECT_NEAR(f.dot(v), vector_norm(v, r), 1e-12);
  }
}

TEST(Flatten, MatrixIsItself) {
  const DenseTensor t({2, 2}, {1, 2, 3, 4});
  const std::vector<std::size_t> r{0}, c{1};
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 2, 3, 4;
  EXPECT_EQ(flatten(t, r, c), expected);
}

TEST(Flatten, AllOnesCube) {
  const DenseTensor t({2, 2, 2}, std::vector<double>(8, 1.0));
  const std::vector<std::size_t> r{0}, c{1, 2};
  EXPECT_EQ(flatten(t, r, c), Eigen::MatrixXd::Ones(2, 4));
}

TEST(Flatten, ElementaryTensorHasRankOne) {
  Rng rng(9);
  const DenseTensor t = elementary_tensor(SegrePoint{{rng.normal_vector(2), rng.normal_vector(3), rng.normal_vector(2)}});
  const std::vector<std::vector<std::size_t>> rows{{0}, {1}, {2}, {0, 1}, {0, 2}};
  for (const auto& r : rows) {
    std::vector<std::size_t> c;
    for (std::size_t k = 0; k < 3; ++k) {
      if (std::find(r.begin(), r.end(), k) == r.end()) c.push_back(k);
    }
    const auto s = Eigen::JacobiSVD<Eigen::MatrixXd>(flatten(t, r, c)).singularValues();
    EXPECT_LT(s[1], 1e-12 * s[0]);
  }
}

TEST(DenseTensor, ShapeDataMismatchThrows) {
  EXPECT_THROW(DenseTensor({2, 2}, {1, 2, 3}), ShapeError);
}

TEST(DenseTensor, RowMajorOffsets) {
  const DenseTensor t({2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(t.at({1, 2}), 5.0);
  EXPECT_EQ(t.at({0, 1}), 1.0);
}

TEST(PairConfiguration, MixedDimensionsRejected) {
  PairConfiguration cfg;
  cfg.add(WeightedPair{SegrePoint{{vec({1, 0})}}, SegrePoint{{vec({0, 1})}}, 1.0});
  EXPECT_THROW(cfg.add(WeightedPair{SegrePoint{{vec({1})}}, SegrePoint{{vec({0})}}, 1.0}), ShapeError);
}

TEST(PairConfiguration, DegeneratePairsDropped) {
  PairConfiguration cfg;
  cfg.add(WeightedPair{SegrePoint{{vec({1, 0}), vec({0, 1})}}, SegrePoint{{vec({1, 0}), vec({0, 1})}}, 1.0});
  cfg.add(WeightedPair{SegrePoint{{vec({1, 0}), vec({0, 1})}}, SegrePoint{{vec({0, 0}), vec({0, 1})}}, 1.0});
  std::size_t dropped = 0;
  const auto kept = cfg.without_degenerate(&dropped);
  EXPECT_EQ(dropped, 1u);
  EXPECT_EQ(kept.size(), 1u);
}

TEST(ContractMode, MatchesEvaluation) {
  Rng rng(21);
  std::vector<double> data(12);
  for (double& x : data) x = rng.normal();
  const MultilinearOperator T(DenseTensor({2, 3, 2}, data), NormSpec{{NormKind::L2, NormKind::L2}, NormKind::L2});
  const SegrePoint x{{rng.normal_vector(2), rng.normal_vector(3)}};
  const Eigen::VectorXd direct = T.matrix().transpose() * elementary_vector(x);
  EXPECT_LT((eval_operator(T, x) - direct).norm(), 1e-12 * direct.norm());
}
