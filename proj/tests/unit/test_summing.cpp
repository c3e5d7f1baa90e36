#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/SVD>

#include "lipsum/errors.hpp"
#include "lipsum/form_norm.hpp"
#include "lipsum/hilbert_schmidt.hpp"
#include "lipsum/random.hpp"
#include "lipsum/summing.hpp"

using namespace lipsum;

namespace {

const std::vector<NormKind> kL2x2{NormKind::L2, NormKind::L2};

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

MultilinearOperator form2(const Eigen::Matrix2d& M) {
  return MultilinearOperator::form(DenseTensor({2, 2}, {M(0, 0), M(0, 1), M(1, 0), M(1, 1)}), kL2x2);
}

Eigen::Matrix2d random_matrix(Rng& rng) {
  Eigen::Matrix2d M;
  M << rng.normal(), rng.normal(), rng.normal(), rng.normal();
  return M;
}

double spectral(const Eigen::Matrix2d& M) { return Eigen::JacobiSVD<Eigen::Matrix2d>(M).singularValues()[0]; }

PairConfiguration lambda2_pairs() {
  PairConfiguration cfg;
  cfg.add(WeightedPair{SegrePoint{{vec({1}), vec({1})}}, SegrePoint{{vec({0}), vec({0})}}, 1.0});
  return cfg;
}

MultilinearOperator random_operator(Rng& rng, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> data(n);
  for (double& x : data) x = rng.normal();
  const std::size_t arity = shape.size() - 1;
  return MultilinearOperator(DenseTensor(std::move(shape), std::move(data)),
                             NormSpec{std::vector<NormKind>(arity, NormKind::L2), NormKind::L2});
}

}  // namespace

TEST(LowerBoundConfig, LambdaTwoSinglePair) {
  const auto r = lower_bound_config(MultilinearOperator::scalar_product(2), lambda2_pairs(), 2.0);
  EXPECT_NEAR(r.report.certified_lower, 1.0, 1e-12);
  EXPECT_NEAR(r.numerator, 1.0, 1e-15);
  EXPECT_NEAR(r.denominator.report.certified_upper, 1.0, 1e-12);
}

TEST(LowerBoundConfig, ZeroOperator) {
  Rng rng(3);
  PairConfiguration cfg;
  for (int i = 0; i < 3; ++i) {
    cfg.add(WeightedPair{SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}},
                         SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}}, 1.0});
  }
  const auto zero = MultilinearOperator::zero({2, 2}, 2, NormSpec{kL2x2, NormKind::L2});
  EXPECT_EQ(lower_bound_config(zero, cfg, 1.0).report.certified_lower, 0.0);
  EXPECT_EQ(lower_bound_config(zero, cfg, 2.0).report.certified_lower, 0.0);
}

TEST(LowerBoundConfig, IdentityFormBasisHsBall) {
  // Numerator: (sum_j |T(e_j1, e_j2)|^2)^(1/2) = sqrt(2); the denominator is
  // the largest singular value of the identity difference matrix, 1.
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const auto r = lower_bound_config(form2(I), basis_configuration({2, 2}), 2.0, Ball::HilbertSchmidt);
  EXPECT_NEAR(r.numerator, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.denominator.report.certified_upper, spectral(Eigen::Matrix2d::Identity()), 1e-12);
  EXPECT_NEAR(r.report.certified_lower, std::sqrt(2.0), 1e-12);
}

TEST(PietschLp, SingleNormalizedFormGivesNorm) {
  Rng rng(5);
  const Eigen::Matrix2d M = random_matrix(rng);
  const auto T = form2(M);
  const Eigen::VectorXd phi = T.kernel().as_vector();
  const double norm = spectral(M);
  PairConfiguration pairs;
  for (int i = 0; i < 5; ++i) {
    pairs.add(WeightedPair{SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}},
                           SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}}, 1.0});
  }
  for (double p : {1.0, 2.0}) {
    const auto cert = pietsch_upper_lp(T, pairs, {phi / norm}, p);
    ASSERT_TRUE(cert.feasible);
    EXPECT_NEAR(cert.constant, norm, 1e-9 * norm);
    EXPECT_NEAR(cert.weights.sum(), 1.0, 1e-12);
  }
}

TEST(PietschLp, ZeroOperator) {
  const auto zero = MultilinearOperator::zero({2, 2}, 1, NormSpec{kL2x2, NormKind::L2});
  PairConfiguration pairs;
  pairs.add(WeightedPair{SegrePoint{{vec({1, 0}), vec({0, 1})}}, SegrePoint{{vec({0, 0}), vec({0, 0})}}, 1.0});
  const auto cert = pietsch_upper_lp(zero, pairs, {vec({1, 0, 0, 0})}, 2.0);
  EXPECT_EQ(cert.constant, 0.0);
}

TEST(PietschLp, LambdaTwoDictionaryOfItself) {
  const auto T = MultilinearOperator::scalar_product(2);
  const auto cert = pietsch_upper_lp(T, lambda2_pairs(), {vec({1})}, 1.0);
  EXPECT_NEAR(cert.constant, 1.0, 1e-12);
  EXPECT_LE(certificate_violation(T, cert), 1e-12);
}

TEST(PietschLp, DualMatchesPrimal) {
  Rng rng(7);
  const auto T = random_operator(rng, {2, 2, 2});
  const auto r = estimate_pi_lip(T, 2.0);
  EXPECT_NEAR(r.certificate.constant, r.certificate.dual_constant, 1e-7 * r.certificate.constant);
  EXPECT_LE(r.report.certified_lower, r.certificate.constant + 1e-7);
  EXPECT_LE(certificate_violation(T, r.certificate), 1e-7);
}

TEST(EstimatePiLip, LambdaBracketsOne) {
  for (std::size_t n : {2u, 3u}) {
    for (double p : {1.0, 2.0}) {
      const auto r = estimate_pi_lip(MultilinearOperator::scalar_product(n), p);
      EXPECT_LE(r.report.certified_lower, 1.0 + 1e-12);
      EXPECT_GE(r.certificate.constant, 1.0 - 1e-12);
      EXPECT_LE(r.certificate.constant - r.report.certified_lower, 0.05);
    }
  }
}

TEST(EstimatePiLip, ScalarFormEqualsNorm) {
  Rng rng(11);
  for (int t = 0; t < 6; ++t) {
    const Eigen::Matrix2d M = random_matrix(rng);
    const double norm = spectral(M);
    SummingBudget b;
    b.seed = static_cast<std::uint64_t>(t);
    const auto r = estimate_pi_lip(form2(M), t % 2 == 0 ? 1.0 : 2.0, b);
    EXPECT_LE(r.report.certified_lower, norm * (1 + 1e-9));
    EXPECT_GE(r.certificate.constant, norm * (1 - 1e-9));
    EXPECT_LE(r.certificate.constant - r.report.certified_lower, 0.02 * norm);
  }
}

TEST(EstimatePiLip, ZeroOperator) {
  const auto r = estimate_pi_lip(MultilinearOperator::zero({2, 2}, 2, NormSpec{kL2x2, NormKind::L2}), 2.0);
  EXPECT_EQ(r.report.certified_lower, 0.0);
  EXPECT_EQ(r.certificate.constant, 0.0);
}

TEST(EstimatePiLip, SameSeedSameAnswer) {
  Rng rng(13);
  const auto T = random_operator(rng, {2, 2, 2});
  SummingBudget b;
  b.seed = 99;
  const auto a = estimate_pi_lip(T, 2.0, b);
  const auto c = estimate_pi_lip(T, 2.0, b);
  EXPECT_EQ(a.report.certified_lower, c.report.certified_lower);
  EXPECT_EQ(a.certificate.constant, c.certificate.constant);
}

TEST(EstimatePiLip, InvalidExponent) {
  EXPECT_THROW(estimate_pi_lip(MultilinearOperator::scalar_product(2), 0.5), std::invalid_argument);
}

TEST(Factorization, LambdaTwoIsLipschitzOne) {
  const auto T = MultilinearOperator::scalar_product(2);
  SummingOptions opt;
  opt.dictionary = std::vector<Eigen::VectorXd>{vec({1})};
  const auto r = estimate_pi_lip(T, 2.0, {}, opt);
  Rng rng(17);
  std::vector<SegrePoint> samples;
  for (int i = 0; i < 12; ++i) samples.push_back(SegrePoint{{rng.normal_vector(1), rng.normal_vector(1)}});
  const auto f = build_factorization(r.certificate, samples, T);
  EXPECT_NEAR(f.lipschitz_samples, 1.0, 1e-12);
  EXPECT_TRUE(f.quotient_violations.empty());
}

TEST(Factorization, ZeroOperator) {
  const auto T = MultilinearOperator::zero({2, 2}, 1, NormSpec{kL2x2, NormKind::L2});
  const auto r = estimate_pi_lip(T, 2.0);
  Rng rng(19);
  std::vector<SegrePoint> samples;
  for (int i = 0; i < 6; ++i) samples.push_back(SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}});
  const auto f = build_factorization(r.certificate, samples, T);
  EXPECT_EQ(f.lipschitz_samples, 0.0);
  for (const auto& v : f.values) EXPECT_EQ(v.norm(), 0.0);
}

TEST(Factorization, ScalarFormEmbedsAsItself) {
  Rng rng(23);
  const Eigen::Matrix2d M = random_matrix(rng);
  const auto T = form2(M);
  const double norm = spectral(M);
  const Eigen::VectorXd psi = T.kernel().as_vector() / norm;
  PairConfiguration pairs;
  pairs.add(WeightedPair{SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}},
                         SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}}, 1.0});
  const auto cert = pietsch_upper_lp(T, pairs, {psi}, 2.0);
  std::vector<SegrePoint> samples;
  for (int i = 0; i < 8; ++i) samples.push_back(SegrePoint{{rng.normal_vector(2), rng.normal_vector(2)}});
  const auto f = build_factorization(cert, samples, T);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_NEAR(f.embedded[i][0], psi.dot(elementary_vector(samples[i])), 1e-12);
  }
  EXPECT_NEAR(cert.constant, norm, 1e-9 * norm);
  EXPECT_NEAR(f.lipschitz_samples, norm, 1e-9 * norm);
}

TEST(Restrict, LambdaTwoSlotFixedIsIdentity) {
  const auto S = restrict_operator(MultilinearOperator::scalar_product(2), {{1, vec({1})}});
  EXPECT_EQ(S.arity(), 1u);
  EXPECT_EQ(S.kernel().data()[0], 1.0);
  EXPECT_NEAR(operator_norm(S).report.certified_upper, 1.0, 1e-12);
}

TEST(Restrict, FixedZeroGivesZeroOperator) {
  Rng rng(29);
  const auto T = random_operator(rng, {2, 3, 2, 2});
  const auto S = restrict_operator(T, {{1, Eigen::VectorXd::Zero(3)}});
  EXPECT_EQ(S.factor_dims(), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(S.kernel().as_vector().norm(), 0.0);
}

TEST(Restrict, HandContraction) {
  const auto T = MultilinearOperator::form(DenseTensor({2, 2}, {1, 2, 3, 4}), kL2x2);
  const auto S = restrict_operator(T, {{0, vec({1, 0})}});
  EXPECT_EQ(std::vector<double>(S.kernel().data().begin(), S.kernel().data().end()), (std::vector<double>{1, 2}));
}

TEST(Restrict, FixingEverySlotRejected) {
  EXPECT_THROW(restrict_operator(MultilinearOperator::scalar_product(2), {{0, vec({1})}, {1, vec({1})}}),
               ArgumentError);
}

TEST(Restrict, BoundByParent) {
  Rng rng(31);
  const auto T = random_operator(rng, {2, 2, 2, 2});
  const Eigen::VectorXd x0 = rng.unit_vector(2, NormKind::L2);
  const std::map<std::size_t, Eigen::VectorXd> fixed{{2, x0}};
  const auto child = estimate_pi_lip(restrict_operator(T, fixed), 2.0);
  SummingOptions opt;
  opt.initial_pairs = lift_configuration(child.witness, fixed);
  const auto parent = estimate_pi_lip(T, 2.0, {}, opt);
  EXPECT_LE(child.report.certified_lower, x0.norm() * parent.certificate.constant + 1e-6);
}

TEST(Polynomial, PowerFromLambda) {
  // P(z) = z^n on R; the sup of |P| on [-1, 1] from a grid is the oracle.
  for (std::size_t n : {2u, 3u}) {
    double grid = 0.0;
    for (int k = -1000; k <= 1000; ++k) grid = std::max(grid, std::abs(std::pow(k / 1000.0, static_cast<double>(n))));
    const auto r = estimate_pi_lip_poly(MultilinearOperator::scalar_product(n), 2.0);
    EXPECT_LE(r.report.certified_lower, grid + 1e-9);
    EXPECT_GE(r.certificate.constant, grid - 1e-9);
    EXPECT_LE(r.certificate.constant - r.report.certified_lower, 0.05);
  }
}

TEST(Polynomial, ZeroPolynomial) {
  const auto P = MultilinearOperator::zero({2, 2}, 1, NormSpec{kL2x2, NormKind::L2});
  const auto r = estimate_pi_lip_poly(P, 2.0);
  EXPECT_EQ(r.report.certified_lower, 0.0);
  EXPECT_EQ(r.certificate.constant, 0.0);
}

TEST(Polynomial, DiagonalWithFirstCoordinate) {
  // P_lambda(a) = (lambda_k a_k^2)_k with lambda = e_1 reduces to a_1^2.
  const DenseTensor K({2, 2, 2}, {1, 0, 0, 0, 0, 0, 0, 0});
  const MultilinearOperator P(K, NormSpec{{NormKind::LInf, NormKind::LInf}, NormKind::L2});
  const auto r = estimate_pi_lip_poly(P, 2.0);
  EXPECT_LE(r.report.certified_lower, 1.0 + 1e-9);
  EXPECT_GE(r.certificate.constant, 1.0 - 1e-9);
  EXPECT_LE(r.certificate.constant - r.report.certified_lower, 0.05);
}

TEST(Polynomial, AsymmetricKernelRejected) {
  const auto T = MultilinearOperator::form(DenseTensor({2, 2}, {0, 1, 0, 0}), kL2x2);
  EXPECT_THROW(estimate_pi_lip_poly(T, 2.0), ArgumentError);
}
