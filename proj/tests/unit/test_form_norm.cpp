#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "lipsum/form_norm.hpp"
#include "lipsum/hilbert_schmidt.hpp"
#include "lipsum/random.hpp"
#include "lipsum/simplex.hpp"

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

void expect_bracket(const BoundReport& r, double value, double tol) {
  EXPECT_LE(r.certified_lower, value + tol);
  EXPECT_GE(r.certified_upper, value - tol);
  EXPECT_LE(r.certified_lower, r.heuristic_lower);
  EXPECT_LE(r.heuristic_lower, r.heuristic_upper);
  EXPECT_LE(r.heuristic_upper, r.certified_upper);
}

}  // namespace

TEST(OperatorNorm, LambdaTwoIsOne) {
  const auto r = operator_norm(MultilinearOperator::scalar_product(2)).report;
  EXPECT_EQ(r.certified_lower, 1.0);
  EXPECT_EQ(r.certified_upper, 1.0);
}

TEST(OperatorNorm, ZeroOperator) {
  const auto r = operator_norm(MultilinearOperator::zero({2, 3}, 2, NormSpec{kL2x2, NormKind::L2})).report;
  EXPECT_EQ(r.certified_lower, 0.0);
  EXPECT_EQ(r.certified_upper, 0.0);
}

TEST(OperatorNorm, IdentityFormMatchesSvd) {
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const double svd = Eigen::JacobiSVD<Eigen::Matrix2d>(I).singularValues()[0];
  const auto r = operator_norm(form2(I)).report;
  EXPECT_NEAR(r.certified_lower, svd, 1e-9);
  EXPECT_NEAR(r.certified_upper, svd, 1e-9);
}

TEST(OperatorNorm, RandomBilinearFormsMatchSvd) {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    Eigen::Matrix2d M;
    M << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const double svd = Eigen::JacobiSVD<Eigen::Matrix2d>(M).singularValues()[0];
    const auto r = operator_norm(form2(M)).report;
    expect_bracket(r, svd, 1e-9);
    EXPECT_NEAR(r.certified_lower, svd, 1e-9 * svd);
  }
}

TEST(OperatorNorm, LInfFormMatchesSignEnumeration) {
  Rng rng(19);
  const Eigen::VectorXd phi = rng.normal_vector(6);
  double brute = 0.0;
  for (int s = 0; s < 4; ++s) {
    for (int u = 0; u < 8; ++u) {
      const double a[2] = {s & 1 ? 1.0 : -1.0, s & 2 ? 1.0 : -1.0};
      const double b[3] = {u & 1 ? 1.0 : -1.0, u & 2 ? 1.0 : -1.0, u & 4 ? 1.0 : -1.0};
      double v = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) v += phi[i * 3 + j] * a[i] * b[j];
      }
      brute = std::max(brute, std::abs(v));
    }
  }
  const MultilinearOperator T = MultilinearOperator::form(
      DenseTensor({2, 3}, std::vector<double>(phi.data(), phi.data() + 6)), {NormKind::LInf, NormKind::LInf});
  const auto r = operator_norm(T).report;
  EXPECT_NEAR(r.certified_lower, brute, 1e-12 * brute);
  EXPECT_NEAR(r.certified_upper, brute, 1e-12 * brute);
}

TEST(OperatorNorm, TrilinearBracketIsOrdered) {
  Rng rng(23);
  std::vector<double> data(2 * 3 * 2 * 2);
  for (double& x : data) x = rng.normal();
  const MultilinearOperator T(DenseTensor({2, 3, 2, 2}, data),
                              NormSpec{{NormKind::L2, NormKind::L1, NormKind::L2}, NormKind::L2});
  const auto r = operator_norm(T).report;
  EXPECT_GT(r.certified_lower, 0.0);
  EXPECT_LE(r.certified_lower, r.certified_upper);
  // Every coordinate of a unit vector is at most 1 in modulus.
  EXPECT_LE(r.certified_upper, T.kernel().as_vector().cwiseAbs().sum());
}

TEST(ConfigDenominator, SinglePairHsBall) {
  PairConfiguration cfg;
  const Eigen::VectorXd a = vec({3, 4}), b = vec({1, 2});
  cfg.add(WeightedPair{SegrePoint{{a, b}}, SegrePoint{{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()}}, 1.0});
  const auto r = config_denominator(cfg, 2.0, Ball::HilbertSchmidt, kL2x2).report;
  const double expected = a.norm() * b.norm();
  EXPECT_NEAR(r.certified_lower, expected, 1e-12 * expected);
  EXPECT_NEAR(r.certified_upper, expected, 1e-12 * expected);
}

TEST(ConfigDenominator, BasisConfigurationHsBallIsOne) {
  for (std::size_t d : {2u, 3u}) {
    const auto cfg = basis_configuration({d, d});
    EXPECT_EQ(cfg.size(), d * d);
    const auto r = config_denominator(cfg, 2.0, Ball::HilbertSchmidt, kL2x2).report;
    EXPECT_NEAR(r.certified_lower, 1.0, 1e-12);
    EXPECT_NEAR(r.certified_upper, 1.0, 1e-12);
  }
}

TEST(ConfigDenominator, ScalingMatchesGridSearch) {
  // One factor, d = 2: the sup over the unit circle is approximated by a fine
  // grid of angles.
  Rng rng(29);
  const std::vector<NormKind> norms{NormKind::L2};
  PairConfiguration cfg;
  for (int i = 0; i < 3; ++i) cfg.add(WeightedPair{SegrePoint{{rng.normal_vector(2)}}, SegrePoint{{rng.normal_vector(2)}}, 1.0});
  for (double p : {1.0, 2.0, 3.0}) {
    auto grid = [&](double t) {
      double best = 0.0;
      for (int k = 0; k < 200000; ++k) {
        const double th = std::numbers::pi * k / 200000.0;
        const Eigen::Vector2d phi(std::cos(th), std::sin(th));
        double s = 0.0;
        for (const auto& pr : cfg.pairs()) s += std::pow(std::abs(t * phi.dot(pr.u.factors[0] - pr.v.factors[0])), p);
        best = std::max(best, std::pow(s, 1.0 / p));
      }
      return best;
    };
    const double t = 2.5;
    PairConfiguration scaled;
    for (const auto& pr : cfg.pairs()) {
      scaled.add(WeightedPair{SegrePoint{{t * pr.u.factors[0]}}, SegrePoint{{t * pr.v.factors[0]}}, 1.0});
    }
    const auto r1 = config_denominator(cfg, p, Ball::Operator, norms).report;
    const auto rt = config_denominator(scaled, p, Ball::Operator, norms).report;
    const double g1 = grid(1.0), gt = grid(t);
    EXPECT_NEAR(r1.certified_lower, g1, 1e-6 * g1);
    EXPECT_NEAR(rt.certified_lower, gt, 1e-6 * gt);
    EXPECT_NEAR(rt.certified_lower, t * r1.certified_lower, 1e-9 * rt.certified_lower);
    EXPECT_GE(rt.certified_upper, gt * (1 - 1e-12));
  }
}

TEST(ConfigDenominator, HsBallBoundsOperatorBall) {
  Rng rng(31);
  PairConfiguration cfg;
  for (int i = 0; i < 4; ++i) {
    cfg.add(WeightedPair{SegrePoint{{rng.normal_vector(2), rng.normal_vector(3)}},
                         SegrePoint{{rng.normal_vector(2), rng.normal_vector(3)}}, 1.0});
  }
  const auto hs = config_denominator(cfg, 2.0, Ball::HilbertSchmidt, kL2x2).report;
  const auto op = config_denominator(cfg, 2.0, Ball::Operator, kL2x2).report;
  EXPECT_LE(hs.certified_upper, op.certified_upper + 1e-12);
  EXPECT_LE(op.certified_lower, op.certified_upper);
}

TEST(ConfigDenominator, InvalidExponentRejected) {
  PairConfiguration cfg;
  cfg.add(WeightedPair{SegrePoint{{vec({1, 0})}}, SegrePoint{{vec({0, 1})}}, 1.0});
  EXPECT_THROW(config_denominator(cfg, 0.5, Ball::Operator, std::vector<NormKind>{NormKind::L2}), std::invalid_argument);
}

TEST(Simplex, SmallLinearProgram) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0; optimum at (8/5, 6/5).
  LinearProgram lp;
  lp.A.resize(2, 2);
  lp.A << 1, 2, 3, 1;
  lp.b = Eigen::Vector2d(4, 6);
  lp.sense = {RowSense::LessEqual, RowSense::LessEqual};
  lp.c = Eigen::Vector2d(1, 1);
  const auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 14.0 / 5.0, 1e-12);
  EXPECT_NEAR(s.x[0], 8.0 / 5.0, 1e-12);
  EXPECT_NEAR(s.x[1], 6.0 / 5.0, 1e-12);
}

TEST(Simplex, EqualityAndInfeasibility) {
  LinearProgram lp;
  lp.A.resize(2, 2);
  lp.A << 1, 1, 1, 1;
  lp.b = Eigen::Vector2d(1, 2);
  lp.sense = {RowSense::Equal, RowSense::GreaterEqual};
  lp.c = Eigen::Vector2d(1, 0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
  lp.sense = {RowSense::Equal, RowSense::LessEqual};
  const auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
}

TEST(Simplex, Unbounded) {
  LinearProgram lp;
  lp.A.resize(1, 2);
  lp.A << 1, -1;
  lp.b = Eigen::VectorXd::Ones(1);
  lp.sense = {RowSense::LessEqual};
  lp.c = Eigen::Vector2d(1, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}
