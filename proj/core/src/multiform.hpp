#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipsum/random.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum::detail {

// Real k-linear form on R^{d_1} x ... x R^{d_k}, each slot carrying the unit
// ball of an l_r norm. Its norm is sup |F(x_1, ..., x_k)| over the balls.
struct Multiform {
  std::vector<std::size_t> dims;
  std::vector<NormKind> balls;
  Eigen::VectorXd coeffs;
};

using Point = std::vector<Eigen::VectorXd>;

// ||T|| as a form: factor slots plus the codomain slot carrying the dual ball
// (dropped when m = 1).
Multiform operator_multiform(const MultilinearOperator& T);
Multiform form_multiform(const Eigen::VectorXd& phi, std::vector<std::size_t> dims,
                         std::vector<NormKind> balls);

double evaluate(const Multiform& f, const Point& x);
Point random_point(const Multiform& f, Rng& rng);

struct LocalMax {
  double value = 0.0;
  Point point;
  long iterations = 0;
};

// Top left singular vector of each mode flattening, scaled into the balls.
Point spectral_start(const Multiform& f);

// Block-coordinate ascent: each slot in turn is replaced by the dual-normalized
// partial gradient, which is the exact maximizer over that slot's ball.
LocalMax alternating_max(const Multiform& f, Point start, long max_iterations, double tolerance);

struct GlobalBound {
  double upper = 0.0;
  bool exact = false;
  std::string method;
  Point point;  // maximizer when exact
};

// Certified upper bound on the form norm. Slots whose ball is a polytope
// (l_1, l_inf, or dimension 1) are enumerated over extreme points when their
// full extreme-point count is at most `cap`; at most two remaining l_2 slots
// are resolved exactly (vector norm / top singular value). Anything else uses
// the l_2 relaxation min(Frobenius, single-mode flattening spectral norms),
// scaled by the l_2 radius of each ball.
GlobalBound global_upper(const Multiform& f, std::size_t cap);
bool has_exact_upper(const Multiform& f, std::size_t cap);

// Spectral norm of the mode-k flattening of a row-major tensor.
double flattening_spectral_norm(const Eigen::VectorXd& coeffs, const std::vector<std::size_t>& dims,
                                std::size_t mode);

// Scale so that every factor lies in its unit ball (guards rounding).
void clamp_to_balls(Point& x, const std::vector<NormKind>& balls);

}  // namespace lipsum::detail
