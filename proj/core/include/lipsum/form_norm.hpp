#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lipsum/bound_report.hpp"
#include "lipsum/gauge.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum {

struct AscentOptions {
  int restarts = 64;
  long max_iterations = 10000;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
  /// Largest extreme-point count for exact enumeration.
  std::size_t enumeration_cap = 4096;
};

struct OperatorNormResult {
  BoundReport report;
  /// Factor point (inside the unit balls) attaining certified_lower.
  SegrePoint argmax;
};

/// ||T|| = sup ||T(x_1, ..., x_n)|| over the factor unit balls.
OperatorNormResult operator_norm(const MultilinearOperator& T, const AscentOptions& options = {});

/// Certified upper bound on the norm of a form phi, without local search.
double form_norm_upper(const Eigen::VectorXd& phi, const std::vector<std::size_t>& dims,
                       const std::vector<NormKind>& norms, std::size_t enumeration_cap = 4096);

/// Rows a_i^(1/p) * vec(u_i (x) ... - v_i (x) ...).
Eigen::MatrixXd difference_matrix(const PairConfiguration& cfg, double p);

/// Certified upper bound on sup |phi(u (x) ... - v (x) ...)| over forms of
/// operator norm at most 1 (a projective-norm bound on the difference).
double difference_norm_upper(const SegrePoint& u, const SegrePoint& v,
                             std::span<const NormKind> norms);

/// sup over ||phi||_HS <= 1 of ||A phi||_p. Sets *exact when the value is exact.
double hs_ball_upper(const Eigen::MatrixXd& A, double p, bool* exact = nullptr);

/// Certified upper bound on sup over the operator-norm ball of
/// (sum_i a_i |phi(Delta_i)|^p)^(1/p). Sets *exact when the value is exact.
double op_ball_upper(const PairConfiguration& cfg, double p, std::span<const NormKind> norms,
                     bool* exact = nullptr);

/// kappa with ||phi||_HS <= kappa * ||phi||_op for forms on l_r factors.
double hs_scaling_constant(std::span<const std::size_t> dims, std::span<const NormKind> norms);

struct RatioAscentResult {
  /// ||A phi||_p / gauge.upper(phi) at `certified_form`.
  double certified_lower = 0.0;
  Eigen::VectorXd certified_form;
  /// ||A phi||_p / gauge.evaluate(phi) at `heuristic_form`.
  double heuristic_lower = 0.0;
  Eigen::VectorXd heuristic_form;
  long iterations = 0;
};

/// Multi-start projected ascent on the scale-invariant ratio ||A phi||_p / g(phi).
/// Every start is evaluated as well, so a start never scores below itself.
RatioAscentResult maximize_ratio(const Eigen::MatrixXd& A, double p, const FormGauge& gauge,
                                 std::vector<Eigen::VectorXd> starts,
                                 const AscentOptions& options);

struct DenominatorResult {
  BoundReport report;
  /// Form with certified norm 1 attaining report.certified_lower (as a value of
  /// the sum at this form).
  Eigen::VectorXd maximizer;
  Eigen::VectorXd heuristic_maximizer;
  std::size_t dropped = 0;
};

/// Bracket on D = sup over the chosen ball of (sum_i a_i |phi(Delta_i)|^p)^(1/p).
/// Degenerate pairs are dropped first. `start_forms` seed the ascent.
DenominatorResult config_denominator(const PairConfiguration& cfg, double p, Ball ball,
                                     std::span<const NormKind> factor_norms,
                                     const AscentOptions& options = {},
                                     std::span<const Eigen::VectorXd> start_forms = {});

/// Rank-one forms f_1 (x) ... (x) f_n where f_k norms the k-th factor of a
/// configuration point (both u_i and v_i); each has operator norm 1.
std::vector<Eigen::VectorXd> norming_forms(const PairConfiguration& cfg,
                                           std::span<const NormKind> norms,
                                           std::size_t limit = 64);

}  // namespace lipsum
