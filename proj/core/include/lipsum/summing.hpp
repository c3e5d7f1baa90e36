#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lipsum/bound_report.hpp"
#include "lipsum/form_norm.hpp"
#include "lipsum/gauge.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum {

struct SummingBudget {
  int rounds = 8;
  /// Random starts of the adversarial pair search per round.
  int adversarial_starts = 16;
  std::size_t max_pairs = 96;
  std::size_t max_dictionary = 160;
  int random_forms = 32;
  int random_pairs = 8;
  /// Random starts of each denominator ascent.
  int restarts = 8;
  long max_iterations = 400;
  int bisection_steps = 60;
  std::uint64_t seed = 0;
};

/// Discrete domination measure sum_j w_j delta_{phi_j} with constant c:
/// ||T(u) - T(v)||^p <= c^p sum_j w_j |phi_j(u (x) ... - v (x) ...)|^p on the pairset.
struct PietschCertificate {
  std::vector<std::size_t> dims;
  std::vector<Eigen::VectorXd> forms;
  Eigen::VectorXd weights;
  double constant = 0.0;
  double p = 1.0;
  PairConfiguration pairset;
  /// False when some pair with T(u) != T(v) is invisible to every form.
  bool feasible = true;
  /// Configuration weights from the dual program, one per pair (zero when
  /// unused); the configuration they define attains `dual_constant`.
  Eigen::VectorXd config_weights;
  /// N / D restricted to the dictionary for `config_weights`.
  double dual_constant = 0.0;
  int bisection_steps = 0;
};

/// ||T(u) - T(v)|| in the codomain norm.
double difference_value(const MultilinearOperator& T, const SegrePoint& u, const SegrePoint& v);

struct ConfigLowerResult {
  BoundReport report;
  double numerator = 0.0;
  DenominatorResult denominator;
};

/// N / D for one configuration: certified_lower = N / D.certified_upper.
ConfigLowerResult lower_bound_config(const MultilinearOperator& T, const PairConfiguration& cfg,
                                     double p, Ball ball = Ball::Operator,
                                     const AscentOptions& options = {},
                                     std::span<const Eigen::VectorXd> start_forms = {});

/// Smallest domination constant over probability weights on the dictionary,
/// restricted to the pairset. Forms must already have certified norm <= 1.
PietschCertificate pietsch_upper_lp(const MultilinearOperator& T, const PairConfiguration& pairset,
                                    const std::vector<Eigen::VectorXd>& forms, double p,
                                    int bisection_steps = 60);

/// Largest relative violation of the certificate inequality over its pairset
/// (0 when every pair satisfies it).
double certificate_violation(const MultilinearOperator& T, const PietschCertificate& cert);

/// Sub-configuration of the pairset carrying the dual configuration weights.
PairConfiguration dual_configuration(const PietschCertificate& cert);

struct SummingOptions {
  Ball ball = Ball::Operator;
  /// Use exactly these forms (normalized by their certified norm) and never
  /// grow the dictionary.
  std::optional<std::vector<Eigen::VectorXd>> dictionary;
  /// Pairs placed in the pairset from the start.
  PairConfiguration initial_pairs;
};

struct SummingResult {
  BoundReport report;
  PietschCertificate certificate;
  /// Configuration attaining report.certified_lower (contained in the pairset).
  PairConfiguration witness;
  OperatorNormResult norm;
  /// Set when the dictionary could not dominate some pair.
  bool dictionary_exhausted = false;
  int rounds = 0;
};

SummingResult estimate_pi_lip(const MultilinearOperator& T, double p,
                              const SummingBudget& budget = {}, const SummingOptions& options = {});

struct FactorizationBundle {
  PietschCertificate certificate;
  std::vector<SegrePoint> samples;
  /// j_p(x) = (w_j^(1/p) phi_j(x))_j for each sample.
  std::vector<Eigen::VectorXd> embedded;
  /// h_T(j_p(x)) = T(x).
  std::vector<Eigen::VectorXd> values;
  /// max ||T(u) - T(v)|| / ||j_p(u) - j_p(v)||_p over the certified pairset.
  double lipschitz_pairset = 0.0;
  /// The same ratio over all pairs of samples (diagnostic).
  double lipschitz_samples = 0.0;
  /// Pairs where j_p agrees but T does not; appended for a re-solve.
  PairConfiguration quotient_violations;
};

FactorizationBundle build_factorization(const PietschCertificate& cert,
                                        const std::vector<SegrePoint>& samples,
                                        const MultilinearOperator& T, double tolerance = 1e-9);

/// Contracts the given slots (zero-based) with fixed vectors.
MultilinearOperator restrict_operator(const MultilinearOperator& T,
                                      const std::map<std::size_t, Eigen::VectorXd>& fixed);

/// Inserts the fixed vectors into every point of a configuration of the
/// restricted operator, giving a configuration of the parent.
PairConfiguration lift_configuration(const PairConfiguration& cfg,
                                     const std::map<std::size_t, Eigen::VectorXd>& fixed);

/// Bracket on sup over ||x -> phi(x, ..., x)|| <= 1 of
/// (sum_i a_i |phi(x_i, ..., x_i) - phi(y_i, ..., y_i)|^p)^(1/p) for a
/// configuration of diagonal points.
DenominatorResult config_denominator_poly(const PairConfiguration& cfg, double p,
                                          NormKind norm, const AscentOptions& options = {},
                                          std::span<const Eigen::VectorXd> start_forms = {});

/// Summing norm of the homogeneous polynomial x -> P(x, ..., x): configurations
/// range over diagonal points and forms over the polynomial unit ball.
SummingResult estimate_pi_lip_poly(const MultilinearOperator& P, double p,
                                   const SummingBudget& budget = {});

}  // namespace lipsum
