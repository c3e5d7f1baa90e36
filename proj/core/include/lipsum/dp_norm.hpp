#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipsum/bound_report.hpp"
#include "lipsum/form_norm.hpp"
#include "lipsum/summing.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum {

/// Element z of X_1 (x) ... (x) X_n (x) Y stored as a tensor of shape
/// (d1, ..., dn, m). `norms.codomain` is the norm of Y.
struct MixedTensor {
  DenseTensor data;
  NormSpec norms;

  MixedTensor() = default;
  MixedTensor(DenseTensor t, NormSpec n);

  std::vector<std::size_t> factor_dims() const;
  std::size_t codomain_dim() const { return data.shape().back(); }
  /// (d1 * ... * dn) x m matrix view.
  Eigen::MatrixXd matrix() const;
};

struct RepresentationTerm {
  SegrePoint p;
  SegrePoint q;
  Eigen::VectorXd y;
  /// Terms sharing a block carry a common certified bound in block_bounds.
  std::size_t block = 0;
};

/// z = sum_i (p_i (x) ... - q_i (x) ...) (x) y_i.
struct Representation {
  std::vector<RepresentationTerm> terms;
  /// Certified upper bound on the difference sup of each block at exponent p'
  /// (empty when the representation is a single block with no stored bound).
  std::vector<double> block_bounds;

  Eigen::MatrixXd reconstruct(const std::vector<std::size_t>& dims, std::size_t m) const;
  /// ||z - reconstruct|| / ||z|| in Frobenius norm (absolute when z = 0).
  double residual(const MixedTensor& z) const;
};

struct DpOptions {
  int restarts = 8;
  int max_sweeps = 150;
  int polish_sweeps = 60;
  double penalty = 1e6;
  double residual_tolerance = 1e-8;
  std::uint64_t seed = 0;
  /// Representations of summands of z (their sum must reconstruct z). Each
  /// becomes one block of a combined candidate.
  std::vector<Representation> seeds;
  /// Largest extreme-point count used by the difference-sup bounds.
  std::size_t enumeration_cap = 4096;
  /// Adds z itself as an uncertified witness in dual_witnesses.
  bool heuristic_witness = false;
};

struct DpUpperResult {
  BoundReport report;
  Representation representation;
  double residual = 0.0;
  std::size_t terms = 0;
};

/// Value of a representation: (certified sup over the operator-norm ball of
/// (sum |phi(p_i) - phi(q_i)|^p')^(1/p')) * (sum ||y_i||^p)^(1/p), using the
/// stored block bounds where they are smaller.
double representation_value(const Representation& rep, double p, const NormSpec& norms,
                            std::size_t enumeration_cap = 4096);

/// Rescales terms so that the value above is as small as the per-term bounds
/// allow (Hoelder balance between the pairs and the y_i).
void balance_representation(Representation& rep, double p, const NormSpec& norms);

/// Upper bound on d_p(z) by representation search with `k` terms (0 selects
/// twice the rank of the (factors, codomain) flattening). Requires 1 < p <= inf.
DpUpperResult dp_upper(const MixedTensor& z, double p, std::size_t k = 0,
                       const DpOptions& options = {});

/// Operator into R^m paired against z, with an upper estimate of its
/// Lipschitz p'-summing norm.
struct Witness {
  MultilinearOperator op;
  double pi_upper = 0.0;
  /// False when pi_upper comes from local search only.
  bool certified = true;
  std::string kind;
};

/// Full contraction sum K_T[j, c] z[j, c].
double pairing(const MultilinearOperator& T, const MixedTensor& z);

/// max |<T, z>| / pi_upper over witnesses; uncertified witnesses only enter
/// heuristic_lower.
BoundReport dp_lower_dual(const MixedTensor& z, double p, const std::vector<Witness>& witnesses);

/// Rank-one witnesses phi (x) y* (pi = ||phi|| * ||y*||), projective witnesses
/// for z(., y*), and one uncertified witness built from z itself.
std::vector<Witness> dual_witnesses(const MixedTensor& z, double p, const DpOptions& options = {});

/// (sum ||y_i||_r^p)^(1/p); p = inf gives the max.
double delta_p_norm(const std::vector<Eigen::VectorXd>& ys, double p, NormKind r = NormKind::L2);

/// epsilon(sum e_i (x) (a_i - b_i)) = operator-ball configuration sup at exponent p.
BoundReport epsilon_norm_diff(const PairConfiguration& cfg, double p,
                              std::span<const NormKind> factor_norms,
                              const AscentOptions& options = {});

struct DeltaEpsilonReport {
  double lhs = 0.0;
  double constant = 0.0;
  BoundReport epsilon;
  double rhs = 0.0;
  bool holds = false;
};

/// Checks delta_p((T(a_i) - T(b_i))_i) <= C * epsilon(sum e_i (x) (a_i - b_i))
/// where C is the LP constant of T on a pairset containing cfg.
DeltaEpsilonReport check_delta_epsilon(const MultilinearOperator& T, const PairConfiguration& cfg,
                                       double p, const SummingBudget& budget = {});

}  // namespace lipsum
