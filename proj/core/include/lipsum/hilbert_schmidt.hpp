#pragma once

#include <cstddef>
#include <vector>

#include "lipsum/summing.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum {

/// (sum over basis tuples of ||T(e_j1, ..., e_jn)||^2)^(1/2), the Frobenius
/// norm of the kernel. Every norm must be l_2.
double hs_norm(const MultilinearOperator& T);

struct KhintchineConstant {
  double p = 2.0;
  double value = 1.0;
};

/// B_p = 1 for p <= 2 and sqrt(2) * (Gamma((p + 1) / 2) / sqrt(pi))^(1/p) above.
KhintchineConstant khintchine_constant(double p);

/// Pairs ((e_j1, ..., e_jn), 0) over all basis tuples.
PairConfiguration basis_configuration(const std::vector<std::size_t>& dims,
                                      std::size_t cap = 4096);

/// Certified lower bound on the H-summing norm from the basis configuration
/// (hs-ball, p = 2); equals hs_norm(T).
double basis_config_lower(const MultilinearOperator& T, std::size_t cap = 4096);

struct SandwichReport {
  double p = 2.0;
  double hs_norm = 0.0;
  double basis_lower = 0.0;
  /// Hilbert-Schmidt-ball LP constant at exponent 2 on a pairset containing
  /// the basis configuration.
  double lp_constant = 0.0;
  /// LP constant at exponent p on the same pairset and dictionary.
  double lp_constant_p = 0.0;
  /// lp_constant / hs_norm (0 for the zero operator).
  double ratio = 0.0;
  double khintchine = 1.0;
  /// B_p^n * hs_norm.
  double khintchine_bound = 0.0;
  bool lower_exact = false;
  bool lp_consistent = false;
  bool holds() const { return lower_exact && lp_consistent; }
};

SandwichReport verify_sandwich(const MultilinearOperator& T, double p,
                               const SummingBudget& budget = {});

}  // namespace lipsum
