#pragma once

#include <vector>

#include <Eigen/Core>

namespace lipsum {

enum class RowSense { LessEqual, Equal, GreaterEqual };

/// maximize c.x subject to A x (sense) b, x >= 0.
struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<RowSense> sense;
  Eigen::VectorXd c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  long pivots = 0;
};

struct SimplexOptions {
  double tolerance = 1e-11;
  long max_pivots = 200000;
  /// Degenerate pivots in a row before switching to Bland's rule.
  long degenerate_streak = 32;
};

/// Dense two-phase primal simplex on the full tableau.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

/// Phase one only: a feasible point (status Optimal) or Infeasible.
LpSolution find_feasible(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace lipsum
