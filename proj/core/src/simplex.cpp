#include "lipsum/simplex.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "lipsum/errors.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum {

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& options) : opt_(options) {
    const auto m = lp.A.rows();
    n_ = lp.A.cols();
    if (lp.b.size() != m || static_cast<Eigen::Index>(lp.sense.size()) != m) {
      throw ShapeError("linear program: row count mismatch");
    }
    if (lp.c.size() != 0 && lp.c.size() != n_) throw ShapeError("linear program: cost length");

    // Column layout: original | slack/surplus | artificial | rhs.
    Eigen::Index slacks = 0;
    Eigen::Index artificials = 0;
    std::vector<double> flip(static_cast<std::size_t>(m), 1.0);
    std::vector<RowSense> sense = lp.sense;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (lp.b(i) < 0.0) {
        flip[static_cast<std::size_t>(i)] = -1.0;
        auto& s = sense[static_cast<std::size_t>(i)];
        if (s == RowSense::LessEqual) {
          s = RowSense::GreaterEqual;
        } else if (s == RowSense::GreaterEqual) {
          s = RowSense::LessEqual;
        }
      }
      const auto s = sense[static_cast<std::size_t>(i)];
      if (s != RowSense::Equal) ++slacks;
      if (s != RowSense::LessEqual) ++artificials;
    }
    slack_begin_ = n_;
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + artificials;
    t_ = RowMatrix::Zero(m + 1, cols_ + 1);
    basis_.assign(static_cast<std::size_t>(m), -1);

    Eigen::Index next_slack = slack_begin_;
    Eigen::Index next_art = art_begin_;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double f = flip[static_cast<std::size_t>(i)];
      t_.row(i).head(n_) = f * lp.A.row(i);
      t_(i, cols_) = f * lp.b(i);
      switch (sense[static_cast<std::size_t>(i)]) {
        case RowSense::LessEqual:
          t_(i, next_slack) = 1.0;
          basis_[static_cast<std::size_t>(i)] = next_slack++;
          break;
        case RowSense::GreaterEqual:
          t_(i, next_slack++) = -1.0;
          t_(i, next_art) = 1.0;
          basis_[static_cast<std::size_t>(i)] = next_art++;
          break;
        case RowSense::Equal:
          t_(i, next_art) = 1.0;
          basis_[static_cast<std::size_t>(i)] = next_art++;
          break;
      }
    }
    original_ = t_.topRows(m);
  }

  // Rebuilds the constraint rows as B^-1 [A | b] from the original data, which
  // discards the round-off accumulated by pivoting.
  void refactor() {
    const Eigen::Index m = rows();
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index i = 0; i < m; ++i) B.col(i) = original_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (!(std::abs(lu.determinant()) > 0.0)) return;
    const Eigen::MatrixXd fresh = lu.solve(Eigen::MatrixXd(original_));
    if (!fresh.allFinite()) return;
    t_.topRows(m) = fresh;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t_(i, cols_) < 0.0 && t_(i, cols_) > -1e-12) t_(i, cols_) = 0.0;
    }
  }

  // Optimizes, refactors and re-optimizes until no further pivots occur.
  LpStatus optimize_refined(const Eigen::VectorXd& cost, Eigen::Index allowed_end) {
    LpStatus st = optimize(cost, allowed_end);
    for (int round = 0; round < 3 && st == LpStatus::Optimal; ++round) {
      const long before = pivots_;
      refactor();
      st = optimize(cost, allowed_end);
      if (pivots_ == before) break;
    }
    return st;
  }

  // Maximizes cost . x over allowed columns; cost has one entry per column.
  LpStatus optimize(const Eigen::VectorXd& cost, Eigen::Index allowed_end) {
    const Eigen::Index m = rows();
    // Reduced costs d_j = c_B B^-1 A_j - c_j and value c_B x_B.
    t_.row(m).setZero();
    t_.row(m).head(cols_) = -cost.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(m) += cb * t_.row(i);
    }
    long streak = 0;
    while (true) {
      if (pivots_ >= opt_.max_pivots) return LpStatus::IterationLimit;
      const bool bland = streak >= opt_.degenerate_streak;
      Eigen::Index enter = -1;
      double most = -opt_.tolerance;
      for (Eigen::Index j = 0; j < allowed_end; ++j) {
        const double d = t_(m, j);
        if (d < most) {
          enter = j;
          most = d;
          if (bland) break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= opt_.tolerance) continue;
        const double ratio = t_(i, cols_) / a;
        if (ratio < best_ratio - 1e-14 ||
            (ratio <= best_ratio + 1e-14 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      streak = best_ratio <= 1e-14 ? streak + 1 : 0;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    ++pivots_;
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Phase one; returns false when the program is infeasible.
  bool phase_one() {
    if (art_begin_ == cols_) return true;
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols_);
    cost.tail(cols_ - art_begin_).setConstant(-1.0);
    const LpStatus st = optimize_refined(cost, cols_);
    if (st == LpStatus::IterationLimit) throw std::runtime_error("simplex: pivot limit reached");
    double scale = 1.0;
    for (Eigen::Index i = 0; i < rows(); ++i) scale = std::max(scale, std::abs(t_(i, cols_)));
    if (-t_(rows(), cols_) > 1e-9 * scale) return false;
    // Drive remaining artificial variables out of the basis.
    for (Eigen::Index i = 0; i < rows(); ++i) {
      if (basis_[static_cast<std::size_t>(i)] < art_begin_) continue;
      for (Eigen::Index j = 0; j < art_begin_; ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
    return true;
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const auto b = basis_[static_cast<std::size_t>(i)];
      if (b < n_) x(b) = std::max(0.0, t_(i, cols_));
    }
    return x;
  }

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index structural() const { return art_begin_; }
  Eigen::Index columns() const { return cols_; }
  long pivots() const { return pivots_; }

 private:
  SimplexOptions opt_;
  RowMatrix t_;
  RowMatrix original_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index n_ = 0;
  Eigen::Index slack_begin_ = 0;
  Eigen::Index art_begin_ = 0;
  Eigen::Index cols_ = 0;
  long pivots_ = 0;
};

}  // namespace

LpSolution find_feasible(const LinearProgram& lp, const SimplexOptions& options) {
  Tableau tab(lp, options);
  LpSolution out;
  out.status = tab.phase_one() ? LpStatus::Optimal : LpStatus::Infeasible;
  out.x = tab.solution();
  out.pivots = tab.pivots();
  if (lp.c.size() == out.x.size()) out.objective = lp.c.dot(out.x);
  return out;
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  Tableau tab(lp, options);
  LpSolution out;
  if (!tab.phase_one()) {
    out.status = LpStatus::Infeasible;
    out.pivots = tab.pivots();
    return out;
  }
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(tab.columns());
  if (lp.c.size() > 0) cost.head(lp.c.size()) = lp.c;
  out.status = tab.optimize_refined(cost, tab.structural());
  out.x = tab.solution();
  out.objective = lp.c.size() > 0 ? lp.c.dot(out.x) : 0.0;
  out.pivots = tab.pivots();
  return out;
}

}  // namespace lipsum
