#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipsum/tensor.hpp"

namespace lipsum {

/// Unit ball of forms over which configuration sups are taken.
enum class Ball { Operator, HilbertSchmidt };

std::string_view to_string(Ball b);
Ball ball_from_string(std::string_view s);

struct GaugeValue {
  double value = 0.0;
  /// A supergradient of the gauge at phi (the tensor of a maximizing point).
  Eigen::VectorXd gradient;
};

/// A norm on forms phi (vectors of length d1 * ... * dn).
class FormGauge {
 public:
  virtual ~FormGauge() = default;
  /// Certified upper bound on the norm.
  virtual double upper(const Eigen::VectorXd& phi) const = 0;
  /// Local-search estimate (a lower bound) with a supergradient. Deterministic.
  virtual GaugeValue evaluate(const Eigen::VectorXd& phi) const = 0;
  virtual std::string name() const = 0;
};

/// Multilinear form norm sup |phi(x_1, ..., x_n)| over the l_r unit balls.
class OperatorGauge final : public FormGauge {
 public:
  OperatorGauge(std::vector<std::size_t> dims, std::vector<NormKind> norms,
                std::size_t enumeration_cap = 4096, int restarts = 2);

  double upper(const Eigen::VectorXd& phi) const override;
  GaugeValue evaluate(const Eigen::VectorXd& phi) const override;
  std::string name() const override { return "operator"; }
  bool exact() const { return exact_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<NormKind> norms_;
  std::size_t cap_;
  int restarts_;
  bool exact_ = false;
};

/// Frobenius norm of the kernel (the Hilbert-Schmidt norm for l_2 factors).
class FrobeniusGauge final : public FormGauge {
 public:
  double upper(const Eigen::VectorXd& phi) const override { return phi.norm(); }
  GaugeValue evaluate(const Eigen::VectorXd& phi) const override;
  std::string name() const override { return "hilbert-schmidt"; }
};

/// Sup norm of the homogeneous polynomial x -> phi(x, ..., x) over the l_r
/// unit ball of R^d.
class PolynomialGauge final : public FormGauge {
 public:
  PolynomialGauge(std::size_t dim, std::size_t degree, NormKind norm,
                  std::size_t enumeration_cap = 4096, int restarts = 6);

  double upper(const Eigen::VectorXd& phi) const override;
  GaugeValue evaluate(const Eigen::VectorXd& phi) const override;
  std::string name() const override { return "polynomial"; }

  /// Constant c with ||sym(phi)|| <= c * ||x -> phi(x, ..., x)||: 1 on R and on
  /// Hilbert spaces, n^n / n! in general.
  double polarization_constant() const;
  /// Value of x -> phi(x, ..., x).
  double value_at(const Eigen::VectorXd& phi, const Eigen::VectorXd& x) const;

 private:
  std::size_t dim_;
  std::size_t degree_;
  NormKind norm_;
  std::size_t cap_;
  int restarts_;
  std::vector<std::size_t> dims_;
};

std::unique_ptr<FormGauge> make_gauge(Ball ball, std::vector<std::size_t> dims,
                                      std::vector<NormKind> norms);

/// Average of phi over all permutations of its (equal-dimension) modes.
Eigen::VectorXd symmetrize(const Eigen::VectorXd& phi, std::size_t dim, std::size_t degree);
bool is_symmetric(const Eigen::VectorXd& phi, std::size_t dim, std::size_t degree,
                  double tolerance = 1e-12);

}  // namespace lipsum
