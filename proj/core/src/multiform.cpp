#include "multiform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lipsum/errors.hpp"

namespace lipsum::detail {

Multiform operator_multiform(const MultilinearOperator& T) {
  Multiform f;
  f.dims = T.factor_dims();
  f.balls = T.norms().factors;
  if (T.codomain_dim() > 1) {
    f.dims.push_back(T.codomain_dim());
    f.balls.push_back(dual(T.norms().codomain));
  }
  f.coeffs = T.kernel().as_vector();
  return f;
}

Multiform form_multiform(const Eigen::VectorXd& phi, std::vector<std::size_t> dims,
                         std::vector<NormKind> balls) {
  if (static_cast<std::size_t>(phi.size()) != product(dims)) {
    throw ShapeError("form length does not match the product of its dimensions");
  }
  return Multiform{std::move(dims), std::move(balls), phi};
}

double evaluate(const Multiform& f, const Point& x) {
  const Eigen::VectorXd g = contract_except(f.coeffs, f.dims, x, 0);
  return g.dot(x[0]);
}

Point random_point(const Multiform& f, Rng& rng) {
  Point x;
  x.reserve(f.dims.size());
  for (std::size_t k = 0; k < f.dims.size(); ++k) {
    x.push_back(rng.unit_vector(static_cast<Eigen::Index>(f.dims[k]), f.balls[k]));
  }
  return x;
}

Point spectral_start(const Multiform& f) {
  Point x;
  const DenseTensor t(f.dims, std::vector<double>(f.coeffs.data(), f.coeffs.data() + f.coeffs.size()));
  for (std::size_t k = 0; k < f.dims.size(); ++k) {
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < f.dims.size(); ++j) {
      if (j != k) rest.push_back(j);
    }
    const Eigen::MatrixXd m = flatten(t, std::span<const std::size_t>(&k, 1), rest);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m * m.transpose());
    Eigen::VectorXd v = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    const double n = vector_norm(v, f.balls[k]);
    x.push_back(n > 0.0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(v.size(), 0));
  }
  return x;
}

void clamp_to_balls(Point& x, const std::vector<NormKind>& balls) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double n = vector_norm(x[k], balls[k]);
    if (n > 1.0) x[k] /= n;
  }
}

LocalMax alternating_max(const Multiform& f, Point start, long max_iterations, double tolerance) {
  LocalMax out;
  out.point = std::move(start);
  const std::size_t n = f.dims.size();
  double value = -std::numeric_limits<double>::infinity();
  for (long it = 0; it < max_iterations; ++it) {
    double current = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::VectorXd g = contract_except(f.coeffs, f.dims, out.point, k);
      out.point[k] = norming_functional(g, dual(f.balls[k]));
      current = vector_norm(g, dual(f.balls[k]));
    }
    out.iterations = it + 1;
    const bool converged = current - value <= tolerance * std::max(1.0, std::abs(current));
    value = std::max(value, current);
    if (converged) break;
  }
  out.value = std::max(value, 0.0);
  return out;
}

namespace {

bool enumerable(const Multiform& f, std::size_t s) {
  return f.dims[s] == 1 || f.balls[s] != NormKind::L2;
}

// Number of extreme points of the ball in slot s (saturating).
double extreme_count(const Multiform& f, std::size_t s) {
  const double d = static_cast<double>(f.dims[s]);
  if (f.dims[s] == 1) return 2.0;
  if (f.balls[s] == NormKind::L1) return 2.0 * d;
  return std::pow(2.0, d);
}

// Extreme points modulo the global sign symmetry x -> -x.
std::vector<Eigen::VectorXd> reduced_extremes(const Multiform& f, std::size_t s) {
  const auto d = static_cast<Eigen::Index>(f.dims[s]);
  std::vector<Eigen::VectorXd> out;
  if (d == 1) {
    out.push_back(Eigen::VectorXd::Ones(1));
  } else if (f.balls[s] == NormKind::L1) {
    for (Eigen::Index j = 0; j < d; ++j) out.push_back(Eigen::VectorXd::Unit(d, j));
  } else {
    const std::uint64_t count = std::uint64_t{1} << (d - 1);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      Eigen::VectorXd v = Eigen::VectorXd::Ones(d);
      for (Eigen::Index j = 1; j < d; ++j) {
        if ((mask >> (j - 1)) & 1u) v(j) = -1.0;
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

double l2_radius(NormKind ball, std::size_t d) {
  return ball == NormKind::LInf ? std::sqrt(static_cast<double>(d)) : 1.0;
}

double relaxed_l2_norm(const Eigen::VectorXd& coeffs, const std::vector<std::size_t>& dims) {
  double best = coeffs.norm();
  for (std::size_t k = 0; k < dims.size(); ++k) {
    best = std::min(best, flattening_spectral_norm(coeffs, dims, k));
  }
  return best;
}

}  // namespace

double flattening_spectral_norm(const Eigen::VectorXd& coeffs, const std::vector<std::size_t>& dims,
                                std::size_t mode) {
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k != mode) rest.push_back(k);
  }
  const std::size_t row = mode;
  const DenseTensor t(dims, std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
  const Eigen::MatrixXd m = flatten(t, std::span<const std::size_t>(&row, 1), rest);
  const Eigen::MatrixXd gram = m.rows() <= m.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                    : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

bool has_exact_upper(const Multiform& f, std::size_t cap) {
  double count = 1.0;
  std::size_t quadratic = 0;
  for (std::size_t s = 0; s < f.dims.size(); ++s) {
    if (enumerable(f, s)) {
      count *= extreme_count(f, s);
    } else {
      ++quadratic;
    }
  }
  return count <= static_cast<double>(cap) && quadratic <= 2;
}

GlobalBound global_upper(const Multiform& f, std::size_t cap) {
  const std::size_t n = f.dims.size();
  GlobalBound out;

  double count = 1.0;
  std::vector<std::size_t> enum_slots;
  std::vector<std::size_t> quad_slots;
  for (std::size_t s = 0; s < n; ++s) {
    if (enumerable(f, s)) {
      count *= extreme_count(f, s);
      enum_slots.push_back(s);
    } else {
      quad_slots.push_back(s);
    }
  }

  if (count > static_cast<double>(cap)) {
    double scale = 1.0;
    for (std::size_t s = 0; s < n; ++s) scale *= l2_radius(f.balls[s], f.dims[s]);
    out.upper = scale * relaxed_l2_norm(f.coeffs, f.dims);
    out.exact = false;
    out.method = "relaxed";
    return out;
  }

  // Depth-first enumeration, contracting enumerable slots from the highest
  // index down so lower slot indices stay valid.
  std::vector<std::size_t> order(enum_slots.rbegin(), enum_slots.rend());
  std::vector<std::vector<Eigen::VectorXd>> extremes;
  for (std::size_t s : order) extremes.push_back(reduced_extremes(f, s));

  std::vector<std::size_t> qdims;
  for (std::size_t s : quad_slots) qdims.push_back(f.dims[s]);
  const bool exact = quad_slots.size() <= 2;

  double best = -1.0;
  Point best_point(n);
  Point current(n);

  std::function<void(std::size_t, const Eigen::VectorXd&, std::vector<std::size_t>)> dfs =
      [&](std::size_t level, const Eigen::VectorXd& coeffs, std::vector<std::size_t> dims) {
        if (level == order.size()) {
          double value = 0.0;
          Point leaf(quad_slots.size());
          if (quad_slots.empty()) {
            value = std::abs(coeffs(0));
          } else if (quad_slots.size() == 1) {
            value = coeffs.norm();
            leaf[0] = value > 0.0 ? Eigen::VectorXd(coeffs / value)
                                  : Eigen::VectorXd::Unit(coeffs.size(), 0);
          } else if (quad_slots.size() == 2) {
            Eigen::Map<const RowMatrix> m(coeffs.data(), static_cast<Eigen::Index>(dims[0]),
                                          static_cast<Eigen::Index>(dims[1]));
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m),
                                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
            value = svd.singularValues()(0);
            leaf[0] = svd.matrixU().col(0);
            leaf[1] = svd.matrixV().col(0);
          } else {
            value = relaxed_l2_norm(coeffs, dims);
          }
          if (value > best) {
            best = value;
            for (std::size_t q = 0; q < quad_slots.size() && exact; ++q) {
              current[quad_slots[q]] = leaf[q];
            }
            best_point = current;
          }
          return;
        }
        const std::size_t slot = order[level];
        auto reduced_dims = dims;
        reduced_dims.erase(reduced_dims.begin() + static_cast<std::ptrdiff_t>(slot));
        for (const auto& v : extremes[level]) {
          current[slot] = v;
          Eigen::VectorXd next = contract_mode(coeffs, dims, slot, v);
          if (reduced_dims.empty()) reduced_dims.push_back(1);
          dfs(level + 1, next, reduced_dims);
        }
      };

  dfs(0, f.coeffs, f.dims);

  out.upper = std::max(best, 0.0);
  out.exact = exact;
  if (exact) {
    out.method = quad_slots.empty() ? "enumeration" : "spectral";
    out.point = best_point;
  } else {
    out.method = "relaxed";
  }
  return out;
}

}  // namespace lipsum::detail
