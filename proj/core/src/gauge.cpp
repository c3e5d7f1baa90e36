#include "lipsum/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lipsum/errors.hpp"
#include "lipsum/random.hpp"
#include "multiform.hpp"

namespace lipsum {

std::string_view to_string(Ball b) { return b == Ball::Operator ? "op" : "hs"; }

Ball ball_from_string(std::string_view s) {
  if (s == "op" || s == "operator") return Ball::Operator;
  if (s == "hs" || s == "hilbert-schmidt") return Ball::HilbertSchmidt;
  throw ArgumentError("ball must be 'op' or 'hs'");
}

namespace {

constexpr std::uint64_t kGaugeSeed = 0x6A09E667F3BCC908ull;

Eigen::VectorXd point_tensor(const detail::Point& x) { return elementary_vector(SegrePoint{x}); }

}  // namespace

OperatorGauge::OperatorGauge(std::vector<std::size_t> dims, std::vector<NormKind> norms,
                             std::size_t enumeration_cap, int restarts)
    : dims_(std::move(dims)), norms_(std::move(norms)), cap_(enumeration_cap), restarts_(restarts) {
  if (dims_.size() != norms_.size()) throw ShapeError("gauge: one norm per factor required");
  const detail::Multiform probe{dims_, norms_, Eigen::VectorXd::Zero(1)};
  exact_ = detail::has_exact_upper(probe, cap_);
}

double OperatorGauge::upper(const Eigen::VectorXd& phi) const {
  return detail::global_upper(detail::form_multiform(phi, dims_, norms_), cap_).upper;
}

GaugeValue OperatorGauge::evaluate(const Eigen::VectorXd& phi) const {
  const detail::Multiform f = detail::form_multiform(phi, dims_, norms_);
  detail::Point best;
  double best_value = -1.0;
  if (exact_) {
    auto gb = detail::global_upper(f, cap_);
    best = std::move(gb.point);
    best_value = gb.upper;
  } else {
    Rng rng(kGaugeSeed);
    for (int r = 0; r <= restarts_; ++r) {
      Rng local = rng.fork(static_cast<std::uint64_t>(r));
      detail::Point start = r == 0 ? detail::spectral_start(f) : detail::random_point(f, local);
      auto lm = detail::alternating_max(f, std::move(start), 100, 1e-11);
      if (lm.value > best_value) {
        best_value = lm.value;
        best = std::move(lm.point);
      }
    }
  }
  GaugeValue out;
  out.gradient = point_tensor(best);
  const double signed_value = phi.dot(out.gradient);
  if (signed_value < 0.0) out.gradient = -out.gradient;
  out.value = std::abs(signed_value);
  return out;
}

GaugeValue FrobeniusGauge::evaluate(const Eigen::VectorXd& phi) const {
  GaugeValue out;
  out.value = phi.norm();
  out.gradient = out.value > 0.0 ? Eigen::VectorXd(phi / out.value)
                                 : Eigen::VectorXd::Zero(phi.size());
  return out;
}

PolynomialGauge::PolynomialGauge(std::size_t dim, std::size_t degree, NormKind norm,
                                 std::size_t enumeration_cap, int restarts)
    : dim_(dim), degree_(degree), norm_(norm), cap_(enumeration_cap), restarts_(restarts),
      dims_(degree, dim) {
  if (dim == 0 || degree == 0) throw ArgumentError("polynomial gauge needs dim, degree >= 1");
}

double PolynomialGauge::polarization_constant() const {
  if (dim_ == 1 || degree_ == 1 || norm_ == NormKind::L2) return 1.0;
  const double n = static_cast<double>(degree_);
  return std::pow(n, n) / std::tgamma(n + 1.0);
}

double PolynomialGauge::value_at(const Eigen::VectorXd& phi, const Eigen::VectorXd& x) const {
  const detail::Point pt(degree_, x);
  return contract_except(phi, dims_, pt, 0).dot(x);
}

double PolynomialGauge::upper(const Eigen::VectorXd& phi) const {
  if (degree_ == 1) return vector_norm(phi, dual(norm_));
  if (dim_ == 1) return std::abs(phi(0));
  const Eigen::VectorXd sym = symmetrize(phi, dim_, degree_);
  return detail::global_upper(
             detail::form_multiform(sym, dims_, std::vector<NormKind>(degree_, norm_)), cap_)
      .upper;
}

GaugeValue PolynomialGauge::evaluate(const Eigen::VectorXd& phi) const {
  GaugeValue out;
  if (degree_ == 1) {
    out.value = vector_norm(phi, dual(norm_));
    out.gradient = norming_functional(phi, dual(norm_));
    return out;
  }
  if (dim_ == 1) {
    out.value = std::abs(phi(0));
    out.gradient = Eigen::VectorXd::Constant(1, phi(0) >= 0.0 ? 1.0 : -1.0);
    return out;
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  std::vector<Eigen::VectorXd> starts;
  for (Eigen::Index j = 0; j < d; ++j) starts.push_back(Eigen::VectorXd::Unit(d, j));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
  starts.push_back(ones / vector_norm(ones, norm_));
  Rng rng(kGaugeSeed, 1);
  for (int r = 0; r < restarts_; ++r) starts.push_back(rng.unit_vector(d, norm_));

  auto gradient_at = [&](const Eigen::VectorXd& x) {
    const detail::Point pt(degree_, x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < degree_; ++k) g += contract_except(phi, dims_, pt, k);
    return g;
  };

  double best_value = -1.0;
  Eigen::VectorXd best_x = starts.front();
  for (auto x : starts) {
    double q = value_at(phi, x);
    double step = 0.5;
    for (int it = 0; it < 300 && step > 1e-12; ++it) {
      const Eigen::VectorXd g = gradient_at(x);
      const double gn = g.norm();
      if (gn == 0.0) break;
      const double sign = q >= 0.0 ? 1.0 : -1.0;
      Eigen::VectorXd trial = x + step * sign * g / gn;
      const double tn = vector_norm(trial, norm_);
      if (tn == 0.0) {
        step *= 0.5;
        continue;
      }
      trial /= tn;
      const double tq = value_at(phi, trial);
      if (std::abs(tq) > std::abs(q) * (1.0 + 1e-14)) {
        const bool small = std::abs(tq) - std::abs(q) <= 1e-13 * std::abs(tq);
        x = trial;
        q = tq;
        step = std::min(1.0, step * 1.5);
        if (small) break;
      } else {
        step *= 0.5;
      }
    }
    if (std::abs(q) > best_value) {
      best_value = std::abs(q);
      best_x = x;
    }
  }
  out.gradient = elementary_vector(SegrePoint{detail::Point(degree_, best_x)});
  const double signed_value = phi.dot(out.gradient);
  if (signed_value < 0.0) out.gradient = -out.gradient;
  out.value = std::abs(signed_value);
  return out;
}

std::unique_ptr<FormGauge> make_gauge(Ball ball, std::vector<std::size_t> dims,
                                      std::vector<NormKind> norms) {
  if (ball == Ball::HilbertSchmidt) return std::make_unique<FrobeniusGauge>();
  return std::make_unique<OperatorGauge>(std::move(dims), std::move(norms));
}

namespace {

std::vector<std::size_t> unravel(std::size_t flat, std::size_t dim, std::size_t degree) {
  std::vector<std::size_t> idx(degree);
  for (std::size_t k = degree; k-- > 0;) {
    idx[k] = flat % dim;
    flat /= dim;
  }
  return idx;
}

}  // namespace

Eigen::VectorXd symmetrize(const Eigen::VectorXd& phi, std::size_t dim, std::size_t degree) {
  const std::size_t total = static_cast<std::size_t>(phi.size());
  std::size_t expected = 1;
  for (std::size_t k = 0; k < degree; ++k) expected *= dim;
  if (total != expected) throw ShapeError("symmetrize: form length does not match dim^degree");
  std::vector<std::size_t> perm(degree);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(phi.size());
  std::size_t count = 0;
  do {
    for (std::size_t flat = 0; flat < total; ++flat) {
      const auto idx = unravel(flat, dim, degree);
      std::size_t permuted = 0;
      for (std::size_t k = 0; k < degree; ++k) permuted = permuted * dim + idx[perm[k]];
      out(static_cast<Eigen::Index>(flat)) += phi(static_cast<Eigen::Index>(permuted));
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out / static_cast<double>(count);
}

bool is_symmetric(const Eigen::VectorXd& phi, std::size_t dim, std::size_t degree,
                  double tolerance) {
  const Eigen::VectorXd sym = symmetrize(phi, dim, degree);
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  return (sym - phi).cwiseAbs().maxCoeff() <= tolerance * scale;
}

}  // namespace lipsum
