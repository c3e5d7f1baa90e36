#include "lipsum/hilbert_schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lipsum/errors.hpp"

namespace lipsum {

namespace {

void require_hilbert(const MultilinearOperator& T) {
  const auto& f = T.norms().factors;
  if (std::any_of(f.begin(), f.end(), [](NormKind r) { return r != NormKind::L2; }) ||
      T.norms().codomain != NormKind::L2) {
    throw ArgumentError("Hilbert-Schmidt quantities need l_2 norms on every space");
  }
}

}  // namespace

double hs_norm(const MultilinearOperator& T) {
  require_hilbert(T);
  return T.kernel().as_vector().norm();
}

KhintchineConstant khintchine_constant(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("Khintchine constant needs 1 <= p < inf");
  KhintchineConstant out;
  out.p = p;
  if (p <= 2.0) return out;
  const double moment = std::exp(std::lgamma((p + 1.0) / 2.0)) / std::sqrt(std::numbers::pi);
  out.value = std::numbers::sqrt2 * std::pow(moment, 1.0 / p);
  return out;
}

PairConfiguration basis_configuration(const std::vector<std::size_t>& dims, std::size_t cap) {
  const std::size_t total = product(dims);
  if (total > cap) {
    throw ArgumentError("basis configuration has " + std::to_string(total) +
                        " pairs, above the cap of " + std::to_string(cap));
  }
  PairConfiguration cfg;
  SegrePoint zero;
  for (std::size_t d : dims) zero.factors.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
  std::vector<std::size_t> idx(dims.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    SegrePoint e;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      e.factors.push_back(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dims[k]),
                                                static_cast<Eigen::Index>(idx[k])));
    }
    cfg.add(WeightedPair{std::move(e), zero, 1.0});
    for (std::size_t k = dims.size(); k-- > 0;) {
      if (++idx[k] < dims[k]) break;
      idx[k] = 0;
    }
  }
  return cfg;
}

double basis_config_lower(const MultilinearOperator& T, std::size_t cap) {
  require_hilbert(T);
  const PairConfiguration cfg = basis_configuration(T.factor_dims(), cap);
  return lower_bound_config(T, cfg, 2.0, Ball::HilbertSchmidt).report.certified_lower;
}

SandwichReport verify_sandwich(const MultilinearOperator& T, double p, const SummingBudget& budget) {
  require_hilbert(T);
  SandwichReport out;
  out.p = p;
  out.hs_norm = hs_norm(T);
  out.basis_lower = basis_config_lower(T);
  const double scale = std::max(out.hs_norm, 1e-300);
  out.lower_exact = std::abs(out.basis_lower - out.hs_norm) <= 1e-9 * scale;

  SummingOptions options;
  options.ball = Ball::HilbertSchmidt;
  options.initial_pairs = basis_configuration(T.factor_dims());
  SummingBudget b = budget;
  b.max_pairs = std::max(b.max_pairs, options.initial_pairs.size() + 16);
  const SummingResult run = estimate_pi_lip(T, 2.0, b, options);
  out.lp_constant = run.certificate.constant;
  out.lp_constant_p =
      p == 2.0 ? out.lp_constant
               : pietsch_upper_lp(T, run.certificate.pairset, run.certificate.forms, p,
                                  budget.bisection_steps)
                     .constant;
  out.lp_consistent = out.lp_constant >= out.hs_norm - 1e-7;
  out.ratio = out.hs_norm > 0.0 ? out.lp_constant / out.hs_norm : 0.0;
  out.khintchine = khintchine_constant(p).value;
  out.khintchine_bound = std::pow(out.khintchine, static_cast<double>(T.arity())) * out.hs_norm;
  return out;
}

}  // namespace lipsum
