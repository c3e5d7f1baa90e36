#include "lipsum/summing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "lipsum/dictionary.hpp"
#include "lipsum/errors.hpp"
#include "lipsum/parallel.hpp"
#include "lipsum/random.hpp"
#include "lipsum/simplex.hpp"

namespace lipsum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("p must be a finite real >= 1");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return Rng::splitmix64(seed ^ (tag * 0x9E3779B97F4A7C15ull));
}

SegrePoint zero_point(const std::vector<std::size_t>& dims) {
  SegrePoint z;
  for (std::size_t d : dims) z.factors.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
  return z;
}

// Search space for configuration points.
class Geometry {
 public:
  virtual ~Geometry() = default;
  virtual SegrePoint lift(const Eigen::VectorXd& params) const = 0;
  /// Gradient of params -> psi(lift(params)) for a form psi.
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& psi,
                                   const Eigen::VectorXd& params) const = 0;
  virtual Eigen::VectorXd random(Rng& rng) const = 0;
  virtual Eigen::Index size() const = 0;
  /// Rescales a pair without changing the ratio being maximized.
  virtual void normalize_pair(Eigen::VectorXd& a, Eigen::VectorXd& b) const = 0;
};

class MultilinearGeometry final : public Geometry {
 public:
  MultilinearGeometry(std::vector<std::size_t> dims, std::vector<NormKind> norms)
      : dims_(std::move(dims)), norms_(std::move(norms)) {
    offsets_.push_back(0);
    for (std::size_t d : dims_) offsets_.push_back(offsets_.back() + static_cast<Eigen::Index>(d));
  }

  SegrePoint lift(const Eigen::VectorXd& params) const override {
    SegrePoint x;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      x.factors.emplace_back(params.segment(offsets_[k], static_cast<Eigen::Index>(dims_[k])));
    }
    return x;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& psi,
                           const Eigen::VectorXd& params) const override {
    const SegrePoint x = lift(params);
    Eigen::VectorXd g(size());
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      g.segment(offsets_[k], static_cast<Eigen::Index>(dims_[k])) =
          contract_except(psi, dims_, x.factors, k);
    }
    return g;
  }

  Eigen::VectorXd random(Rng& rng) const override {
    Eigen::VectorXd out(size());
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      out.segment(offsets_[k], static_cast<Eigen::Index>(dims_[k])) =
          rng.unit_vector(static_cast<Eigen::Index>(dims_[k]), norms_[k]);
    }
    return out;
  }

  Eigen::Index size() const override { return offsets_.back(); }

  void normalize_pair(Eigen::VectorXd& a, Eigen::VectorXd& b) const override {
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      const auto len = static_cast<Eigen::Index>(dims_[k]);
      const double s = std::max(vector_norm(Eigen::VectorXd(a.segment(offsets_[k], len)), norms_[k]),
                                vector_norm(Eigen::VectorXd(b.segment(offsets_[k], len)), norms_[k]));
      if (s > 0.0) {
        a.segment(offsets_[k], len) /= s;
        b.segment(offsets_[k], len) /= s;
      }
    }
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<NormKind> norms_;
  std::vector<Eigen::Index> offsets_;
};

class DiagonalGeometry final : public Geometry {
 public:
  DiagonalGeometry(std::size_t dim, std::size_t degree, NormKind norm)
      : dim_(dim), degree_(degree), norm_(norm), dims_(degree, dim) {}

  SegrePoint lift(const Eigen::VectorXd& params) const override {
    return SegrePoint{std::vector<Eigen::VectorXd>(degree_, params)};
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& psi,
                           const Eigen::VectorXd& params) const override {
    const SegrePoint x = lift(params);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
    for (std::size_t k = 0; k < degree_; ++k) g += contract_except(psi, dims_, x.factors, k);
    return g;
  }

  Eigen::VectorXd random(Rng& rng) const override { return rng.unit_vector(size(), norm_); }

  Eigen::Index size() const override { return static_cast<Eigen::Index>(dim_); }

  void normalize_pair(Eigen::VectorXd& a, Eigen::VectorXd& b) const override {
    const double s = std::max(vector_norm(a, norm_), vector_norm(b, norm_));
    if (s > 0.0) {
      a /= s;
      b /= s;
    }
  }

 private:
  std::size_t dim_;
  std::size_t degree_;
  NormKind norm_;
  std::vector<std::size_t> dims_;
};

struct Problem {
  const MultilinearOperator* T = nullptr;
  double p = 1.0;
  Ball ball = Ball::Operator;
  bool polynomial = false;
  std::vector<NormKind> norms;
  std::shared_ptr<const FormGauge> gauge;
  std::unique_ptr<Geometry> geometry;

  DenominatorResult denominator(const PairConfiguration& cfg, const AscentOptions& opts,
                                std::span<const Eigen::VectorXd> starts) const {
    if (polynomial) return config_denominator_poly(cfg, p, norms.front(), opts, starts);
    return config_denominator(cfg, p, ball, norms, opts, starts);
  }

  Eigen::VectorXd prepare_form(const Eigen::VectorXd& phi) const {
    if (!polynomial) return phi;
    return symmetrize(phi, T->factor_dims().front(), T->arity());
  }
};

ConfigLowerResult lower_with(const Problem& P, const PairConfiguration& cfg,
                             const AscentOptions& opts, std::span<const Eigen::VectorXd> starts) {
  const MultilinearOperator& T = *P.T;
  std::size_t dropped = 0;
  const PairConfiguration filtered = cfg.without_degenerate(&dropped);
  if (filtered.empty()) throw ArgumentError("all pairs in the configuration are degenerate");
  ConfigLowerResult out;
  double sum = 0.0;
  for (const auto& pr : filtered.pairs()) {
    sum += pr.weight * std::pow(difference_value(T, pr.u, pr.v), P.p);
  }
  out.numerator = std::pow(sum, 1.0 / P.p);
  out.denominator = P.denominator(filtered, opts, starts);
  const BoundReport& d = out.denominator.report;
  out.report.seed = opts.seed;
  out.report.method = "configuration;" + d.method;
  if (out.numerator == 0.0) {
    out.report.normalize();
    return out;
  }
  out.report.certified_lower = d.certified_upper > 0.0 ? out.numerator / d.certified_upper : kInf;
  out.report.heuristic_lower = d.heuristic_lower > 0.0 ? out.numerator / d.heuristic_lower : kInf;
  out.report.iterations = d.iterations;
  out.report.restarts = d.restarts;
  out.report.normalize();
  return out;
}

struct Candidate {
  SegrePoint u;
  SegrePoint v;
  double ratio = 0.0;
};

// Ascent on log(||T(u) - T(v)||^p / sum_j w_j |phi_j(Delta)|^p) from several
// starts; returns pairs whose ratio exceeds c^p.
std::vector<Candidate> adversarial_pairs(const Problem& P, const PietschCertificate& cert,
                                         const SummingBudget& budget, std::uint64_t seed) {
  const MultilinearOperator& T = *P.T;
  const double p = P.p;
  const Geometry& geo = *P.geometry;
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < cert.weights.size(); ++j) {
    if (cert.weights(j) > 1e-15) active.push_back(j);
  }
  if (active.empty() || !std::isfinite(cert.constant)) return {};
  const auto D = static_cast<Eigen::Index>(T.domain_size());
  Eigen::MatrixXd Phi(D, static_cast<Eigen::Index>(active.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) {
    Phi.col(static_cast<Eigen::Index>(j)) = cert.forms[static_cast<std::size_t>(active[j])];
    w(static_cast<Eigen::Index>(j)) = cert.weights(active[j]);
  }
  const Eigen::Map<const RowMatrix> K = T.matrix();
  const NormKind codomain = T.norms().codomain;
  const double threshold = std::pow(cert.constant, p) * (1.0 + 1e-9);

  struct Eval {
    double log_ratio = -kInf;
    double ratio = 0.0;
    Eigen::VectorXd grad;
  };
  auto evaluate = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool with_grad) {
    Eval e;
    const Eigen::VectorXd delta = elementary_vector(geo.lift(a)) - elementary_vector(geo.lift(b));
    const Eigen::VectorXd y = K.transpose() * delta;
    const double N = vector_norm(y, codomain);
    if (N == 0.0) return e;
    const Eigen::VectorXd z = Phi.transpose() * delta;
    double S = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) S += w(j) * std::pow(std::abs(z(j)), p);
    if (S == 0.0) {
      e.ratio = kInf;
      e.log_ratio = kInf;
      return e;
    }
    e.ratio = std::pow(N, p) / S;
    e.log_ratio = p * std::log(N) - std::log(S);
    if (!with_grad) return e;
    const Eigen::VectorXd psi = K * norming_functional(y, codomain);
    Eigen::VectorXd coef(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double sgn = z(j) > 0.0 ? 1.0 : (z(j) < 0.0 ? -1.0 : 0.0);
      coef(j) = w(j) * p * std::pow(std::abs(z(j)), p - 1.0) * sgn;
    }
    const Eigen::VectorXd chi = Phi * coef;
    const Eigen::VectorXd form = (p / N) * psi - chi / S;
    e.grad.resize(2 * geo.size());
    e.grad.head(geo.size()) = geo.gradient(form, a);
    e.grad.tail(geo.size()) = -geo.gradient(form, b);
    return e;
  };

  const auto starts = static_cast<std::size_t>(std::max(0, budget.adversarial_starts));
  std::vector<Candidate> found(starts);
  const Rng root(seed);
  parallel_for(starts, [&](std::size_t s) {
    Rng rng = root.fork(s);
    Eigen::VectorXd a = geo.random(rng);
    Eigen::VectorXd b;
    switch (s % 3) {
      case 0:
        b = geo.random(rng);
        break;
      case 1:
        b = Eigen::VectorXd::Zero(geo.size());
        break;
      default:
        b = a + 0.25 * geo.random(rng);
        break;
    }
    geo.normalize_pair(a, b);
    Eval cur = evaluate(a, b, true);
    double step = 0.25;
    for (int it = 0; it < 80 && std::isfinite(cur.log_ratio) && step > 1e-9; ++it) {
      const double gn = cur.grad.norm();
      if (gn == 0.0 || !std::isfinite(gn)) break;
      Eigen::VectorXd a2 = a + step * cur.grad.head(geo.size()) / gn;
      Eigen::VectorXd b2 = b + step * cur.grad.tail(geo.size()) / gn;
      geo.normalize_pair(a2, b2);
      Eval next = evaluate(a2, b2, true);
      if (next.log_ratio > cur.log_ratio) {
        const bool small = next.log_ratio - cur.log_ratio < 1e-10;
        a = std::move(a2);
        b = std::move(b2);
        cur = std::move(next);
        step = std::min(1.0, step * 2.0);
        if (small) break;
      } else {
        step *= 0.5;
      }
    }
    found[s] = Candidate{geo.lift(a), geo.lift(b), cur.ratio};
  });

  std::vector<Candidate> out;
  for (auto& c : found) {
    if (c.ratio > threshold) out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& x, const Candidate& y) { return x.ratio > y.ratio; });
  return out;
}

// sup of ||T(x, ..., x)|| over the unit ball by ascent with radial retraction.
std::pair<double, Eigen::VectorXd> diagonal_norm_search(const MultilinearOperator& T,
                                                        std::uint64_t seed, int restarts) {
  const std::size_t d = T.factor_dims().front();
  const std::size_t n = T.arity();
  const NormKind r = T.norms().factors.front();
  const NormKind codomain = T.norms().codomain;
  const DiagonalGeometry geo(d, n, r);
  const Eigen::Map<const RowMatrix> K = T.matrix();
  auto value = [&](const Eigen::VectorXd& x) {
    return vector_norm(Eigen::VectorXd(K.transpose() * elementary_vector(geo.lift(x))), codomain);
  };
  std::vector<Eigen::VectorXd> starts;
  const auto di = static_cast<Eigen::Index>(d);
  for (Eigen::Index j = 0; j < di; ++j) starts.push_back(Eigen::VectorXd::Unit(di, j));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(di);
  starts.push_back(ones / vector_norm(ones, r));
  Rng rng(seed);
  for (int i = 0; i < restarts; ++i) starts.push_back(rng.unit_vector(di, r));

  double best = -1.0;
  Eigen::VectorXd best_x = starts.front();
  for (auto x : starts) {
    double v = value(x);
    double step = 0.5;
    for (int it = 0; it < 300 && step > 1e-12; ++it) {
      const Eigen::VectorXd y = K.transpose() * elementary_vector(geo.lift(x));
      const Eigen::VectorXd g = geo.gradient(K * norming_functional(y, codomain), x);
      const double gn = g.norm();
      if (gn == 0.0) break;
      Eigen::VectorXd trial = x + step * g / gn;
      const double tn = vector_norm(trial, r);
      if (tn == 0.0) {
        step *= 0.5;
        continue;
      }
      trial /= tn;
      const double tv = value(trial);
      if (tv > v) {
        const bool small = tv - v <= 1e-13 * tv;
        x = std::move(trial);
        v = tv;
        step = std::min(1.0, step * 1.5);
        if (small) break;
      } else {
        step *= 0.5;
      }
    }
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return {std::max(best, 0.0), best_x};
}

SummingResult run_pipeline(const Problem& P, const SummingBudget& B, const SummingOptions& O) {
  check_exponent(P.p);
  const MultilinearOperator& T = *P.T;
  const double p = P.p;
  const auto& dims = T.factor_dims();
  const std::size_t D = T.domain_size();
  SummingResult result;

  AscentOptions asc;
  asc.restarts = B.restarts;
  asc.max_iterations = B.max_iterations;
  asc.seed = derive_seed(B.seed, 1);

  // Norm of T and its maximizer.
  if (P.polynomial) {
    auto [value, x] = diagonal_norm_search(T, derive_seed(B.seed, 2), B.restarts);
    result.norm.argmax = P.geometry->lift(x);
    result.norm.report = operator_norm(T, asc).report;
    result.norm.report.certified_lower = value;
    result.norm.report.heuristic_lower = value;
    result.norm.report.method = "diagonal-ascent";
    result.norm.report.normalize();
  } else {
    result.norm = operator_norm(T, asc);
  }

  PairConfiguration pairs;
  pairs.add(WeightedPair{result.norm.argmax, zero_point(dims), 1.0});
  for (const auto& pr : O.initial_pairs.pairs()) {
    if (pr.u.dims() != dims || pr.v.dims() != dims) {
      throw ShapeError("initial pair dimensions do not match the operator");
    }
    pairs.add(pr);
  }
  {
    Rng rng(derive_seed(B.seed, 3));
    for (int i = 0; i < B.random_pairs; ++i) {
      const SegrePoint u = P.geometry->lift(P.geometry->random(rng));
      const SegrePoint v = i % 2 == 0 ? P.geometry->lift(P.geometry->random(rng)) : zero_point(dims);
      pairs.add(WeightedPair{u, v, 1.0});
    }
  }

  Dictionary dict(P.gauge, D);
  const bool fixed = O.dictionary.has_value();
  auto add_form = [&](const Eigen::VectorXd& phi) {
    if (fixed || dict.size() >= B.max_dictionary || phi.size() == 0) return false;
    return dict.add(P.prepare_form(phi));
  };
  auto add_pair_forms = [&](const SegrePoint& u, const SegrePoint& v) {
    PairConfiguration single;
    single.add(WeightedPair{u, v, 1.0});
    for (const auto& f : norming_forms(single, P.norms, 2)) add_form(f);
    add_form(elementary_vector(u) - elementary_vector(v));
  };
  const Eigen::Map<const RowMatrix> K = T.matrix();
  if (fixed) {
    for (const auto& f : *O.dictionary) {
      if (static_cast<std::size_t>(f.size()) != D) throw ShapeError("dictionary form length");
      dict.add(P.prepare_form(f));
    }
    if (dict.empty()) throw ArgumentError("dictionary contains no usable form");
  } else {
    for (Eigen::Index j = 0; j < K.cols(); ++j) add_form(K.col(j));
    const Eigen::VectorXd tx = eval_operator(T, result.norm.argmax);
    if (K.cols() > 1) add_form(K * norming_functional(tx, T.norms().codomain));
    for (const auto& f : norming_forms(pairs, P.norms, 2 * pairs.size())) add_form(f);
    Rng rng(derive_seed(B.seed, 4));
    for (int i = 0; i < B.random_forms; ++i) {
      add_form(rng.normal_vector(static_cast<Eigen::Index>(D)));
    }
    if (dict.empty()) add_form(elementary_vector(result.norm.argmax));
  }

  double best_cl = 0.0;
  double best_hl = 0.0;
  std::vector<Eigen::VectorXd> carry;
  auto evaluate_config = [&](const PairConfiguration& cfg, std::span<const Eigen::VectorXd> starts,
                             std::uint64_t tag) -> std::optional<ConfigLowerResult> {
    if (cfg.empty()) return std::nullopt;
    AscentOptions o = asc;
    o.seed = derive_seed(B.seed, tag);
    std::optional<ConfigLowerResult> lr;
    try {
      lr = lower_with(P, cfg, o, starts);
    } catch (const ArgumentError&) {
      return std::nullopt;
    }
    if (result.witness.empty() || lr->report.certified_lower > best_cl) {
      best_cl = lr->report.certified_lower;
      result.witness = cfg;
    }
    best_hl = std::max(best_hl, lr->report.heuristic_lower);
    return lr;
  };

  {
    PairConfiguration single;
    single.add(pairs.pairs().front());
    evaluate_config(single, {}, 100);
  }

  PietschCertificate cert;
  for (int round = 0;; ++round) {
    cert = pietsch_upper_lp(T, pairs, dict.forms(), p, B.bisection_steps);
    cert.dims = dims;
    result.rounds = round + 1;
    const bool last = round >= B.rounds;
    if (!cert.feasible) {
      if (fixed || last) {
        result.dictionary_exhausted = true;
        break;
      }
      bool grew = false;
      const Eigen::MatrixXd A = difference_matrix(pairs, 1.0);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& pr = pairs.pairs()[i];
        if (difference_value(T, pr.u, pr.v) == 0.0) continue;
        double seen = 0.0;
        for (const auto& f : dict.forms()) {
          seen = std::max(seen, std::abs(f.dot(A.row(static_cast<Eigen::Index>(i)))));
        }
        if (seen == 0.0) grew |= add_form(A.row(static_cast<Eigen::Index>(i)).transpose());
      }
      if (!grew) {
        result.dictionary_exhausted = true;
        break;
      }
      continue;
    }

    // Lower bound from the configuration the dual program singles out.
    const PairConfiguration dual_cfg = dual_configuration(cert);
    std::vector<Eigen::VectorXd> starts = carry;
    if (!dual_cfg.empty()) {
      const Eigen::MatrixXd A = difference_matrix(dual_cfg, p);
      std::vector<std::pair<double, std::size_t>> scores;
      for (std::size_t j = 0; j < cert.forms.size(); ++j) {
        scores.emplace_back(power_norm(A * cert.forms[j], p), j);
      }
      std::stable_sort(scores.begin(), scores.end(),
                       [](const auto& x, const auto& y) { return x.first > y.first; });
      for (std::size_t j = 0; j < std::min<std::size_t>(4, scores.size()); ++j) {
        starts.push_back(cert.forms[scores[j].second]);
      }
    }
    const auto lr = evaluate_config(dual_cfg, starts, 200 + static_cast<std::uint64_t>(round));
    if (lr) {
      carry = {lr->denominator.maximizer, lr->denominator.heuristic_maximizer};
      std::erase_if(carry, [](const Eigen::VectorXd& v) { return v.size() == 0; });
    }

    const double closed_at = best_cl * (1.0 + 1e-9) + 1e-12;
    if (cert.constant <= closed_at || last) break;

    bool grew = false;
    if (lr) {
      grew |= add_form(lr->denominator.maximizer);
      grew |= add_form(lr->denominator.heuristic_maximizer);
    }
    const auto violators =
        adversarial_pairs(P, cert, B, derive_seed(B.seed, 300 + static_cast<std::uint64_t>(round)));
    std::size_t added = 0;
    for (const auto& c : violators) {
      if (pairs.size() >= B.max_pairs) break;
      if (std::isinf(c.ratio) && difference_value(T, c.u, c.v) == 0.0) continue;
      pairs.add(WeightedPair{c.u, c.v, 1.0});
      ++added;
      add_pair_forms(c.u, c.v);
      if (added >= 8) break;
    }
    if (!grew && added == 0) break;
  }

  result.certificate = std::move(cert);
  BoundReport& rep = result.report;
  rep.seed = B.seed;
  rep.iterations = result.rounds;
  rep.restarts = B.restarts;
  rep.certified_lower = best_cl;
  rep.heuristic_lower = best_hl;
  rep.heuristic_upper = result.certificate.feasible ? result.certificate.constant : kInf;
  const bool hilbert = std::all_of(P.norms.begin(), P.norms.end(),
                                   [](NormKind r) { return r == NormKind::L2; }) &&
                       T.norms().codomain == NormKind::L2;
  if (!P.polynomial && P.ball == Ball::HilbertSchmidt && p == 2.0 && hilbert) {
    // The H-summing norm at p = 2 coincides with the Hilbert-Schmidt norm.
    rep.certified_upper = T.kernel().as_vector().norm();
  }
  rep.method = std::string(P.polynomial ? "polynomial" : "multilinear") + ";pietsch-lp;" +
               std::string(to_string(P.ball)) +
               (result.dictionary_exhausted ? ";dictionary-exhausted" : "");
  if (rep.certified_lower > rep.heuristic_upper + 1e-6) {
    throw std::logic_error("certified lower bound exceeds the LP constant");
  }
  rep.normalize();
  return result;
}

}  // namespace

double difference_value(const MultilinearOperator& T, const SegrePoint& u, const SegrePoint& v) {
  return vector_norm(Eigen::VectorXd(eval_operator(T, u) - eval_operator(T, v)),
                     T.norms().codomain);
}

ConfigLowerResult lower_bound_config(const MultilinearOperator& T, const PairConfiguration& cfg,
                                     double p, Ball ball, const AscentOptions& options,
                                     std::span<const Eigen::VectorXd> start_forms) {
  check_exponent(p);
  if (cfg.empty()) throw ArgumentError("configuration is empty");
  if (cfg.dims() != T.factor_dims()) throw ShapeError("configuration dimensions do not match");
  Problem P;
  P.T = &T;
  P.p = p;
  P.ball = ball;
  P.norms = T.norms().factors;
  return lower_with(P, cfg, options, start_forms);
}

PietschCertificate pietsch_upper_lp(const MultilinearOperator& T, const PairConfiguration& pairset,
                                    const std::vector<Eigen::VectorXd>& forms, double p,
                                    int bisection_steps) {
  check_exponent(p);
  if (pairset.empty()) throw ArgumentError("pairset is empty");
  if (pairset.dims() != T.factor_dims()) throw ShapeError("pairset dimensions do not match");
  if (forms.empty()) throw ArgumentError("dictionary is empty");
  const auto D = static_cast<Eigen::Index>(T.domain_size());
  for (const auto& f : forms) {
    if (f.size() != D) throw ShapeError("dictionary form length does not match the operator");
  }
  PietschCertificate cert;
  cert.dims = T.factor_dims();
  cert.forms = forms;
  cert.p = p;
  cert.pairset = pairset;
  const auto J = static_cast<Eigen::Index>(forms.size());
  const auto k = static_cast<Eigen::Index>(pairset.size());
  cert.weights = Eigen::VectorXd::Constant(J, 1.0 / static_cast<double>(J));
  cert.config_weights = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd Phi(D, J);
  for (Eigen::Index j = 0; j < J; ++j) Phi.col(j) = forms[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd Delta = difference_matrix(pairset, 1.0);
  const Eigen::MatrixXd S = (Delta * Phi).cwiseAbs().array().pow(p).matrix();
  Eigen::VectorXd t(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& pr = pairset.pairs()[static_cast<std::size_t>(i)];
    t(i) = std::pow(difference_value(T, pr.u, pr.v), p);
  }

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (t(i) > 0.0) rows.push_back(i);
  }
  if (rows.empty()) {
    cert.constant = 0.0;
    cert.dual_constant = 0.0;
    return cert;
  }
  for (Eigen::Index i : rows) {
    if (S.row(i).maxCoeff() <= 0.0) {
      cert.feasible = false;
      cert.constant = kInf;
      cert.dual_constant = kInf;
      return cert;
    }
  }
  const auto ka = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd St(ka, J);
  for (Eigen::Index r = 0; r < ka; ++r) St.row(r) = S.row(rows[static_cast<std::size_t>(r)]) / t(rows[static_cast<std::size_t>(r)]);
  const double scale = St.maxCoeff();
  St /= scale;

  // Dual program: min mu subject to St^T a <= mu, sum a = 1, a >= 0.
  LinearProgram dual;
  dual.A = Eigen::MatrixXd::Zero(J + 1, ka + 1);
  dual.A.topLeftCorner(J, ka) = St.transpose();
  dual.A.topRightCorner(J, 1).setConstant(-1.0);
  dual.A.bottomLeftCorner(1, ka).setOnes();
  dual.b = Eigen::VectorXd::Zero(J + 1);
  dual.b(J) = 1.0;
  dual.sense.assign(static_cast<std::size_t>(J), RowSense::LessEqual);
  dual.sense.push_back(RowSense::Equal);
  dual.c = Eigen::VectorXd::Zero(ka + 1);
  dual.c(ka) = -1.0;
  const LpSolution ds = solve_lp(dual);
  if (ds.status != LpStatus::Optimal) throw std::runtime_error("dual domination program failed");
  const double mu = ds.x(ka);

  // Feasibility of St w >= beta, sum w = 1 for a given beta.
  auto feasible_at = [&](double beta, Eigen::VectorXd* w) {
    LinearProgram lp;
    lp.A = Eigen::MatrixXd::Zero(ka + 1, J);
    lp.A.topRows(ka) = St;
    lp.A.bottomRows(1).setOnes();
    lp.b = Eigen::VectorXd::Constant(ka + 1, beta);
    lp.b(ka) = 1.0;
    lp.sense.assign(static_cast<std::size_t>(ka), RowSense::GreaterEqual);
    lp.sense.push_back(RowSense::Equal);
    const LpSolution sol = find_feasible(lp);
    if (sol.status != LpStatus::Optimal) return false;
    if (w) *w = sol.x;
    return true;
  };

  // Bisection on beta = 1 / c^p. The uniform measure and the per-row maxima
  // bracket the optimum; the dual value tightens the upper end.
  Eigen::VectorXd w_best = Eigen::VectorXd::Constant(J, 1.0 / static_cast<double>(J));
  double lo = (St * w_best).minCoeff();
  double hi = St.rowwise().maxCoeff().minCoeff();
  if (mu > 0.0) hi = std::min(hi, mu * (1.0 + 1e-12));
  int steps = 0;
  if (mu > lo) {
    Eigen::VectorXd w;
    const double probe = mu * (1.0 - 1e-10);
    ++steps;
    if (probe > lo && feasible_at(probe, &w)) {
      lo = probe;
      w_best = w;
    }
  }
  while (steps < bisection_steps && hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    Eigen::VectorXd w;
    ++steps;
    if (feasible_at(mid, &w)) {
      lo = mid;
      w_best = w;
    } else {
      hi = mid;
    }
  }
  cert.bisection_steps = steps;
  w_best = w_best.cwiseMax(0.0);
  w_best /= w_best.sum();
  cert.weights = w_best;

  // Constant of the returned measure, computed directly.
  const Eigen::VectorXd Sw = S * w_best;
  double cp = 0.0;
  for (Eigen::Index i : rows) {
    if (Sw(i) <= 0.0) {
      cp = kInf;
      break;
    }
    cp = std::max(cp, t(i) / Sw(i));
  }
  cert.constant = std::pow(cp, 1.0 / p);

  // Configuration from the dual solution and its restricted ratio.
  double num = 0.0;
  Eigen::VectorXd den = Eigen::VectorXd::Zero(J);
  for (Eigen::Index r = 0; r < ka; ++r) {
    const double a = std::max(0.0, ds.x(r));
    if (a == 0.0) continue;
    const Eigen::Index i = rows[static_cast<std::size_t>(r)];
    cert.config_weights(i) = a / t(i);
    num += cert.config_weights(i) * t(i);
    den += cert.config_weights(i) * S.row(i).transpose();
  }
  const double dmax = den.maxCoeff();
  cert.dual_constant = dmax > 0.0 ? std::pow(num / dmax, 1.0 / p) : kInf;
  return cert;
}

double certificate_violation(const MultilinearOperator& T, const PietschCertificate& cert) {
  if (!cert.feasible || !std::isfinite(cert.constant)) return 0.0;
  const double p = cert.p;
  const double cp = std::pow(cert.constant, p);
  double worst = 0.0;
  for (const auto& pr : cert.pairset.pairs()) {
    const double t = std::pow(difference_value(T, pr.u, pr.v), p);
    if (t == 0.0) continue;
    const Eigen::VectorXd delta = elementary_vector(pr.u) - elementary_vector(pr.v);
    double s = 0.0;
    for (std::size_t j = 0; j < cert.forms.size(); ++j) {
      s += cert.weights(static_cast<Eigen::Index>(j)) * std::pow(std::abs(cert.forms[j].dot(delta)), p);
    }
    const double rhs = cp * s;
    if (rhs <= 0.0) return kInf;
    worst = std::max(worst, t / rhs - 1.0);
  }
  return worst;
}

PairConfiguration dual_configuration(const PietschCertificate& cert) {
  PairConfiguration out;
  if (cert.config_weights.size() == 0) return out;
  const double top = cert.config_weights.maxCoeff();
  if (!(top > 0.0)) return out;
  for (std::size_t i = 0; i < cert.pairset.size(); ++i) {
    const double a = cert.config_weights(static_cast<Eigen::Index>(i));
    if (a > 1e-12 * top) {
      const auto& pr = cert.pairset.pairs()[i];
      out.add(WeightedPair{pr.u, pr.v, a});
    }
  }
  return out;
}

SummingResult estimate_pi_lip(const MultilinearOperator& T, double p, const SummingBudget& budget,
                              const SummingOptions& options) {
  Problem P;
  P.T = &T;
  P.p = p;
  P.ball = options.ball;
  P.norms = T.norms().factors;
  P.gauge = std::shared_ptr<const FormGauge>(make_gauge(options.ball, T.factor_dims(), P.norms));
  P.geometry = std::make_unique<MultilinearGeometry>(T.factor_dims(), P.norms);
  return run_pipeline(P, budget, options);
}

FactorizationBundle build_factorization(const PietschCertificate& cert,
                                        const std::vector<SegrePoint>& samples,
                                        const MultilinearOperator& T, double tolerance) {
  if (!cert.feasible || !std::isfinite(cert.constant)) {
    throw ArgumentError("factorization needs a feasible certificate with finite constant");
  }
  FactorizationBundle out;
  out.certificate = cert;
  out.samples = samples;
  const double p = cert.p;
  const auto J = static_cast<Eigen::Index>(cert.forms.size());
  auto embed = [&](const SegrePoint& x) {
    const Eigen::VectorXd e = elementary_vector(x);
    Eigen::VectorXd j(J);
    for (Eigen::Index i = 0; i < J; ++i) {
      j(i) = std::pow(cert.weights(i), 1.0 / p) * cert.forms[static_cast<std::size_t>(i)].dot(e);
    }
    return j;
  };
  const NormKind codomain = T.norms().codomain;
  auto ratio = [&](const Eigen::VectorXd& ju, const Eigen::VectorXd& jv, const Eigen::VectorXd& tu,
                   const Eigen::VectorXd& tv, double* gap) {
    const double num = vector_norm(Eigen::VectorXd(tu - tv), codomain);
    const double den = power_norm(ju - jv, p);
    *gap = den;
    if (num == 0.0) return 0.0;
    return den > 0.0 ? num / den : kInf;
  };

  for (const auto& pr : cert.pairset.pairs()) {
    double den = 0.0;
    const double r =
        ratio(embed(pr.u), embed(pr.v), eval_operator(T, pr.u), eval_operator(T, pr.v), &den);
    out.lipschitz_pairset = std::max(out.lipschitz_pairset, r);
  }
  for (const auto& x : samples) {
    out.embedded.push_back(embed(x));
    out.values.push_back(eval_operator(T, x));
  }
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      double den = 0.0;
      const double r = ratio(out.embedded[a], out.embedded[b], out.values[a], out.values[b], &den);
      const double num = vector_norm(Eigen::VectorXd(out.values[a] - out.values[b]), codomain);
      const double scale = std::max({1.0, out.embedded[a].norm(), out.embedded[b].norm()});
      if (den <= 1e-12 * scale && num > tolerance) {
        out.quotient_violations.add(WeightedPair{samples[a], samples[b], 1.0});
      } else if (std::isfinite(r)) {
        out.lipschitz_samples = std::max(out.lipschitz_samples, r);
      }
    }
  }
  return out;
}

MultilinearOperator restrict_operator(const MultilinearOperator& T,
                                      const std::map<std::size_t, Eigen::VectorXd>& fixed) {
  const std::size_t n = T.arity();
  if (fixed.empty()) throw ArgumentError("restriction needs at least one fixed slot");
  if (fixed.size() >= n) throw ArgumentError("fixing every slot leaves a constant, not an operator");
  std::vector<std::size_t> shape = T.kernel().shape();
  Eigen::VectorXd coeffs = T.kernel().as_vector();
  for (auto it = fixed.rbegin(); it != fixed.rend(); ++it) {
    const auto [slot, x] = *it;
    if (slot >= n) throw ArgumentError("fixed slot index out of range");
    if (static_cast<std::size_t>(x.size()) != shape[slot]) {
      throw ShapeError("fixed vector length does not match its slot");
    }
    coeffs = contract_mode(coeffs, shape, slot, x);
    shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(slot));
  }
  NormSpec spec;
  spec.codomain = T.norms().codomain;
  for (std::size_t k = 0; k < n; ++k) {
    if (!fixed.contains(k)) spec.factors.push_back(T.norms().factors[k]);
  }
  return MultilinearOperator(
      DenseTensor(shape, std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size())), spec);
}

PairConfiguration lift_configuration(const PairConfiguration& cfg,
                                     const std::map<std::size_t, Eigen::VectorXd>& fixed) {
  const std::size_t n = cfg.dims().size() + fixed.size();
  for (const auto& [slot, x] : fixed) {
    if (slot >= n) throw ArgumentError("fixed slot index out of range");
  }
  auto lift = [&](const SegrePoint& x) {
    SegrePoint out;
    std::size_t next = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto it = fixed.find(k);
      out.factors.push_back(it != fixed.end() ? it->second : x.factors[next++]);
    }
    return out;
  };
  PairConfiguration out;
  for (const auto& pr : cfg.pairs()) out.add(WeightedPair{lift(pr.u), lift(pr.v), pr.weight});
  return out;
}

DenominatorResult config_denominator_poly(const PairConfiguration& cfg, double p, NormKind norm,
                                          const AscentOptions& options,
                                          std::span<const Eigen::VectorXd> start_forms) {
  check_exponent(p);
  if (cfg.empty()) throw ArgumentError("configuration is empty");
  const auto& dims = cfg.dims();
  const std::size_t n = dims.size();
  const std::size_t d = dims.front();
  if (std::any_of(dims.begin(), dims.end(), [&](std::size_t x) { return x != d; })) {
    throw ArgumentError("polynomial configurations need equal factor dimensions");
  }
  for (const auto& pr : cfg.pairs()) {
    for (const SegrePoint* x : {&pr.u, &pr.v}) {
      for (std::size_t k = 1; k < n; ++k) {
        if ((x->factors[k] - x->factors[0]).cwiseAbs().maxCoeff() > 1e-12) {
          throw ArgumentError("polynomial configurations need diagonal points");
        }
      }
    }
  }
  DenominatorResult out;
  const PairConfiguration filtered = cfg.without_degenerate(&out.dropped);
  if (filtered.empty()) throw ArgumentError("all pairs in the configuration are degenerate");
  const Eigen::MatrixXd A = difference_matrix(filtered, p);
  const PolynomialGauge gauge(d, n, norm);
  out.report.seed = options.seed;

  if (d == 1 || n == 1) {
    // The polynomial ball coincides with the operator ball here.
    const std::vector<NormKind> norms(n, norm);
    auto r = config_denominator(filtered, p, Ball::Operator, norms, options, start_forms);
    r.report.method = "polynomial;" + r.report.method;
    return r;
  }

  const std::vector<NormKind> norms(n, norm);
  const double op_upper = op_ball_upper(filtered, p, norms);
  double pair_sum = 0.0;
  const double nd = static_cast<double>(n);
  for (const auto& pr : filtered.pairs()) {
    const double bound = std::pow(vector_norm(pr.u.factors[0], norm), nd) +
                         std::pow(vector_norm(pr.v.factors[0], norm), nd);
    pair_sum += pr.weight * std::pow(bound, p);
  }
  out.report.certified_upper =
      std::min(gauge.polarization_constant() * op_upper, std::pow(pair_sum, 1.0 / p));
  out.report.method = "polynomial:bound";

  std::vector<Eigen::VectorXd> starts;
  for (const auto& f : start_forms) starts.push_back(symmetrize(f, d, n));
  const Eigen::Index rows = std::min<Eigen::Index>(A.rows(), 6);
  for (Eigen::Index i = 0; i < rows; ++i) starts.emplace_back(A.row(i).transpose());
  for (auto& f : norming_forms(filtered, norms, 6)) starts.push_back(std::move(f));
  const Rng root(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = root.fork(static_cast<std::uint64_t>(r));
    starts.push_back(symmetrize(rng.normal_vector(A.cols()), d, n));
  }
  out.report.restarts = static_cast<long>(starts.size());
  const auto asc = maximize_ratio(A, p, gauge, std::move(starts), options);
  out.report.certified_lower = asc.certified_lower;
  out.report.heuristic_lower = asc.heuristic_lower;
  out.report.iterations = asc.iterations;
  out.maximizer = asc.certified_form;
  out.heuristic_maximizer = asc.heuristic_form;
  out.report.heuristic_upper = out.report.certified_upper;
  out.report.normalize();
  return out;
}

SummingResult estimate_pi_lip_poly(const MultilinearOperator& P, double p,
                                   const SummingBudget& budget) {
  const auto& dims = P.factor_dims();
  const std::size_t d = dims.front();
  const std::size_t n = P.arity();
  const auto& norms = P.norms().factors;
  if (std::any_of(dims.begin(), dims.end(), [&](std::size_t x) { return x != d; }) ||
      std::any_of(norms.begin(), norms.end(), [&](NormKind r) { return r != norms.front(); })) {
    throw ArgumentError("polynomial kernels need equal factor spaces");
  }
  const Eigen::Map<const RowMatrix> K = P.matrix();
  for (Eigen::Index j = 0; j < K.cols(); ++j) {
    if (!is_symmetric(K.col(j), d, n, 1e-12)) {
      throw ArgumentError("polynomial kernel is not symmetric under factor permutations");
    }
  }
  Problem prob;
  prob.T = &P;
  prob.p = p;
  prob.ball = Ball::Operator;
  prob.polynomial = true;
  prob.norms = norms;
  prob.gauge = std::make_shared<PolynomialGauge>(d, n, norms.front());
  prob.geometry = std::make_unique<DiagonalGeometry>(d, n, norms.front());
  return run_pipeline(prob, budget, SummingOptions{});
}

}  // namespace lipsum
