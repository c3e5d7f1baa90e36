#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include <Eigen/SVD>

#include "generate.hpp"
#include "lipsum/dp_norm.hpp"
#include "lipsum/form_norm.hpp"
#include "lipsum/hilbert_schmidt.hpp"
#include "lipsum/parallel.hpp"
#include "lipsum/random.hpp"

namespace lipsum::cli {

namespace {

using gen::l2_norms;

struct Check {
  std::string name;
  std::string module;
  int trials;
  // Returns the excess of one trial: positive means the property failed.
  std::function<double(Rng&, int)> run;
};

NormSpec l2_spec(std::size_t n) { return NormSpec{l2_norms(n), NormKind::L2}; }

double relative(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

SummingBudget trial_budget(const VerifyConfig& c, int trial) {
  SummingBudget b = c.budget;
  b.seed = Rng::splitmix64(c.budget.seed ^ static_cast<std::uint64_t>(trial + 1));
  return b;
}

AscentOptions ascent(const VerifyConfig& c, std::uint64_t seed) {
  AscentOptions a;
  a.restarts = c.budget.restarts;
  a.max_iterations = c.budget.max_iterations;
  a.seed = seed;
  return a;
}

std::vector<Check> make_checks(const VerifyConfig& C) {
  const double tol = C.tolerance;
  const int n = C.trials;
  std::vector<Check> checks;

  // tensor-core
  checks.push_back({"multilinearity", "tensor-core", n, [](Rng& rng, int) {
    const std::vector<std::size_t> dims{2, 3, 2};
    const auto T = gen::random_operator(rng, dims, 2);
    SegrePoint x = gen::random_point(rng, dims, l2_norms(3));
    const std::size_t slot = static_cast<std::size_t>(rng.uniform() * 3.0) % 3;
    const Eigen::VectorXd a = rng.normal_vector(static_cast<Eigen::Index>(dims[slot]));
    const Eigen::VectorXd b = rng.normal_vector(static_cast<Eigen::Index>(dims[slot]));
    const double alpha = rng.normal(), beta = rng.normal();
    SegrePoint xa = x, xb = x, xc = x;
    xa.factors[slot] = a;
    xb.factors[slot] = b;
    xc.factors[slot] = alpha * a + beta * b;
    const Eigen::VectorXd lhs = eval_operator(T, xc);
    const Eigen::VectorXd rhs = alpha * eval_operator(T, xa) + beta * eval_operator(T, xb);
    return (lhs - rhs).norm() - 1e-12 * std::max(1.0, rhs.norm());
  }});
  checks.push_back({"elementary-rank-one", "tensor-core", n, [](Rng& rng, int) {
    const std::vector<std::size_t> dims{2, 3, 2};
    const SegrePoint x = gen::random_point(rng, dims, l2_norms(3));
    const DenseTensor t = elementary_tensor(x);
    const std::size_t split = 1 + static_cast<std::size_t>(rng.uniform() * 2.0) % 2;
    std::vector<std::size_t> rows, cols;
    for (std::size_t k = 0; k < 3; ++k) (k < split ? rows : cols).push_back(k);
    const auto s = Eigen::JacobiSVD<Eigen::MatrixXd>(flatten(t, rows, cols)).singularValues();
    return s.size() > 1 ? s[1] - 1e-10 * s[0] : -1.0;
  }});
  checks.push_back({"kernel-contraction", "tensor-core", n, [](Rng& rng, int) {
    const std::vector<std::size_t> dims{3, 2};
    const auto T = gen::random_operator(rng, dims, 3);
    const SegrePoint x = gen::random_point(rng, dims, l2_norms(2));
    const Eigen::VectorXd direct = T.matrix().transpose() * elementary_vector(x);
    return (eval_operator(T, x) - direct).norm() - 1e-12 * std::max(1.0, direct.norm());
  }});

  // form-norm
  checks.push_back({"denominator-monotone", "form-norm", n, [C](Rng& rng, int t) {
    const std::vector<std::size_t> dims{2, 2};
    const auto norms = l2_norms(2);
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const PairConfiguration cfg = gen::random_configuration(rng, dims, norms, 3);
    const auto asc = ascent(C, static_cast<std::uint64_t>(t));
    const auto r1 = config_denominator(cfg, p, Ball::Operator, norms, asc);
    PairConfiguration bigger = cfg;
    bigger.add(gen::random_configuration(rng, dims, norms, 1).pairs()[0]);
    const std::vector<Eigen::VectorXd> starts{r1.maximizer, r1.heuristic_maximizer};
    const auto r2 = config_denominator(bigger, p, Ball::Operator, norms, asc, starts);
    const double slack = 1e-12 * std::max(1.0, r1.report.certified_upper);
    return std::max({r1.report.certified_lower - r2.report.certified_lower,
                     r1.report.heuristic_lower - r2.report.heuristic_lower,
                     r1.report.heuristic_upper - r2.report.heuristic_upper,
                     r1.report.certified_upper - r2.report.certified_upper}) - slack;
  }});
  checks.push_back({"ball-inclusion", "form-norm", n, [C](Rng& rng, int t) {
    const std::vector<std::size_t> dims{2, 3};
    const auto norms = l2_norms(2);
    const PairConfiguration cfg = gen::random_configuration(rng, dims, norms, 4);
    const auto asc = ascent(C, static_cast<std::uint64_t>(t));
    const auto hs = config_denominator(cfg, 2.0, Ball::HilbertSchmidt, norms, asc);
    const auto op = config_denominator(cfg, 2.0, Ball::Operator, norms, asc);
    return hs.report.certified_upper - op.report.certified_upper - 1e-12;
  }});
  checks.push_back({"lambda-norm", "form-norm", 4, [](Rng&, int t) {
    const auto r = operator_norm(MultilinearOperator::scalar_product(static_cast<std::size_t>(t) + 1));
    return std::max(std::abs(r.report.certified_lower - 1.0), std::abs(r.report.certified_upper - 1.0));
  }});
  checks.push_back({"linf-enumeration", "form-norm", n, [](Rng& rng, int) {
    const Eigen::VectorXd phi = rng.normal_vector(4);
    double brute = 0.0;
    for (double s0 : {-1.0, 1.0}) {
      for (double s1 : {-1.0, 1.0}) {
        for (double t0 : {-1.0, 1.0}) {
          for (double t1 : {-1.0, 1.0}) {
            brute = std::max(brute, std::abs(phi[0] * s0 * t0 + phi[1] * s0 * t1 +
                                             phi[2] * s1 * t0 + phi[3] * s1 * t1));
          }
        }
      }
    }
    const double upper = form_norm_upper(phi, {2, 2}, {NormKind::LInf, NormKind::LInf});
    // Same maximum up to the summation order of the two evaluations.
    return std::abs(upper - brute) - 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, brute);
  }});

  // summing-estimator
  checks.push_back({"lp-soundness", "summing-estimator", n, [C, tol](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const auto r = estimate_pi_lip(T, p, trial_budget(C, t));
    const auto& cert = r.certificate;
    const double gap = relative(cert.constant, cert.dual_constant) - tol;
    return std::max(r.report.certified_lower - cert.constant - tol, gap);
  }});
  checks.push_back({"inclusion", "summing-estimator", n, [C, tol](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2}, 1 + static_cast<std::size_t>(t % 2));
    const double p = t % 2 == 0 ? 1.0 : 2.0;
    const double q = 2.0 * p;
    const auto rq = estimate_pi_lip(T, q, trial_budget(C, t));
    const auto lp = pietsch_upper_lp(T, rq.certificate.pairset, rq.certificate.forms, p,
                                     C.budget.bisection_steps);
    return rq.report.certified_lower - lp.constant - tol;
  }});
  checks.push_back({"norm-domination", "summing-estimator", n, [C, tol](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    const auto r = estimate_pi_lip(T, t % 2 == 0 ? 2.0 : 1.0, trial_budget(C, t));
    return r.norm.report.certified_lower - r.certificate.constant - tol;
  }});
  checks.push_back({"composition", "summing-estimator", n, [C](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    const Eigen::MatrixXd R = gen::random_contraction(rng, 2, 2);
    const std::vector<Eigen::MatrixXd> S{gen::random_contraction(rng, 2, 2),
                                         gen::random_contraction(rng, 2, 2)};
    const double p = 2.0;
    const auto composite = estimate_pi_lip(gen::compose(T, R, S), p, trial_budget(C, t));
    // The witness mapped through S is a configuration for T.
    SummingOptions options;
    for (const auto& pr : composite.witness.pairs()) {
      SegrePoint u = pr.u, v = pr.v;
      for (std::size_t k = 0; k < S.size(); ++k) {
        u.factors[k] = S[k] * u.factors[k];
        v.factors[k] = S[k] * v.factors[k];
      }
      options.initial_pairs.add(WeightedPair{std::move(u), std::move(v), pr.weight});
    }
    const auto parent = estimate_pi_lip(T, p, trial_budget(C, t + 1000), options);
    return composite.report.certified_lower - parent.certificate.constant - 1e-6;
  }});
  checks.push_back({"scalar-forms", "summing-estimator", n, [C](Rng& rng, int t) {
    const std::size_t d = 2 + static_cast<std::size_t>(t % 2);
    const auto T = gen::random_operator(rng, {d, d}, 1);
    const auto norm = operator_norm(T).report;
    const auto r = estimate_pi_lip(T, t % 2 == 0 ? 2.0 : 1.0, trial_budget(C, t)).report;
    return std::max(r.certified_lower - norm.certified_upper * (1.0 + 1e-9),
                    norm.certified_lower * (1.0 - 1e-9) - r.heuristic_upper);
  }});
  checks.push_back({"restriction", "summing-estimator", n, [C](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2, 2}, 1 + static_cast<std::size_t>(t % 2));
    const std::size_t slot = static_cast<std::size_t>(t % 3);
    const Eigen::VectorXd x0 = rng.unit_vector(2, NormKind::L2);
    const std::map<std::size_t, Eigen::VectorXd> fixed{{slot, x0}};
    const auto child = estimate_pi_lip(restrict_operator(T, fixed), 2.0, trial_budget(C, t));
    SummingOptions options;
    options.initial_pairs = lift_configuration(child.witness, fixed);
    const auto parent = estimate_pi_lip(T, 2.0, trial_budget(C, t + 1000), options);
    return child.report.certified_lower - x0.norm() * parent.certificate.constant - 1e-6;
  }});

  // hilbert-schmidt
  checks.push_back({"hs-rotation", "hilbert-schmidt", n, [](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 3}, 2);
    const std::size_t mode = static_cast<std::size_t>(t % 3);
    const auto Q = gen::random_orthogonal(rng, static_cast<Eigen::Index>(T.kernel().shape()[mode]));
    const MultilinearOperator R(gen::apply_to_mode(T.kernel(), mode, Q), T.norms());
    const double a = hs_norm(T);
    return std::abs(hs_norm(R) - a) - 1e-10 * a;
  }});
  checks.push_back({"hs-basis-exact", "hilbert-schmidt", n, [](Rng& rng, int t) {
    std::vector<std::size_t> dims;
    const std::size_t arity = 1 + static_cast<std::size_t>(t % 3);
    for (std::size_t k = 0; k < arity; ++k) dims.push_back(1 + static_cast<std::size_t>(rng.uniform() * 3.0));
    const auto T = gen::random_operator(rng, dims, 1 + static_cast<std::size_t>(rng.uniform() * 3.0));
    const double h = hs_norm(T);
    return std::abs(basis_config_lower(T) - h) - 1e-9 * h;
  }});
  checks.push_back({"norm-below-hs", "hilbert-schmidt", n, [](Rng& rng, int) {
    const auto T = gen::random_operator(rng, {2, 3}, 2);
    return operator_norm(T).report.certified_lower - hs_norm(T) - 1e-9;
  }});
  checks.push_back({"khintchine-monotone", "hilbert-schmidt", 1, [](Rng&, int) {
    double excess = std::abs(khintchine_constant(2.0).value - 1.0);
    double prev = 1.0;
    for (double p = 1.0; p <= 12.0; p += 0.25) {
      const double b = khintchine_constant(p).value;
      excess = std::max({excess, prev - b, 1.0 - b});
      prev = b;
    }
    return excess;
  }});
  checks.push_back({"hs-sandwich", "hilbert-schmidt", std::max(1, n / 5), [C](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    const auto s = verify_sandwich(T, 2.0, trial_budget(C, t));
    return s.holds() ? -1.0 : 1.0;
  }});

  // tensor-norm-dp
  const NormSpec ns = l2_spec(2);
  checks.push_back({"dp-weak-duality", "tensor-norm-dp", n, [ns, C, tol](Rng& rng, int t) {
    const auto z = gen::random_mixed(rng, {2, 2}, 2, ns);
    const double p = t % 2 == 0 ? 2.0 : 3.0;
    DpOptions o;
    o.seed = static_cast<std::uint64_t>(t) ^ C.budget.seed;
    const auto up = dp_upper(z, p, 0, o);
    const auto lo = dp_lower_dual(z, p, dual_witnesses(z, p, o));
    return lo.certified_lower - up.report.certified_upper - tol;
  }});
  checks.push_back({"dp-triangle", "tensor-norm-dp", n, [ns](Rng& rng, int) {
    const auto z1 = gen::random_mixed(rng, {2, 2}, 2, ns);
    const auto z2 = gen::random_mixed(rng, {2, 2}, 2, ns);
    const auto u1 = dp_upper(z1, 2.0);
    const auto u2 = dp_upper(z2, 2.0);
    std::vector<double> sum(z1.data.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = z1.data.data()[i] + z2.data.data()[i];
    DpOptions o;
    o.seeds = {u1.representation, u2.representation};
    const auto us = dp_upper(MixedTensor(DenseTensor(z1.data.shape(), sum), ns), 2.0, 0, o);
    return us.report.certified_upper - u1.report.certified_upper - u2.report.certified_upper - 1e-6;
  }});
  checks.push_back({"dp-crossnorm", "tensor-norm-dp", n, [ns](Rng& rng, int) {
    const Eigen::VectorXd a = rng.normal_vector(2), b = rng.normal_vector(2), y = rng.normal_vector(2);
    const MixedTensor z(elementary_tensor(SegrePoint{{a, b, y}}), ns);
    PairConfiguration single;
    single.add(WeightedPair{SegrePoint{{a, b}}, SegrePoint{{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)}}, 1.0});
    const double op = config_denominator(single, 2.0, Ball::Operator, ns.factors).report.certified_upper;
    const double hs = config_denominator(single, 2.0, Ball::HilbertSchmidt, ns.factors).report.certified_upper;
    const double up = dp_upper(z, 2.0).report.certified_upper;
    const double lo = dp_lower_dual(z, 2.0, dual_witnesses(z, 2.0)).certified_lower;
    const double yn = y.norm();
    return std::max({up - op * yn * (1.0 + 1e-9), hs * yn * (1.0 - 1e-9) - lo, (up - lo) - 0.05 * up});
  }});
  checks.push_back({"dp-homogeneity", "tensor-norm-dp", n, [ns](Rng& rng, int) {
    const auto z = gen::random_mixed(rng, {2, 2}, 2, ns);
    const double t = (rng.uniform() - 0.5) * 6.0;
    std::vector<double> scaled(z.data.data().begin(), z.data.data().end());
    for (double& x : scaled) x *= t;
    const double u = dp_upper(z, 2.0).report.certified_upper;
    const double ut = dp_upper(MixedTensor(DenseTensor(z.data.shape(), scaled), ns), 2.0).report.certified_upper;
    return std::abs(ut - std::abs(t) * u) - 1e-6 * std::abs(t) * u;
  }});
  checks.push_back({"delta-epsilon", "tensor-norm-dp", n, [C](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    const auto cfg = gen::random_configuration(rng, {2, 2}, l2_norms(2), 4);
    const auto r = check_delta_epsilon(T, cfg, 2.0, trial_budget(C, t));
    return r.lhs - r.rhs - 1e-7;
  }});

  // cli-harness
  checks.push_back({"json-roundtrip", "cli-harness", n, [C](Rng& rng, int t) {
    const auto T = gen::random_operator(rng, {2, 3}, 2);
    const auto back = operator_from_json(parse_json(dump_json(to_json(T))));
    if (!(back == T)) return 1.0;
    if (t == 0) {
      const auto r = estimate_pi_lip(MultilinearOperator::scalar_product(2), 2.0, trial_budget(C, t));
      const auto c = certificate_from_json(parse_json(dump_json(to_json(r.certificate))));
      if (dump_json(to_json(c)) != dump_json(to_json(r.certificate))) return 1.0;
    }
    return -1.0;
  }});
  return checks;
}

}  // namespace

std::vector<PropertyResult> run_property_suite(const VerifyConfig& config) {
  const auto checks = make_checks(config);
  std::vector<PropertyResult> out;
  for (std::size_t c = 0; c < checks.size(); ++c) {
    const Check& check = checks[c];
    const auto count = static_cast<std::size_t>(std::max(check.trials, 0));
    std::vector<double> excess(count, 0.0);
    std::vector<std::string> errors(count);
    parallel_for(count, [&](std::size_t t) {
      Rng rng = Rng(config.seed, 0x7665 + c).fork(t);
      try {
        excess[t] = check.run(rng, static_cast<int>(t));
      } catch (const std::exception& e) {
        excess[t] = std::numeric_limits<double>::infinity();
        errors[t] = e.what();
      }
    });
    PropertyResult r;
    r.name = check.name;
    r.module = check.module;
    r.trials = static_cast<int>(count);
    for (std::size_t t = 0; t < count; ++t) {
      const double e = excess[t];
      r.worst_excess = std::max(r.worst_excess, std::isnan(e) ? std::numeric_limits<double>::infinity() : e);
      if (!(e <= 0.0)) {
        if (r.violations == 0) {
          r.first_failure = "trial " + std::to_string(t) +
                            (errors[t].empty() ? "" : ": " + errors[t]);
        }
        ++r.violations;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json to_json(const PropertyResult& r) {
  Json j;
  j["name"] = r.name;
  j["module"] = r.module;
  j["trials"] = r.trials;
  j["violations"] = r.violations;
  j["worst_excess"] = number_json(r.worst_excess);
  j["pass"] = r.pass();
  if (!r.first_failure.empty()) j["first_failure"] = r.first_failure;
  return j;
}

}  // namespace lipsum::cli
