#include "lipsum/form_norm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lipsum/errors.hpp"
#include "lipsum/parallel.hpp"
#include "lipsum/random.hpp"
#include "multiform.hpp"

namespace lipsum {

namespace {

void check_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("p must be a finite real >= 1");
}

constexpr std::size_t kMaxCubeDim = 13;

double spectral_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = A.rows() <= A.cols() ? Eigen::MatrixXd(A * A.transpose())
                                                    : Eigen::MatrixXd(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Eigen::VectorXd top_right_singular_vector(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
  return es.eigenvectors().col(es.eigenvectors().cols() - 1);
}

struct ExactValue {
  double value = 0.0;
  bool exact = false;
  Eigen::VectorXd maximizer;
};

// max over sign vectors s (s_0 = +1) of ||A s||_p: the sup over the unit cube.
ExactValue cube_sup(const Eigen::MatrixXd& A, double p) {
  ExactValue out;
  const auto D = A.cols();
  const std::uint64_t count = std::uint64_t{1} << (D - 1);
  out.value = -1.0;
  Eigen::VectorXd s(D);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    s(0) = 1.0;
    for (Eigen::Index j = 1; j < D; ++j) s(j) = ((mask >> (j - 1)) & 1u) ? -1.0 : 1.0;
    const double v = power_norm(A * s, p);
    if (v > out.value) {
      out.value = v;
      out.maximizer = s;
    }
  }
  out.exact = true;
  return out;
}

// max over +-e_j of ||A e_j||_p: the sup over the cross-polytope.
ExactValue cross_sup(const Eigen::MatrixXd& A, double p) {
  ExactValue out;
  out.value = -1.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    const double v = power_norm(A.col(j), p);
    if (v > out.value) {
      out.value = v;
      out.maximizer = Eigen::VectorXd::Unit(A.cols(), j);
    }
  }
  out.exact = true;
  return out;
}

ExactValue hs_sup(const Eigen::MatrixXd& A, double p) {
  ExactValue out;
  if (p == 2.0) {
    out.maximizer = top_right_singular_vector(A);
    out.value = spectral_norm(A);
    out.exact = true;
    return out;
  }
  out.value = hs_ball_upper(A, p, &out.exact);
  if (out.exact && p == 1.0) {
    // Recover the maximizing sign pattern.
    const auto k = A.rows();
    const std::uint64_t count = std::uint64_t{1} << (k - 1);
    double best = -1.0;
    Eigen::VectorXd eps(k);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      eps(0) = 1.0;
      for (Eigen::Index i = 1; i < k; ++i) eps(i) = ((mask >> (i - 1)) & 1u) ? -1.0 : 1.0;
      const Eigen::VectorXd g = A.transpose() * eps;
      const double v = g.norm();
      if (v > best) {
        best = v;
        out.maximizer = v > 0.0 ? Eigen::VectorXd(g / v) : Eigen::VectorXd::Unit(A.cols(), 0);
      }
    }
  }
  return out;
}

// Certified sup over the operator-norm ball; exact for polytope balls of
// small size and for a single l_2 factor (at p = 2).
ExactValue op_sup(const Eigen::MatrixXd& A, const PairConfiguration& cfg, double p,
                  std::span<const NormKind> norms) {
  const auto& dims = cfg.dims();
  std::vector<std::size_t> eff;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] > 1) eff.push_back(k);
  }
  const std::size_t D = static_cast<std::size_t>(A.cols());
  if (eff.empty()) {
    ExactValue out;
    out.value = power_norm(A.col(0), p);
    out.exact = true;
    out.maximizer = Eigen::VectorXd::Ones(1);
    return out;
  }
  const bool all_l1 = std::all_of(eff.begin(), eff.end(),
                                  [&](std::size_t k) { return norms[k] == NormKind::L1; });
  if (all_l1 && D <= kMaxCubeDim) return cube_sup(A, p);
  if (eff.size() == 1) {
    if (norms[eff[0]] == NormKind::LInf) return cross_sup(A, p);
    if (norms[eff[0]] == NormKind::L2) {
      auto hs = hs_sup(A, p);
      if (hs.exact) return hs;
    }
  }
  ExactValue out;
  out.value = hs_scaling_constant(dims, norms) * hs_ball_upper(A, p);
  double pair_sum = 0.0;
  for (const auto& pr : cfg.pairs()) {
    pair_sum += pr.weight * std::pow(difference_norm_upper(pr.u, pr.v, norms), p);
  }
  out.value = std::min(out.value, std::pow(pair_sum, 1.0 / p));
  return out;
}

double product_of_norms(const SegrePoint& x, std::span<const NormKind> norms) {
  double s = 1.0;
  for (std::size_t k = 0; k < x.arity(); ++k) s *= vector_norm(x.factors[k], norms[k]);
  return s;
}

}  // namespace

OperatorNormResult operator_norm(const MultilinearOperator& T, const AscentOptions& options) {
  const detail::Multiform f = detail::operator_multiform(T);
  OperatorNormResult out;
  out.report.seed = options.seed;

  const auto gb = detail::global_upper(f, options.enumeration_cap);
  detail::Point best;
  double best_value = -1.0;
  if (gb.exact) {
    best = gb.point;
    best_value = gb.upper;
  } else {
    const auto restarts = static_cast<std::size_t>(std::max(1, options.restarts));
    std::vector<detail::LocalMax> results(restarts);
    const Rng root(options.seed);
    parallel_for(restarts, [&](std::size_t i) {
      Rng rng = root.fork(i);
      results[i] = detail::alternating_max(f, detail::random_point(f, rng), options.max_iterations,
                                           options.tolerance);
    });
    for (auto& r : results) {
      out.report.iterations += r.iterations;
      if (r.value > best_value) {
        best_value = r.value;
        best = std::move(r.point);
      }
    }
    out.report.restarts = static_cast<long>(restarts);
  }
  detail::clamp_to_balls(best, f.balls);
  out.argmax.factors.assign(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(T.arity()));

  const double value = vector_norm(eval_operator(T, out.argmax), T.norms().codomain);
  out.report.certified_lower = value;
  out.report.heuristic_lower = std::max(value, best_value);
  out.report.certified_upper = gb.exact ? std::max(gb.upper, value) : gb.upper;
  out.report.heuristic_upper = out.report.certified_upper;
  out.report.method = gb.method;
  out.report.normalize();
  return out;
}

double form_norm_upper(const Eigen::VectorXd& phi, const std::vector<std::size_t>& dims,
                       const std::vector<NormKind>& norms, std::size_t enumeration_cap) {
  return detail::global_upper(detail::form_multiform(phi, dims, norms), enumeration_cap).upper;
}

Eigen::MatrixXd difference_matrix(const PairConfiguration& cfg, double p) {
  const std::size_t D = product(cfg.dims());
  Eigen::MatrixXd A(static_cast<Eigen::Index>(cfg.size()), static_cast<Eigen::Index>(D));
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const auto& pr = cfg.pairs()[i];
    A.row(static_cast<Eigen::Index>(i)) =
        std::pow(pr.weight, 1.0 / p) * (elementary_vector(pr.u) - elementary_vector(pr.v));
  }
  return A;
}

double difference_norm_upper(const SegrePoint& u, const SegrePoint& v,
                             std::span<const NormKind> norms) {
  const std::size_t n = u.arity();
  if (n == 1) return vector_norm(Eigen::VectorXd(u.factors[0] - v.factors[0]), norms[0]);
  const double pu = product_of_norms(u, norms);
  const double pv = product_of_norms(v, norms);
  if (pu == 0.0) return pv;
  if (pv == 0.0) return pu;
  double best = pu + pv;

  // Telescoping u1..un - v1..vn = sum_k v1..v(k-1) (uk - vk) u(k+1)..un after
  // balancing factor norms; an even number of sign flips leaves v unchanged.
  std::vector<Eigen::VectorXd> ub(n), vb(n);
  const double gu = std::pow(pu, 1.0 / static_cast<double>(n));
  const double gv = std::pow(pv, 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    ub[k] = u.factors[k] * (gu / vector_norm(u.factors[k], norms[k]));
    vb[k] = v.factors[k] * (gv / vector_norm(v.factors[k], norms[k]));
  }
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = ((mask >> k) & 1u) ? -1.0 : 1.0;
      const double diff = vector_norm(Eigen::VectorXd(ub[k] - s * vb[k]), norms[k]);
      total += std::pow(gv, static_cast<double>(k)) * diff *
               std::pow(gu, static_cast<double>(n - 1 - k));
    }
    best = std::min(best, total);
  }

  if (n == 2) {
    const Eigen::MatrixXd M =
        u.factors[0] * u.factors[1].transpose() - v.factors[0] * v.factors[1].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double total = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double sigma = svd.singularValues()(i);
      if (sigma == 0.0) continue;
      total += sigma * vector_norm(Eigen::VectorXd(svd.matrixU().col(i)), norms[0]) *
               vector_norm(Eigen::VectorXd(svd.matrixV().col(i)), norms[1]);
    }
    best = std::min(best, total);
  }
  return best;
}

double op_ball_upper(const PairConfiguration& cfg, double p, std::span<const NormKind> norms,
                     bool* exact) {
  check_exponent(p);
  if (norms.size() != cfg.dims().size()) throw ShapeError("one norm per factor required");
  const auto v = op_sup(difference_matrix(cfg, p), cfg, p, norms);
  if (exact) *exact = v.exact;
  return v.value;
}

double hs_ball_upper(const Eigen::MatrixXd& A, double p, bool* exact) {
  check_exponent(p);
  if (exact) *exact = false;
  if (A.size() == 0 || A.cwiseAbs().maxCoeff() == 0.0) {
    if (exact) *exact = true;
    return 0.0;
  }
  const double sigma = spectral_norm(A);
  if (p == 2.0) {
    if (exact) *exact = true;
    return sigma;
  }
  const auto k = A.rows();
  if (p == 1.0 && k <= 16) {
    const std::uint64_t count = std::uint64_t{1} << (k - 1);
    double best = 0.0;
    Eigen::VectorXd eps(k);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      eps(0) = 1.0;
      for (Eigen::Index i = 1; i < k; ++i) eps(i) = ((mask >> (i - 1)) & 1u) ? -1.0 : 1.0;
      best = std::max(best, (A.transpose() * eps).norm());
    }
    if (exact) *exact = true;
    return best;
  }
  Eigen::VectorXd row_norms = A.rowwise().norm();
  const double row_bound = power_norm(row_norms, p);
  const double growth =
      std::pow(static_cast<double>(k), std::max(0.0, 1.0 / p - 0.5));
  return std::min(row_bound, sigma * growth);
}

double hs_scaling_constant(std::span<const std::size_t> dims, std::span<const NormKind> norms) {
  const double D = static_cast<double>(product(dims));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const double dk = static_cast<double>(dims[k]);
    const double fiber = norms[k] == NormKind::L1 ? std::sqrt(dk) : 1.0;
    best = std::min(best, std::sqrt(D / dk) * fiber);
  }
  return best;
}

RatioAscentResult maximize_ratio(const Eigen::MatrixXd& A, double p, const FormGauge& gauge,
                                 std::vector<Eigen::VectorXd> starts,
                                 const AscentOptions& options) {
  check_exponent(p);
  RatioAscentResult out;
  const auto D = A.cols();
  out.certified_form = Eigen::VectorXd::Zero(D);
  out.heuristic_form = Eigen::VectorXd::Zero(D);
  std::erase_if(starts, [&](const Eigen::VectorXd& s) {
    return s.size() != D || !s.allFinite() || s.norm() == 0.0;
  });
  if (starts.empty() || A.cwiseAbs().maxCoeff() == 0.0) return out;

  struct Track {
    Eigen::VectorXd start_form;
    double start_ratio = 0.0;
    Eigen::VectorXd final_form;
    double final_ratio = 0.0;
    long iterations = 0;
  };
  std::vector<Track> tracks(starts.size());

  auto ratio = [&](const Eigen::VectorXd& phi, GaugeValue& g) {
    g = gauge.evaluate(phi);
    if (!(g.value > 0.0)) return 0.0;
    return power_norm(A * phi, p) / g.value;
  };

  parallel_for(starts.size(), [&](std::size_t s) {
    Track& tr = tracks[s];
    Eigen::VectorXd phi = starts[s] / starts[s].norm();
    GaugeValue g;
    double r = ratio(phi, g);
    tr.start_form = phi;
    tr.start_ratio = r;
    double step = 0.25;
    long it = 0;
    for (; it < options.max_iterations && step > 1e-10 && g.value > 0.0; ++it) {
      const Eigen::VectorXd y = A * phi;
      const double N = power_norm(y, p);
      if (N == 0.0) break;
      Eigen::VectorXd w(y.size());
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sgn = y(i) > 0.0 ? 1.0 : (y(i) < 0.0 ? -1.0 : 0.0);
        w(i) = sgn * std::pow(std::abs(y(i)) / N, p - 1.0);
      }
      const Eigen::VectorXd gN = A.transpose() * w;
      Eigen::VectorXd gr = (gN * g.value - N * g.gradient) / (g.value * g.value);
      gr -= gr.dot(phi) * phi;
      const double gnorm = gr.norm();
      if (gnorm == 0.0 || !std::isfinite(gnorm)) break;
      Eigen::VectorXd trial = phi + step * gr / gnorm;
      trial /= trial.norm();
      GaugeValue tg;
      const double tr_ratio = ratio(trial, tg);
      if (tr_ratio > r) {
        const bool small = tr_ratio - r <= options.tolerance * std::max(r, 1e-300);
        phi = std::move(trial);
        g = std::move(tg);
        r = tr_ratio;
        step = std::min(1.0, step * 2.0);
        if (small) break;
      } else {
        step *= 0.5;
      }
    }
    tr.final_form = phi;
    tr.final_ratio = r;
    tr.iterations = it;
  });

  // Certified values are recomputed with the gauge's certified upper bound.
  std::vector<const Eigen::VectorXd*> candidates;
  for (const auto& tr : tracks) {
    out.iterations += tr.iterations;
    candidates.push_back(&tr.start_form);
    candidates.push_back(&tr.final_form);
    if (tr.start_ratio > out.heuristic_lower) {
      out.heuristic_lower = tr.start_ratio;
      out.heuristic_form = tr.start_form;
    }
    if (tr.final_ratio > out.heuristic_lower) {
      out.heuristic_lower = tr.final_ratio;
      out.heuristic_form = tr.final_form;
    }
  }
  std::vector<double> certified(candidates.size(), 0.0);
  std::vector<double> uppers(candidates.size(), 0.0);
  parallel_for(candidates.size(), [&](std::size_t i) {
    uppers[i] = gauge.upper(*candidates[i]);
    if (uppers[i] > 0.0) certified[i] = power_norm(A * *candidates[i], p) / uppers[i];
  });
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (certified[i] > out.certified_lower) {
      out.certified_lower = certified[i];
      out.certified_form = *candidates[i] / uppers[i];
    }
  }
  if (out.heuristic_lower > 0.0) {
    const double hv = gauge.evaluate(out.heuristic_form).value;
    if (hv > 0.0) out.heuristic_form /= hv;
  }
  return out;
}

std::vector<Eigen::VectorXd> norming_forms(const PairConfiguration& cfg,
                                           std::span<const NormKind> norms, std::size_t limit) {
  std::vector<Eigen::VectorXd> out;
  auto push = [&](const SegrePoint& x) {
    if (out.size() >= limit) return;
    SegrePoint f;
    for (std::size_t k = 0; k < x.arity(); ++k) {
      if (vector_norm(x.factors[k], norms[k]) == 0.0) return;
      f.factors.push_back(norming_functional(x.factors[k], norms[k]));
    }
    out.push_back(elementary_vector(f));
  };
  for (const auto& pr : cfg.pairs()) {
    push(pr.u);
    push(pr.v);
  }
  return out;
}

DenominatorResult config_denominator(const PairConfiguration& cfg, double p, Ball ball,
                                     std::span<const NormKind> factor_norms,
                                     const AscentOptions& options,
                                     std::span<const Eigen::VectorXd> start_forms) {
  check_exponent(p);
  if (cfg.empty()) throw ArgumentError("configuration is empty");
  if (factor_norms.size() != cfg.dims().size()) {
    throw ShapeError("one factor norm per configuration factor required");
  }
  DenominatorResult out;
  const PairConfiguration filtered = cfg.without_degenerate(&out.dropped);
  if (filtered.empty()) throw ArgumentError("all pairs in the configuration are degenerate");

  const Eigen::MatrixXd A = difference_matrix(filtered, p);
  const std::vector<NormKind> norms(factor_norms.begin(), factor_norms.end());
  const auto gauge = make_gauge(ball, filtered.dims(), norms);

  const ExactValue upper =
      ball == Ball::HilbertSchmidt ? hs_sup(A, p) : op_sup(A, filtered, p, norms);
  out.report.seed = options.seed;
  out.report.certified_upper = upper.value;
  out.report.method = std::string(to_string(ball)) + (upper.exact ? ":exact" : ":bound");

  if (upper.exact && upper.maximizer.size() == A.cols()) {
    const double g = gauge->upper(upper.maximizer);
    const double value = g > 0.0 ? power_norm(A * upper.maximizer, p) / g : 0.0;
    out.maximizer = g > 0.0 ? Eigen::VectorXd(upper.maximizer / g) : upper.maximizer;
    out.heuristic_maximizer = out.maximizer;
    out.report.certified_lower = value;
    out.report.heuristic_lower = value;
    out.report.certified_upper = std::max(upper.value, value);
  } else {
    std::vector<Eigen::VectorXd> starts(start_forms.begin(), start_forms.end());
    starts.push_back(top_right_singular_vector(A));
    const Eigen::Index rows = std::min<Eigen::Index>(A.rows(), 6);
    for (Eigen::Index i = 0; i < rows; ++i) starts.emplace_back(A.row(i).transpose());
    for (auto& f : norming_forms(filtered, norms, 6)) starts.push_back(std::move(f));
    const Rng root(options.seed);
    for (int r = 0; r < options.restarts; ++r) {
      Rng rng = root.fork(static_cast<std::uint64_t>(r));
      starts.push_back(rng.normal_vector(A.cols()));
    }
    out.report.restarts = static_cast<long>(starts.size());
    const auto asc = maximize_ratio(A, p, *gauge, std::move(starts), options);
    out.report.certified_lower = asc.certified_lower;
    out.report.heuristic_lower = asc.heuristic_lower;
    out.report.iterations = asc.iterations;
    out.maximizer = asc.certified_form;
    out.heuristic_maximizer = asc.heuristic_form;
  }
  out.report.heuristic_upper = out.report.certified_upper;
  out.report.normalize();
  return out;
}

}  // namespace lipsum
