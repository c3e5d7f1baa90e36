#include "lipsum/dp_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "lipsum/errors.hpp"
#include "lipsum/parallel.hpp"
#include "lipsum/random.hpp"
#include "multiform.hpp"

namespace lipsum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double conjugate(double p) {
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

void require_exponent(double p) {
  if (!(p > 1.0)) throw ArgumentError("d_p needs 1 < p <= inf");
}

PairConfiguration pairs_of(const Representation& rep, std::optional<std::size_t> block = {}) {
  PairConfiguration cfg;
  for (const auto& t : rep.terms) {
    if (block && t.block != *block) continue;
    cfg.add(WeightedPair{t.p, t.q, 1.0});
  }
  return cfg;
}

double y_norm(const Representation& rep, double p, NormKind r) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(rep.terms.size()));
  for (std::size_t i = 0; i < rep.terms.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = vector_norm(rep.terms[i].y, r);
  }
  return v.size() == 0 ? 0.0 : power_norm(v, p);
}

// Certified bound on sup over the operator-norm ball of the l_p' norm of the
// pair differences.
double certified_sup(const Representation& rep, double pc, const NormSpec& norms, std::size_t) {
  if (rep.terms.empty()) return 0.0;
  double best = op_ball_upper(pairs_of(rep), pc, norms.factors);
  if (!rep.block_bounds.empty()) {
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
        rep.block_bounds.data(), static_cast<Eigen::Index>(rep.block_bounds.size()));
    bool valid = true;
    for (const auto& t : rep.terms) valid &= t.block < rep.block_bounds.size();
    if (valid) best = std::min(best, power_norm(b, pc));
  }
  return best;
}

void scale_term(RepresentationTerm& t, double s) {
  t.p.factors[0] *= s;
  t.q.factors[0] *= s;
  t.y /= s;
}

// Scale s with (s * d)^p' = (v / s)^p, which minimizes the product of the
// l_p' and l_p norms over independent rescalings.
double balance_scale(double d, double v, double p, double pc) {
  if (std::isinf(p)) return v;
  return std::pow(std::pow(v, p) / std::pow(d, pc), 1.0 / (p + pc));
}

MixedTensor normalized_copy(const MixedTensor& z, double scale) {
  std::vector<double> data(z.data.data().begin(), z.data.data().end());
  for (double& x : data) x /= scale;
  return MixedTensor(DenseTensor(z.data.shape(), std::move(data)), z.norms);
}

struct AlsState {
  std::vector<SegrePoint> P, Q;
  Eigen::MatrixXd Y;  // k x m
};

class Als {
 public:
  Als(const Eigen::MatrixXd& Z, std::vector<std::size_t> dims)
      : Z_(Z), dims_(std::move(dims)), full_dims_(dims_) {
    full_dims_.push_back(static_cast<std::size_t>(Z.cols()));
  }

  Eigen::MatrixXd deltas(const AlsState& s) const {
    Eigen::MatrixXd D(Z_.rows(), static_cast<Eigen::Index>(s.P.size()));
    for (std::size_t i = 0; i < s.P.size(); ++i) {
      D.col(static_cast<Eigen::Index>(i)) = elementary_vector(s.P[i]) - elementary_vector(s.Q[i]);
    }
    return D;
  }

  void solve_y(AlsState& s, double mu, double ridge) const {
    const Eigen::MatrixXd D = deltas(s);
    Eigen::MatrixXd G = mu * D.transpose() * D;
    G.diagonal().array() += ridge;
    s.Y = G.ldlt().solve(mu * D.transpose() * Z_);
  }

  void repair_y(AlsState& s) const {
    const Eigen::MatrixXd D = deltas(s);
    s.Y = D.completeOrthogonalDecomposition().solve(Z_);
  }

  // One sweep over every factor of every term, then the y_i.
  void sweep(AlsState& s, double mu, double ridge, bool update_q) const {
    RowMatrix E = Z_ - deltas(s) * s.Y;
    const std::size_t n = dims_.size();
    for (std::size_t i = 0; i < s.P.size(); ++i) {
      const Eigen::VectorXd y = s.Y.row(static_cast<Eigen::Index>(i)).transpose();
      const double yy = y.squaredNorm();
      for (int side = 0; side < (update_q ? 2 : 1); ++side) {
        SegrePoint& x = side == 0 ? s.P[i] : s.Q[i];
        const double sign = side == 0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < n; ++k) {
          // Target for sign * (x_1 (x) ... (x) x_n) (x) y.
          RowMatrix R = E + sign * elementary_vector(x) * y.transpose();
          R *= sign;
          std::vector<Eigen::VectorXd> vecs = x.factors;
          vecs.push_back(y);
          const Eigen::VectorXd b = contract_except(
              Eigen::Map<const Eigen::VectorXd>(R.data(), R.size()), full_dims_, vecs, k);
          double gamma = yy;
          for (std::size_t j = 0; j < n; ++j) {
            if (j != k) gamma *= x.factors[j].squaredNorm();
          }
          x.factors[k] = (mu * b) / (mu * gamma + ridge);
          E = sign * R - sign * elementary_vector(x) * y.transpose();
        }
      }
    }
    solve_y(s, mu, ridge);
  }

  double residual(const AlsState& s) const {
    return (Z_ - deltas(s) * s.Y).norm();
  }

 private:
  const Eigen::MatrixXd& Z_;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> full_dims_;
};

Representation to_representation(const AlsState& s) {
  Representation rep;
  for (std::size_t i = 0; i < s.P.size(); ++i) {
    RepresentationTerm t{s.P[i], s.Q[i], s.Y.row(static_cast<Eigen::Index>(i)).transpose(), 0};
    rep.terms.push_back(std::move(t));
  }
  return rep;
}

Representation basis_representation(const MixedTensor& z) {
  const auto dims = z.factor_dims();
  const Eigen::MatrixXd Z = z.matrix();
  Representation rep;
  SegrePoint zero;
  for (std::size_t d : dims) zero.factors.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
  std::vector<std::size_t> idx(dims.size(), 0);
  for (Eigen::Index row = 0; row < Z.rows(); ++row) {
    if (Z.row(row).squaredNorm() > 0.0) {
      SegrePoint e;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        e.factors.push_back(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dims[k]),
                                                  static_cast<Eigen::Index>(idx[k])));
      }
      rep.terms.push_back(RepresentationTerm{std::move(e), zero, Z.row(row).transpose(), 0});
    }
    for (std::size_t k = dims.size(); k-- > 0;) {
      if (++idx[k] < dims[k]) break;
      idx[k] = 0;
    }
  }
  return rep;
}

// Seeds become blocks; each block is rescaled as a whole so that its stored
// bound and its y-norm are balanced.
std::optional<Representation> combine_seeds(const std::vector<Representation>& seeds, double scale,
                                            double p, const NormSpec& norms, std::size_t cap) {
  if (seeds.empty()) return std::nullopt;
  const double pc = conjugate(p);
  Representation out;
  for (const auto& seed : seeds) {
    Representation r = seed;
    for (auto& t : r.terms) t.y /= scale;
    const double d = certified_sup(r, pc, norms, cap);
    const double v = y_norm(r, p, norms.codomain);
    if (d == 0.0 || v == 0.0) continue;
    const double s = balance_scale(d, v, p, pc);
    const std::size_t block = out.block_bounds.size();
    for (auto& t : r.terms) {
      scale_term(t, s);
      t.block = block;
      out.terms.push_back(std::move(t));
    }
    out.block_bounds.push_back(s * d);
  }
  return out;
}

std::size_t flattening_rank(const Eigen::MatrixXd& Z) {
  if (Z.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > 1e-12 * s[0]) ++r;
  }
  return r;
}

}  // namespace

MixedTensor::MixedTensor(DenseTensor t, NormSpec n) : data(std::move(t)), norms(std::move(n)) {
  if (data.rank() < 2) throw ShapeError("mixed tensor needs at least one factor and a codomain mode");
  if (norms.factors.size() != data.rank() - 1) {
    throw ShapeError("mixed tensor norm count does not match its factor count");
  }
  for (double x : data.data()) {
    if (!std::isfinite(x)) throw ArgumentError("mixed tensor has a non-finite entry");
  }
}

std::vector<std::size_t> MixedTensor::factor_dims() const {
  return {data.shape().begin(), data.shape().end() - 1};
}

Eigen::MatrixXd MixedTensor::matrix() const {
  const auto m = static_cast<Eigen::Index>(codomain_dim());
  return Eigen::Map<const RowMatrix>(data.data().data(), static_cast<Eigen::Index>(data.size()) / m, m);
}

Eigen::MatrixXd Representation::reconstruct(const std::vector<std::size_t>& dims, std::size_t m) const {
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(product(dims)),
                                            static_cast<Eigen::Index>(m));
  for (const auto& t : terms) {
    if (t.p.dims() != dims || t.q.dims() != dims || static_cast<std::size_t>(t.y.size()) != m) {
      throw ShapeError("representation term does not match the tensor shape");
    }
    R += (elementary_vector(t.p) - elementary_vector(t.q)) * t.y.transpose();
  }
  return R;
}

double Representation::residual(const MixedTensor& z) const {
  const Eigen::MatrixXd Z = z.matrix();
  const double err = (Z - reconstruct(z.factor_dims(), z.codomain_dim())).norm();
  const double scale = Z.norm();
  return scale > 0.0 ? err / scale : err;
}

double representation_value(const Representation& rep, double p, const NormSpec& norms,
                            std::size_t enumeration_cap) {
  require_exponent(p);
  const double v = y_norm(rep, p, norms.codomain);
  if (v == 0.0) return 0.0;
  return certified_sup(rep, conjugate(p), norms, enumeration_cap) * v;
}

void balance_representation(Representation& rep, double p, const NormSpec& norms) {
  require_exponent(p);
  const double pc = conjugate(p);
  Representation out;
  for (auto& t : rep.terms) {
    const double d = difference_norm_upper(t.p, t.q, norms.factors);
    const double v = vector_norm(t.y, norms.codomain);
    if (d == 0.0 || v == 0.0) continue;
    scale_term(t, balance_scale(d, v, p, pc));
    t.block = 0;
    out.terms.push_back(std::move(t));
  }
  rep = std::move(out);
}

DpUpperResult dp_upper(const MixedTensor& z, double p, std::size_t k, const DpOptions& options) {
  require_exponent(p);
  DpUpperResult result;
  BoundReport& report = result.report;
  report.seed = options.seed;
  report.method = "representation";
  report.certified_lower = 0.0;
  report.heuristic_lower = 0.0;

  const Eigen::MatrixXd Zraw = z.matrix();
  const double scale = Zraw.norm();
  if (scale == 0.0) {
    report.certified_upper = report.heuristic_upper = 0.0;
    return result;
  }
  // Work on z / ||z|| with a fixed sign so that the search does not depend on
  // the scale of z.
  std::vector<double> flat(z.data.data().begin(), z.data.data().end());
  const auto lead = std::find_if(flat.begin(), flat.end(), [](double x) { return x != 0.0; });
  const double sign = *lead < 0.0 ? -1.0 : 1.0;
  const double signed_scale = sign * scale;
  const MixedTensor zn = normalized_copy(z, signed_scale);
  const Eigen::MatrixXd Z = zn.matrix();
  const auto dims = zn.factor_dims();
  const std::size_t m = zn.codomain_dim();
  const std::size_t n = dims.size();

  const std::size_t rank = flattening_rank(Z);
  if (k == 0) k = 2 * rank;
  report.restarts = options.restarts;

  std::vector<Representation> candidates;
  std::vector<double> residuals;

  // Alternating least squares, one run per start.
  std::vector<std::optional<Representation>> runs(static_cast<std::size_t>(std::max(options.restarts, 0)));
  std::vector<long> sweeps(runs.size(), 0);
  const Als als(Z, dims);
  parallel_for(runs.size(), [&](std::size_t r) {
    Rng rng = Rng(options.seed, 0x6470).fork(r);
    AlsState s;
    // Term counts cycle from the rank up to k; q_i = 0 on even starts.
    const std::size_t lo = std::clamp<std::size_t>(rank, 1, k);
    const std::size_t terms = lo + (r / 2) % (k - lo + 1);
    const double mag = std::pow(1.0 / static_cast<double>(terms), 1.0 / static_cast<double>(n + 1));
    const bool with_q = r % 2 == 1;
    for (std::size_t i = 0; i < terms; ++i) {
      SegrePoint P, Q;
      for (std::size_t d : dims) {
        const auto di = static_cast<Eigen::Index>(d);
        P.factors.push_back(rng.normal_vector(di) * (mag / std::sqrt(static_cast<double>(d))));
        Q.factors.push_back(with_q ? Eigen::VectorXd(rng.normal_vector(di) * (mag / std::sqrt(static_cast<double>(d))))
                                   : Eigen::VectorXd::Zero(di));
      }
      s.P.push_back(std::move(P));
      s.Q.push_back(std::move(Q));
    }
    s.Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(terms), static_cast<Eigen::Index>(m));
    als.solve_y(s, options.penalty, 1.0);
    long count = 0;
    double prev = kInf;
    for (int it = 0; it < options.max_sweeps; ++it, ++count) {
      als.sweep(s, options.penalty, 1.0, with_q);
      const double res = als.residual(s);
      if (std::abs(prev - res) <= 1e-12) break;
      prev = res;
    }
    for (int it = 0; it < options.polish_sweeps; ++it, ++count) {
      als.sweep(s, 1.0, 1e-12, with_q);
      if (als.residual(s) <= 1e-13) break;
    }
    als.repair_y(s);
    sweeps[r] = count;
    runs[r] = to_representation(s);
  });
  for (std::size_t r = 0; r < runs.size(); ++r) {
    report.iterations += sweeps[r];
    if (runs[r]) candidates.push_back(std::move(*runs[r]));
  }

  Representation basis = basis_representation(zn);
  if (basis.terms.size() <= k) candidates.push_back(std::move(basis));

  std::optional<Representation> combined = combine_seeds(options.seeds, signed_scale, p, zn.norms,
                                                         options.enumeration_cap);

  double best = kInf;
  std::optional<Representation> best_rep;
  double best_residual = 0.0;
  auto consider = [&](Representation rep, bool balance) {
    if (balance) balance_representation(rep, p, zn.norms);
    const double res = rep.residual(zn);
    if (!(res <= options.residual_tolerance)) return;
    const double value = representation_value(rep, p, zn.norms, options.enumeration_cap);
    if (value < best) {
      best = value;
      best_rep = std::move(rep);
      best_residual = res;
    }
  };
  for (auto& c : candidates) consider(std::move(c), true);
  if (combined) consider(std::move(*combined), false);

  if (!best_rep) {
    throw ArgumentError("no representation with " + std::to_string(k) +
                        " terms reconstructs z within the residual tolerance; increase k");
  }

  for (auto& t : best_rep->terms) t.y *= signed_scale;
  result.residual = best_residual;
  result.terms = best_rep->terms.size();
  result.representation = std::move(*best_rep);
  report.certified_upper = best * scale;
  report.heuristic_upper = report.certified_upper;
  report.normalize();
  return result;
}

double pairing(const MultilinearOperator& T, const MixedTensor& z) {
  if (T.kernel().shape() != z.data.shape()) throw ShapeError("witness shape does not match z");
  return T.kernel().as_vector().dot(z.data.as_vector());
}

BoundReport dp_lower_dual(const MixedTensor& z, double p, const std::vector<Witness>& witnesses) {
  require_exponent(p);
  BoundReport report;
  report.method = "dual-pairing";
  report.restarts = static_cast<long>(witnesses.size());
  for (const auto& w : witnesses) {
    const double value = std::abs(pairing(w.op, z));
    if (value == 0.0) continue;
    if (!(w.pi_upper > 0.0)) continue;
    const double ratio = value / w.pi_upper;
    report.heuristic_lower = std::max(report.heuristic_lower, ratio);
    if (w.certified) report.certified_lower = std::max(report.certified_lower, ratio);
  }
  report.heuristic_lower = std::max(report.heuristic_lower, report.certified_lower);
  return report;
}

std::vector<Witness> dual_witnesses(const MixedTensor& z, double p, const DpOptions& options) {
  require_exponent(p);
  const auto dims = z.factor_dims();
  const std::size_t m = z.codomain_dim();
  const std::size_t n = dims.size();
  NormSpec wnorms{z.norms.factors, dual(z.norms.codomain)};

  std::vector<std::size_t> full = dims;
  full.push_back(m);
  std::vector<NormKind> balls;
  for (NormKind r : z.norms.factors) balls.push_back(dual(r));
  balls.push_back(dual(z.norms.codomain));
  const detail::Multiform f{full, balls, z.data.as_vector()};

  std::vector<Witness> out;
  auto rank_one = [&](const std::vector<Eigen::VectorXd>& fs, const Eigen::VectorXd& ystar,
                      const std::string& kind) {
    SegrePoint pt;
    pt.factors = fs;
    pt.factors.push_back(ystar);
    double pi = vector_norm(ystar, dual(z.norms.codomain));
    for (std::size_t k = 0; k < n; ++k) pi *= vector_norm(fs[k], dual(z.norms.factors[k]));
    if (!(pi > 0.0)) return;
    out.push_back(Witness{MultilinearOperator(elementary_tensor(pt), wnorms), pi, true, kind});
  };

  // Injective-type witnesses from alternating maximization of z.
  detail::LocalMax best;
  best.value = -1.0;
  const int starts = std::max(options.restarts, 1);
  for (int r = 0; r < starts; ++r) {
    Rng rng = Rng(options.seed, 0x7769).fork(static_cast<std::uint64_t>(r));
    detail::Point start = r == 0 ? detail::spectral_start(f) : detail::random_point(f, rng);
    auto lm = detail::alternating_max(f, std::move(start), 500, 1e-13);
    if (lm.value > best.value) best = std::move(lm);
  }
  if (best.value > 0.0) {
    const std::vector<Eigen::VectorXd> fs(best.point.begin(), best.point.begin() + static_cast<long>(n));
    rank_one(fs, best.point[n], "rank-one");
  }

  // Projective witnesses phi (x) y* for the best y*.
  const Eigen::MatrixXd Z = z.matrix();
  std::vector<Eigen::VectorXd> ystars;
  if (best.value > 0.0) ystars.push_back(best.point[n]);
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinV);
    if (svd.singularValues().size() > 0 && svd.singularValues()[0] > 0.0) {
      const Eigen::VectorXd v = svd.matrixV().col(0);
      ystars.push_back(v / vector_norm(v, dual(z.norms.codomain)));
    }
  }
  const OperatorGauge gauge(dims, z.norms.factors, options.enumeration_cap);
  AscentOptions asc;
  asc.restarts = options.restarts;
  asc.max_iterations = 400;
  asc.seed = options.seed;
  for (const auto& ystar : ystars) {
    const Eigen::VectorXd w = Z * ystar;
    if (w.squaredNorm() == 0.0) continue;
    const Eigen::MatrixXd A = w.transpose();
    std::vector<Eigen::VectorXd> starts{w};
    if (best.value > 0.0) {
      SegrePoint pt;
      pt.factors.assign(best.point.begin(), best.point.begin() + static_cast<long>(n));
      starts.push_back(elementary_vector(pt));
    }
    const auto rr = maximize_ratio(A, 1.0, gauge, starts, asc);
    if (rr.certified_form.size() == 0) continue;
    const double phinorm = gauge.upper(rr.certified_form);
    if (!(phinorm > 0.0)) continue;
    DenseTensor kernel = DenseTensor::zeros(full);
    Eigen::Map<RowMatrix>(kernel.mutable_data().data(), static_cast<Eigen::Index>(product(dims)),
                          static_cast<Eigen::Index>(m)) = rr.certified_form * ystar.transpose();
    const double pi = phinorm * vector_norm(ystar, dual(z.norms.codomain));
    out.push_back(Witness{MultilinearOperator(std::move(kernel), wnorms), pi, true, "projective"});
  }

  // z itself as an operator; its summing norm is only estimated.
  if (options.heuristic_witness && Z.norm() > 0.0) {
    const MultilinearOperator Tz(z.data, wnorms);
    SummingBudget b;
    b.rounds = 2;
    b.max_pairs = 24;
    b.max_dictionary = 48;
    b.random_forms = 8;
    b.restarts = 2;
    b.seed = options.seed;
    const auto est = estimate_pi_lip(Tz, conjugate(p), b);
    if (std::isfinite(est.certificate.constant) && est.certificate.constant > 0.0) {
      out.push_back(Witness{Tz, est.certificate.constant, false, "self"});
    }
  }
  return out;
}

double delta_p_norm(const std::vector<Eigen::VectorXd>& ys, double p, NormKind r) {
  if (!(p >= 1.0)) throw ArgumentError("delta_p needs p >= 1");
  Eigen::VectorXd v(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < ys.size(); ++i) v[static_cast<Eigen::Index>(i)] = vector_norm(ys[i], r);
  return ys.empty() ? 0.0 : power_norm(v, p);
}

BoundReport epsilon_norm_diff(const PairConfiguration& cfg, double p,
                              std::span<const NormKind> factor_norms, const AscentOptions& options) {
  return config_denominator(cfg, p, Ball::Operator, factor_norms, options).report;
}

DeltaEpsilonReport check_delta_epsilon(const MultilinearOperator& T, const PairConfiguration& cfg,
                                       double p, const SummingBudget& budget) {
  if (cfg.empty()) throw ArgumentError("configuration is empty");
  if (cfg.dims() != T.factor_dims()) throw ShapeError("configuration does not match the operator");
  DeltaEpsilonReport out;
  std::vector<Eigen::VectorXd> mapped;
  for (const auto& pr : cfg.pairs()) {
    const double a = std::isinf(p) ? 1.0 : std::pow(pr.weight, 1.0 / p);
    mapped.push_back(a * (eval_operator(T, pr.u) - eval_operator(T, pr.v)));
  }
  out.lhs = delta_p_norm(mapped, p, T.norms().codomain);

  SummingOptions options;
  options.initial_pairs = cfg;
  out.constant = estimate_pi_lip(T, p, budget, options).certificate.constant;

  AscentOptions asc;
  asc.restarts = budget.restarts;
  asc.max_iterations = budget.max_iterations;
  asc.seed = budget.seed;
  out.epsilon = epsilon_norm_diff(cfg, p, T.norms().factors, asc);
  out.rhs = out.constant * out.epsilon.certified_upper;
  out.holds = out.lhs <= out.rhs + 1e-7;
  return out;
}

}  // namespace lipsum
