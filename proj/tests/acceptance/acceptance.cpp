// Acceptance runner: one PASS/FAIL line per criterion.
//
//   lipsum_acceptance <path-to-lipsum-cli> [scratch-dir]
//
// Exit status is the number of failed criteria (0 when all pass).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "generate.hpp"
#include "lipsum/dp_norm.hpp"
#include "lipsum/form_norm.hpp"
#include "lipsum/hilbert_schmidt.hpp"
#include "lipsum/summing.hpp"

using namespace lipsum;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SummingBudget budget_for(std::uint64_t seed) {
  SummingBudget b;
  b.seed = seed;
  return b;
}

// Lambda_n with the one-form dictionary {Lambda_n}.
Outcome lambda_unit_norm() {
  Outcome o;
  double worst_time = 0.0, min_lower = 1e300, max_upper = 0.0;
  for (std::size_t n : {2u, 3u}) {
    for (double p : {1.0, 2.0}) {
      const auto t0 = Clock::now();
      const auto T = MultilinearOperator::scalar_product(n);
      SummingOptions opt;
      opt.dictionary = std::vector<Eigen::VectorXd>{T.kernel().as_vector()};
      const auto r = estimate_pi_lip(T, p, budget_for(11), opt);
      const double dt = seconds_since(t0);
      worst_time = std::max(worst_time, dt);
      min_lower = std::min(min_lower, r.report.certified_lower);
      max_upper = std::max(max_upper, r.certificate.constant);
      if (r.report.certified_lower < 0.999 || r.certificate.constant > 1.001 || dt >= 1.0) {
        o.pass = false;
      }
    }
  }
  o.detail = "min certified_lower " + fmt("%.9f", min_lower) + ", max LP constant " +
             fmt("%.9f", max_upper) + ", slowest run " + fmt("%.3fs", worst_time);
  return o;
}

Outcome scalar_form_exactness() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad = 0;
  for (int t = 0; t < 50; ++t) {
    Rng rng = Rng(2024, 2).fork(static_cast<std::uint64_t>(t));
    const auto T = gen::random_operator(rng, {2, 2}, 1);
    const Eigen::Map<const Eigen::Matrix<double, 2, 2, Eigen::RowMajor>> K(T.kernel().data().data());
    const double svd = Eigen::JacobiSVD<Eigen::Matrix2d>(Eigen::Matrix2d(K)).singularValues()[0];
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const auto r = estimate_pi_lip(T, p, budget_for(static_cast<std::uint64_t>(t)));
    const double lo = r.report.certified_lower;
    const double hi = r.certificate.constant;
    const double dev = std::max(std::abs(lo - svd), std::abs(hi - svd)) / svd;
    worst = std::max(worst, dev);
    if (!(lo <= svd * (1 + 1e-9) && hi >= svd * (1 - 1e-9) && dev <= 0.02)) ++bad;
  }
  const double dt = seconds_since(t0);
  o.pass = bad == 0 && dt < 30.0;
  o.detail = std::to_string(bad) + "/50 outside, worst relative deviation " + fmt("%.3g", worst) +
             ", " + fmt("%.2fs", dt);
  return o;
}

Outcome hs_lower_exactness() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    Rng rng = Rng(2024, 3).fork(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> dims;
    const std::size_t arity = 1 + static_cast<std::size_t>(t % 3);
    for (std::size_t k = 0; k < arity; ++k) dims.push_back(1 + static_cast<std::size_t>(rng.uniform() * 3.0));
    const auto T = gen::random_operator(rng, dims, 1 + static_cast<std::size_t>(rng.uniform() * 3.0));
    const double h = hs_norm(T);
    const double rel = std::abs(basis_config_lower(T) - h) / h;
    worst = std::max(worst, rel);
    if (!(rel <= 1e-9)) ++bad;
  }
  const double dt = seconds_since(t0);
  o.pass = bad == 0 && dt < 10.0;
  o.detail = std::to_string(bad) + "/100 off, worst relative error " + fmt("%.3g", worst) + ", " +
             fmt("%.2fs", dt);
  return o;
}

Outcome inclusion() {
  Outcome o;
  int bad = 0;
  double worst = -1e300;
  for (int t = 0; t < 50; ++t) {
    for (auto [p, q] : {std::array<double, 2>{1.0, 2.0}, std::array<double, 2>{2.0, 4.0}}) {
      Rng rng = Rng(2024, 4).fork(static_cast<std::uint64_t>(t));
      const auto T = gen::random_operator(rng, {2, 2}, 1 + static_cast<std::size_t>(t % 2));
      const auto rq = estimate_pi_lip(T, q, budget_for(static_cast<std::uint64_t>(t)));
      const auto lp = pietsch_upper_lp(T, rq.certificate.pairset, rq.certificate.forms, p);
      const double excess = rq.report.certified_lower - lp.constant;
      worst = std::max(worst, excess);
      if (!(excess <= 1e-7)) ++bad;
    }
  }
  o.pass = bad == 0;
  o.detail = std::to_string(bad) + "/100 violations, worst excess " + fmt("%.3g", worst);
  return o;
}

Outcome norm_domination() {
  Outcome o;
  int bad = 0;
  double worst = -1e300;
  for (int t = 0; t < 50; ++t) {
    Rng rng = Rng(2024, 5).fork(static_cast<std::uint64_t>(t));
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    AscentOptions a;
    a.seed = static_cast<std::uint64_t>(t) + 77;
    const double norm = operator_norm(T, a).report.certified_lower;
    const auto r = estimate_pi_lip(T, t % 2 == 0 ? 2.0 : 1.0, budget_for(static_cast<std::uint64_t>(t)));
    const double excess = norm - r.certificate.constant;
    worst = std::max(worst, excess);
    if (!(excess <= 1e-6)) ++bad;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(bad) + "/50 violations, worst excess " + fmt("%.3g", worst);
  return o;
}

Outcome restriction() {
  Outcome o;
  int bad = 0;
  double worst = -1e300;
  for (int t = 0; t < 30; ++t) {
    Rng rng = Rng(2024, 6).fork(static_cast<std::uint64_t>(t));
    const auto T = gen::random_operator(rng, {2, 2, 2}, 1 + static_cast<std::size_t>(t % 2));
    const std::size_t slot = static_cast<std::size_t>(t % 3);
    const Eigen::VectorXd x0 = rng.unit_vector(2, NormKind::L2);
    const std::map<std::size_t, Eigen::VectorXd> fixed{{slot, x0}};
    const auto child = estimate_pi_lip(restrict_operator(T, fixed), 2.0, budget_for(static_cast<std::uint64_t>(t)));
    SummingOptions opt;
    opt.initial_pairs = lift_configuration(child.witness, fixed);
    const auto parent = estimate_pi_lip(T, 2.0, budget_for(static_cast<std::uint64_t>(t) + 1000), opt);
    const double excess = child.report.certified_lower - x0.norm() * parent.certificate.constant;
    worst = std::max(worst, excess);
    if (!(excess <= 1e-6)) ++bad;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(bad) + "/30 violations, worst excess " + fmt("%.3g", worst);
  return o;
}

Outcome delta_epsilon() {
  Outcome o;
  int bad = 0;
  double worst = -1e300;
  for (int t = 0; t < 50; ++t) {
    Rng rng = Rng(2024, 7).fork(static_cast<std::uint64_t>(t));
    const auto T = gen::random_operator(rng, {2, 2}, 2);
    const auto cfg = gen::random_configuration(rng, {2, 2}, gen::l2_norms(2), 4);
    const auto r = check_delta_epsilon(T, cfg, 2.0, budget_for(static_cast<std::uint64_t>(t)));
    worst = std::max(worst, r.lhs - r.rhs);
    if (!r.holds) ++bad;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(bad) + "/50 violations, worst lhs - rhs " + fmt("%.3g", worst);
  return o;
}

Outcome dp_weak_duality() {
  Outcome o;
  const NormSpec ns{gen::l2_norms(2), NormKind::L2};
  int bad = 0;
  double worst = -1e300;
  for (int t = 0; t < 50; ++t) {
    Rng rng = Rng(2024, 8).fork(static_cast<std::uint64_t>(t));
    const auto z = gen::random_mixed(rng, {2, 2}, 2, ns);
    const double p = t % 2 == 0 ? 2.0 : 3.0;
    DpOptions opt;
    opt.seed = static_cast<std::uint64_t>(t);
    const double up = dp_upper(z, p, 0, opt).report.certified_upper;
    const double lo = dp_lower_dual(z, p, dual_witnesses(z, p, opt)).certified_lower;
    worst = std::max(worst, lo - up);
    if (!(lo <= up + 1e-7)) ++bad;
  }
  int wide = 0;
  double widest = 0.0;
  for (int t = 0; t < 20; ++t) {
    Rng rng = Rng(2024, 9).fork(static_cast<std::uint64_t>(t));
    const SegrePoint x{{rng.normal_vector(2), rng.normal_vector(3), rng.normal_vector(2)}};
    const MixedTensor z(elementary_tensor(x), NormSpec{gen::l2_norms(2), NormKind::L2});
    const double p = t % 2 == 0 ? 2.0 : 3.0;
    const double up = dp_upper(z, p).report.certified_upper;
    const double lo = dp_lower_dual(z, p, dual_witnesses(z, p)).certified_lower;
    const double width = (up - lo) / up;
    widest = std::max(widest, width);
    if (!(width <= 0.05) || !(lo <= up + 1e-7)) ++wide;
  }
  o.pass = bad == 0 && wide == 0;
  o.detail = std::to_string(bad) + "/50 duality violations (worst " + fmt("%.3g", worst) + "), " +
             std::to_string(wide) + "/20 elementary brackets wider than 5% (widest " +
             fmt("%.3g", widest) + ")";
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& cmd, std::string& stdout_text) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::array<char, 4096> buf;
  stdout_text.clear();
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) stdout_text.append(buf.data(), n);
  const int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const std::string& cli, const std::filesystem::path& dir) {
  Outcome o;
  std::filesystem::create_directories(dir);
  const auto a = dir / "verify_a.json";
  const auto b = dir / "verify_b.json";
  std::string out_a, out_b;
  const int rc_a = run_cli("\"" + cli + "\" verify --seed 7 --threads 1 --json-out \"" + a.string() + "\"", out_a);
  const int rc_b = run_cli("\"" + cli + "\" verify --seed 7 --threads 4 --json-out \"" + b.string() + "\"", out_b);
  const std::string file_a = slurp(a), file_b = slurp(b);
  o.pass = rc_a == 0 && rc_b == 0 && !file_a.empty() && file_a == file_b && out_a == out_b;
  o.detail = "exit codes " + std::to_string(rc_a) + "/" + std::to_string(rc_b) + ", report " +
             std::to_string(file_a.size()) + " bytes, " +
             (file_a == file_b && out_a == out_b ? "identical" : "different");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: lipsum_acceptance <lipsum-cli> [scratch-dir]\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::filesystem::path scratch =
      argc > 2 ? std::filesystem::path(argv[2]) : std::filesystem::temp_directory_path() / "lipsum_acceptance";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"lambda-unit-norm", lambda_unit_norm},
      {"scalar-form-exactness", scalar_form_exactness},
      {"hs-lower-exactness", hs_lower_exactness},
      {"inclusion", inclusion},
      {"norm-domination", norm_domination},
      {"restriction-bound", restriction},
      {"delta-epsilon", delta_epsilon},
      {"dp-weak-duality", dp_weak_duality},
      {"determinism", [&] { return determinism(cli, scratch); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed;
}
