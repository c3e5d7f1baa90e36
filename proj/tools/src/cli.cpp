#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "generate.hpp"
#include "lipsum/dp_norm.hpp"
#include "lipsum/errors.hpp"
#include "lipsum/hilbert_schmidt.hpp"
#include "lipsum/json_io.hpp"
#include "lipsum/parallel.hpp"
#include "lipsum/summing.hpp"
#include "lipsum/version.hpp"
#include "verify.hpp"

namespace lipsum::cli {

namespace {

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double tolerance = 1e-7;
  std::string p_text = "2";
  std::string ball = "op";
  std::string input;
  std::string json_out;
  SummingBudget budget;
  int ascent_restarts = 64;
  int trials = 10;
  std::string dictionary;
  std::size_t terms = 0;
  bool heuristic_witness = false;
  bool with_representation = false;
  std::vector<std::string> fixes;
  // gen
  std::string kind = "operator";
  std::string dims = "2,2";
  std::size_t codomain = 2;
  std::string norms;
  std::string codomain_norm = "2";
  std::size_t count = 4;
};

double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(p >= 1.0)) throw ArgumentError("--p must be a number >= 1 or 'inf' (got '" + s + "')");
  return p;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<std::size_t> parse_dims(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split(s, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v <= 0) throw ArgumentError("bad dimension list '" + s + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ArgumentError("empty dimension list");
  return out;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  std::vector<double> v;
  for (const auto& item : split(s, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(x)) throw ArgumentError("bad vector entry '" + item + "'");
    v.push_back(x);
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json config_json(const std::string& command, const RunConfig& c) {
  Json j;
  j["command"] = command;
  j["seed"] = c.seed;
  j["tol"] = c.tolerance;
  if (!c.input.empty()) j["input"] = c.input;
  Json b;
  b["rounds"] = c.budget.rounds;
  b["adversarial_starts"] = c.budget.adversarial_starts;
  b["max_pairs"] = c.budget.max_pairs;
  b["max_dictionary"] = c.budget.max_dictionary;
  b["random_forms"] = c.budget.random_forms;
  b["random_pairs"] = c.budget.random_pairs;
  b["restarts"] = c.budget.restarts;
  b["max_iterations"] = c.budget.max_iterations;
  b["bisection_steps"] = c.budget.bisection_steps;
  b["ascent_restarts"] = c.ascent_restarts;
  j["budget"] = std::move(b);
  return j;
}

Json envelope(const std::string& command, const RunConfig& c, double p, bool with_p) {
  Json j;
  j["tool"] = "lipsum";
  j["version"] = std::string(version());
  j["git"] = std::string(git_describe());
  Json cfg = config_json(command, c);
  if (with_p) cfg["p"] = number_json(p);
  j["config"] = std::move(cfg);
  return j;
}

void emit(const Json& j, const RunConfig& c, std::ostream& out) {
  const std::string text = dump_json(j);
  out << text;
  if (!c.json_out.empty()) {
    std::ofstream f(c.json_out, std::ios::binary);
    if (!f) throw SchemaError(c.json_out + ": cannot open file for writing");
    f << text;
  }
}

std::vector<Eigen::VectorXd> load_dictionary(const std::string& path, const std::vector<std::size_t>& dims) {
  const Json j = read_json_file(path);
  std::vector<Json> items;
  if (j.is_array()) {
    items.assign(j.begin(), j.end());
  } else if (j.is_object() && j.contains("forms")) {
    items.assign(j["forms"].begin(), j["forms"].end());
  } else {
    items.push_back(j);
  }
  std::vector<Eigen::VectorXd> forms;
  for (const auto& item : items) {
    DenseTensor t = tensor_from_json(item);
    auto shape = t.shape();
    if (shape.size() == dims.size() + 1 && shape.back() == 1) shape.pop_back();
    if (shape != dims) throw SchemaError(path + ": dictionary form shape does not match the operator factors");
    forms.emplace_back(t.as_vector());
  }
  if (forms.empty()) throw SchemaError(path + ": dictionary is empty");
  return forms;
}

AscentOptions ascent_options(const RunConfig& c) {
  AscentOptions a;
  a.restarts = c.ascent_restarts;
  a.seed = c.seed;
  return a;
}

int run_norm(const RunConfig& c, std::ostream& out) {
  const auto T = load_operator(c.input);
  const auto r = operator_norm(T, ascent_options(c));
  Json j = envelope("norm", c, 0.0, false);
  Json res;
  res["report"] = to_json(r.report);
  res["argmax"] = to_json(r.argmax);
  j["result"] = std::move(res);
  emit(j, c, out);
  return 0;
}

Json summing_json(const SummingResult& r) {
  Json res;
  res["report"] = to_json(r.report);
  res["constant"] = number_json(r.certificate.constant);
  res["rounds"] = r.rounds;
  res["dictionary_exhausted"] = r.dictionary_exhausted;
  res["operator_norm"] = to_json(r.norm.report);
  res["witness"] = to_json(r.witness);
  res["certificate"] = to_json(r.certificate);
  return res;
}

int run_summing(const RunConfig& c, std::ostream& out) {
  const double p = parse_exponent(c.p_text);
  const auto T = load_operator(c.input);
  SummingOptions options;
  options.ball = ball_from_string(c.ball);
  if (!c.dictionary.empty()) options.dictionary = load_dictionary(c.dictionary, T.factor_dims());
  SummingBudget b = c.budget;
  b.seed = c.seed;
  const auto r = estimate_pi_lip(T, p, b, options);
  Json j = envelope("summing", c, p, true);
  j["config"]["ball"] = c.ball;
  if (!c.dictionary.empty()) j["config"]["dictionary"] = c.dictionary;
  j["result"] = summing_json(r);
  emit(j, c, out);
  return 0;
}

int run_hs(const RunConfig& c, std::ostream& out) {
  const double p = parse_exponent(c.p_text);
  const auto T = load_operator(c.input);
  Json j = envelope("hs", c, p, true);
  Json res;
  res["hs_norm"] = hs_norm(T);
  res["khintchine"] = khintchine_constant(p).value;
  if (product(T.factor_dims()) <= 4096) {
    SummingBudget b = c.budget;
    b.seed = c.seed;
    const auto s = verify_sandwich(T, p, b);
    res["basis_lower"] = s.basis_lower;
    Json sw;
    sw["lp_constant"] = s.lp_constant;
    sw["lp_constant_p"] = number_json(s.lp_constant_p);
    sw["ratio"] = s.ratio;
    sw["khintchine_bound"] = s.khintchine_bound;
    sw["lower_exact"] = s.lower_exact;
    sw["lp_consistent"] = s.lp_consistent;
    res["sandwich"] = std::move(sw);
  } else {
    res["sandwich"] = nullptr;
  }
  j["result"] = std::move(res);
  emit(j, c, out);
  return 0;
}

int run_dnorm(const RunConfig& c, std::ostream& out) {
  const double p = parse_exponent(c.p_text);
  const MixedTensor z = load_mixed(c.input);
  DpOptions o;
  o.restarts = c.budget.restarts;
  o.seed = c.seed;
  o.heuristic_witness = c.heuristic_witness;
  const auto up = dp_upper(z, p, c.terms, o);
  const auto witnesses = dual_witnesses(z, p, o);
  const auto lo = dp_lower_dual(z, p, witnesses);
  Json j = envelope("dnorm", c, p, true);
  j["config"]["terms"] = c.terms;
  Json res;
  res["upper"] = to_json(up.report);
  res["lower"] = to_json(lo);
  res["residual"] = up.residual;
  res["terms"] = up.terms;
  Json ws = Json::array();
  for (const auto& w : witnesses) {
    Json e;
    e["kind"] = w.kind;
    e["pi_upper"] = number_json(w.pi_upper);
    e["certified"] = w.certified;
    e["pairing"] = pairing(w.op, z);
    ws.push_back(std::move(e));
  }
  res["witnesses"] = std::move(ws);
  if (c.with_representation) res["representation"] = to_json(up.representation);
  j["result"] = std::move(res);
  emit(j, c, out);
  return 0;
}

int run_restrict(const RunConfig& c, std::ostream& out) {
  const double p = parse_exponent(c.p_text);
  const auto T = load_operator(c.input);
  if (c.fixes.empty()) throw ArgumentError("restrict needs at least one --fix SLOT=v1,v2,...");
  std::map<std::size_t, Eigen::VectorXd> fixed;
  double scale = 1.0;
  for (const auto& f : c.fixes) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw ArgumentError("--fix expects SLOT=v1,v2,... (got '" + f + "')");
    std::size_t idx = 0;
    try {
      idx = static_cast<std::size_t>(std::stoul(f.substr(0, eq)));
    } catch (const std::exception&) {
      throw ArgumentError("bad slot in --fix '" + f + "'");
    }
    if (idx >= T.arity()) throw ArgumentError("slot " + std::to_string(idx) + " out of range");
    const Eigen::VectorXd v = parse_vector(f.substr(eq + 1));
    if (static_cast<std::size_t>(v.size()) != T.factor_dims()[idx]) {
      throw ShapeError("--fix vector length does not match slot " + std::to_string(idx));
    }
    if (!fixed.emplace(idx, v).second) throw ArgumentError("slot " + std::to_string(idx) + " fixed twice");
    scale *= vector_norm(v, T.norms().factors[idx]);
  }
  const auto child_op = restrict_operator(T, fixed);
  SummingBudget b = c.budget;
  b.seed = c.seed;
  const auto child = estimate_pi_lip(child_op, p, b);
  SummingOptions options;
  options.initial_pairs = lift_configuration(child.witness, fixed);
  const auto parent = estimate_pi_lip(T, p, b, options);
  Json j = envelope("restrict", c, p, true);
  Json fx = Json::array();
  for (const auto& f : c.fixes) fx.push_back(f);
  j["config"]["fix"] = std::move(fx);
  Json res;
  res["operator"] = to_json(child_op);
  res["restricted"] = to_json(child.report);
  res["fixed_norm_product"] = scale;
  res["parent_constant"] = number_json(parent.certificate.constant);
  const double bound = scale * parent.certificate.constant;
  res["bound"] = number_json(bound);
  res["holds"] = child.report.certified_lower <= bound + c.tolerance;
  j["result"] = std::move(res);
  emit(j, c, out);
  return 0;
}

int run_poly(const RunConfig& c, std::ostream& out) {
  const double p = parse_exponent(c.p_text);
  const auto P = load_operator(c.input);
  SummingBudget b = c.budget;
  b.seed = c.seed;
  const auto r = estimate_pi_lip_poly(P, p, b);
  Json j = envelope("poly", c, p, true);
  j["result"] = summing_json(r);
  emit(j, c, out);
  return 0;
}

int run_verify(const RunConfig& c, std::ostream& out) {
  VerifyConfig v;
  v.seed = c.seed;
  v.trials = c.trials;
  v.budget = c.budget;
  v.budget.seed = c.seed;
  v.tolerance = c.tolerance;
  const auto results = run_property_suite(v);
  Json j = envelope("verify", c, 0.0, false);
  j["config"]["trials"] = c.trials;
  Json props = Json::array();
  bool all = true;
  for (const auto& r : results) {
    props.push_back(to_json(r));
    all &= r.pass();
  }
  Json res;
  res["properties"] = std::move(props);
  res["pass"] = all;
  j["result"] = std::move(res);
  emit(j, c, out);
  return all ? 0 : 1;
}

int run_gen(const RunConfig& c, std::ostream& out) {
  Rng rng(c.seed);
  Json j;
  if (c.kind == "lambda") {
    const auto dims = parse_dims(c.dims);
    j = to_json(MultilinearOperator::scalar_product(dims.size()));
  } else {
    const auto dims = parse_dims(c.dims);
    std::vector<NormKind> norms;
    if (c.norms.empty()) {
      norms = gen::l2_norms(dims.size());
    } else {
      for (const auto& s : split(c.norms, ',')) norms.push_back(norm_kind_from_string(s));
    }
    if (norms.size() != dims.size()) throw ArgumentError("--norms needs one entry per dimension");
    const NormSpec spec{norms, norm_kind_from_string(c.codomain_norm)};
    if (c.kind == "operator") {
      j = to_json(gen::random_operator(rng, dims, c.codomain, spec));
    } else if (c.kind == "form") {
      j = to_json(gen::random_operator(rng, dims, 1, NormSpec{norms, NormKind::L2}));
    } else if (c.kind == "zero") {
      j = to_json(MultilinearOperator::zero(dims, c.codomain, spec));
    } else if (c.kind == "mixed") {
      j = to_json(gen::random_mixed(rng, dims, c.codomain, spec));
    } else if (c.kind == "config") {
      Json cfg;
      cfg["role"] = "configuration";
      cfg["pairs"] = to_json(gen::random_configuration(rng, dims, norms, c.count));
      j = std::move(cfg);
    } else {
      throw ArgumentError("unknown --kind '" + c.kind + "'");
    }
  }
  emit(j, c, out);
  return 0;
}

void add_common(CLI::App* app, RunConfig& c) {
  app->add_option("--seed", c.seed, "Seed of every random stream")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app->add_option("--json-out", c.json_out, "Also write the JSON report to this path");
  app->add_option("--tol", c.tolerance, "Tolerance for reported inequality checks, in (0, 1)")
      ->capture_default_str();
  app->add_option("--budget-rounds", c.budget.rounds, "Cutting-plane rounds")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-adversarial", c.budget.adversarial_starts, "Random starts of the pair search per round")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-pairs", c.budget.max_pairs, "Largest pairset")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-dictionary", c.budget.max_dictionary, "Largest form dictionary")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-forms", c.budget.random_forms, "Random forms in the initial dictionary")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-random-pairs", c.budget.random_pairs, "Random pairs in the initial pairset")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-restarts", c.budget.restarts, "Random starts of each denominator ascent")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-iterations", c.budget.max_iterations, "Iteration cap of each ascent")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-bisection", c.budget.bisection_steps, "LP bisection steps")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--budget-ascent-restarts", c.ascent_restarts, "Random starts of the operator-norm ascent")
      ->check(CLI::PositiveNumber)->capture_default_str();
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lipschitz p-summing norms of multilinear operators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()) + " (" + std::string(git_describe()) + ")");
  RunConfig c;

  auto* norm = app.add_subcommand("norm", "Operator norm bracket");
  norm->add_option("input", c.input, "Operator JSON")->required();
  auto* summing = app.add_subcommand("summing", "Lipschitz p-summing norm bracket and certificate");
  summing->add_option("input", c.input, "Operator JSON")->required();
  summing->add_option("--p", c.p_text, "Summing exponent (>= 1 or inf)")->capture_default_str();
  summing->add_option("--ball", c.ball, "Form ball for configuration sups")
      ->check(CLI::IsMember({"op", "hs"}))->capture_default_str();
  summing->add_option("--dictionary", c.dictionary, "JSON list of forms to use as a fixed dictionary");
  auto* hs = app.add_subcommand("hs", "Hilbert-Schmidt norm and sandwich check");
  hs->add_option("input", c.input, "Operator JSON")->required();
  hs->add_option("--p", c.p_text, "Exponent of the Khintchine bound")->capture_default_str();
  auto* dnorm = app.add_subcommand("dnorm", "Bracket on the d_p norm of a mixed tensor");
  dnorm->add_option("input", c.input, "Mixed tensor JSON")->required();
  dnorm->add_option("--p", c.p_text, "Exponent (> 1 or inf)")->capture_default_str();
  dnorm->add_option("--terms", c.terms, "Representation term count (0 = twice the flattening rank)")
      ->capture_default_str();
  dnorm->add_flag("--heuristic-witness", c.heuristic_witness, "Add z itself as an uncertified witness");
  dnorm->add_flag("--representation", c.with_representation, "Include the best representation");
  auto* restrict = app.add_subcommand("restrict", "Fix slots and compare with the parent");
  restrict->add_option("input", c.input, "Operator JSON")->required();
  restrict->add_option("--fix", c.fixes, "SLOT=v1,v2,... (zero-based slot)")->required();
  restrict->add_option("--p", c.p_text, "Summing exponent")->capture_default_str();
  auto* poly = app.add_subcommand("poly", "Summing norm of the homogeneous polynomial of a symmetric form");
  poly->add_option("input", c.input, "Symmetric operator JSON")->required();
  poly->add_option("--p", c.p_text, "Summing exponent")->capture_default_str();
  auto* verify = app.add_subcommand("verify", "Property suite over random instances");
  verify->add_option("--trials", c.trials, "Random instances per property")
      ->check(CLI::PositiveNumber)->capture_default_str();
  auto* gen = app.add_subcommand("gen", "Random instance generator");
  gen->add_option("--kind", c.kind, "What to generate")
      ->check(CLI::IsMember({"operator", "form", "mixed", "lambda", "zero", "config"}))
      ->capture_default_str();
  gen->add_option("--dims", c.dims, "Factor dimensions, comma separated")->capture_default_str();
  gen->add_option("--codomain", c.codomain, "Codomain dimension")
      ->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--norms", c.norms, "Factor norms (1, 2, inf), comma separated");
  gen->add_option("--codomain-norm", c.codomain_norm, "Codomain norm")->capture_default_str();
  gen->add_option("--count", c.count, "Pairs in a configuration")
      ->check(CLI::PositiveNumber)->capture_default_str();
  for (auto* sub : {norm, summing, hs, dnorm, restrict, poly, verify, gen}) add_common(sub, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) throw ArgumentError("--tol must lie in (0, 1)");
    set_thread_count(c.threads);
    if (*norm) return run_norm(c, out);
    if (*summing) return run_summing(c, out);
    if (*hs) return run_hs(c, out);
    if (*dnorm) return run_dnorm(c, out);
    if (*restrict) return run_restrict(c, out);
    if (*poly) return run_poly(c, out);
    if (*verify) return run_verify(c, out);
    if (*gen) return run_gen(c, out);
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace lipsum::cli
