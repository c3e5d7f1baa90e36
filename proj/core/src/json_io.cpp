#include "lipsum/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lipsum/errors.hpp"

namespace lipsum {

namespace {

void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void write_double(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "\"nan\"";
  } else if (std::isinf(x)) {
    out += x > 0 ? "\"inf\"" : "\"-inf\"";
  } else if (x == 0.0 && std::signbit(x)) {
    // "-0" would parse back as the integer 0.
    out += "-0.0";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
  }
}

// Arrays of scalars stay on one line.
bool is_flat(const Json& j) {
  for (const auto& e : j) {
    if (e.is_structured()) return false;
  }
  return true;
}

void write(std::string& out, const Json& j, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_string(out, k);
        out += pretty ? ": " : ":";
        write(out, v, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = is_flat(j);
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat && pretty ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write(out, v, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::string:
      write_string(out, j.get<std::string>());
      return;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case Json::value_t::number_float:
      write_double(out, j.get<double>());
      return;
    default:
      out += "null";
  }
}

const Json& field(const Json& j, const char* key, std::string_view what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

std::vector<double> number_array(const Json& j, std::string_view what) {
  if (!j.is_array()) throw SchemaError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(json_number(e, what));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j, std::string_view what) {
  const auto v = number_array(j, what);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_json(v[i]));
  return a;
}

Json norm_json(NormKind r) {
  switch (r) {
    case NormKind::L1:
      return 1;
    case NormKind::L2:
      return 2;
    case NormKind::LInf:
      return "inf";
  }
  return nullptr;
}

NormKind norm_from_json(const Json& j) {
  try {
    if (j.is_number()) {
      const double r = j.get<double>();
      if (r == 1.0) return NormKind::L1;
      if (r == 2.0) return NormKind::L2;
      throw SchemaError("norm exponent must be 1, 2 or \"inf\"");
    }
    if (j.is_string()) return norm_kind_from_string(j.get<std::string>());
  } catch (const ArgumentError& e) {
    throw SchemaError(e.what());
  }
  throw SchemaError("norm exponent must be 1, 2 or \"inf\"");
}

std::vector<std::size_t> shape_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("tensor: 'shape' must be a non-empty array");
  std::vector<std::size_t> shape;
  for (const auto& e : j) {
    if (!e.is_number_integer() && !e.is_number_unsigned()) {
      throw SchemaError("tensor: shape entries must be integers");
    }
    const auto v = e.get<std::int64_t>();
    if (v <= 0) throw SchemaError("tensor: shape entries must be positive");
    shape.push_back(static_cast<std::size_t>(v));
  }
  return shape;
}

void check_role(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
  auto it = j.find("role");
  if (it == j.end()) return;
  if (!it->is_string()) throw SchemaError(std::string(what) + ": 'role' must be a string");
  const auto role = it->get<std::string>();
  for (auto a : allowed) {
    if (role == a) return;
  }
  throw SchemaError(std::string(what) + ": unexpected role '" + role + "'");
}

NormSpec norms_from_json(const Json& j, std::size_t n) {
  NormSpec norms;
  if (auto it = j.find("factor_norms"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("'factor_norms' must be an array");
    for (const auto& e : *it) norms.factors.push_back(norm_from_json(e));
    if (norms.factors.size() != n) {
      throw SchemaError("'factor_norms' has " + std::to_string(norms.factors.size()) +
                        " entries for " + std::to_string(n) + " factors");
    }
  } else {
    norms.factors.assign(n, NormKind::L2);
  }
  if (auto it = j.find("codomain_norm"); it != j.end()) norms.codomain = norm_from_json(*it);
  return norms;
}

Json norms_json(const NormSpec& norms) {
  Json a = Json::array();
  for (NormKind r : norms.factors) a.push_back(norm_json(r));
  return a;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    // Drop the library's exception-id prefix.
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw SchemaError(std::string(source) + ": " + msg + " (byte " + std::to_string(e.byte) + ")");
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError(path.string() + ": cannot open file for writing");
  out << dump_json(j);
  if (!out) throw SchemaError(path.string() + ": write failed");
}

double json_number(const Json& j, std::string_view what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  }
  throw SchemaError(std::string(what) + ": expected a number");
}

Json number_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json to_json(const DenseTensor& t) {
  Json j;
  j["shape"] = t.shape();
  Json data = Json::array();
  for (double x : t.data()) data.push_back(number_json(x));
  j["data"] = std::move(data);
  return j;
}

Json to_json(const MultilinearOperator& T) {
  Json j;
  j["role"] = "operator";
  const Json t = to_json(T.kernel());
  for (const auto& [k, v] : t.items()) j[k] = v;
  j["factor_norms"] = norms_json(T.norms());
  j["codomain_norm"] = norm_json(T.norms().codomain);
  return j;
}

Json to_json(const MixedTensor& z) {
  Json j;
  j["role"] = "mixed";
  const Json t = to_json(z.data);
  for (const auto& [k, v] : t.items()) j[k] = v;
  j["factor_norms"] = norms_json(z.norms);
  j["codomain_norm"] = norm_json(z.norms.codomain);
  return j;
}

Json to_json(const SegrePoint& x) {
  Json a = Json::array();
  for (const auto& f : x.factors) a.push_back(vector_json(f));
  return a;
}

Json to_json(const PairConfiguration& cfg) {
  Json a = Json::array();
  for (const auto& pr : cfg.pairs()) {
    Json e;
    e["u"] = to_json(pr.u);
    e["v"] = to_json(pr.v);
    e["weight"] = number_json(pr.weight);
    a.push_back(std::move(e));
  }
  return a;
}

Json to_json(const PietschCertificate& cert) {
  Json j;
  j["role"] = "certificate";
  j["dims"] = cert.dims;
  Json forms = Json::array();
  for (const auto& f : cert.forms) {
    forms.push_back(to_json(DenseTensor(cert.dims, std::vector<double>(f.data(), f.data() + f.size()))));
  }
  j["forms"] = std::move(forms);
  j["weights"] = vector_json(cert.weights);
  j["constant"] = number_json(cert.constant);
  j["p"] = number_json(cert.p);
  j["feasible"] = cert.feasible;
  j["dual_constant"] = number_json(cert.dual_constant);
  j["config_weights"] = vector_json(cert.config_weights);
  j["bisection_steps"] = cert.bisection_steps;
  j["pairset"] = to_json(cert.pairset);
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["certified_lower"] = number_json(r.certified_lower);
  j["heuristic_lower"] = number_json(r.heuristic_lower);
  j["heuristic_upper"] = number_json(r.heuristic_upper);
  j["certified_upper"] = number_json(r.certified_upper);
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["iterations"] = r.iterations;
  j["restarts"] = r.restarts;
  return j;
}

Json to_json(const Representation& rep) {
  Json terms = Json::array();
  for (const auto& t : rep.terms) {
    Json e;
    e["p"] = to_json(t.p);
    e["q"] = to_json(t.q);
    e["y"] = vector_json(t.y);
    e["block"] = t.block;
    terms.push_back(std::move(e));
  }
  Json j;
  j["terms"] = std::move(terms);
  Json bounds = Json::array();
  for (double b : rep.block_bounds) bounds.push_back(number_json(b));
  j["block_bounds"] = std::move(bounds);
  return j;
}

DenseTensor tensor_from_json(const Json& j) {
  auto shape = shape_from_json(field(j, "shape", "tensor"));
  auto data = number_array(field(j, "data", "tensor"), "tensor data");
  if (data.size() != product(shape)) {
    throw SchemaError("tensor: data has " + std::to_string(data.size()) +
                      " entries but the shape requires " + std::to_string(product(shape)));
  }
  for (double x : data) {
    if (!std::isfinite(x)) throw SchemaError("tensor: entries must be finite");
  }
  return DenseTensor(std::move(shape), std::move(data));
}

MultilinearOperator operator_from_json(const Json& j) {
  check_role(j, {"operator", "form", "tensor"}, "operator");
  DenseTensor t = tensor_from_json(j);
  const bool form = j.contains("role") && j["role"] == "form";
  if (form) {
    auto shape = t.shape();
    shape.push_back(1);
    t = DenseTensor(std::move(shape), std::vector<double>(t.data().begin(), t.data().end()));
  }
  if (t.rank() < 2) {
    throw SchemaError("operator: shape needs at least one factor and the codomain dimension");
  }
  NormSpec norms = norms_from_json(j, t.rank() - 1);
  if (form && !j.contains("codomain_norm")) norms.codomain = NormKind::L2;
  return MultilinearOperator(std::move(t), std::move(norms));
}

MixedTensor mixed_from_json(const Json& j) {
  check_role(j, {"mixed", "operator", "tensor"}, "mixed tensor");
  DenseTensor t = tensor_from_json(j);
  if (t.rank() < 2) throw SchemaError("mixed tensor: shape needs at least two modes");
  NormSpec norms = norms_from_json(j, t.rank() - 1);
  return MixedTensor(std::move(t), std::move(norms));
}

SegrePoint point_from_json(const Json& j) {
  if (!j.is_array()) throw SchemaError("point: expected an array of factor vectors");
  SegrePoint x;
  for (const auto& f : j) x.factors.push_back(vector_from_json(f, "point factor"));
  return x;
}

PairConfiguration configuration_from_json(const Json& j) {
  const Json& arr = j.is_object() ? field(j, "pairs", "configuration") : j;
  if (!arr.is_array()) throw SchemaError("configuration: expected an array of pairs");
  PairConfiguration cfg;
  for (const auto& e : arr) {
    WeightedPair pr{point_from_json(field(e, "u", "pair")), point_from_json(field(e, "v", "pair")), 1.0};
    if (auto it = e.find("weight"); it != e.end()) pr.weight = json_number(*it, "pair weight");
    try {
      cfg.add(std::move(pr));
    } catch (const ShapeError& err) {
      throw SchemaError(std::string("configuration: ") + err.what());
    }
  }
  return cfg;
}

PietschCertificate certificate_from_json(const Json& j) {
  check_role(j, {"certificate"}, "certificate");
  PietschCertificate c;
  c.dims = shape_from_json(field(j, "dims", "certificate"));
  for (const auto& f : field(j, "forms", "certificate")) {
    const DenseTensor t = tensor_from_json(f);
    if (t.shape() != c.dims) throw SchemaError("certificate: form shape does not match 'dims'");
    c.forms.push_back(t.as_vector());
  }
  c.weights = vector_from_json(field(j, "weights", "certificate"), "certificate weights");
  if (static_cast<std::size_t>(c.weights.size()) != c.forms.size()) {
    throw SchemaError("certificate: weight count does not match form count");
  }
  c.constant = json_number(field(j, "constant", "certificate"), "constant");
  c.p = json_number(field(j, "p", "certificate"), "p");
  if (auto it = j.find("feasible"); it != j.end()) c.feasible = it->get<bool>();
  if (auto it = j.find("dual_constant"); it != j.end()) c.dual_constant = json_number(*it, "dual_constant");
  if (auto it = j.find("config_weights"); it != j.end()) {
    c.config_weights = vector_from_json(*it, "config_weights");
  }
  if (auto it = j.find("bisection_steps"); it != j.end()) c.bisection_steps = it->get<int>();
  c.pairset = configuration_from_json(field(j, "pairset", "certificate"));
  return c;
}

BoundReport report_from_json(const Json& j) {
  BoundReport r;
  r.certified_lower = json_number(field(j, "certified_lower", "report"), "certified_lower");
  r.heuristic_lower = json_number(field(j, "heuristic_lower", "report"), "heuristic_lower");
  r.heuristic_upper = json_number(field(j, "heuristic_upper", "report"), "heuristic_upper");
  r.certified_upper = json_number(field(j, "certified_upper", "report"), "certified_upper");
  if (auto it = j.find("method"); it != j.end()) r.method = it->get<std::string>();
  if (auto it = j.find("seed"); it != j.end()) r.seed = it->get<std::uint64_t>();
  if (auto it = j.find("iterations"); it != j.end()) r.iterations = it->get<long>();
  if (auto it = j.find("restarts"); it != j.end()) r.restarts = it->get<long>();
  return r;
}

MultilinearOperator load_operator(const std::filesystem::path& path) {
  try {
    return operator_from_json(read_json_file(path));
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw SchemaError(path.string() + ": " + msg);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

MixedTensor load_mixed(const std::filesystem::path& path) {
  try {
    return mixed_from_json(read_json_file(path));
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw SchemaError(path.string() + ": " + msg);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace lipsum
