#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lipsum/bound_report.hpp"
#include "lipsum/dp_norm.hpp"
#include "lipsum/summing.hpp"
#include "lipsum/tensor.hpp"

namespace lipsum {

using Json = nlohmann::ordered_json;

/// Serializes with every double printed as %.17g; non-finite doubles become
/// the strings "inf", "-inf" and "nan". `indent` < 0 gives one line.
std::string dump_json(const Json& j, int indent = 2);

/// Parses a document; syntax errors become SchemaError with the source name
/// and the line/column of the failure.
Json parse_json(std::string_view text, std::string_view source = "<input>");
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Reads a double that may be written as a number or as "inf"/"-inf"/"nan".
double json_number(const Json& j, std::string_view what);
Json number_json(double x);

Json to_json(const DenseTensor& t);
Json to_json(const MultilinearOperator& T);
Json to_json(const MixedTensor& z);
Json to_json(const SegrePoint& x);
Json to_json(const PairConfiguration& cfg);
Json to_json(const PietschCertificate& cert);
Json to_json(const BoundReport& r);
Json to_json(const Representation& rep);

DenseTensor tensor_from_json(const Json& j);
/// Accepts role "operator" (shape includes the codomain) and role "form"
/// (shape of the factors only, m = 1). Missing norms default to l_2.
MultilinearOperator operator_from_json(const Json& j);
MixedTensor mixed_from_json(const Json& j);
SegrePoint point_from_json(const Json& j);
PairConfiguration configuration_from_json(const Json& j);
PietschCertificate certificate_from_json(const Json& j);
BoundReport report_from_json(const Json& j);

MultilinearOperator load_operator(const std::filesystem::path& path);
MixedTensor load_mixed(const std::filesystem::path& path);

}  // namespace lipsum
