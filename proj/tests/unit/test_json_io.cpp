#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>

#include "lipsum/dp_norm.hpp"
#include "lipsum/errors.hpp"
#include "lipsum/json_io.hpp"
#include "lipsum/random.hpp"
#include "lipsum/summing.hpp"

using namespace lipsum;

namespace {

std::filesystem::path data_file(const char* name) { return std::filesystem::path(LIPSUM_TEST_DATA) / name; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(JsonIo, LambdaThreeRoundTrip) {
  const auto T = MultilinearOperator::scalar_product(3);
  const auto back = operator_from_json(parse_json(dump_json(to_json(T))));
  EXPECT_EQ(back, T);
  EXPECT_EQ(load_operator(data_file("lambda3.json")), T);
}

TEST(JsonIo, RandomDoublesAreBitExact) {
  Rng rng(3);
  std::vector<double> data(2 * 3 * 2);
  for (double& x : data) x = rng.normal() * std::pow(10.0, static_cast<int>(rng.uniform() * 40) - 20);
  data[0] = 5e-324;
  data[1] = -0.0;
  data[2] = 1.7976931348623157e308;
  const MultilinearOperator T(DenseTensor({2, 3, 2}, data), NormSpec{{NormKind::L1, NormKind::LInf}, NormKind::L2});
  const auto back = operator_from_json(parse_json(dump_json(to_json(T))));
  ASSERT_EQ(back.kernel().size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(std::memcmp(&back.kernel().data()[i], &data[i], sizeof(double)), 0) << i;
  }
  EXPECT_EQ(back.norms(), T.norms());
}

TEST(JsonIo, ShapeMismatchIsSchemaError) {
  EXPECT_THROW(load_operator(data_file("bad_shape.json")), SchemaError);
  EXPECT_THROW(tensor_from_json(parse_json(R"({"shape": [2], "data": [1, 2, 3]})")), SchemaError);
}

TEST(JsonIo, MalformedReportsPosition) {
  const std::string msg = error_of([] { load_operator(data_file("malformed.json")); });
  EXPECT_NE(msg.find("malformed.json"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
}

TEST(JsonIo, MissingFieldsRejected) {
  EXPECT_THROW(operator_from_json(parse_json(R"({"role": "operator", "data": [1]})")), SchemaError);
  EXPECT_THROW(operator_from_json(parse_json(R"({"role": "operator", "shape": [1, 1], "data": ["x"]})")), SchemaError);
  EXPECT_THROW(operator_from_json(parse_json(R"({"role": "operator", "shape": [1, 1], "data": [1], "factor_norms": [3]})")),
               SchemaError);
}

TEST(JsonIo, FormRoleAppendsCodomain) {
  const auto T = operator_from_json(parse_json(R"({"role": "form", "shape": [2, 2], "data": [1, 0, 0, 1]})"));
  EXPECT_EQ(T.kernel().shape(), (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(T.norms().factors, (std::vector<NormKind>{NormKind::L2, NormKind::L2}));
}

TEST(JsonIo, SeventeenDigitsAndNonFinite) {
  Json j;
  j["x"] = 0.1;
  j["inf"] = number_json(std::numeric_limits<double>::infinity());
  j["nan"] = number_json(std::nan(""));
  const std::string s = dump_json(j);
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos) << s;
  EXPECT_NE(s.find("\"inf\""), std::string::npos);
  EXPECT_NE(s.find("\"nan\""), std::string::npos);
  const Json back = parse_json(s);
  EXPECT_TRUE(std::isinf(json_number(back["inf"], "inf")));
  EXPECT_TRUE(std::isnan(json_number(back["nan"], "nan")));
  EXPECT_EQ(json_number(back["x"], "x"), 0.1);
}

TEST(JsonIo, ReportRoundTrip) {
  BoundReport r;
  r.certified_lower = 0.5;
  r.heuristic_lower = 0.75;
  r.heuristic_upper = 1.0 / 3.0;
  r.method = "test";
  r.seed = 123456789012345ull;
  r.iterations = 7;
  const auto back = report_from_json(parse_json(dump_json(to_json(r))));
  EXPECT_EQ(back.certified_lower, r.certified_lower);
  EXPECT_EQ(back.heuristic_upper, r.heuristic_upper);
  EXPECT_TRUE(std::isinf(back.certified_upper));
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.seed, r.seed);
}

TEST(JsonIo, MixedAndConfigurationRoundTrip) {
  Rng rng(5);
  std::vector<double> data(8);
  for (double& x : data) x = rng.normal();
  const MixedTensor z(DenseTensor({2, 2, 2}, data), NormSpec{{NormKind::L2, NormKind::L1}, NormKind::LInf});
  const Json jz = to_json(z);
  EXPECT_EQ(jz["role"], "mixed");
  const auto zb = mixed_from_json(parse_json(dump_json(jz)));
  EXPECT_EQ(zb.data, z.data);
  EXPECT_EQ(zb.norms, z.norms);

  PairConfiguration cfg;
  cfg.add(WeightedPair{SegrePoint{{rng.normal_vector(2), rng.normal_vector(3)}},
                       SegrePoint{{rng.normal_vector(2), rng.normal_vector(3)}}, 0.25});
  const auto cb = configuration_from_json(parse_json(dump_json(to_json(cfg))));
  ASSERT_EQ(cb.size(), 1u);
  EXPECT_EQ(cb.pairs()[0].u.factors[1], cfg.pairs()[0].u.factors[1]);
  EXPECT_EQ(cb.pairs()[0].weight, 0.25);
}

TEST(JsonIo, CertificateRoundTripIsByteIdentical) {
  const auto r = estimate_pi_lip(MultilinearOperator::scalar_product(2), 2.0);
  const std::string text = dump_json(to_json(r.certificate));
  const auto back = certificate_from_json(parse_json(text));
  EXPECT_EQ(dump_json(to_json(back)), text);
  EXPECT_EQ(back.constant, r.certificate.constant);
}
