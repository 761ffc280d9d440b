#include <gtest/gtest.h>

#include <sstream>

#include "cvgme/families.hpp"
#include "cvgme/report.hpp"

using namespace cvgme;

namespace {

WitnessReport sample_report() {
  WitnessReport r = witness_b(family_entry(FamilySpec::w(3, 0.03)), {0.0, cplx(0.6, 0.1), cplx(-0.2, 0.7)}, 3);
  r.family = "w:M=3,eta=0.03";
  r.seed = 17;
  r.params["restarts"] = 8;
  return r;
}

}  // namespace

TEST(Report, JsonSchemaKeys) {
  const nlohmann::json j = to_json(sample_report());
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  std::vector<std::string> expected{"certified", "family",    "n_settings", "params", "rigorous_error", "seed",
                                    "stderr",    "threshold", "value",      "witness", "xi_points"};
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(keys, expected);
  EXPECT_TRUE(j["rigorous_error"].is_null());
  EXPECT_EQ(j["params"]["direction"], "above");
  EXPECT_EQ(j["xi_points"].size(), 3u);
}

TEST(Report, JsonRoundTrip) {
  const WitnessReport r = sample_report();
  const WitnessReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back.witness, r.witness);
  EXPECT_EQ(back.family, r.family);
  EXPECT_EQ(back.value, r.value);
  EXPECT_EQ(back.threshold, r.threshold);
  EXPECT_EQ(back.certified, r.certified);
  EXPECT_EQ(back.n_settings, r.n_settings);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.xi_points, r.xi_points);
  EXPECT_EQ(back.direction, r.direction);
  EXPECT_EQ(back.params, r.params);
  EXPECT_EQ(to_json(back), to_json(r));
}

TEST(Report, RoundTripKeepsOptionalErrors) {
  WitnessReport r = witness_c(FamilySpec::dicke2(3), KernelSpec::fock(1, 1));
  r.stderr_value = 0.001;
  r.heuristic_error = 0.002;
  const WitnessReport back = report_from_json(to_json(r));
  EXPECT_EQ(back.direction, Direction::Below);
  EXPECT_EQ(back.stderr_value, r.stderr_value);
  EXPECT_EQ(back.heuristic_error, r.heuristic_error);
  EXPECT_EQ(back.kernel, r.kernel);
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(-1.0625), "-1.0625");
  EXPECT_EQ(format_number(1.5e-5), "1.5000000000e-05");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Report, CsvTable) {
  CsvTable t(CsvTable::report_header("eta", {"N"}));
  WitnessReport r = sample_report();
  t.add_report(0.03, r, {"3"});
  std::ostringstream os;
  t.write(os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "eta,value,threshold,violation,certified,N");
  EXPECT_NE(s.find(r.certified ? ",true,3" : ",false,3"), std::string::npos);
  EXPECT_THROW(t.add({"1", "2"}), DomainError);
}
