#include <gtest/gtest.h>

#include "kanto/experiment.hpp"

using namespace kanto;

namespace {

Json base_config(Json experiment) {
  return Json{{"seed", 7}, {"output_dir", "out"}, {"experiments", Json::array({std::move(experiment)})}};
}

Json small_duality() {
  return Json{{"name", "d"}, {"kind", "duality"}, {"alphabets", {2}}, {"sizes", {1, 2}},
              {"exponents", {"1", "2", "inf"}}, {"instances", 6}};
}

}  // namespace

TEST(Config, AcceptsMinimalDuality) {
  const auto rc = parse_config(base_config(small_duality()));
  ASSERT_EQ(rc.experiments.size(), 1u);
  EXPECT_EQ(rc.seed, 7u);
  EXPECT_EQ(rc.output_dir, "out");
}

TEST(Config, RejectsUnknownKeys) {
  auto e = small_duality();
  e["tolerence"] = 1e-6;
  EXPECT_THROW(parse_config(base_config(e)), ConfigError);
  auto top = base_config(small_duality());
  top["extra"] = 1;
  EXPECT_THROW(parse_config(top), ConfigError);
}

TEST(Config, RejectsBadValues) {
  auto e = small_duality();
  e["exponents"] = {"1/2"};
  EXPECT_THROW(parse_config(base_config(e)), ConfigError);
  e = small_duality();
  e["kind"] = "nonsense";
  EXPECT_THROW(parse_config(base_config(e)), ConfigError);
  e = small_duality();
  e["instances"] = -3;
  EXPECT_THROW(parse_config(base_config(e)), ConfigError);
  EXPECT_THROW(parse_config(Json{{"experiments", Json::array()}}), ConfigError);
}

TEST(Config, RejectsBadProcess) {
  const Json gcb{{"name", "g"}, {"kind", "gcb"}, {"C", 0.25},
                 {"process", {{"type", "markov"}, {"P", {{0.5, 0.6}, {0.5, 0.5}}}}}};
  EXPECT_THROW(parse_config(base_config(gcb)), ConfigError);
  Json neg = gcb;
  neg["process"] = {{"type", "iid"}, {"law", {0.5, 0.5}}};
  neg["C"] = -1;
  EXPECT_THROW(parse_config(base_config(neg)), ConfigError);
  Json sweep = neg;
  sweep["C"] = 0.25;
  sweep["beta_sweep"] = {1.0, 0.0};
  EXPECT_THROW(parse_config(base_config(sweep)), ConfigError);
}

TEST(Config, RejectsDuplicateNames) {
  auto c = base_config(small_duality());
  c["experiments"].push_back(small_duality());
  EXPECT_THROW(parse_config(c), ConfigError);
}

TEST(Rounding, TwelveSignificantDigits) {
  EXPECT_EQ(round_sig(0.1234567890123456), 0.123456789012);
  EXPECT_EQ(round_sig(0.0), 0.0);
  Json j{{"a", 1.0 / 3.0}, {"b", {2.0 / 3.0}}, {"c", "text"}};
  round_json(j);
  EXPECT_EQ(j["a"].get<double>(), 0.333333333333);
  EXPECT_EQ(j["b"][0].get<double>(), 0.666666666667);
}

TEST(CsvWriter, FormatsRows) {
  Csv c({"a", "b", "c"});
  c.row(1, 0.5, std::string("x"));
  EXPECT_EQ(c.str(), "a,b,c\n1,0.5,x\n");
  EXPECT_THROW(c.row(1, 2), std::logic_error);
}

TEST(Runner, DeterministicForFixedSeed) {
  const auto rc = parse_config(base_config(small_duality()));
  const auto a = summarize(rc, {run_experiment(rc.experiments[0], rc.seed)});
  const auto b = summarize(rc, {run_experiment(rc.experiments[0], rc.seed)});
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_TRUE(a["passed"].get<bool>());
}

TEST(Runner, GcbBetaSweepExpandsSuite) {
  const Json gcb{{"name", "g"}, {"kind", "gcb"}, {"C", 0.25}, {"sizes", {1}}, {"random_functions", 2},
                 {"process", {{"type", "iid"}, {"law", {0.5, 0.5}}}}, {"beta_sweep", {0.5, 2.0}}};
  const auto rc = parse_config(base_config(gcb));
  const auto r = run_experiment(rc.experiments[0], rc.seed);
  EXPECT_TRUE(r.passed);
  EXPECT_NE(r.csv.at("").find("@beta=2"), std::string::npos);
}

TEST(Runner, ExpectationMismatchFails) {
  const Json gcb{{"name", "g"}, {"kind", "gcb"}, {"C", 0.1}, {"sizes", {1}},
                 {"process", {{"type", "iid"}, {"law", {0.5, 0.5}}}}};
  const auto rc = parse_config(base_config(gcb));
  const auto r = run_experiment(rc.experiments[0], rc.seed);
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.failures.empty());
}
