#include <doctest.h>

#include <random>

#include "cascade/core.hpp"
#include "cascade/error.hpp"

using cascade::ErrorCode;
using cascade::Instance;
using cascade::Money;
using nlohmann::json;

namespace {

json raw_instance(int n_files) {
  json files = json::array();
  // deliberately out of rank order
  for (int i = n_files; i >= 1; --i) {
    files.push_back({{"path", "pkg/f" + std::to_string(i) + ".py"}, {"content", "x = " + std::to_string(i) + "\n"}, {"rank", i}});
  }
  return {{"instance_id", "org__repo-1"}, {"repo", "org/repo"}, {"problem_statement", "It breaks."}, {"retrieved_files", files}};
}

ErrorCode code_of(const json& raw) {
  try {
    cascade::validate_instance(raw);
  } catch (const cascade::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("validate_instance keeps the five lowest-rank files") {
  Instance inst = cascade::validate_instance(raw_instance(7));
  REQUIRE(inst.retrieved_files.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(inst.retrieved_files[i].rank == i + 1);
  CHECK(inst.retrieved_files[0].path == "pkg/f1.py");
}

TEST_CASE("validate_instance rejects bad records") {
  auto raw = raw_instance(2);
  raw["problem_statement"] = "";
  CHECK(code_of(raw) == ErrorCode::EmptyProblemStatement);
  raw["problem_statement"] = "   \n";
  CHECK(code_of(raw) == ErrorCode::EmptyProblemStatement);

  raw = raw_instance(2);
  raw["retrieved_files"][1]["path"] = raw["retrieved_files"][0]["path"];
  CHECK(code_of(raw) == ErrorCode::DuplicatePath);

  raw = raw_instance(2);
  raw.erase("repo");
  try {
    cascade::validate_instance(raw);
    FAIL("no error");
  } catch (const cascade::Error& e) {
    CHECK(e.code() == ErrorCode::MissingField);
    CHECK(e.detail() == "repo");
  }

  raw = raw_instance(2);
  raw["retrieved_files"][0]["rank"] = 0;
  CHECK(code_of(raw) == ErrorCode::InvalidValue);
}

TEST_CASE("money parsing and formatting") {
  CHECK(Money::parse("0.023252").micros() == 23252);
  CHECK(Money::parse("12").micros() == 12'000'000);
  CHECK(Money::parse("-0.5").micros() == -500'000);
  CHECK(Money::parse("0.0000005").micros() == 1);
  CHECK(Money::parse("0.0000004").micros() == 0);
  CHECK_THROWS_AS(Money::parse("1e-3"), cascade::Error);
  CHECK_THROWS_AS(Money::parse(""), cascade::Error);
  CHECK(Money::from_micros(17'903'000).to_string() == "17.903000");
  CHECK(Money::from_micros(17'903'500).to_string(3) == "17.904");
  CHECK(Money::from_micros(4'528'999).to_string(3) == "4.529");
  CHECK(Money::from_micros(-1).to_string() == "-0.000001");
}

TEST_CASE("money sums are exact over a million additions in any order") {
  std::mt19937_64 rng(7);
  std::vector<Money> values;
  std::int64_t expect = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    auto m = static_cast<std::int64_t>(rng() % 100'000);
    values.push_back(Money::from_micros(m));
    expect += m;
  }
  Money forward;
  for (auto v : values) forward += v;
  std::shuffle(values.begin(), values.end(), rng);
  Money shuffled;
  for (auto v : values) shuffled += v;
  CHECK(forward.micros() == expect);
  CHECK(shuffled == forward);
  Money a = Money::parse("0.1"), b = Money::parse("0.2"), c = Money::parse("0.3");
  CHECK((a + b) + c == a + (b + c));
  CHECK((a + b) == c);
}

TEST_CASE("json round trip of every record type") {
  Instance inst = cascade::validate_instance(raw_instance(3));
  inst.readme_text = "# readme\n";
  inst.gold_patch = "--- a/x\n+++ b/x\n";
  inst.resolved_label["base_strong"] = true;
  json j = inst;
  Instance back = j.get<Instance>();
  CHECK(back == inst);
  CHECK(json(back).dump() == j.dump());

  cascade::ModelSpec spec{"gpt-4o-mini", cascade::Role::Weak, {Money::parse("0.15"), Money::parse("0.6")}, "scripted",
                          json{{"reasoning_effort", "high"}}};
  CHECK(json(spec).get<cascade::ModelSpec>() == spec);

  cascade::RunRecord rec;
  rec.pair_id = "o4-mini+gpt-4o-mini";
  rec.method_id = "weak_router";
  rec.instance_id = "org__repo-1";
  rec.seed = 18446744073709551615ULL;
  cascade::ExchangeSummary ex;
  ex.model_id = "gpt-4o-mini";
  ex.purpose = cascade::CallPurpose::Routing;
  ex.temperature = 0.1;
  ex.seed = 42;
  ex.input_tokens = 100;
  ex.output_tokens = 1;
  ex.cost = Money::from_micros(16);
  ex.outcome = "simple";
  rec.exchanges = {ex};
  rec.weak_calls = 1;
  rec.total_cost = ex.cost;
  rec.resolved = false;
  rec.flags = {"router_fallback"};
  CHECK(cascade::check_invariants(rec).empty());
  json rj = rec;
  CHECK(rj.get<cascade::RunRecord>() == rec);
  CHECK(json(rj.get<cascade::RunRecord>()).dump() == rj.dump());

  cascade::MethodSummary s{"weak_router", "o4-mini+gpt-4o-mini", 300, 0.24, 0.963, 1.14, 2.42, Money::parse("17.903"), 0.0134};
  CHECK(json(s).get<cascade::MethodSummary>() == s);
}

TEST_CASE("record invariants are checked") {
  cascade::RunRecord rec;
  rec.instance_id = "i";
  rec.method_id = "m";
  rec.valid = true;
  CHECK_FALSE(cascade::check_invariants(rec).empty());
  rec.valid = false;
  rec.total_cost = Money::from_micros(1);
  CHECK_FALSE(cascade::check_invariants(rec).empty());
}

TEST_CASE("efficiency is zero for zero cost") {
  CHECK(cascade::efficiency_of(0.5, Money{}) == 0.0);
  CHECK(cascade::efficiency_of(0.4533, Money::parse("33.328")) == doctest::Approx(0.0136).epsilon(0.005));
}
