#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cascade/error.hpp"
#include "cascade/prompts.hpp"

namespace pr = cascade::prompts;
using cascade::ErrorCode;

namespace {

pr::Bindings full_bindings() {
  pr::Bindings b;
  for (const char* name : {"problem_statement", "retrieval", "repo_structure", "readme_content", "dependencies",
                           "few_shot_examples", "similar", "successful", "n_samples", "formatted_files", "patches",
                           "repo_name", "strong_output"}) {
    b[name] = std::string("<") + name + ">";
  }
  return b;
}

}  // namespace

TEST_CASE("every template renders without residual placeholders") {
  const std::regex placeholder(R"(\{[a-z_]+\})");
  for (auto id : pr::kAllTemplates) {
    CAPTURE(pr::template_name(id));
    CHECK_FALSE(pr::placeholders(id).empty());
    std::string out = pr::render(id, full_bindings());
    CHECK_FALSE(std::regex_search(out, placeholder));
  }
}

TEST_CASE("base prompt carries the issue and retrieval") {
  cascade::FileContext f{"astropy/io/fits.py", "def read():\n    pass\n", 1};
  pr::Bindings b{{"problem_statement", "Reading fails on empty HDU."}, {"retrieval", pr::format_retrieval({f})}};
  std::string out = pr::render(pr::TemplateId::Base, b);
  CHECK(out.rfind("We are currently solving the following issue within our repository.", 0) == 0);
  CHECK(out.find("--- BEGIN ISSUE ---\nReading fails on empty HDU.\n--- END ISSUE ---") != std::string::npos);
  CHECK(out.find("--- BEGIN FILE ---\n### astropy/io/fits.py\ndef read():\n    pass\n--- END FILE ---") !=
        std::string::npos);
  CHECK(pr::placeholders(pr::TemplateId::Base) == std::vector<std::string>{"problem_statement", "retrieval"});
}

TEST_CASE("missing binding names the placeholder") {
  try {
    pr::render(pr::TemplateId::Base, {{"problem_statement", "x"}});
    FAIL("rendered");
  } catch (const cascade::Error& e) {
    CHECK(e.code() == ErrorCode::MissingBinding);
    CHECK(e.detail() == "retrieval");
  }
}

TEST_CASE("bound values are not rescanned") {
  pr::Bindings b{{"problem_statement", "uses {retrieval} literally"}, {"retrieval", "R"}};
  std::string out = pr::render(pr::TemplateId::Base, b);
  CHECK(out.find("uses {retrieval} literally") != std::string::npos);
}

TEST_CASE("router prompt wording") {
  std::string out = pr::render(pr::TemplateId::Router, {{"problem_statement", "p"}, {"retrieval", "r"}});
  CHECK(out.find("classify this issue as either SIMPLE or COMPLEX") != std::string::npos);
}

TEST_CASE("few-shot similarity fillers") {
  pr::Bindings b{{"similar", std::string(pr::kSimilarFiller)},
                 {"successful", std::string(pr::kSuccessfulFiller)},
                 {"few_shot_examples", "E"},
                 {"problem_statement", "P"},
                 {"retrieval", "R"}};
  std::string out = pr::render(pr::TemplateId::FewShot, b);
  CHECK(out.rfind("Here are some similar example issues from the same repository along with the target file that were "
                  "changed and final patch generated by an expert that were successful:\n",
                  0) == 0);
  b["similar"] = "";
  b["successful"] = "";
  out = pr::render(pr::TemplateId::FewShot, b);
  CHECK(out.rfind("Here are some example issues from the same repository along with the target file that were changed "
                  "and final patch generated by an expert:\n",
                  0) == 0);
}

TEST_CASE("strong-first refine extends the base prompt") {
  auto b = full_bindings();
  std::string base = pr::render(pr::TemplateId::Base, b);
  std::string refine = pr::render(pr::TemplateId::StrongFirstRefine, b);
  CHECK(refine.rfind(base, 0) == 0);
  CHECK(refine.substr(base.size()) ==
        "\n\nAn expert proposed the following solution:\n<strong_output>\nReformat or minimally correct it into valid "
        "*SEARCH/REPLACE* edits.");
}

TEST_CASE("router verdict parser") {
  using pr::Verdict;
  CHECK(pr::parse_router_verdict("SIMPLE").verdict == Verdict::Simple);
  CHECK_FALSE(pr::parse_router_verdict("SIMPLE").fallback);
  CHECK(pr::parse_router_verdict("  complex\n").verdict == Verdict::Complex);
  CHECK_FALSE(pr::parse_router_verdict("  complex\n").fallback);
  auto both = pr::parse_router_verdict("It is SIMPLE but also COMPLEX");
  CHECK(both.verdict == Verdict::Complex);
  CHECK(both.fallback);
  auto none = pr::parse_router_verdict("no idea");
  CHECK(none.verdict == Verdict::Complex);
  CHECK(none.fallback);
  CHECK(pr::parse_router_verdict("**Simple**").verdict == Verdict::Simple);
  CHECK(pr::parse_router_verdict("SIMPLEST").fallback);
  // idempotent on its own rendering
  for (const char* t : {"SIMPLE", "COMPLEX", "x", "simple complex"}) {
    auto first = pr::parse_router_verdict(t);
    auto again = pr::parse_router_verdict(first.verdict == Verdict::Simple ? "SIMPLE" : "COMPLEX");
    CHECK(first.verdict == again.verdict);
  }
}

TEST_CASE("selected patch parser") {
  CHECK(pr::parse_selected_patch("SELECTED_PATCH: 3 because it is minimal", 5) == 3);
  CHECK_FALSE(pr::parse_selected_patch("SELECTED_PATCH: 9", 5).has_value());
  CHECK_FALSE(pr::parse_selected_patch("I like the second one", 5).has_value());
  CHECK_FALSE(pr::parse_selected_patch("SELECTED_PATCH: 0", 5).has_value());
  CHECK(pr::parse_selected_patch("**SELECTED_PATCH: 2**", 2) == 2);
  CHECK(pr::parse_selected_patch("SELECTED_PATCH: 1\nSELECTED_PATCH: 2", 2) == 1);
  for (int n = 1; n <= 6; ++n) {
    for (int k = -1; k <= 8; ++k) {
      auto got = pr::parse_selected_patch("SELECTED_PATCH: " + std::to_string(k), n);
      if (got) {
        CHECK(*got >= 1);
        CHECK(*got <= n);
      }
    }
  }
}

TEST_CASE("reduced context parser") {
  std::string text =
      "### a.py\n```python\ndef f():\n    return 1\n```\n\n### b.py\n```python\nX = 2\n```\n"
      "### a.py\n```python\ndef g():\n    pass\n```\n";
  auto sections = pr::parse_reduced_context(text);
  REQUIRE(sections.size() == 2);
  CHECK(sections[0].first == "a.py");
  CHECK(sections[0].second == "def f():\n    return 1\ndef g():\n    pass\n");
  CHECK(sections[1] == std::make_pair(std::string("b.py"), std::string("X = 2\n")));

  auto single = pr::parse_reduced_context("### a.py\n```\nbody\n```");
  CHECK(single == std::vector<std::pair<std::string, std::string>>{{"a.py", "body\n"}});

  try {
    pr::parse_reduced_context("### a.py\n### b.py\nno fences here\n");
    FAIL("parsed");
  } catch (const cascade::Error& e) {
    CHECK(e.code() == ErrorCode::EmptyReduction);
  }
}

TEST_CASE("export writes every template verbatim") {
  auto dir = std::filesystem::temp_directory_path() / "cascade_prompt_export_test";
  std::filesystem::remove_all(dir);
  auto written = pr::export_templates(dir);
  CHECK(written.size() == pr::kAllTemplates.size());
  for (auto id : pr::kAllTemplates) {
    std::ifstream in(dir / (std::string(pr::template_name(id)) + ".txt"), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == pr::template_body(id));
  }
  std::filesystem::remove_all(dir);
}
