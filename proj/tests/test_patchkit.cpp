#include <doctest.h>

#include <random>

#include "cascade/error.hpp"
#include "cascade/patchkit.hpp"

namespace pk = cascade::patchkit;
using cascade::ErrorCode;

namespace {

const char* kFlaskExample =
    "Here is an example:\n"
    "\n"
    "```python\n"
    "### mathweb/flask/app.py\n"
    "<<<<<<< SEARCH\n"
    "from flask import Flask\n"
    "=======\n"
    "import math\n"
    "from flask import Flask\n"
    ">>>>>>> REPLACE\n"
    "```\n";

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const cascade::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("flask example parses to one edit") {
  pk::EditScript s = pk::parse_edits(kFlaskExample);
  REQUIRE(s.edits.size() == 1);
  CHECK(s.edits[0].path == "mathweb/flask/app.py");
  CHECK(s.edits[0].search == "from flask import Flask\n");
  CHECK(s.edits[0].replace == "import math\nfrom flask import Flask\n");

  auto r = pk::apply_edits(s, {{"mathweb/flask/app.py", "from flask import Flask\n"}});
  CHECK(r.files.at("mathweb/flask/app.py") == "import math\nfrom flask import Flask\n");
  CHECK(r.diff ==
        "--- a/mathweb/flask/app.py\n+++ b/mathweb/flask/app.py\n@@ -1 +1,2 @@\n+import math\n from flask import Flask\n");
}

TEST_CASE("parse_edits error classes") {
  CHECK(code_of([] { pk::parse_edits("I think the bug is in the parser."); }) == ErrorCode::NoEditBlocks);
  CHECK(code_of([] { pk::parse_edits("```python\nprint(1)\n```\n"); }) == ErrorCode::NoEditBlocks);
  CHECK(code_of([] {
          pk::parse_edits("```python\n### a.py\n<<<<<<< SEARCH\nx\n=======\ny\n```\n");
        }) == ErrorCode::MalformedBlock);
  CHECK(code_of([] {
          pk::parse_edits("```python\n### a.py\n<<<<<<< SEARCH\nx\n>>>>>>> REPLACE\n```\n");
        }) == ErrorCode::MalformedBlock);
  CHECK(code_of([] {
          pk::parse_edits("```python\n<<<<<<< SEARCH\nx\n=======\ny\n>>>>>>> REPLACE\n```\n");
        }) == ErrorCode::MalformedBlock);
}

TEST_CASE("two blocks for two paths keep document order") {
  std::string text =
      "First:\n```python\n### b.py\n<<<<<<< SEARCH\nb = 1\n=======\nb = 2\n>>>>>>> REPLACE\n```\n"
      "Then:\n```python\n### a.py\n<<<<<<< SEARCH\n    a = 1\n=======\n    a = 3\n>>>>>>> REPLACE\n```\n";
  auto s = pk::parse_edits(text);
  REQUIRE(s.edits.size() == 2);
  CHECK(s.edits[0].path == "b.py");
  CHECK(s.edits[1].path == "a.py");
  CHECK(s.edits[1].search == "    a = 1\n");  // indentation kept
}

TEST_CASE("one block may carry several edits") {
  std::string text =
      "```python\n### a.py\n<<<<<<< SEARCH\nx = 1\n=======\nx = 2\n>>>>>>> REPLACE\n"
      "<<<<<<< SEARCH\ny = 1\n=======\n>>>>>>> REPLACE\n```\n";
  auto s = pk::parse_edits(text);
  REQUIRE(s.edits.size() == 2);
  CHECK(s.edits[1].path == "a.py");
  CHECK(s.edits[1].replace.empty());
}

TEST_CASE("sequential edits on one file show the net change") {
  std::string before = "def f():\n    return 1\n\nx = f()\n";
  pk::EditScript s{{{"f.py", "    return 1\n", "    y = 1\n    return y\n"},
                    {"f.py", "    return y\n", "    return y + 1\n"}}};
  auto r = pk::apply_edits(s, {{"f.py", before}});
  CHECK(r.files.at("f.py") == "def f():\n    y = 1\n    return y + 1\n\nx = f()\n");
  // reference output of difflib.unified_diff(n=3)
  CHECK(r.diff ==
        "--- a/f.py\n+++ b/f.py\n@@ -1,4 +1,5 @@\n def f():\n-    return 1\n+    y = 1\n+    return y + 1\n \n x = f()\n");
  CHECK(pk::apply_edits(s, {{"f.py", before}}).diff == r.diff);
}

TEST_CASE("unified diff splits distant changes into hunks") {
  std::string before;
  for (int i = 1; i <= 20; ++i) before += "line" + std::to_string(i) + "\n";
  std::string after = before;
  after.replace(after.find("line3\n"), 6, "LINE3\n");
  after.insert(after.find("line18\n"), "extra\n");
  CHECK(pk::unified_diff("g.py", before, after) ==
        "--- a/g.py\n+++ b/g.py\n@@ -1,6 +1,6 @@\n line1\n line2\n-line3\n+LINE3\n line4\n line5\n line6\n"
        "@@ -15,6 +15,7 @@\n line15\n line16\n line17\n+extra\n line18\n line19\n line20\n");
  CHECK(pk::unified_diff("g.py", before, before).empty());
}

TEST_CASE("missing trailing newline is marked") {
  auto d = pk::unified_diff("n.py", "a\nb", "a\nc");
  CHECK(d == "--- a/n.py\n+++ b/n.py\n@@ -1,2 +1,2 @@\n a\n-b\n\\ No newline at end of file\n+c\n\\ No newline at end of file\n");
  auto loc = pk::extract_localization(d);
  CHECK(loc.lines == std::set<std::pair<std::string, int>>{{"n.py", 2}});
}

TEST_CASE("apply errors and ambiguity") {
  pk::EditScript missing{{{"a.py", "nope\n", "yes\n"}}};
  CHECK(code_of([&] { pk::apply_edits(missing, {{"a.py", "x\n"}}); }) == ErrorCode::SearchNotFound);
  pk::EditScript unknown{{{"b.py", "x\n", "y\n"}}};
  CHECK(code_of([&] { pk::apply_edits(unknown, {{"a.py", "x\n"}}); }) == ErrorCode::UnknownPath);
  // indentation is significant
  pk::EditScript indent{{{"a.py", "x = 1\n", "x = 2\n"}}};
  CHECK(code_of([&] { pk::apply_edits(indent, {{"a.py", "    x = 1\n"}}); }) == ErrorCode::SearchNotFound);

  pk::EditScript twice{{{"a.py", "x\n", "y\n"}}};
  auto r = pk::apply_edits(twice, {{"a.py", "x\nz\nx\n"}});
  CHECK(r.files.at("a.py") == "y\nz\nx\n");
  REQUIRE(r.ambiguities.size() == 1);
  CHECK(r.ambiguities[0].edit_index == 0);
  CHECK(r.ambiguities[0].match_count == 2);
}

TEST_CASE("sequence matcher ratios match difflib") {
  CHECK(pk::patch_similarity("abc", "abd") == doctest::Approx(2.0 / 3.0));
  CHECK(pk::patch_similarity("abc", "abc") == 1.0);
  CHECK(pk::patch_similarity("", "") == 1.0);
  CHECK(pk::patch_similarity("abc", "xyz") == 0.0);
  CHECK(pk::patch_similarity("abc", "") == 0.0);
  // difflib gives 0.4 one way and 0.6 the other; the symmetric form takes the
  // lexicographically smaller text first
  CHECK(pk::sequence_ratio("aabbbb", "bbab") == doctest::Approx(0.4));
  CHECK(pk::sequence_ratio("bbab", "aabbbb") == doctest::Approx(0.6));
  CHECK(pk::patch_similarity("bbab", "aabbbb") == doctest::Approx(0.4));
  CHECK(pk::patch_similarity("aabbbb", "bbab") == doctest::Approx(0.4));
  CHECK(pk::sequence_ratio("xaby", "abxy") == doctest::Approx(0.75));
  std::string b1, b2;
  for (int i = 0; i < 3; ++i) {
    b1 += "the quick brown fox jumps over the lazy dog";
    b2 += "the quick brown cat jumps over the lazy fox";
  }
  CHECK(pk::sequence_ratio(b1, b2) == doctest::Approx(0.8837209302325582));
}

TEST_CASE("similarity is symmetric and reflexive on random text") {
  std::mt19937 rng(3);
  for (int t = 0; t < 300; ++t) {
    std::string a, b;
    int la = static_cast<int>(rng() % 12), lb = static_cast<int>(rng() % 12);
    for (int i = 0; i < la; ++i) a += "abc\n"[rng() % 4];
    for (int i = 0; i < lb; ++i) b += "abc\n"[rng() % 4];
    double s = pk::patch_similarity(a, b);
    CHECK(s == pk::patch_similarity(b, a));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    if (!a.empty()) CHECK(pk::patch_similarity(a, a) == 1.0);
  }
}

TEST_CASE("localization read-off") {
  std::string d = "--- a/a.py\n+++ b/a.py\n@@ -2,4 +2,2 @@\n keep\n-gone3\n-gone4\n keep\n";
  auto loc = pk::extract_localization(d);
  CHECK(loc.files == std::set<std::string>{"a.py"});
  CHECK(loc.modules == loc.files);
  CHECK(loc.lines == std::set<std::pair<std::string, int>>{{"a.py", 3}, {"a.py", 4}});

  std::string ins = "--- a/b.py\n+++ b/b.py\n@@ -8,3 +8,4 @@\n l8\n l9\n l10\n+new\n";
  CHECK(pk::extract_localization(ins).lines == std::set<std::pair<std::string, int>>{{"b.py", 10}});
  std::string top = "--- a/c.py\n+++ b/c.py\n@@ -0,0 +1 @@\n+first\n";
  CHECK(pk::extract_localization(top).lines == std::set<std::pair<std::string, int>>{{"c.py", 0}});

  CHECK(code_of([] { pk::extract_localization(""); }) == ErrorCode::MalformedDiff);
  CHECK(code_of([] { pk::extract_localization("--- a/x\n+++ b/x\n@@ -1,2 +1,2 @@\n-a\n"); }) ==
        ErrorCode::MalformedDiff);
}

TEST_CASE("localization scores") {
  pk::LocalizationSet p, g;
  p.files = p.modules = {"a", "b"};
  g.files = g.modules = {"b", "c"};
  p.lines = {{"a", 3}};
  g.lines = {{"a", 3}, {"a", 4}};
  auto s = pk::localization_scores(p, g);
  CHECK(s.file.precision == 0.5);
  CHECK(s.file.recall == 0.5);
  CHECK(s.file.f1 == 0.5);
  CHECK(s.module.f1 == s.file.f1);
  CHECK(s.line.precision == 1.0);
  CHECK(s.line.recall == 0.5);
  CHECK(s.line.f1 == doctest::Approx(2.0 / 3.0));
  auto same = pk::localization_scores(g, g);
  CHECK(same.file.f1 == 1.0);
  CHECK(same.line.f1 == 1.0);
  pk::LocalizationSet empty;
  CHECK(pk::localization_scores(empty, empty).line.f1 == 1.0);
  CHECK(pk::localization_scores(empty, g).line.f1 == 0.0);
}

TEST_CASE("normalized changes ignore context and offsets") {
  std::string a = "--- a/x.py\n+++ b/x.py\n@@ -1,3 +1,3 @@\n k\n-old\n+new\n k\n";
  std::string b = "--- a/x.py\n+++ b/x.py\n@@ -5 +5 @@\n-old\n+new  \n";
  CHECK(pk::normalized_changes(a) == pk::normalized_changes(b));
  CHECK(pk::normalized_changes(a) != pk::normalized_changes("--- a/x.py\n+++ b/x.py\n@@ -5 +5 @@\n-old\n+other\n"));
  CHECK(pk::diff_paths(a) == std::vector<std::string>{"x.py"});
}
