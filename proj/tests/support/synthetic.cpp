#include "synthetic.hpp"

#include <fstream>

#include "cascade/patchkit.hpp"

namespace synthetic {

using nlohmann::json;

namespace {

std::string file_path(int i) { return "pkg/mod" + std::to_string(i) + ".py"; }
std::string buggy(int i) {
  return "def value_" + std::to_string(i) + "():\n    return " + std::to_string(i) + "\n\n\ndef other():\n    pass\n";
}
std::string fixed(int i) {
  return "def value_" + std::to_string(i) + "():\n    return " + std::to_string(i) + " + 1\n\n\ndef other():\n    pass\n";
}
std::string token(int i) { return "ISSUE-" + std::to_string(i) + ":"; }
// Only the issue block of the prompt under work starts this way; few-shot
// examples quote other statements elsewhere.
std::string issue_key(int i) { return "--- BEGIN ISSUE ---\n" + token(i); }

std::string block(int i, const std::string& replacement) {
  return "```python\n### " + file_path(i) + "\n<<<<<<< SEARCH\n    return " + std::to_string(i) + "\n=======\n" +
         replacement + "\n>>>>>>> REPLACE\n```\n";
}

json usage(int in, int out) { return {{"input_tokens", in}, {"output_tokens", out}}; }

}  // namespace

json instance_json(int i) {
  json j;
  j["instance_id"] = "demo__r-" + std::to_string(100 + i);
  j["repo"] = "demo/r" + std::to_string(i % 3);
  j["problem_statement"] = token(i) + " value_" + std::to_string(i) + " returns the wrong number.";
  j["retrieved_files"] = json::array({
      {{"path", file_path(i)}, {"content", buggy(i)}, {"rank", 1}},
      {{"path", "pkg/util.py"}, {"content", "HELPER = " + std::to_string(i) + "\n"}, {"rank", 2}},
  });
  j["readme_text"] = "# r" + std::to_string(i % 3) + "\nA demo package.\n";
  j["directory_listing"] = "pkg/\n  mod" + std::to_string(i) + ".py\n  util.py\n";
  j["dependencies_text"] = "pkg/mod" + std::to_string(i) + ".py imports pkg/util.py\n";
  j["gold_patch"] = cascade::patchkit::unified_diff(file_path(i), buggy(i), fixed(i));
  return j;
}

std::vector<cascade::Instance> instances(int n) {
  std::vector<cascade::Instance> out;
  for (int i = 1; i <= n; ++i) out.push_back(cascade::validate_instance(instance_json(i)));
  return out;
}

std::string fix_reply(int i) { return "Fix:\n" + block(i, "    return " + std::to_string(i) + " + 1"); }
std::string wrong_reply(int i) { return block(i, "    return " + std::to_string(i) + " - 1"); }

json sweep_script(int latency_ms) {
  json replies = json::array();
  auto strong = [&](json match, const std::string& out) {
    match["model_id"] = kStrongModel;
    replies.push_back({{"match", match}, {"output", out}, {"usage", usage(kStrongIn, kStrongOut)}});
  };
  auto weak = [&](json match, const std::string& out) {
    match["model_id"] = kWeakModel;
    replies.push_back({{"match", match}, {"output", out}, {"usage", usage(kWeakIn, kWeakOut)}});
  };
  const std::string router = "classify this issue as either SIMPLE or COMPLEX";
  for (int i = 1; i <= 64; ++i) {
    json id = {{"prompt_contains", json::array({issue_key(i), router})}};
    std::string verdict = i % 2 == 0 ? "SIMPLE" : "COMPLEX";
    strong(id, verdict);
    weak(id, verdict);
  }
  strong({{"prompt_contains", "provide a detailed plan"}}, "Plan: adjust the returned value by one.");
  strong({{"prompt_contains", "create a detailed FAQ"}}, "Q: Where is the bug?\nA: In the return statement.");
  strong({{"prompt_contains", "high-level insights"}}, "The repository is a demo package.");
  strong({{"prompt_contains", "comprehensive FAQ about the repository"}}, "Q: What is this?\nA: A demo.");
  weak({{"prompt_contains", "SELECTED_PATCH: X"}}, "SELECTED_PATCH: 1");
  for (int i = 1; i <= 64; ++i) {
    std::string section = "### pkg/mod" + std::to_string(i) + ".py\n```python\n    return " + std::to_string(i) + "\n```\n";
    weak({{"prompt_contains", json::array({issue_key(i), "output only the file paths"})}}, section);
  }
  for (int i = 1; i <= 64; ++i) {
    strong({{"prompt_contains", issue_key(i)}}, fix_reply(i));
    weak({{"prompt_contains", issue_key(i)}, {"temperature", 0.0}}, "I would look at the return statement first.");
    weak({{"prompt_contains", issue_key(i)}}, i % 2 == 0 ? fix_reply(i) : wrong_reply(i));
  }
  return {{"latency_ms", latency_ms}, {"replies", replies}};
}

cascade::ModelSpec strong_spec(const std::string& backend) {
  return {kStrongModel, cascade::Role::Strong, {cascade::Money::parse("1.10"), cascade::Money::parse("4.40")}, backend,
          json::object()};
}

cascade::ModelSpec weak_spec(const std::string& backend) {
  return {kWeakModel, cascade::Role::Weak, {cascade::Money::parse("0.15"), cascade::Money::parse("0.60")}, backend,
          json::object()};
}

std::filesystem::path write_sweep(const std::filesystem::path& dir, int n, int parallelism, const json& methods,
                                  int latency_ms) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "dataset.jsonl", std::ios::binary);
    for (int i = 1; i <= n; ++i) out << instance_json(i).dump() << "\n";
  }
  std::ofstream(dir / "script.json", std::ios::binary) << sweep_script(latency_ms).dump(1);
  json pricing = {{kStrongModel, {{"input_per_mtok", "1.10"}, {"output_per_mtok", "4.40"}}},
                  {kWeakModel, {{"input_per_mtok", "0.15"}, {"output_per_mtok", "0.60"}}}};
  std::ofstream(dir / "pricing.json", std::ios::binary) << pricing.dump(1);
  json cfg = {{"strong", {{"model_id", kStrongModel}, {"backend", "scripted"}}},
              {"weak", {{"model_id", kWeakModel}, {"backend", "scripted"}}},
              {"backends", {{"scripted", {{"type", "scripted"}, {"script", "script.json"}, {"max_parallel", 16}}}}},
              {"methods", methods},
              {"dataset", "dataset.jsonl"},
              {"output_dir", "out"},
              {"pricing", "pricing.json"},
              {"parallelism", parallelism},
              {"seed", 7}};
  std::ofstream(dir / "config.json", std::ios::binary) << cfg.dump(1);
  return dir / "config.json";
}

}  // namespace synthetic
