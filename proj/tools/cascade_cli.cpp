// cascade: command line front end for the strong/weak collaboration toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "cascade/analytics.hpp"
#include "cascade/augment.hpp"
#include "cascade/error.hpp"
#include "cascade/harness.hpp"
#include "cascade/prompts.hpp"
#include "cascade/strategies.hpp"

namespace fs = std::filesystem;
namespace an = cascade::analytics;
namespace hs = cascade::harness;

namespace {

std::string display(const std::string& method_id) {
  try {
    return cascade::strategies::method_from_id(method_id).display_name();
  } catch (const cascade::Error&) {
    return method_id;
  }
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

std::string num(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Each file's stem is its pair id unless one is given explicitly.
std::vector<cascade::MethodSummary> read_summaries(const std::vector<std::string>& files, const std::string& pair) {
  std::vector<cascade::MethodSummary> out;
  for (const auto& f : files) {
    auto rows = an::read_summary_csv_file(f, pair.empty() ? fs::path(f).stem().string() : pair);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cascade::Error(cascade::ErrorCode::IoError, "cannot write " + path);
  fn(out);
}

int cmd_ingest(const std::string& path, std::size_t max_files) {
  auto ds = hs::load_dataset(path, max_files);
  auto s = hs::dataset_stats(ds);
  std::cout << "instances: " << s.instances << "\nrepos: " << s.repos << "\nwith gold patch: " << s.with_gold
            << "\nretrieved files: " << s.retrieved_files << "\n";
  return 0;
}

int cmd_augment(const std::string& config, const std::string& kind_name, const std::string& repo,
                const std::string& instance) {
  auto cfg = hs::load_config(config);
  auto kind = cascade::augment::artifact_kind_from_string(kind_name);
  auto ds = hs::load_dataset(cfg.dataset, cfg.max_files);
  auto gw = hs::make_gateway(cfg);
  cascade::augment::ArtifactCache cache(cfg.output_dir / "artifacts");
  std::set<std::string> seen;
  std::size_t built = 0, cached = 0;
  for (const auto& inst : ds) {
    if (!repo.empty() && inst.repo != repo) continue;
    if (!instance.empty() && inst.instance_id != instance) continue;
    auto key = cascade::augment::scope_key(kind, inst);
    if (!seen.insert(key).second) continue;
    auto got = cache.get_or_build(kind, key, [&] { return cascade::augment::build_artifact(*gw, kind, inst, cfg.strong); });
    (got.built ? built : cached) += 1;
    std::cout << kind_name << " " << key << " " << (got.built ? "built" : "cached") << " cost "
              << got.artifact.build_cost.to_string() << "\n";
  }
  std::cout << "built " << built << ", cached " << cached << "\n";
  return 0;
}

int cmd_run(const std::string& config, int parallelism) {
  auto cfg = hs::load_config(config);
  if (parallelism > 0) cfg.parallelism = parallelism;
  auto report = hs::run_experiment(cfg);
  std::cout << "executed " << report.executed << ", skipped " << report.skipped << ", failed " << report.failed
            << "\n";
  if (!report.summary_csv.empty()) std::cout << "summary: " << report.summary_csv.string() << "\n";
  return 0;
}

int cmd_aggregate(const std::string& records, const std::string& pair, const std::string& labels,
                  const std::string& out) {
  auto rs = hs::read_records(records);
  if (!labels.empty()) hs::apply_labels(rs, hs::load_labels(labels));
  std::string p = pair;
  if (p.empty()) {
    std::set<std::string> pairs;
    for (const auto& r : rs) pairs.insert(r.pair_id);
    if (pairs.size() != 1) {
      throw cascade::Error(cascade::ErrorCode::ConfigError, "records hold " + std::to_string(pairs.size()) +
                                                                " pairs; choose one with --pair");
    }
    p = *pairs.begin();
  }
  auto sums = an::aggregate(rs, p);
  with_output(out, [&](std::ostream& o) { an::write_summary_csv(o, sums); });
  return 0;
}

int cmd_frontier(const std::vector<std::string>& files, const std::string& pair, bool crossings,
                 const std::string& out) {
  if (crossings) {
    if (files.size() != 2) throw cascade::Error(cascade::ErrorCode::ConfigError, "--crossings needs two summaries");
    auto a = an::frontier(an::to_points(read_summaries({files[0]}, "")));
    auto b = an::frontier(an::to_points(read_summaries({files[1]}, "")));
    with_output(out, [&](std::ostream& o) { an::write_crossings_csv(o, an::regime_shift(a, b)); });
    return 0;
  }
  auto points = an::frontier(an::to_points(read_summaries(files, pair)));
  with_output(out, [&](std::ostream& o) { an::write_frontier_csv(o, points); });
  return 0;
}

int cmd_recommend(const std::vector<std::string>& files, const std::string& budget, double min_perf) {
  auto best = an::recommend(an::to_points(read_summaries(files, "")), cascade::Money::parse(budget), min_perf);
  if (!best) {
    std::cout << "Infeasible\n";
    return 0;
  }
  std::cout << display(best->method_id) << " / " << best->pair_id << "\n"
            << "method_id: " << best->method_id << "\ncost: " << best->cost.to_string(3)
            << "\nresolution_rate: " << num(best->performance, 4) << "\n";
  return 0;
}

int cmd_report(const std::string& records, const std::string& dataset, const std::string& labels, std::size_t k) {
  auto rs = hs::read_records(records);
  if (!labels.empty()) hs::apply_labels(rs, hs::load_labels(labels));
  std::set<std::string> pairs;
  for (const auto& r : rs) pairs.insert(r.pair_id);
  if (pairs.empty()) throw cascade::Error(cascade::ErrorCode::EmptyRecordSet, records);
  for (const auto& pair : pairs) {
    std::cout << "## " << pair << "\n\n"
              << "| Experiment | Resolution Rate | Avg. #iterations | Valid Patch Rate | Total Generation Cost | "
                 "Efficiency |\n|---|---|---|---|---|---|\n";
    for (const auto& s : an::aggregate(rs, pair)) {
      std::cout << "| " << display(s.method_id) << " | " << num(s.resolution_rate, 4) << " | "
                << an::format_iterations(s.avg_strong_iters, s.avg_weak_iters) << " | " << num(s.valid_patch_rate, 3)
                << " | " << s.total_cost.to_string(3) << " | " << num(s.efficiency, 4) << " |\n";
    }
    std::cout << "\n";
  }
  if (dataset.empty()) return 0;
  auto ds = hs::load_dataset(dataset);
  auto rankings = an::rankings_from(ds);
  if (!rankings.empty()) {
    auto m = an::retrieval_metrics(rankings, k);
    std::cout << "Retrieval over " << m.instances << " instances: recall@" << k << " " << pct(m.recall_at_k)
              << "%, MRR " << pct(m.mrr) << "%\n\n";
  }
  auto rows = an::localization_report(rs, ds);
  std::cout << "| Pair | Experiment | File P | File R | File F1 | Module P | Module R | Module F1 | Line P | Line R | "
               "Line F1 | Excluded |\n|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const auto& m = r.mean;
    std::cout << "| " << r.pair_id << " | " << display(r.method_id);
    for (const auto* prf : {&m.file, &m.module, &m.line}) {
      std::cout << " | " << pct(prf->precision) << " | " << pct(prf->recall) << " | " << pct(prf->f1);
    }
    std::cout << " | " << r.excluded << " |\n";
  }
  return 0;
}

int cmd_prompts_export(const std::string& dir) {
  for (const auto& p : cascade::prompts::export_templates(dir)) std::cout << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong/weak model collaboration for repository-level patch generation"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "Validate an instance file and print statistics");
  std::string dataset;
  std::size_t max_files = cascade::kDefaultMaxFiles;
  ingest->add_option("dataset", dataset, "Instance file (one JSON record per line)")->required();
  ingest->add_option("--max-files", max_files, "Retrieved files kept per instance")->capture_default_str();
  ingest->callback([&] { action = [&] { return cmd_ingest(dataset, max_files); }; });

  auto* augment = app.add_subcommand("augment", "Pre-build context artifacts for a repository or instance");
  std::string config, kind, repo, instance;
  augment->add_option("--config", config, "Experiment config")->required();
  augment->add_option("--kind", kind, "repo_summary, repo_faq, repo_structure, plan or instance_qa")->required();
  augment->add_option("--repo", repo, "Only this repository");
  augment->add_option("--instance", instance, "Only this instance");
  augment->callback([&] { action = [&] { return cmd_augment(config, kind, repo, instance); }; });

  auto* run = app.add_subcommand("run", "Run an experiment (resumes from the run store)");
  int parallelism = 0;
  run->add_option("--config", config, "Experiment config")->required();
  run->add_option("--parallelism", parallelism, "Override the worker count");
  run->callback([&] { action = [&] { return cmd_run(config, parallelism); }; });

  auto* aggregate = app.add_subcommand("aggregate", "Summarize run records into a summary CSV");
  std::string records, pair, labels, out;
  aggregate->add_option("--records", records, "Store directory or records file")->required();
  aggregate->add_option("--pair", pair, "Pair id (needed when the records hold several)");
  aggregate->add_option("--labels", labels, "Resolution label CSV");
  aggregate->add_option("--out", out, "Output CSV (default stdout)");
  aggregate->callback([&] { action = [&] { return cmd_aggregate(records, pair, labels, out); }; });

  auto* frontier = app.add_subcommand("frontier", "Cost/performance staircase from summary CSVs");
  std::vector<std::string> summaries;
  bool crossings = false;
  frontier->add_option("summaries", summaries, "Summary CSVs; each file stem is its pair id")->required();
  frontier->add_option("--pair", pair, "Pair id for every input");
  frontier->add_flag("--crossings", crossings, "Print the regime-shift costs between two summaries");
  frontier->add_option("--out", out, "Output CSV (default stdout)");
  frontier->callback([&] { action = [&] { return cmd_frontier(summaries, pair, crossings, out); }; });

  auto* recommend = app.add_subcommand("recommend", "Best method within a budget and performance floor");
  std::string budget;
  double min_perf = 0.0;
  recommend->add_option("summaries", summaries, "Summary CSVs; each file stem is its pair id")->required();
  recommend->add_option("--budget", budget, "Total cost cap in dollars")->required();
  recommend->add_option("--min-perf", min_perf, "Minimum resolution rate")->check(CLI::Range(0.0, 1.0));
  recommend->callback([&] { action = [&] { return cmd_recommend(summaries, budget, min_perf); }; });

  auto* report = app.add_subcommand("report", "Result, retrieval and localization tables");
  std::size_t k = 5;
  report->add_option("--records", records, "Store directory or records file")->required();
  report->add_option("--dataset", dataset, "Instance file, for retrieval and localization");
  report->add_option("--labels", labels, "Resolution label CSV");
  report->add_option("--k", k, "Cutoff for recall@k")->capture_default_str();
  report->callback([&] { action = [&] { return cmd_report(records, dataset, labels, k); }; });

  auto* prompts = app.add_subcommand("prompts", "Prompt templates");
  prompts->require_subcommand(1);
  auto* exp = prompts->add_subcommand("export", "Write every template to <dir>/<name>.txt");
  std::string dir;
  exp->add_option("--dir", dir, "Target directory")->required();
  exp->callback([&] { action = [&] { return cmd_prompts_export(dir); }; });

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    return action ? action() : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
