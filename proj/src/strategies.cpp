#include "cascade/strategies.hpp"

#include <algorithm>
#include <numeric>
#include <regex>
#include <set>

#include "cascade/error.hpp"
#include "cascade/patchkit.hpp"
#include "cascade/prompts.hpp"
#include "cascade/rng.hpp"

namespace cascade::strategies {

using nlohmann::json;

namespace {

struct KindInfo {
  MethodKind kind;
  const char* id;
  const char* display;
  TaxonomyGroup group;
};

constexpr KindInfo kKinds[] = {
    {MethodKind::BaseStrong, "base_strong", "Base (strong)", TaxonomyGroup::Base},
    {MethodKind::BaseWeak, "base_weak", "Base (weak)", TaxonomyGroup::Base},
    {MethodKind::StrongSingleAttempt, "strong_single_attempt", "Strong LM Single Attempt", TaxonomyGroup::Base},
    {MethodKind::SCMajority, "sc_majority", "Self-Consistency - Direct", TaxonomyGroup::CostEquated},
    {MethodKind::SCClustering, "sc_clustering", "Self-Consistency - Clustering", TaxonomyGroup::CostEquated},
    {MethodKind::SCUniversal, "sc_universal", "Self-Consistency - Universal", TaxonomyGroup::CostEquated},
    {MethodKind::BestOfN, "best_of_n", "Best of n", TaxonomyGroup::CostEquated},
    {MethodKind::RepoSummary, "repo_summary", "Repo Summary", TaxonomyGroup::Context},
    {MethodKind::RepoFAQ, "repo_faq", "Repo Level QA Pairs", TaxonomyGroup::Context},
    {MethodKind::RepoStructure, "repo_structure", "Repo Structure", TaxonomyGroup::Context},
    {MethodKind::FewShot, "few_shot", "Few Shot", TaxonomyGroup::Context},
    {MethodKind::Plan, "plan", "Plan", TaxonomyGroup::Context},
    {MethodKind::InstanceQA, "instance_qa", "Instance Level QA Pairs", TaxonomyGroup::Context},
    {MethodKind::StrongFirst, "strong_first", "Strong LM First", TaxonomyGroup::Pipeline},
    {MethodKind::WeakFirst, "weak_first", "Weak LM First", TaxonomyGroup::Pipeline},
    {MethodKind::PromptReduction, "prompt_reduction", "Prompt Reduction", TaxonomyGroup::Pipeline},
    {MethodKind::WeakRouter, "weak_router", "Weak Router", TaxonomyGroup::Dynamic},
    {MethodKind::StrongRouter, "strong_router", "Strong Router", TaxonomyGroup::Dynamic},
};

const KindInfo& info(MethodKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw Error(ErrorCode::ConfigError, "unknown method kind");
}

}  // namespace

std::string to_string(TaxonomyGroup group) {
  switch (group) {
    case TaxonomyGroup::Base: return "base";
    case TaxonomyGroup::CostEquated: return "cost_equated";
    case TaxonomyGroup::Context: return "context";
    case TaxonomyGroup::Pipeline: return "pipeline";
    case TaxonomyGroup::Dynamic: return "dynamic";
  }
  return "unknown";
}

TaxonomyGroup taxonomy_group(MethodKind kind) { return info(kind).group; }

std::string MethodConfig::id() const {
  if (kind != MethodKind::FewShot) return info(kind).id;
  std::string out = "few_shot_" + std::to_string(few_shot_k) + "_" + augment::to_string(few_shot_mode);
  if (few_shot_pool == FewShotPool::Successful) out += "_successful";
  return out;
}

std::string MethodConfig::display_name() const {
  if (kind != MethodKind::FewShot) return info(kind).display;
  std::string mode = few_shot_mode == augment::FewShotMode::Random ? "Random" : "Similarity";
  std::string out = std::to_string(few_shot_k) + " Shot ";
  if (few_shot_pool == FewShotPool::Successful) out += "Successful - ";
  return out + mode;
}

void MethodConfig::validate() const {
  loop.validate();
  if (!(cluster_threshold > 0.0 && cluster_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "cluster_threshold must lie in (0, 1]");
  }
  if (sc_n_override && *sc_n_override < 1) throw Error(ErrorCode::ConfigError, "sc_n must be >= 1");
  if (kind == MethodKind::FewShot && few_shot_k < 1) throw Error(ErrorCode::ConfigError, "few-shot k must be >= 1");
}

MethodConfig method_from_id(const std::string& id) {
  MethodConfig cfg;
  for (const auto& k : kKinds) {
    if (k.kind != MethodKind::FewShot && id == k.id) {
      cfg.kind = k.kind;
      return cfg;
    }
  }
  static const std::regex few_shot(R"(few_shot_([0-9]+)_(random|similarity)(_successful)?)");
  std::smatch m;
  if (std::regex_match(id, m, few_shot)) {
    cfg.kind = MethodKind::FewShot;
    cfg.few_shot_k = std::stoul(m[1].str());
    cfg.few_shot_mode = m[2] == "random" ? augment::FewShotMode::Random : augment::FewShotMode::Similarity;
    cfg.few_shot_pool = m[3].matched ? FewShotPool::Successful : FewShotPool::Gold;
    if (cfg.few_shot_k < 1) throw Error(ErrorCode::ConfigError, "few-shot k must be >= 1");
    return cfg;
  }
  throw Error(ErrorCode::ConfigError, "unknown method id '" + id + "'");
}

void to_json(json& j, const MethodConfig& value) {
  j = json{{"id", value.id()},
           {"loop",
            {{"max_retries", value.loop.max_retries},
             {"temp_start", value.loop.temp_start},
             {"temp_step", value.loop.temp_step},
             {"temp_cap", value.loop.temp_cap}}},
           {"cluster_threshold", value.cluster_threshold}};
  if (value.sc_n_override) j["sc_n"] = *value.sc_n_override;
}

void from_json(const json& j, MethodConfig& value) {
  if (j.is_string()) {
    value = method_from_id(j.get<std::string>());
    return;
  }
  value = method_from_id(j.at("id").get<std::string>());
  if (auto l = j.find("loop"); l != j.end()) {
    value.loop.max_retries = l->value("max_retries", value.loop.max_retries);
    value.loop.temp_start = l->value("temp_start", value.loop.temp_start);
    value.loop.temp_step = l->value("temp_step", value.loop.temp_step);
    value.loop.temp_cap = l->value("temp_cap", value.loop.temp_cap);
  }
  if (j.contains("sc_n") && !j["sc_n"].is_null()) value.sc_n_override = j["sc_n"].get<int>();
  value.cluster_threshold = j.value("cluster_threshold", value.cluster_threshold);
  value.validate();
}

std::vector<MethodConfig> collaboration_methods() {
  std::vector<MethodConfig> out;
  for (const char* id : {"sc_majority", "sc_clustering", "sc_universal", "best_of_n", "repo_summary", "repo_faq",
                         "repo_structure", "few_shot_1_random", "few_shot_1_similarity", "plan", "instance_qa",
                         "strong_first", "weak_first", "prompt_reduction", "weak_router", "strong_router"}) {
    out.push_back(method_from_id(id));
  }
  return out;
}

int cost_equated_n(Money strong_unit_cost, Money weak_unit_cost) {
  if (weak_unit_cost.micros() <= 0) throw Error(ErrorCode::ZeroWeakCost, "weak unit cost must be positive");
  __extension__ typedef __int128 wide;
  wide s = strong_unit_cost.micros() < 0 ? 0 : strong_unit_cost.micros();
  wide w = weak_unit_cost.micros();
  wide n = (2 * s + w) / (2 * w);
  return static_cast<int>(std::max<wide>(2, n));
}

std::size_t select_majority(const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidValue, "no candidates");
  std::map<std::string_view, std::size_t> counts;
  for (const auto& c : candidates) ++counts[c];
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (counts[candidates[i]] > counts[candidates[best]]) best = i;
  }
  return best;
}

std::size_t select_clustering(const std::vector<std::string>& candidates, double threshold, std::uint64_t seed) {
  const std::size_t n = candidates.size();
  if (n == 0) throw Error(ErrorCode::InvalidValue, "no candidates");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (find(i) == find(j)) continue;
      if (patchkit::patch_similarity(candidates[i], candidates[j]) >= threshold) {
        std::size_t a = find(i), b = find(j);
        parent[std::max(a, b)] = std::min(a, b);  // root = smallest member
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[find(i)].push_back(i);
  // map order is by smallest member, so the first maximum wins ties
  const std::vector<std::size_t>* best = nullptr;
  for (const auto& [root, members] : clusters) {
    if (!best || members.size() > best->size()) best = &members;
  }
  std::mt19937_64 rng(seed);
  return (*best)[uniform_below(rng, best->size())];
}

namespace {

std::string format_candidates(const std::vector<std::string>& candidates) {
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0) out += '\n';
    out += "Patch " + std::to_string(i + 1) + ":\n```diff\n" + candidates[i];
    if (!candidates[i].empty() && candidates[i].back() != '\n') out += '\n';
    out += "```\n";
  }
  return out;
}

}  // namespace

Selection select_universal(const gateway::Gateway& gateway, const std::vector<std::string>& candidates,
                           const Instance& instance, const ModelSpec& weak) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidValue, "no candidates");
  Selection sel;
  if (candidates.size() == 1) return sel;
  gateway::ChatRequest req;
  req.model_id = weak.model_id;
  req.temperature = 0.0;
  req.prompt = prompts::render(prompts::TemplateId::UniversalSC,
                               {{"n_samples", std::to_string(candidates.size())},
                                {"problem_statement", instance.problem_statement},
                                {"formatted_files", prompts::format_retrieval(instance.retrieved_files)},
                                {"patches", format_candidates(candidates)}});
  sel.exchange = gateway.complete(weak, req);
  auto picked = prompts::parse_selected_patch(sel.exchange->output_text, static_cast<int>(candidates.size()));
  if (picked) {
    sel.index = static_cast<std::size_t>(*picked - 1);
  } else {
    sel.index = select_majority(candidates);
    sel.fallback = true;
  }
  return sel;
}

std::optional<bool> GoldPatchJudge::judge(const Instance& instance, const std::string& diff) const {
  if (!instance.gold_patch || instance.gold_patch->empty()) return std::nullopt;
  try {
    return patchkit::normalized_changes(diff) == patchkit::normalized_changes(*instance.gold_patch);
  } catch (const Error&) {
    return false;
  }
}

int sample_count(const MethodConfig& cfg, const RunContext& ctx) {
  if (cfg.sc_n_override) return *cfg.sc_n_override;
  if (!ctx.unit_costs) {
    throw Error(ErrorCode::ConfigError, cfg.id() + " needs sc_n or base unit costs to size its sample");
  }
  return cost_equated_n(ctx.unit_costs->first, ctx.unit_costs->second);
}

namespace {

// Flags recorded on run records.
constexpr const char* kRouterFallback = "router_fallback";
constexpr const char* kSelectionFallback = "selection_fallback";
constexpr const char* kReductionFallback = "reduction_fallback";
constexpr const char* kReductionDroppedPath = "reduction_dropped_path";
constexpr const char* kAmbiguousSearch = "ambiguous_search";
constexpr const char* kEmptyFewShotPool = "few_shot_empty_pool";
constexpr const char* kNoValidCandidates = "no_valid_candidates";

class Run {
 public:
  Run(const MethodConfig& cfg, const Instance& inst, const RunContext& ctx) : ctx_(ctx) {
    rec_.pair_id = ctx.pair_id;
    rec_.method_id = cfg.id();
    rec_.instance_id = inst.instance_id;
    rec_.seed = cfg.seed;
  }

  const gateway::Gateway& gw() const { return *ctx_.gateway; }

  void add(ExchangeSummary s) {
    (s.role == Role::Strong ? rec_.strong_calls : rec_.weak_calls) += 1;
    rec_.total_cost += s.cost;
    rec_.exchanges.push_back(std::move(s));
  }

  void add(const gateway::ChatExchange& ex, const ModelSpec& model, CallPurpose purpose, int attempt,
           std::string outcome) {
    add(genloop::summarize(ex, model, purpose, attempt, std::move(outcome)));
  }

  void add(const genloop::AttemptTrace& trace, const ModelSpec& model) {
    for (const auto& a : trace.attempts) add(a.exchange, model, CallPurpose::Generation, a.index, a.outcome);
    if (trace.error) fail(*trace.error);
    if (trace.valid() && !trace.attempts.back().ambiguities.empty()) flag(kAmbiguousSearch);
  }

  void flag(const std::string& f) { flags_.insert(f); }
  void fail(const std::string& e) {
    if (!rec_.error) rec_.error = e;
  }
  bool failed() const { return rec_.error.has_value(); }

  void finish(std::optional<std::string> patch) {
    rec_.final_patch = std::move(patch);
    rec_.valid = rec_.final_patch.has_value();
  }
  void set_resolved(std::optional<bool> r) { rec_.resolved = r; }

  RunRecord take() {
    rec_.flags.assign(flags_.begin(), flags_.end());
    return std::move(rec_);
  }

 private:
  const RunContext& ctx_;
  RunRecord rec_;
  std::set<std::string> flags_;
};

std::string base_prompt(const Instance& inst, const std::vector<FileContext>& files) {
  return prompts::render(prompts::TemplateId::Base,
                         {{"problem_statement", inst.problem_statement}, {"retrieval", prompts::format_retrieval(files)}});
}

std::string base_prompt(const Instance& inst) { return base_prompt(inst, inst.retrieved_files); }

const char* artifact_label(augment::ArtifactKind kind) {
  switch (kind) {
    case augment::ArtifactKind::RepoSummary: return "REPOSITORY SUMMARY";
    case augment::ArtifactKind::RepoFAQ: return "REPOSITORY FAQ";
    case augment::ArtifactKind::RepoStructure: return "REPOSITORY STRUCTURE";
    case augment::ArtifactKind::Plan: return "PLAN";
    case augment::ArtifactKind::InstanceQA: return "ISSUE FAQ";
  }
  return "CONTEXT";
}

// Base prompt with the artifact placed right after the issue block.
std::string augmented_prompt(const Instance& inst, const augment::ContextArtifact& art) {
  std::string prompt = base_prompt(inst);
  const std::string anchor = "--- END ISSUE ---\n";
  auto pos = prompt.find(anchor);
  std::string label = artifact_label(art.kind);
  std::string block = "\n--- BEGIN " + label + " ---\n" + art.text;
  if (!art.text.empty() && art.text.back() != '\n') block += '\n';
  block += "--- END " + label + " ---\n";
  prompt.insert(pos + anchor.size(), block);
  return prompt;
}

genloop::LoopConfig single_attempt(const genloop::LoopConfig& loop) {
  genloop::LoopConfig one = loop;
  one.max_retries = 1;
  return one;
}

augment::ArtifactKind artifact_kind(MethodKind kind) {
  switch (kind) {
    case MethodKind::RepoSummary: return augment::ArtifactKind::RepoSummary;
    case MethodKind::RepoFAQ: return augment::ArtifactKind::RepoFAQ;
    case MethodKind::RepoStructure: return augment::ArtifactKind::RepoStructure;
    case MethodKind::Plan: return augment::ArtifactKind::Plan;
    default: return augment::ArtifactKind::InstanceQA;
  }
}

struct Candidates {
  std::vector<std::string> diffs;
};

Candidates sample_candidates(Run& run, const MethodConfig& cfg, const Instance& inst, const ModelSpec& weak,
                             int n) {
  Candidates out;
  const auto files = inst.file_map();
  const auto prompt = genloop::fixed_prompt(base_prompt(inst));
  for (int t = 1; t <= n; ++t) {
    auto trace = genloop::generate_until_valid(run.gw(), weak, prompt, files, cfg.loop, cfg.seed + t);
    run.add(trace, weak);
    if (trace.valid()) out.diffs.push_back(*trace.diff);
    if (run.failed()) break;
  }
  return out;
}

void run_context_method(Run& run, const MethodConfig& cfg, const Instance& inst, const ModelSpec& strong,
                        const ModelSpec& weak, const RunContext& ctx) {
  const auto kind = artifact_kind(cfg.kind);
  const std::string key = augment::scope_key(kind, inst);
  auto build = [&] { return augment::build_artifact(*ctx.gateway, kind, inst, strong); };
  augment::ArtifactCache local;
  augment::ArtifactCache& cache = ctx.cache ? *ctx.cache : local;
  augment::ArtifactCache::Lookup got;
  try {
    got = cache.get_or_build(kind, key, build);
  } catch (const Error& e) {
    run.fail(e.what());
    return;
  }
  const auto& art = got.artifact;
  if (art.exchange) {
    bool charged = true;
    if (augment::is_repo_level(kind)) {
      if (ctx.artifact_owner) {
        auto it = ctx.artifact_owner->find(inst.repo);
        charged = it != ctx.artifact_owner->end() && it->second == inst.instance_id;
      } else {
        charged = got.built;
      }
    }
    ExchangeSummary use = *art.exchange;
    if (!charged) {
      // shared artifact paid for by another run
      use.input_tokens = 0;
      use.output_tokens = 0;
      use.cost = Money{};
      use.outcome = "cached";
    }
    run.add(use);
  }

  std::string prompt;
  if (kind == augment::ArtifactKind::RepoStructure) {
    prompt = prompts::render(prompts::TemplateId::RepoStructure,
                             {{"problem_statement", inst.problem_statement},
                              {"retrieval", prompts::format_retrieval(inst.retrieved_files)},
                              {"dependencies", art.text}});
  } else {
    prompt = augmented_prompt(inst, art);
  }
  auto trace =
      genloop::generate_until_valid(*ctx.gateway, weak, genloop::fixed_prompt(prompt), inst.file_map(), cfg.loop, cfg.seed);
  run.add(trace, weak);
  run.finish(trace.diff);
}

void run_few_shot(Run& run, const MethodConfig& cfg, const Instance& inst, const ModelSpec& weak, const RunContext& ctx) {
  std::vector<augment::FewShotExample> pool;
  if (ctx.few_shot_pool) pool = ctx.few_shot_pool(inst, cfg.few_shot_pool);
  augment::HashedBagOfWords fallback_embedder;
  const augment::EmbeddingProvider& embedder = ctx.embedder ? *ctx.embedder : fallback_embedder;
  std::string prompt;
  try {
    auto examples = augment::select_few_shot(inst, pool, cfg.few_shot_k, cfg.few_shot_mode, cfg.seed, embedder);
    prompts::Bindings b{
        {"similar", cfg.few_shot_mode == augment::FewShotMode::Similarity ? std::string(prompts::kSimilarFiller) : ""},
        {"successful", cfg.few_shot_pool == FewShotPool::Successful ? std::string(prompts::kSuccessfulFiller) : ""},
        {"few_shot_examples", augment::format_few_shot_examples(examples)},
        {"problem_statement", inst.problem_statement},
        {"retrieval", prompts::format_retrieval(inst.retrieved_files)}};
    prompt = prompts::render(prompts::TemplateId::FewShot, b);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyPool) throw;
    run.flag(kEmptyFewShotPool);
    prompt = base_prompt(inst);
  }
  auto trace =
      genloop::generate_until_valid(*ctx.gateway, weak, genloop::fixed_prompt(prompt), inst.file_map(), cfg.loop, cfg.seed);
  run.add(trace, weak);
  run.finish(trace.diff);
}

}  // namespace

RunRecord run_method(const MethodConfig& cfg, const Instance& inst, const ModelSpec& strong, const ModelSpec& weak,
                     const RunContext& ctx) {
  if (!ctx.gateway) throw Error(ErrorCode::ConfigError, "run context has no gateway");
  cfg.validate();
  if (cfg.kind == MethodKind::BestOfN && !ctx.judge) throw Error(ErrorCode::ConfigError, "best_of_n needs a judge");

  Run run(cfg, inst, ctx);
  const auto& gw = *ctx.gateway;
  const auto files = inst.file_map();
  auto loop_on = [&](const ModelSpec& model, const std::string& prompt, const genloop::LoopConfig& loop) {
    auto trace = genloop::generate_until_valid(gw, model, genloop::fixed_prompt(prompt), files, loop, cfg.seed);
    run.add(trace, model);
    return trace;
  };

  switch (cfg.kind) {
    case MethodKind::BaseStrong:
    case MethodKind::BaseWeak: {
      const auto& model = cfg.kind == MethodKind::BaseStrong ? strong : weak;
      run.finish(loop_on(model, base_prompt(inst), cfg.loop).diff);
      break;
    }
    case MethodKind::StrongSingleAttempt:
      run.finish(loop_on(strong, base_prompt(inst), single_attempt(cfg.loop)).diff);
      break;

    case MethodKind::SCMajority:
    case MethodKind::SCClustering:
    case MethodKind::SCUniversal:
    case MethodKind::BestOfN: {
      const int n = sample_count(cfg, ctx);
      auto cands = sample_candidates(run, cfg, inst, weak, n);
      if (cands.diffs.empty()) {
        run.flag(kNoValidCandidates);
        run.finish(std::nullopt);
        if (cfg.kind == MethodKind::BestOfN) run.set_resolved(false);
        break;
      }
      std::size_t idx = 0;
      if (cfg.kind == MethodKind::SCMajority) {
        idx = select_majority(cands.diffs);
      } else if (cfg.kind == MethodKind::SCClustering) {
        idx = select_clustering(cands.diffs, cfg.cluster_threshold, cfg.seed);
      } else if (cfg.kind == MethodKind::SCUniversal) {
        if (run.failed()) {
          idx = select_majority(cands.diffs);
          run.flag(kSelectionFallback);
        } else {
          try {
            auto sel = select_universal(gw, cands.diffs, inst, weak);
            if (sel.exchange) {
              run.add(*sel.exchange, weak, CallPurpose::Selection, 1,
                      sel.fallback ? "no_selection" : "selected:" + std::to_string(sel.index + 1));
            }
            if (sel.fallback) run.flag(kSelectionFallback);
            idx = sel.index;
          } catch (const Error& e) {
            run.fail(e.what());
            run.flag(kSelectionFallback);
            idx = select_majority(cands.diffs);
          }
        }
      } else {
        std::optional<std::size_t> accepted;
        bool any_known = false;
        for (std::size_t i = 0; i < cands.diffs.size(); ++i) {
          auto verdict = ctx.judge->judge(inst, cands.diffs[i]);
          any_known = any_known || verdict.has_value();
          if (verdict.value_or(false)) {
            accepted = i;
            break;
          }
        }
        idx = accepted.value_or(0);
        if (accepted) {
          run.set_resolved(true);
        } else if (any_known) {
          run.set_resolved(false);
        }
      }
      run.finish(cands.diffs[idx]);
      break;
    }

    case MethodKind::RepoSummary:
    case MethodKind::RepoFAQ:
    case MethodKind::RepoStructure:
    case MethodKind::Plan:
    case MethodKind::InstanceQA:
      run_context_method(run, cfg, inst, strong, weak, ctx);
      break;

    case MethodKind::FewShot:
      run_few_shot(run, cfg, inst, weak, ctx);
      break;

    case MethodKind::StrongFirst: {
      genloop::AttemptTrace first = genloop::generate_until_valid(gw, strong, genloop::fixed_prompt(base_prompt(inst)), files,
                                                                  single_attempt(cfg.loop), cfg.seed);
      run.add(first, strong);
      if (first.valid() || run.failed() || cfg.loop.max_retries < 2) {
        run.finish(first.diff);
        break;
      }
      prompts::Bindings b{{"problem_statement", inst.problem_statement},
                          {"retrieval", prompts::format_retrieval(inst.retrieved_files)},
                          {"strong_output", first.attempts.front().exchange.output_text}};
      genloop::LoopConfig rest = cfg.loop;
      rest.max_retries = cfg.loop.max_retries - 1;
      run.finish(loop_on(weak, prompts::render(prompts::TemplateId::StrongFirstRefine, b), rest).diff);
      break;
    }

    case MethodKind::WeakFirst: {
      genloop::AttemptTrace weak_trace =
          genloop::generate_until_valid(gw, weak, genloop::fixed_prompt(base_prompt(inst)), files, cfg.loop, cfg.seed);
      run.add(weak_trace, weak);
      if (weak_trace.valid() || run.failed()) {
        run.finish(weak_trace.diff);
        break;
      }
      run.finish(loop_on(strong, base_prompt(inst), single_attempt(cfg.loop)).diff);
      break;
    }

    case MethodKind::PromptReduction: {
      std::vector<FileContext> context = inst.retrieved_files;
      try {
        auto red = augment::reduce_context(gw, inst, weak);
        run.add(red.exchange, weak, CallPurpose::Reduction, 1,
                red.empty ? std::string("EmptyReduction") : "reduced:" + std::to_string(red.files.size()));
        if (!red.dropped_paths.empty()) run.flag(kReductionDroppedPath);
        if (red.empty) {
          run.flag(kReductionFallback);
        } else {
          context = std::move(red.files);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::ContextTooLong &&
            e.code() != ErrorCode::ProviderError) {
          throw;
        }
        run.fail(e.what());
        run.finish(std::nullopt);
        break;
      }
      run.finish(loop_on(strong, base_prompt(inst, context), cfg.loop).diff);
      break;
    }

    case MethodKind::WeakRouter:
    case MethodKind::StrongRouter: {
      const auto& router = cfg.kind == MethodKind::WeakRouter ? weak : strong;
      gateway::ChatRequest req;
      req.model_id = router.model_id;
      req.temperature = 0.0;
      req.seed = cfg.seed;
      req.prompt = prompts::render(prompts::TemplateId::Router,
                                   {{"problem_statement", inst.problem_statement},
                                    {"retrieval", prompts::format_retrieval(inst.retrieved_files)}});
      gateway::ChatExchange ex;
      try {
        ex = gw.complete(router, req);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidValue || e.code() == ErrorCode::ConfigError) throw;
        run.fail(e.what());
        run.finish(std::nullopt);
        break;
      }
      auto verdict = prompts::parse_router_verdict(ex.output_text);
      run.add(ex, router, CallPurpose::Routing, 1, verdict.verdict == prompts::Verdict::Simple ? "simple" : "complex");
      if (verdict.fallback) run.flag(kRouterFallback);
      const auto& target = verdict.verdict == prompts::Verdict::Simple ? weak : strong;
      run.finish(loop_on(target, base_prompt(inst), cfg.loop).diff);
      break;
    }
  }

  RunRecord rec = run.take();
  if (rec.error) {
    // any backend failure invalidates the run
    rec.final_patch.reset();
    rec.valid = false;
    rec.resolved = false;
  }
  if (!rec.resolved) {
    if (!rec.final_patch) {
      rec.resolved = false;
    } else if (ctx.judge) {
      rec.resolved = ctx.judge->judge(inst, *rec.final_patch);
    }
  }
  return rec;
}

}  // namespace cascade::strategies
