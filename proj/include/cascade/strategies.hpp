#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/augment.hpp"
#include "cascade/core.hpp"
#include "cascade/gateway.hpp"
#include "cascade/genloop.hpp"

namespace cascade::strategies {

enum class MethodKind {
  BaseStrong,
  BaseWeak,
  StrongSingleAttempt,
  SCMajority,
  SCClustering,
  SCUniversal,
  BestOfN,
  RepoSummary,
  RepoFAQ,
  RepoStructure,
  FewShot,
  Plan,
  InstanceQA,
  StrongFirst,
  WeakFirst,
  PromptReduction,
  WeakRouter,
  StrongRouter,
};

enum class TaxonomyGroup { Base, CostEquated, Context, Pipeline, Dynamic };

std::string to_string(TaxonomyGroup group);
TaxonomyGroup taxonomy_group(MethodKind kind);

// Where few-shot demonstrations come from: gold patches of same-repo
// instances, or patches of resolved base_strong runs.
enum class FewShotPool { Gold, Successful };

struct MethodConfig {
  MethodKind kind = MethodKind::BaseWeak;
  genloop::LoopConfig loop;
  std::optional<int> sc_n_override;
  double cluster_threshold = 0.90;
  std::size_t few_shot_k = 1;
  augment::FewShotMode few_shot_mode = augment::FewShotMode::Random;
  FewShotPool few_shot_pool = FewShotPool::Gold;
  std::uint64_t seed = 0;

  // Stable identifier, e.g. "weak_router" or "few_shot_5_similarity_successful".
  std::string id() const;
  std::string display_name() const;
  // Throws ConfigError.
  void validate() const;
};

// Parses an identifier produced by MethodConfig::id(). Throws ConfigError.
MethodConfig method_from_id(const std::string& id);

void to_json(nlohmann::json& j, const MethodConfig& value);
// Accepts a bare id string or an object {"id": ..., "loop": {...}, ...}.
void from_json(const nlohmann::json& j, MethodConfig& value);

// The sixteen collaboration methods with default settings (few-shot k = 1 in
// both selection modes), in taxonomy order.
std::vector<MethodConfig> collaboration_methods();

// max(2, round-half-up(strong / weak)). Throws ZeroWeakCost.
int cost_equated_n(Money strong_unit_cost, Money weak_unit_cost);

// Most frequent byte-identical candidate; ties go to the earliest.
std::size_t select_majority(const std::vector<std::string>& candidates);

// Single-linkage clusters over patch_similarity >= threshold; a seeded pick
// from the largest cluster (ties: the cluster holding the earliest member).
std::size_t select_clustering(const std::vector<std::string>& candidates, double threshold, std::uint64_t seed);

struct Selection {
  std::size_t index = 0;
  std::optional<gateway::ChatExchange> exchange;  // absent for a single candidate
  bool fallback = false;                          // majority vote was used
};

// Asks the weak model to pick; unparseable replies fall back to majority.
Selection select_universal(const gateway::Gateway& gateway, const std::vector<std::string>& candidates,
                           const Instance& instance, const ModelSpec& weak);

class Judge {
 public:
  virtual ~Judge() = default;
  // nullopt when the instance cannot be judged.
  virtual std::optional<bool> judge(const Instance& instance, const std::string& diff) const = 0;
};

// Accepts a diff whose normalized changes equal those of the gold patch.
class GoldPatchJudge : public Judge {
 public:
  std::optional<bool> judge(const Instance& instance, const std::string& diff) const override;
};

using FewShotPoolFn = std::function<std::vector<augment::FewShotExample>(const Instance&, FewShotPool)>;

struct RunContext {
  const gateway::Gateway* gateway = nullptr;
  std::string pair_id;
  augment::ArtifactCache* cache = nullptr;  // optional; a private cache is used otherwise
  // repo -> instance charged for that repo's shared artifacts. Without it the
  // run that actually builds an artifact is charged.
  const std::map<std::string, std::string>* artifact_owner = nullptr;
  FewShotPoolFn few_shot_pool;
  const augment::EmbeddingProvider* embedder = nullptr;  // defaults to hashed bag of words
  const Judge* judge = nullptr;
  // Average per-instance costs of base_strong / base_weak, for the SC sample count.
  std::optional<std::pair<Money, Money>> unit_costs;
};

// Sample count for the self-consistency family under this context.
int sample_count(const MethodConfig& cfg, const RunContext& ctx);

// Runs one method on one instance. Backend failures end the run early and
// are recorded in `error`; ConfigError is thrown for unusable setups.
RunRecord run_method(const MethodConfig& cfg, const Instance& instance, const ModelSpec& strong, const ModelSpec& weak,
                     const RunContext& ctx);

}  // namespace cascade::strategies
