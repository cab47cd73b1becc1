#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cascade/core.hpp"
#include "cascade/gateway.hpp"

namespace cascade::augment {

enum class ArtifactKind { RepoSummary, RepoFAQ, RepoStructure, Plan, InstanceQA };

std::string to_string(ArtifactKind kind);
ArtifactKind artifact_kind_from_string(const std::string& text);
bool is_repo_level(ArtifactKind kind);
// repo for repo-level kinds, instance_id otherwise
std::string scope_key(ArtifactKind kind, const Instance& instance);

struct ContextArtifact {
  ArtifactKind kind = ArtifactKind::Plan;
  std::string scope_key;
  std::string text;
  Money build_cost;
  std::string builder_model;  // empty when no model call was needed
  std::optional<ExchangeSummary> exchange;

  friend bool operator==(const ContextArtifact&, const ContextArtifact&) = default;
};

void to_json(nlohmann::json& j, const ContextArtifact& value);
void from_json(const nlohmann::json& j, ContextArtifact& value);

// One strong call with the kind's template; RepoStructure is ingested from
// dependencies_text without a call. Throws MissingInput or backend errors.
ContextArtifact build_artifact(const gateway::Gateway& gateway, ArtifactKind kind, const Instance& instance,
                               const ModelSpec& strong);

// Concurrent cache keyed by (kind, scope_key). Concurrent requests for one key
// share a single build; with a directory, artifacts survive across processes
// as <dir>/<kind>/<key>.json.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::optional<std::filesystem::path> dir = std::nullopt);

  struct Lookup {
    ContextArtifact artifact;
    bool built = false;  // this call ran the builder
  };

  Lookup get_or_build(ArtifactKind kind, const std::string& key, const std::function<ContextArtifact()>& builder);
  std::optional<ContextArtifact> find(ArtifactKind kind, const std::string& key) const;

  std::size_t builds() const;

 private:
  using Key = std::pair<ArtifactKind, std::string>;
  std::optional<ContextArtifact> load(const Key& key) const;
  void store(const ContextArtifact& artifact) const;
  std::filesystem::path file_for(const Key& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_future<ContextArtifact>> entries_;
  std::size_t builds_ = 0;
};

struct FewShotExample {
  std::string problem_statement;
  std::vector<std::string> target_files;
  std::string patch;
  std::string source_instance_id;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Deterministic, fixed length, nonzero norm.
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Lower-cased alphanumeric tokens hashed (FNV-1a) into `dim` count buckets.
class HashedBagOfWords : public EmbeddingProvider {
 public:
  explicit HashedBagOfWords(std::size_t dim = 256);
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

enum class FewShotMode { Random, Similarity };

std::string to_string(FewShotMode mode);

// Random: seeded draw without replacement from the pool sorted by id.
// Similarity: top-k cosine, ties by ascending id. Returns the whole pool when
// it holds fewer than k examples. Throws EmptyPool.
std::vector<FewShotExample> select_few_shot(const Instance& instance, const std::vector<FewShotExample>& pool,
                                            std::size_t k, FewShotMode mode, std::uint64_t seed,
                                            const EmbeddingProvider& embedder);

// Text bound to {few_shot_examples}.
std::string format_few_shot_examples(const std::vector<FewShotExample>& examples);

struct Reduction {
  gateway::ChatExchange exchange;
  std::vector<FileContext> files;  // reply order, ranks renumbered from 1
  std::vector<std::string> dropped_paths;
  bool empty = false;  // nothing usable came back: use the full context
};

// One weak call with the reduction template. Sections naming paths outside
// the original retrieval are dropped and listed. Backend errors propagate.
Reduction reduce_context(const gateway::Gateway& gateway, const Instance& instance, const ModelSpec& weak);

}  // namespace cascade::augment
