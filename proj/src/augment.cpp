#include "cascade/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>

#include <spdlog/spdlog.h>

#include "cascade/error.hpp"
#include "cascade/genloop.hpp"
#include "cascade/prompts.hpp"
#include "cascade/rng.hpp"

namespace cascade::augment {

using nlohmann::json;

std::string to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::RepoSummary: return "repo_summary";
    case ArtifactKind::RepoFAQ: return "repo_faq";
    case ArtifactKind::RepoStructure: return "repo_structure";
    case ArtifactKind::Plan: return "plan";
    case ArtifactKind::InstanceQA: return "instance_qa";
  }
  return "unknown";
}

ArtifactKind artifact_kind_from_string(const std::string& text) {
  for (auto k : {ArtifactKind::RepoSummary, ArtifactKind::RepoFAQ, ArtifactKind::RepoStructure, ArtifactKind::Plan,
                 ArtifactKind::InstanceQA}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidValue, "unknown artifact kind '" + text + "'");
}

bool is_repo_level(ArtifactKind kind) {
  return kind == ArtifactKind::RepoSummary || kind == ArtifactKind::RepoFAQ || kind == ArtifactKind::RepoStructure;
}

std::string scope_key(ArtifactKind kind, const Instance& instance) {
  return is_repo_level(kind) ? instance.repo : instance.instance_id;
}

void to_json(json& j, const ContextArtifact& value) {
  j = json{{"kind", to_string(value.kind)},
           {"scope_key", value.scope_key},
           {"text", value.text},
           {"build_cost", money_to_json(value.build_cost)},
           {"builder_model", value.builder_model}};
  j["exchange"] = value.exchange ? json(*value.exchange) : json(nullptr);
}

void from_json(const json& j, ContextArtifact& value) {
  value.kind = artifact_kind_from_string(j.at("kind").get<std::string>());
  value.scope_key = j.at("scope_key").get<std::string>();
  value.text = j.at("text").get<std::string>();
  value.build_cost = money_from_json(j.at("build_cost"));
  value.builder_model = j.value("builder_model", std::string{});
  value.exchange.reset();
  if (auto it = j.find("exchange"); it != j.end() && !it->is_null()) value.exchange = it->get<ExchangeSummary>();
}

namespace {

const std::string& need(const std::optional<std::string>& field, const char* name) {
  if (!field || field->empty()) throw Error(ErrorCode::MissingInput, name);
  return *field;
}

}  // namespace

ContextArtifact build_artifact(const gateway::Gateway& gateway, ArtifactKind kind, const Instance& instance,
                               const ModelSpec& strong) {
  ContextArtifact art;
  art.kind = kind;
  art.scope_key = scope_key(kind, instance);

  prompts::TemplateId tmpl{};
  prompts::Bindings b;
  switch (kind) {
    case ArtifactKind::RepoStructure:
      art.text = need(instance.dependencies_text, "dependencies_text");
      return art;
    case ArtifactKind::RepoSummary:
    case ArtifactKind::RepoFAQ:
      tmpl = kind == ArtifactKind::RepoSummary ? prompts::TemplateId::RepoSummary : prompts::TemplateId::RepoFAQ;
      b["readme_content"] = need(instance.readme_text, "readme_text");
      b["repo_structure"] = need(instance.directory_listing, "directory_listing");
      b["repo_name"] = instance.repo;
      break;
    case ArtifactKind::Plan:
    case ArtifactKind::InstanceQA:
      tmpl = kind == ArtifactKind::Plan ? prompts::TemplateId::Plan : prompts::TemplateId::InstanceQA;
      if (instance.retrieved_files.empty()) throw Error(ErrorCode::MissingInput, "retrieved_files");
      b["problem_statement"] = instance.problem_statement;
      b["retrieval"] = prompts::format_retrieval(instance.retrieved_files);
      break;
  }
  gateway::ChatRequest req;
  req.model_id = strong.model_id;
  req.prompt = prompts::render(tmpl, b);
  req.temperature = 0.0;
  auto ex = gateway.complete(strong, req);
  art.text = ex.output_text;
  art.build_cost = ex.cost;
  art.builder_model = strong.model_id;
  art.exchange = genloop::summarize(ex, strong, CallPurpose::Augmentation, 1, to_string(kind));
  return art;
}

ArtifactCache::ArtifactCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::filesystem::path ArtifactCache::file_for(const Key& key) const {
  std::string name;
  for (char c : key.second) {
    bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (safe) {
      name += c;
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
      name += buf;
    }
  }
  return *dir_ / to_string(key.first) / (name + ".json");
}

std::optional<ContextArtifact> ArtifactCache::load(const Key& key) const {
  if (!dir_) return std::nullopt;
  auto path = file_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    auto art = json::parse(in).get<ContextArtifact>();
    if (art.kind == key.first && art.scope_key == key.second) return art;
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cached artifact {}: {}", path.string(), e.what());
  }
  return std::nullopt;
}

void ArtifactCache::store(const ContextArtifact& artifact) const {
  if (!dir_) return;
  auto path = file_for({artifact.kind, artifact.scope_key});
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << json(artifact).dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

ArtifactCache::Lookup ArtifactCache::get_or_build(ArtifactKind kind, const std::string& key,
                                                  const std::function<ContextArtifact()>& builder) {
  Key k{kind, key};
  std::promise<ContextArtifact> promise;
  {
    std::unique_lock lock(mutex_);
    auto it = entries_.find(k);
    if (it != entries_.end()) {
      auto fut = it->second;
      lock.unlock();
      return {fut.get(), false};
    }
    entries_.emplace(k, promise.get_future().share());
  }
  // This thread owns the slot: disk first, then the builder.
  try {
    if (auto cached = load(k)) {
      promise.set_value(*cached);
      return {*cached, false};
    }
    ContextArtifact art = builder();
    store(art);
    {
      std::lock_guard lock(mutex_);
      ++builds_;
    }
    promise.set_value(art);
    return {art, true};
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    entries_.erase(k);  // let a later request retry
    throw;
  }
}

std::optional<ContextArtifact> ArtifactCache::find(ArtifactKind kind, const std::string& key) const {
  std::shared_future<ContextArtifact> fut;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find({kind, key});
    if (it == entries_.end()) return load({kind, key});
    fut = it->second;
  }
  try {
    return fut.get();
  } catch (...) {
    return std::nullopt;
  }
}

std::size_t ArtifactCache::builds() const {
  std::lock_guard lock(mutex_);
  return builds_;
}

HashedBagOfWords::HashedBagOfWords(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be positive");
}

std::vector<double> HashedBagOfWords::embed(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  bool any = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::string token;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
      ++i;
    }
    v[fnv1a64(token) % dim_] += 1.0;
    any = true;
  }
  if (!any) v[0] = 1.0;
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string to_string(FewShotMode mode) { return mode == FewShotMode::Random ? "random" : "similarity"; }

std::vector<FewShotExample> select_few_shot(const Instance& instance, const std::vector<FewShotExample>& pool,
                                            std::size_t k, FewShotMode mode, std::uint64_t seed,
                                            const EmbeddingProvider& embedder) {
  std::vector<FewShotExample> candidates;
  for (const auto& ex : pool) {
    if (ex.source_instance_id != instance.instance_id) candidates.push_back(ex);
  }
  if (candidates.empty()) throw Error(ErrorCode::EmptyPool, instance.instance_id);
  if (k == 0) throw Error(ErrorCode::ConfigError, "few-shot k must be >= 1");
  std::sort(candidates.begin(), candidates.end(),
            [](const FewShotExample& a, const FewShotExample& b) { return a.source_instance_id < b.source_instance_id; });
  if (candidates.size() <= k) return candidates;

  if (mode == FewShotMode::Random) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(k);
    return candidates;
  }

  auto query = embedder.embed(instance.problem_statement);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scored.emplace_back(cosine(query, embedder.embed(candidates[i].problem_statement)), i);
  }
  // candidates are id-sorted, so index order is the id tie-break
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<FewShotExample> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(candidates[scored[i].second]);
  return out;
}

std::string format_few_shot_examples(const std::vector<FewShotExample>& examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (i > 0) out += '\n';
    out += "Example " + std::to_string(i + 1) + ":\nIssue:\n" + ex.problem_statement;
    if (!ex.problem_statement.empty() && ex.problem_statement.back() != '\n') out += '\n';
    out += "Target files:\n";
    for (const auto& f : ex.target_files) out += f + "\n";
    out += "Patch:\n```diff\n" + ex.patch;
    if (!ex.patch.empty() && ex.patch.back() != '\n') out += '\n';
    out += "```\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

Reduction reduce_context(const gateway::Gateway& gateway, const Instance& instance, const ModelSpec& weak) {
  gateway::ChatRequest req;
  req.model_id = weak.model_id;
  req.prompt = prompts::render(prompts::TemplateId::PromptReduction,
                               {{"problem_statement", instance.problem_statement},
                                {"retrieval", prompts::format_retrieval(instance.retrieved_files)}});
  req.temperature = 0.0;
  Reduction out;
  out.exchange = gateway.complete(weak, req);
  std::vector<std::pair<std::string, std::string>> sections;
  try {
    sections = prompts::parse_reduced_context(out.exchange.output_text);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyReduction) throw;
    out.empty = true;
    return out;
  }
  auto known = instance.file_map();
  for (auto& [path, body] : sections) {
    if (!known.count(path)) {
      spdlog::warn("{}: reduction named unknown path '{}', dropped", instance.instance_id, path);
      out.dropped_paths.push_back(path);
      continue;
    }
    out.files.push_back({path, body, static_cast<int>(out.files.size()) + 1});
  }
  out.empty = out.files.empty();
  return out;
}

}  // namespace cascade::augment
