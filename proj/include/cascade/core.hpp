#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/money.hpp"

namespace cascade {

inline constexpr std::size_t kDefaultMaxFiles = 5;

struct FileContext {
  std::string path;
  std::string content;
  int rank = 1;

  friend bool operator==(const FileContext&, const FileContext&) = default;
};

struct Instance {
  std::string instance_id;
  std::string repo;
  std::string problem_statement;
  std::vector<FileContext> retrieved_files;  // ascending rank
  std::optional<std::string> dependencies_text;
  std::optional<std::string> readme_text;
  std::optional<std::string> directory_listing;
  std::optional<std::string> gold_patch;
  std::map<std::string, bool> resolved_label;

  // path -> content of every retrieved file.
  std::map<std::string, std::string> file_map() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class Role { Strong, Weak };

std::string to_string(Role role);
Role role_from_string(const std::string& text);

struct Pricing {
  Money input_per_mtok;
  Money output_per_mtok;

  friend bool operator==(const Pricing&, const Pricing&) = default;
};

struct ModelSpec {
  std::string model_id;
  Role role = Role::Strong;
  Pricing pricing;
  std::string backend;
  // Opaque per-model request options (e.g. reasoning effort), merged into the
  // wire request body as-is.
  nlohmann::json options = nlohmann::json::object();

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class UsageSource { Provider, Scripted, Estimated };

std::string to_string(UsageSource source);
UsageSource usage_source_from_string(const std::string& text);

// What a model call was made for. All purposes count toward the strong/weak
// iteration totals of a run.
enum class CallPurpose { Generation, Augmentation, Routing, Reduction, Selection };

std::string to_string(CallPurpose purpose);
CallPurpose call_purpose_from_string(const std::string& text);

// The persisted view of one model call. Wall-clock latency is deliberately
// absent so records are reproducible byte for byte.
struct ExchangeSummary {
  std::string model_id;
  Role role = Role::Weak;
  CallPurpose purpose = CallPurpose::Generation;
  int attempt = 1;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  UsageSource usage_source = UsageSource::Scripted;
  Money cost;
  std::string outcome;

  friend bool operator==(const ExchangeSummary&, const ExchangeSummary&) = default;
};

struct RunRecord {
  std::string pair_id;
  std::string method_id;
  std::string instance_id;
  std::uint64_t seed = 0;
  int strong_calls = 0;
  int weak_calls = 0;
  std::vector<ExchangeSummary> exchanges;
  std::optional<std::string> final_patch;
  bool valid = false;
  Money total_cost;
  std::optional<bool> resolved;
  std::vector<std::string> flags;
  std::optional<std::string> error;

  using Key = std::tuple<std::string, std::string, std::string, std::uint64_t>;
  Key key() const { return {pair_id, method_id, instance_id, seed}; }

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Returns one message per violated record invariant; empty when well formed.
std::vector<std::string> check_invariants(const RunRecord& record);

struct MethodSummary {
  std::string method_id;
  std::string pair_id;
  std::size_t instances = 0;
  double resolution_rate = 0.0;
  double valid_patch_rate = 0.0;
  double avg_strong_iters = 0.0;
  double avg_weak_iters = 0.0;
  Money total_cost;
  double efficiency = 0.0;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

// resolution_rate / total_cost, defined as 0 for a zero cost.
double efficiency_of(double resolution_rate, Money total_cost);

// Decodes one raw instance record, enforcing the instance invariants and
// keeping at most `max_files` retrieved files in rank order.
Instance validate_instance(const nlohmann::json& raw, std::size_t max_files = kDefaultMaxFiles);

void to_json(nlohmann::json& j, const FileContext& value);
void to_json(nlohmann::json& j, const Instance& value);
void from_json(const nlohmann::json& j, Instance& value);
void to_json(nlohmann::json& j, const Pricing& value);
void from_json(const nlohmann::json& j, Pricing& value);
void to_json(nlohmann::json& j, const ModelSpec& value);
void from_json(const nlohmann::json& j, ModelSpec& value);
void to_json(nlohmann::json& j, const ExchangeSummary& value);
void from_json(const nlohmann::json& j, ExchangeSummary& value);
void to_json(nlohmann::json& j, const RunRecord& value);
void from_json(const nlohmann::json& j, RunRecord& value);
void to_json(nlohmann::json& j, const MethodSummary& value);
void from_json(const nlohmann::json& j, MethodSummary& value);

// Money is carried as a decimal string in JSON; numbers are accepted on input.
nlohmann::json money_to_json(Money value);
Money money_from_json(const nlohmann::json& j);

}  // namespace cascade
