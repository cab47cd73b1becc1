#include "cascade/core.hpp"

#include <algorithm>
#include <set>

#include "cascade/error.hpp"

namespace cascade {

using nlohmann::json;

std::map<std::string, std::string> Instance::file_map() const {
  std::map<std::string, std::string> out;
  for (const auto& f : retrieved_files) out.emplace(f.path, f.content);
  return out;
}

std::string to_string(Role role) { return role == Role::Strong ? "strong" : "weak"; }

Role role_from_string(const std::string& text) {
  if (text == "strong") return Role::Strong;
  if (text == "weak") return Role::Weak;
  throw Error(ErrorCode::InvalidValue, "unknown role '" + text + "'");
}

std::string to_string(UsageSource source) {
  switch (source) {
    case UsageSource::Provider: return "provider";
    case UsageSource::Scripted: return "scripted";
    case UsageSource::Estimated: return "estimated";
  }
  return "estimated";
}

UsageSource usage_source_from_string(const std::string& text) {
  if (text == "provider") return UsageSource::Provider;
  if (text == "scripted") return UsageSource::Scripted;
  if (text == "estimated") return UsageSource::Estimated;
  throw Error(ErrorCode::InvalidValue, "unknown usage source '" + text + "'");
}

std::string to_string(CallPurpose purpose) {
  switch (purpose) {
    case CallPurpose::Generation: return "generation";
    case CallPurpose::Augmentation: return "augmentation";
    case CallPurpose::Routing: return "routing";
    case CallPurpose::Reduction: return "reduction";
    case CallPurpose::Selection: return "selection";
  }
  return "generation";
}

CallPurpose call_purpose_from_string(const std::string& text) {
  for (auto p : {CallPurpose::Generation, CallPurpose::Augmentation, CallPurpose::Routing,
                 CallPurpose::Reduction, CallPurpose::Selection}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::InvalidValue, "unknown call purpose '" + text + "'");
}

std::vector<std::string> check_invariants(const RunRecord& record) {
  std::vector<std::string> problems;
  if (record.instance_id.empty()) problems.push_back("empty instance_id");
  if (record.method_id.empty()) problems.push_back("empty method_id");
  if (record.valid != record.final_patch.has_value()) {
    problems.push_back("valid must hold exactly when final_patch is present");
  }
  Money sum;
  int strong = 0;
  int weak = 0;
  for (const auto& ex : record.exchanges) {
    sum += ex.cost;
    (ex.role == Role::Strong ? strong : weak) += 1;
  }
  if (sum != record.total_cost) problems.push_back("total_cost differs from the sum of exchange costs");
  if (strong != record.strong_calls || weak != record.weak_calls) {
    problems.push_back("call counts differ from the exchange list");
  }
  return problems;
}

double efficiency_of(double resolution_rate, Money total_cost) {
  if (total_cost.micros() <= 0) return 0.0;
  return resolution_rate / total_cost.to_double();
}

namespace {

const json& require(const json& raw, const char* field) {
  auto it = raw.find(field);
  if (it == raw.end() || it->is_null()) throw Error(ErrorCode::MissingField, field);
  return *it;
}

std::string require_string(const json& raw, const char* field) {
  const json& v = require(raw, field);
  if (!v.is_string()) throw Error(ErrorCode::InvalidValue, std::string(field) + " must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& raw, const char* field) {
  auto it = raw.find(field);
  if (it == raw.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::InvalidValue, std::string(field) + " must be a string");
  return it->get<std::string>();
}

void put_optional(json& j, const char* field, const std::optional<std::string>& value) {
  if (value) j[field] = *value;
}

}  // namespace

Instance validate_instance(const json& raw, std::size_t max_files) {
  if (!raw.is_object()) throw Error(ErrorCode::DecodeError, "instance record must be an object");
  Instance inst;
  inst.instance_id = require_string(raw, "instance_id");
  if (inst.instance_id.empty()) throw Error(ErrorCode::MissingField, "instance_id");
  inst.repo = require_string(raw, "repo");
  inst.problem_statement = require_string(raw, "problem_statement");
  if (inst.problem_statement.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::EmptyProblemStatement, inst.instance_id);
  }
  const json& files = require(raw, "retrieved_files");
  if (!files.is_array()) throw Error(ErrorCode::InvalidValue, "retrieved_files must be an array");
  std::set<std::string> paths;
  std::set<int> ranks;
  for (const auto& f : files) {
    FileContext fc;
    fc.path = require_string(f, "path");
    fc.content = require_string(f, "content");
    const json& rank = require(f, "rank");
    if (!rank.is_number_integer()) throw Error(ErrorCode::InvalidValue, "rank must be an integer");
    fc.rank = rank.get<int>();
    if (fc.path.empty()) throw Error(ErrorCode::MissingField, "path");
    if (fc.rank < 1) throw Error(ErrorCode::InvalidValue, "rank must be >= 1 for " + fc.path);
    if (!paths.insert(fc.path).second) throw Error(ErrorCode::DuplicatePath, fc.path);
    if (!ranks.insert(fc.rank).second) {
      throw Error(ErrorCode::InvalidValue, "duplicate rank " + std::to_string(fc.rank));
    }
    inst.retrieved_files.push_back(std::move(fc));
  }
  std::stable_sort(inst.retrieved_files.begin(), inst.retrieved_files.end(),
                   [](const FileContext& a, const FileContext& b) { return a.rank < b.rank; });
  if (inst.retrieved_files.size() > max_files) inst.retrieved_files.resize(max_files);
  inst.dependencies_text = optional_string(raw, "dependencies_text");
  inst.readme_text = optional_string(raw, "readme_text");
  inst.directory_listing = optional_string(raw, "directory_listing");
  inst.gold_patch = optional_string(raw, "gold_patch");
  if (auto it = raw.find("resolved_label"); it != raw.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::InvalidValue, "resolved_label must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_boolean()) throw Error(ErrorCode::InvalidValue, "resolved_label values must be booleans");
      inst.resolved_label[key] = value.get<bool>();
    }
  }
  return inst;
}

json money_to_json(Money value) { return value.to_string(); }

Money money_from_json(const json& j) {
  if (j.is_string()) return Money::parse(j.get<std::string>());
  if (j.is_number_integer()) return Money::from_micros(j.get<std::int64_t>() * Money::kMicrosPerUnit);
  if (j.is_number()) return Money::from_double(j.get<double>());
  throw Error(ErrorCode::InvalidValue, "money must be a string or number");
}

void to_json(json& j, const FileContext& value) {
  j = json{{"path", value.path}, {"content", value.content}, {"rank", value.rank}};
}

void to_json(json& j, const Instance& value) {
  j = json::object();
  j["instance_id"] = value.instance_id;
  j["repo"] = value.repo;
  j["problem_statement"] = value.problem_statement;
  j["retrieved_files"] = value.retrieved_files;
  put_optional(j, "dependencies_text", value.dependencies_text);
  put_optional(j, "readme_text", value.readme_text);
  put_optional(j, "directory_listing", value.directory_listing);
  put_optional(j, "gold_patch", value.gold_patch);
  if (!value.resolved_label.empty()) j["resolved_label"] = value.resolved_label;
}

void from_json(const json& j, Instance& value) { value = validate_instance(j, SIZE_MAX); }

void to_json(json& j, const Pricing& value) {
  j = json{{"input_per_mtok", money_to_json(value.input_per_mtok)},
           {"output_per_mtok", money_to_json(value.output_per_mtok)}};
}

void from_json(const json& j, Pricing& value) {
  value.input_per_mtok = money_from_json(require(j, "input_per_mtok"));
  value.output_per_mtok = money_from_json(require(j, "output_per_mtok"));
  if (value.input_per_mtok.micros() < 0 || value.output_per_mtok.micros() < 0) {
    throw Error(ErrorCode::InvalidValue, "pricing rates must be non-negative");
  }
}

void to_json(json& j, const ModelSpec& value) {
  j = json{{"model_id", value.model_id},
           {"role", to_string(value.role)},
           {"pricing", value.pricing},
           {"backend", value.backend},
           {"options", value.options}};
}

void from_json(const json& j, ModelSpec& value) {
  value.model_id = require_string(j, "model_id");
  value.role = role_from_string(require_string(j, "role"));
  value.pricing = require(j, "pricing").get<Pricing>();
  value.backend = require_string(j, "backend");
  value.options = j.value("options", json::object());
}

void to_json(json& j, const ExchangeSummary& value) {
  j = json::object();
  j["model_id"] = value.model_id;
  j["role"] = to_string(value.role);
  j["purpose"] = to_string(value.purpose);
  j["attempt"] = value.attempt;
  j["temperature"] = value.temperature;
  j["seed"] = value.seed ? json(*value.seed) : json(nullptr);
  j["input_tokens"] = value.input_tokens;
  j["output_tokens"] = value.output_tokens;
  j["usage_source"] = to_string(value.usage_source);
  j["cost"] = money_to_json(value.cost);
  j["outcome"] = value.outcome;
}

void from_json(const json& j, ExchangeSummary& value) {
  value.model_id = require_string(j, "model_id");
  value.role = role_from_string(require_string(j, "role"));
  value.purpose = call_purpose_from_string(require_string(j, "purpose"));
  value.attempt = require(j, "attempt").get<int>();
  value.temperature = require(j, "temperature").get<double>();
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    value.seed = it->get<std::uint64_t>();
  } else {
    value.seed.reset();
  }
  value.input_tokens = require(j, "input_tokens").get<std::int64_t>();
  value.output_tokens = require(j, "output_tokens").get<std::int64_t>();
  value.usage_source = usage_source_from_string(require_string(j, "usage_source"));
  value.cost = money_from_json(require(j, "cost"));
  value.outcome = require_string(j, "outcome");
}

void to_json(json& j, const RunRecord& value) {
  j = json::object();
  j["pair_id"] = value.pair_id;
  j["method_id"] = value.method_id;
  j["instance_id"] = value.instance_id;
  j["seed"] = value.seed;
  j["strong_calls"] = value.strong_calls;
  j["weak_calls"] = value.weak_calls;
  j["exchanges"] = value.exchanges;
  j["final_patch"] = value.final_patch ? json(*value.final_patch) : json(nullptr);
  j["valid"] = value.valid;
  j["total_cost"] = money_to_json(value.total_cost);
  j["resolved"] = value.resolved ? json(*value.resolved) : json(nullptr);
  j["flags"] = value.flags;
  j["error"] = value.error ? json(*value.error) : json(nullptr);
}

void from_json(const json& j, RunRecord& value) {
  value.pair_id = require_string(j, "pair_id");
  value.method_id = require_string(j, "method_id");
  value.instance_id = require_string(j, "instance_id");
  value.seed = require(j, "seed").get<std::uint64_t>();
  value.strong_calls = require(j, "strong_calls").get<int>();
  value.weak_calls = require(j, "weak_calls").get<int>();
  value.exchanges = require(j, "exchanges").get<std::vector<ExchangeSummary>>();
  value.final_patch = optional_string(j, "final_patch");
  value.valid = require(j, "valid").get<bool>();
  value.total_cost = money_from_json(require(j, "total_cost"));
  if (auto it = j.find("resolved"); it != j.end() && !it->is_null()) {
    value.resolved = it->get<bool>();
  } else {
    value.resolved.reset();
  }
  value.flags = j.value("flags", std::vector<std::string>{});
  value.error = optional_string(j, "error");
}

void to_json(json& j, const MethodSummary& value) {
  j = json{{"method_id", value.method_id},
           {"pair_id", value.pair_id},
           {"instances", value.instances},
           {"resolution_rate", value.resolution_rate},
           {"valid_patch_rate", value.valid_patch_rate},
           {"avg_strong_iters", value.avg_strong_iters},
           {"avg_weak_iters", value.avg_weak_iters},
           {"total_cost", money_to_json(value.total_cost)},
           {"efficiency", value.efficiency}};
}

void from_json(const json& j, MethodSummary& value) {
  value.method_id = require_string(j, "method_id");
  value.pair_id = j.value("pair_id", std::string{});
  value.instances = j.value("instances", std::size_t{0});
  value.resolution_rate = require(j, "resolution_rate").get<double>();
  value.valid_patch_rate = require(j, "valid_patch_rate").get<double>();
  value.avg_strong_iters = require(j, "avg_strong_iters").get<double>();
  value.avg_weak_iters = require(j, "avg_weak_iters").get<double>();
  value.total_cost = money_from_json(require(j, "total_cost"));
  value.efficiency = require(j, "efficiency").get<double>();
}

}  // namespace cascade
