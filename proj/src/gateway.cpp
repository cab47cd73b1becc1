#include "cascade/gateway.hpp"

#include <cmath>
#include <thread>

#include "cascade/error.hpp"

namespace cascade::gateway {

using nlohmann::json;

Money compute_cost(std::int64_t input_tokens, std::int64_t output_tokens, const Pricing& pricing) {
  // token * micro-dollars-per-Mtok = 1e-6 micro-dollars; keep it exact in 128 bits.
  __extension__ typedef __int128 wide;
  wide scaled = static_cast<wide>(input_tokens) * pricing.input_per_mtok.micros() +
                    static_cast<wide>(output_tokens) * pricing.output_per_mtok.micros();
  wide micros = (scaled + 500'000) / 1'000'000;
  return Money::from_micros(static_cast<std::int64_t>(micros));
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules, std::chrono::milliseconds latency)
    : rules_(std::move(rules)), latency_(latency) {}

namespace {

std::vector<std::string> string_or_list(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  return j.get<std::vector<std::string>>();
}

}  // namespace

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& script) {
  std::vector<Rule> rules;
  const json& replies = script.is_array() ? script : script.at("replies");
  for (const auto& entry : replies) {
    Rule rule;
    if (auto m = entry.find("match"); m != entry.end() && m->is_object()) {
      if (m->contains("model_id")) rule.match.model_id = m->at("model_id").get<std::string>();
      if (m->contains("temperature")) rule.match.temperature = m->at("temperature").get<double>();
      if (m->contains("seed")) rule.match.seed = m->at("seed").get<std::uint64_t>();
      if (m->contains("prompt_contains")) rule.match.prompt_contains = string_or_list(m->at("prompt_contains"));
      if (m->contains("prompt_excludes")) rule.match.prompt_excludes = string_or_list(m->at("prompt_excludes"));
    }
    rule.output = entry.value("output", std::string{});
    rule.echo = entry.value("echo", false);
    if (auto u = entry.find("usage"); u != entry.end()) {
      if (u->contains("input_tokens")) rule.input_tokens = u->at("input_tokens").get<std::int64_t>();
      if (u->contains("output_tokens")) rule.output_tokens = u->at("output_tokens").get<std::int64_t>();
    }
    std::string failure = entry.value("error", std::string{});
    if (failure == "unavailable") {
      rule.failure = Failure::Unavailable;
    } else if (failure == "context_too_long") {
      rule.failure = Failure::ContextTooLong;
    } else if (!failure.empty()) {
      throw Error(ErrorCode::ConfigError, "unknown scripted error '" + failure + "'");
    }
    rules.push_back(std::move(rule));
  }
  auto latency = std::chrono::milliseconds(script.is_object() ? script.value("latency_ms", 0) : 0);
  return std::make_unique<ScriptedBackend>(std::move(rules), latency);
}

BackendReply ScriptedBackend::complete(const ChatRequest& request) {
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  for (const auto& rule : rules_) {
    const Match& m = rule.match;
    if (m.model_id && *m.model_id != request.model_id) continue;
    if (m.temperature && std::abs(*m.temperature - request.temperature) > 1e-9) continue;
    if (m.seed && (!request.seed || *m.seed != *request.seed)) continue;
    bool ok = true;
    for (const auto& needle : m.prompt_contains) ok = ok && request.prompt.find(needle) != std::string::npos;
    for (const auto& needle : m.prompt_excludes) ok = ok && request.prompt.find(needle) == std::string::npos;
    if (!ok) continue;
    switch (rule.failure) {
      case Failure::Unavailable: throw Error(ErrorCode::BackendUnavailable, "scripted outage");
      case Failure::ContextTooLong: throw Error(ErrorCode::ContextTooLong, "scripted context overflow");
      case Failure::None: break;
    }
    BackendReply reply;
    reply.text = rule.echo ? request.prompt : rule.output;
    reply.input_tokens = rule.input_tokens;
    reply.output_tokens = rule.output_tokens;
    reply.source = UsageSource::Scripted;
    return reply;
  }
  throw Error(ErrorCode::BackendUnavailable, "no scripted reply matches request for " + request.model_id);
}

void Gateway::register_backend(const std::string& name, std::shared_ptr<Backend> backend, int max_parallel) {
  if (max_parallel < 1) throw Error(ErrorCode::ConfigError, "max_parallel must be >= 1");
  std::lock_guard lock(mutex_);
  backends_[name] = Slot{std::move(backend), std::make_unique<std::counting_semaphore<1024>>(std::min(max_parallel, 1024))};
}

bool Gateway::has_backend(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return backends_.count(name) > 0;
}

ChatExchange Gateway::complete(const ModelSpec& model, const ChatRequest& request) const {
  if (!(request.temperature >= 0.0 && request.temperature <= 1.0)) {
    throw Error(ErrorCode::InvalidValue, "temperature must lie in [0, 1]");
  }
  Backend* backend = nullptr;
  std::counting_semaphore<1024>* permits = nullptr;
  {
    std::lock_guard lock(mutex_);
    auto it = backends_.find(model.backend);
    if (it == backends_.end()) throw Error(ErrorCode::BackendUnavailable, "no backend registered as '" + model.backend + "'");
    backend = it->second.backend.get();
    permits = it->second.permits.get();
  }
  ChatRequest sent = request;
  if (sent.options.is_null() || sent.options.empty()) sent.options = model.options;

  auto start = std::chrono::steady_clock::now();
  permits->acquire();
  BackendReply reply;
  try {
    reply = backend->complete(sent);
  } catch (...) {
    permits->release();
    throw;
  }
  permits->release();

  ChatExchange ex;
  ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  ex.backend = model.backend;
  ex.output_text = std::move(reply.text);
  ex.usage.source = reply.source;
  if (!reply.input_tokens || !reply.output_tokens) ex.usage.source = UsageSource::Estimated;
  ex.usage.input_tokens = reply.input_tokens ? *reply.input_tokens : estimate_tokens(sent.prompt);
  ex.usage.output_tokens = reply.output_tokens ? *reply.output_tokens : estimate_tokens(ex.output_text);
  ex.cost = compute_cost(ex.usage.input_tokens, ex.usage.output_tokens, model.pricing);
  ex.request = std::move(sent);
  return ex;
}

}  // namespace cascade::gateway
