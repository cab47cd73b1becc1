#include "cascade/genloop.hpp"

#include <cmath>

#include "cascade/error.hpp"

namespace cascade::genloop {

void LoopConfig::validate() const {
  if (max_retries < 1) throw Error(ErrorCode::ConfigError, "max_retries must be >= 1");
  if (temp_start < 0.0 || temp_step < 0.0) throw Error(ErrorCode::ConfigError, "temperatures must be non-negative");
  if (temp_cap > 1.0) throw Error(ErrorCode::ConfigError, "temp_cap must be <= 1");
  double last = temp_start + temp_step * (max_retries - 1);
  if (last > temp_cap + 1e-9) {
    throw Error(ErrorCode::ConfigError, "temperature schedule exceeds temp_cap within max_retries");
  }
}

double temperature_at(int attempt, const LoopConfig& cfg) {
  if (attempt < 1 || attempt > cfg.max_retries) {
    throw Error(ErrorCode::IndexOutOfRange,
                "attempt " + std::to_string(attempt) + " outside [1, " + std::to_string(cfg.max_retries) + "]");
  }
  double t = std::min(cfg.temp_start + cfg.temp_step * (attempt - 1), cfg.temp_cap);
  return std::round(t * 1e6) / 1e6;
}

Money AttemptTrace::cost() const {
  Money total;
  for (const auto& a : attempts) total += a.exchange.cost;
  return total;
}

PromptBuilder fixed_prompt(std::string prompt) {
  return [p = std::move(prompt)](int) { return p; };
}

AttemptTrace generate_until_valid(const gateway::Gateway& gateway, const ModelSpec& model, const PromptBuilder& prompt,
                                  const std::map<std::string, std::string>& files, const LoopConfig& cfg,
                                  std::optional<std::uint64_t> seed) {
  AttemptTrace trace;
  for (int i = 1; i <= cfg.max_retries; ++i) {
    gateway::ChatRequest req;
    req.model_id = model.model_id;
    req.prompt = prompt(i);
    req.temperature = temperature_at(i, cfg);
    req.seed = seed;
    Attempt attempt;
    attempt.index = i;
    try {
      attempt.exchange = gateway.complete(model, req);
    } catch (const Error& e) {
      trace.error = e.what();
      break;
    }
    trace.attempts_used = i;
    try {
      auto script = patchkit::parse_edits(attempt.exchange.output_text);
      auto applied = patchkit::apply_edits(script, files);
      attempt.ambiguities = applied.ambiguities;
      if (applied.diff.empty()) {
        attempt.outcome = kEmptyPatch;
      } else {
        attempt.outcome = kValid;
        trace.script = std::move(script);
        trace.diff = std::move(applied.diff);
      }
    } catch (const Error& e) {
      attempt.outcome = std::string(to_string(e.code()));
    }
    trace.attempts.push_back(std::move(attempt));
    if (trace.diff) break;
  }
  return trace;
}

ExchangeSummary summarize(const gateway::ChatExchange& exchange, const ModelSpec& model, CallPurpose purpose,
                          int attempt, std::string outcome) {
  ExchangeSummary s;
  s.model_id = model.model_id;
  s.role = model.role;
  s.purpose = purpose;
  s.attempt = attempt;
  s.temperature = exchange.request.temperature;
  s.seed = exchange.request.seed;
  s.input_tokens = exchange.usage.input_tokens;
  s.output_tokens = exchange.usage.output_tokens;
  s.usage_source = exchange.usage.source;
  s.cost = exchange.cost;
  s.outcome = std::move(outcome);
  return s;
}

}  // namespace cascade::genloop
