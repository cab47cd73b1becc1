#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/core.hpp"

namespace cascade::gateway {

struct ChatRequest {
  std::string model_id;
  std::string prompt;  // sent as a single user message
  double temperature = 0.0;
  int max_output_tokens = 4096;
  std::optional<std::uint64_t> seed;
  nlohmann::json options = nlohmann::json::object();
};

struct Usage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  UsageSource source = UsageSource::Estimated;
};

struct ChatExchange {
  ChatRequest request;
  std::string output_text;
  Usage usage;
  Money cost;
  std::chrono::milliseconds latency{0};
  std::string backend;
};

// What a backend hands back. Missing token counts are estimated by the gateway.
struct BackendReply {
  std::string text;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  UsageSource source = UsageSource::Provider;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Throws BackendUnavailable, ContextTooLong or ProviderError.
  virtual BackendReply complete(const ChatRequest& request) = 0;
};

// cost = in*rate_in/1e6 + out*rate_out/1e6, rounded half-up to the micro-dollar.
Money compute_cost(std::int64_t input_tokens, std::int64_t output_tokens, const Pricing& pricing);

// ceil(bytes / 4).
std::int64_t estimate_tokens(std::string_view text);

// Deterministic backend answering from a list of reply rules. A request is
// answered by the first rule whose every stated criterion matches; matching is
// a pure function of the request so concurrent runs stay reproducible.
class ScriptedBackend : public Backend {
 public:
  struct Match {
    std::optional<std::string> model_id;
    std::optional<double> temperature;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> prompt_contains;  // all must occur
    std::vector<std::string> prompt_excludes;  // none may occur
  };
  enum class Failure { None, Unavailable, ContextTooLong };
  struct Rule {
    Match match;
    std::string output;
    bool echo = false;  // reply with the prompt itself
    std::optional<std::int64_t> input_tokens;
    std::optional<std::int64_t> output_tokens;
    Failure failure = Failure::None;
  };

  explicit ScriptedBackend(std::vector<Rule> rules, std::chrono::milliseconds latency = {});
  // {"latency_ms": n, "replies": [{"match": {...} | "any", "output": ..., "echo": bool,
  //   "usage": {"input_tokens": n, "output_tokens": n}, "error": "unavailable"|"context_too_long"}]}
  static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& script);

  BackendReply complete(const ChatRequest& request) override;

 private:
  std::vector<Rule> rules_;
  std::chrono::milliseconds latency_;
};

struct RetryPolicy {
  int max_tries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

// OpenAI-compatible chat-completions client.
class HttpBackend : public Backend {
 public:
  struct Config {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    RetryPolicy retry;
    std::chrono::seconds timeout{600};
  };

  explicit HttpBackend(Config config);
  // base_url falls back to CASCADE_BASE_URL, api_key to CASCADE_API_KEY.
  static std::unique_ptr<HttpBackend> from_env(std::optional<std::string> base_url, RetryPolicy retry = {});

  BackendReply complete(const ChatRequest& request) override;

  // Request body as sent on the wire.
  static nlohmann::json request_body(const ChatRequest& request);
  // Extracts content and usage from a provider reply body.
  static BackendReply parse_reply(const nlohmann::json& body);

 private:
  Config config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path prefix + /chat/completions
};

// Routes requests to named backends with a per-backend concurrency cap and
// turns replies into costed exchanges. Safe to share across threads.
class Gateway {
 public:
  void register_backend(const std::string& name, std::shared_ptr<Backend> backend, int max_parallel = 8);
  bool has_backend(const std::string& name) const;

  // Prompts are forwarded byte for byte.
  ChatExchange complete(const ModelSpec& model, const ChatRequest& request) const;

 private:
  struct Slot {
    std::shared_ptr<Backend> backend;
    std::unique_ptr<std::counting_semaphore<1024>> permits;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Slot> backends_;
};

}  // namespace cascade::gateway
