#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "cascade/error.hpp"
#include "cascade/gateway.hpp"

namespace cascade::gateway {

using nlohmann::json;

namespace {

bool mentions_context_overflow(const std::string& body) {
  for (const char* needle : {"context_length_exceeded", "maximum context length", "context window", "too many tokens"}) {
    if (body.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

HttpBackend::HttpBackend(Config config) : config_(std::move(config)) {
  std::string url = config_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "base_url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

std::unique_ptr<HttpBackend> HttpBackend::from_env(std::optional<std::string> base_url, RetryPolicy retry) {
  Config cfg;
  if (base_url && !base_url->empty()) {
    cfg.base_url = *base_url;
  } else if (const char* env = std::getenv("CASCADE_BASE_URL")) {
    cfg.base_url = env;
  } else {
    throw Error(ErrorCode::ConfigError, "no base_url configured and CASCADE_BASE_URL unset");
  }
  if (const char* key = std::getenv("CASCADE_API_KEY")) cfg.api_key = key;
  cfg.retry = retry;
  return std::make_unique<HttpBackend>(std::move(cfg));
}

json HttpBackend::request_body(const ChatRequest& request) {
  json body = json::object();
  if (request.options.is_object()) {
    for (const auto& [key, value] : request.options.items()) body[key] = value;
  }
  body["model"] = request.model_id;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

BackendReply HttpBackend::parse_reply(const json& body) {
  BackendReply reply;
  reply.source = UsageSource::Provider;
  const json& content = body.at("choices").at(0).at("message").at("content");
  reply.text = content.is_string() ? content.get<std::string>() : std::string{};
  if (auto u = body.find("usage"); u != body.end() && u->is_object()) {
    if (u->contains("prompt_tokens")) reply.input_tokens = u->at("prompt_tokens").get<std::int64_t>();
    if (u->contains("completion_tokens")) reply.output_tokens = u->at("completion_tokens").get<std::int64_t>();
  }
  return reply;
}

BackendReply HttpBackend::complete(const ChatRequest& request) {
  const std::string payload = request_body(request).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_failure = "no attempt made";
  auto backoff = config_.retry.initial_backoff;
  for (int attempt = 1; attempt <= config_.retry.max_tries; ++attempt) {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        return parse_reply(json::parse(res->body));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderError, std::string("unreadable reply: ") + e.what());
      }
    } else if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
    } else if (mentions_context_overflow(res->body)) {
      throw Error(ErrorCode::ContextTooLong, "HTTP " + std::to_string(res->status) + ": " + res->body);
    } else {
      throw Error(ErrorCode::ProviderError, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    if (attempt < config_.retry.max_tries) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
    }
  }
  throw Error(ErrorCode::BackendUnavailable,
              std::to_string(config_.retry.max_tries) + " tries failed, last: " + last_failure);
}

}  // namespace cascade::gateway
