#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade/core.hpp"
#include "cascade/gateway.hpp"
#include "cascade/patchkit.hpp"

namespace cascade::genloop {

struct LoopConfig {
  int max_retries = 10;
  double temp_start = 0.0;
  double temp_step = 0.1;
  double temp_cap = 1.0;

  // Throws ConfigError unless max_retries >= 1 and the whole schedule stays
  // within [0, temp_cap] with temp_cap <= 1.
  void validate() const;

  friend bool operator==(const LoopConfig&, const LoopConfig&) = default;
};

// min(temp_start + temp_step * (attempt - 1), temp_cap), rounded to 1e-6 so
// that schedules compare exactly. Throws IndexOutOfRange outside [1, max_retries].
double temperature_at(int attempt, const LoopConfig& cfg);

// Outcome labels stored on each attempt.
inline constexpr const char* kValid = "valid";
inline constexpr const char* kEmptyPatch = "EmptyPatch";  // edits applied but changed nothing

struct Attempt {
  gateway::ChatExchange exchange;
  int index = 1;
  std::string outcome;  // kValid or the error code name
  std::vector<patchkit::Ambiguity> ambiguities;

  bool ok() const { return outcome == kValid; }
};

struct AttemptTrace {
  std::vector<Attempt> attempts;
  std::optional<patchkit::EditScript> script;
  std::optional<std::string> diff;
  int attempts_used = 0;
  // Set when a backend failure ended the loop early.
  std::optional<std::string> error;

  bool valid() const { return diff.has_value(); }
  Money cost() const;
};

using PromptBuilder = std::function<std::string(int attempt)>;

// Builder that ignores the attempt index.
PromptBuilder fixed_prompt(std::string prompt);

// Samples, parses and applies until an attempt yields a non-empty diff or the
// retry budget runs out. Backend failures stop the loop and are reported in
// `error`; they are never thrown.
AttemptTrace generate_until_valid(const gateway::Gateway& gateway, const ModelSpec& model, const PromptBuilder& prompt,
                                  const std::map<std::string, std::string>& files, const LoopConfig& cfg,
                                  std::optional<std::uint64_t> seed = std::nullopt);

// Persistable view of one exchange.
ExchangeSummary summarize(const gateway::ChatExchange& exchange, const ModelSpec& model, CallPurpose purpose,
                          int attempt, std::string outcome);

}  // namespace cascade::genloop
