#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cascade/core.hpp"
#include "cascade/gateway.hpp"
#include "cascade/strategies.hpp"

namespace cascade::harness {

// One instance per non-blank line. Every bad line is reported (DecodeError
// detail lists "line N: ..."), and nothing is returned unless all lines pass.
std::vector<Instance> parse_dataset(std::istream& in, std::size_t max_files = kDefaultMaxFiles);
std::vector<Instance> load_dataset(const std::filesystem::path& path, std::size_t max_files = kDefaultMaxFiles);

struct DatasetStats {
  std::size_t instances = 0;
  std::size_t repos = 0;
  std::size_t with_gold = 0;
  std::size_t retrieved_files = 0;
};
DatasetStats dataset_stats(const std::vector<Instance>& instances);

// model_id -> pricing, dollars per million tokens.
std::map<std::string, Pricing> load_pricing(const std::filesystem::path& path);

// (method_id, instance_id) -> resolved
using Labels = std::map<std::pair<std::string, std::string>, bool>;
// CSV with header method_id,instance_id,resolved; resolved is true/false/1/0.
Labels parse_labels(std::istream& in);
Labels load_labels(const std::filesystem::path& path);
// Overwrites `resolved` wherever a label exists; returns how many were set.
std::size_t apply_labels(std::vector<RunRecord>& records, const Labels& labels);

struct BackendConfig {
  std::string type;  // "scripted" | "http"
  std::optional<std::filesystem::path> script;
  std::optional<std::string> base_url;
  int max_parallel = 8;
  int max_tries = 3;
};

struct ExperimentConfig {
  std::string pair_id;  // defaults to "<strong>+<weak>"
  ModelSpec strong;
  ModelSpec weak;
  std::map<std::string, BackendConfig> backends;
  std::vector<strategies::MethodConfig> methods;
  std::filesystem::path dataset;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> pricing;
  std::optional<std::filesystem::path> labels;
  int parallelism = 1;
  std::uint64_t seed = 0;
  int replicates = 1;
  std::size_t max_files = kDefaultMaxFiles;

  // Throws ConfigError.
  void validate() const;
};

// Relative paths resolve against `base_dir`. "methods": "all" expands to the
// sixteen collaboration methods.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Builds a gateway holding every configured backend.
std::shared_ptr<gateway::Gateway> make_gateway(const ExperimentConfig& cfg);

// FNV-1a of "seed|method_id|instance_id", with "|r" appended for replicate r > 0.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& method_id, const std::string& instance_id,
                          int replicate = 0);

// Append-only record log (records.jsonl) plus a compacted, key-sorted snapshot
// (store.jsonl). Each record is written with one append of one full line, so a
// crash leaves at most a torn final line, which is dropped on open.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);
  ~RunStore();
  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  bool contains(const RunRecord::Key& key) const;
  std::optional<RunRecord> find(const RunRecord::Key& key) const;
  // False (and nothing written) when the key is already stored.
  bool append(const RunRecord& record);
  // Sorted by key.
  std::vector<RunRecord> records() const;
  std::size_t size() const;
  // Rewrites store.jsonl via rename and empties the log.
  void compact();

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path snapshot_path() const { return dir_ / "store.jsonl"; }
  std::filesystem::path log_path() const { return dir_ / "records.jsonl"; }

 private:
  void load_file(const std::filesystem::path& path, bool is_log);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<RunRecord::Key, RunRecord> records_;
  int log_fd_ = -1;
};

// Reads records from a store directory, a .jsonl file, or a JSON array file.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

struct ExperimentReport {
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already in the store
  std::size_t failed = 0;   // records carrying an error
  std::vector<MethodSummary> summaries;
  std::filesystem::path summary_csv;
};

struct RunOptions {
  // Stop after this many newly executed tasks (for interruption tests).
  std::optional<std::size_t> max_new_runs;
  // Called after every persisted record, under the store lock.
  std::function<void(const RunRecord&)> on_record;
};

// Calibration runs of base_strong/base_weak (for self-consistency sample
// counts and the successful few-shot pool) go first, then every listed
// (method, instance, replicate) missing from the store. Writes
// <output_dir>/summary.csv. Throws only on config and dataset errors.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::shared_ptr<gateway::Gateway> gateway,
                                const RunOptions& options = {});

}  // namespace cascade::harness
