#include "cascade/harness.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "cascade/analytics.hpp"
#include "cascade/augment.hpp"
#include "cascade/error.hpp"
#include "cascade/patchkit.hpp"
#include "cascade/rng.hpp"

namespace cascade::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
}

[[noreturn]] void io_fail(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::IoError, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data, const fs::path& path) {
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write", path);
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

bool parse_bool(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorCode::DecodeError, "bad boolean '" + text + "'");
}

ModelSpec parse_model(const json& j, Role role, const char* which) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, std::string(which) + " model must be an object");
  ModelSpec m;
  m.role = role;
  m.model_id = j.value("model_id", "");
  m.backend = j.value("backend", "");
  if (m.model_id.empty() || m.backend.empty()) {
    throw Error(ErrorCode::ConfigError, std::string(which) + " model needs model_id and backend");
  }
  if (j.contains("pricing")) m.pricing = j["pricing"].get<Pricing>();
  m.options = j.value("options", json::object());
  return m;
}

bool needs_unit_costs(const strategies::MethodConfig& m) {
  using K = strategies::MethodKind;
  bool sc = m.kind == K::SCMajority || m.kind == K::SCClustering || m.kind == K::SCUniversal || m.kind == K::BestOfN;
  return sc && !m.sc_n_override;
}

bool needs_successful_pool(const strategies::MethodConfig& m) {
  return m.kind == strategies::MethodKind::FewShot && m.few_shot_pool == strategies::FewShotPool::Successful;
}

}  // namespace

std::vector<Instance> parse_dataset(std::istream& in, std::size_t max_files) {
  std::vector<Instance> out;
  std::vector<std::string> problems;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      auto inst = validate_instance(json::parse(line), max_files);
      if (!ids.insert(inst.instance_id).second) {
        throw Error(ErrorCode::InvalidValue, "duplicate instance_id " + inst.instance_id);
      }
      out.push_back(std::move(inst));
    } catch (const json::exception& e) {
      problems.push_back("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    } catch (const Error& e) {
      problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string detail;
    for (const auto& p : problems) detail += (detail.empty() ? "" : "\n") + p;
    throw Error(ErrorCode::DecodeError, detail);
  }
  if (out.empty()) throw Error(ErrorCode::EmptyDataset, "no instances");
  return out;
}

std::vector<Instance> load_dataset(const fs::path& path, std::size_t max_files) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return parse_dataset(in, max_files);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

DatasetStats dataset_stats(const std::vector<Instance>& instances) {
  DatasetStats s;
  std::set<std::string> repos;
  for (const auto& inst : instances) {
    ++s.instances;
    repos.insert(inst.repo);
    if (inst.gold_patch) ++s.with_gold;
    s.retrieved_files += inst.retrieved_files.size();
  }
  s.repos = repos.size();
  return s;
}

std::map<std::string, Pricing> load_pricing(const fs::path& path) {
  auto j = read_json_file(path);
  if (!j.is_object()) throw Error(ErrorCode::DecodeError, path.string() + ": expected an object");
  std::map<std::string, Pricing> out;
  for (const auto& [model, value] : j.items()) {
    try {
      out[model] = value.get<Pricing>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::DecodeError, path.string() + ": " + model + ": " + e.what());
    }
  }
  return out;
}

Labels parse_labels(std::istream& in) {
  Labels out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "method_id,instance_id,resolved") {
        throw Error(ErrorCode::DecodeError, "line 1: expected header method_id,instance_id,resolved");
      }
      continue;
    }
    if (line.empty()) continue;
    auto a = line.find(',');
    auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos || line.find(',', b + 1) != std::string::npos) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": expected 3 columns");
    }
    try {
      out[{line.substr(0, a), line.substr(a + 1, b - a - 1)}] = parse_bool(line.substr(b + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return out;
}

Labels load_labels(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return parse_labels(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::size_t apply_labels(std::vector<RunRecord>& records, const Labels& labels) {
  std::size_t n = 0;
  for (auto& r : records) {
    auto it = labels.find({r.method_id, r.instance_id});
    if (it == labels.end()) continue;
    r.resolved = it->second;
    ++n;
  }
  return n;
}

void ExperimentConfig::validate() const {
  if (parallelism < 1) throw Error(ErrorCode::ConfigError, "parallelism must be at least 1");
  if (replicates < 1) throw Error(ErrorCode::ConfigError, "replicates must be at least 1");
  if (methods.empty()) throw Error(ErrorCode::ConfigError, "no methods");
  std::set<std::string> ids;
  for (const auto& m : methods) {
    m.validate();
    if (!ids.insert(m.id()).second) throw Error(ErrorCode::ConfigError, "duplicate method " + m.id());
  }
  for (const auto* m : {&strong, &weak}) {
    auto it = backends.find(m->backend);
    if (it == backends.end()) {
      throw Error(ErrorCode::ConfigError, m->model_id + ": unknown backend '" + m->backend + "'");
    }
  }
  for (const auto& [name, b] : backends) {
    if (b.type != "scripted" && b.type != "http") {
      throw Error(ErrorCode::ConfigError, "backend " + name + ": type must be scripted or http");
    }
    if (b.type == "scripted" && !b.script) throw Error(ErrorCode::ConfigError, "backend " + name + ": no script");
    if (b.max_parallel < 1) throw Error(ErrorCode::ConfigError, "backend " + name + ": max_parallel < 1");
  }
  if (dataset.empty() || output_dir.empty()) throw Error(ErrorCode::ConfigError, "dataset and output_dir required");
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  try {
    ExperimentConfig cfg;
    cfg.strong = parse_model(j.at("strong"), Role::Strong, "strong");
    cfg.weak = parse_model(j.at("weak"), Role::Weak, "weak");
    cfg.pair_id = j.value("pair_id", cfg.strong.model_id + "+" + cfg.weak.model_id);
    for (const auto& [name, b] : j.at("backends").items()) {
      BackendConfig bc;
      bc.type = b.at("type").get<std::string>();
      if (b.contains("script")) bc.script = resolve(base_dir, b["script"].get<std::string>());
      if (b.contains("base_url")) bc.base_url = b["base_url"].get<std::string>();
      bc.max_parallel = b.value("max_parallel", bc.max_parallel);
      bc.max_tries = b.value("max_tries", bc.max_tries);
      cfg.backends[name] = bc;
    }
    const auto& methods = j.at("methods");
    if (methods.is_string() && methods.get<std::string>() == "all") {
      cfg.methods = strategies::collaboration_methods();
    } else {
      for (const auto& m : methods) {
        if (m.is_string() && m.get<std::string>() == "all") {
          for (auto& c : strategies::collaboration_methods()) cfg.methods.push_back(c);
        } else {
          cfg.methods.push_back(m.get<strategies::MethodConfig>());
        }
      }
    }
    cfg.dataset = resolve(base_dir, j.at("dataset").get<std::string>());
    cfg.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("pricing")) cfg.pricing = resolve(base_dir, j["pricing"].get<std::string>());
    if (j.contains("labels")) cfg.labels = resolve(base_dir, j["labels"].get<std::string>());
    cfg.parallelism = j.value("parallelism", 1);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.replicates = j.value("replicates", 1);
    cfg.max_files = j.value("max_files", kDefaultMaxFiles);

    if (cfg.pricing) {
      auto table = load_pricing(*cfg.pricing);
      for (auto* m : {&cfg.strong, &cfg.weak}) {
        if (j.at(m->role == Role::Strong ? "strong" : "weak").contains("pricing")) continue;
        auto it = table.find(m->model_id);
        if (it == table.end()) throw Error(ErrorCode::ConfigError, "no pricing for " + m->model_id);
        m->pricing = it->second;
      }
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

ExperimentConfig load_config(const fs::path& path) {
  auto j = read_json_file(path);
  try {
    return parse_config(j, fs::absolute(path).parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::shared_ptr<gateway::Gateway> make_gateway(const ExperimentConfig& cfg) {
  auto gw = std::make_shared<gateway::Gateway>();
  for (const auto& [name, b] : cfg.backends) {
    std::shared_ptr<gateway::Backend> backend;
    if (b.type == "scripted") {
      backend = gateway::ScriptedBackend::from_json(read_json_file(*b.script));
    } else {
      gateway::RetryPolicy retry;
      retry.max_tries = b.max_tries;
      backend = gateway::HttpBackend::from_env(b.base_url, retry);
    }
    gw->register_backend(name, std::move(backend), b.max_parallel);
  }
  return gw;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& method_id, const std::string& instance_id,
                          int replicate) {
  std::string text = std::to_string(seed) + "|" + method_id + "|" + instance_id;
  if (replicate > 0) text += "|" + std::to_string(replicate);
  return fnv1a64(text);
}

// ---- RunStore ----

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  load_file(snapshot_path(), false);
  load_file(log_path(), true);
  log_fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd_ < 0) io_fail("open", log_path());
}

RunStore::~RunStore() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void RunStore::load_file(const fs::path& path, bool is_log) {
  if (!fs::exists(path)) return;
  std::string data = read_file(path);
  std::size_t pos = 0, line_no = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    bool complete = nl != std::string::npos;
    std::string line = data.substr(pos, complete ? nl - pos : std::string::npos);
    ++line_no;
    std::size_t next = complete ? nl + 1 : data.size();
    if (!line.empty()) {
      try {
        if (!complete) throw Error(ErrorCode::DecodeError, "unterminated line");
        auto r = json::parse(line).get<RunRecord>();
        records_.emplace(r.key(), std::move(r));
      } catch (const std::exception& e) {
        if (is_log && next == data.size()) {
          // torn tail from an interrupted append
          spdlog::warn("{}: dropping torn final record ({})", path.string(), e.what());
          fs::resize_file(path, pos);
          return;
        }
        throw Error(ErrorCode::DecodeError, path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = next;
  }
}

bool RunStore::contains(const RunRecord::Key& key) const {
  std::lock_guard lock(mutex_);
  return records_.count(key) > 0;
}

std::optional<RunRecord> RunStore::find(const RunRecord::Key& key) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

bool RunStore::append(const RunRecord& record) {
  std::string line = json(record).dump() + "\n";
  std::lock_guard lock(mutex_);
  if (records_.count(record.key())) return false;
  write_all(log_fd_, line, log_path());
  if (::fdatasync(log_fd_) != 0) io_fail("sync", log_path());
  records_.emplace(record.key(), record);
  return true;
}

std::vector<RunRecord> RunStore::records() const {
  std::lock_guard lock(mutex_);
  std::vector<RunRecord> out;
  out.reserve(records_.size());
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

std::size_t RunStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

void RunStore::compact() {
  std::lock_guard lock(mutex_);
  std::string data;
  for (const auto& [_, r] : records_) data += json(r).dump() + "\n";
  fs::path tmp = dir_ / "store.jsonl.tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("open", tmp);
  write_all(fd, data, tmp);
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_fail("sync", tmp);
  }
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, snapshot_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "rename " + tmp.string() + ": " + ec.message());
  // Everything in the log is now in the snapshot; duplicates are harmless if
  // we die before the truncate.
  if (::ftruncate(log_fd_, 0) != 0) io_fail("truncate", log_path());
}

std::vector<RunRecord> read_records(const fs::path& path) {
  if (fs::is_directory(path)) return RunStore(path).records();
  std::string data = read_file(path);
  std::vector<RunRecord> out;
  auto first = data.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && data[first] == '[') return json::parse(data).get<std::vector<RunRecord>>();
    std::istringstream in(data);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out.push_back(json::parse(line).get<RunRecord>());
      } catch (const std::exception& e) {
        throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
  return out;
}

// ---- experiment ----

namespace {

struct Task {
  const strategies::MethodConfig* method;
  const Instance* instance;
  int replicate;
  RunStore* store;
};

class Sweep {
 public:
  Sweep(const ExperimentConfig& cfg, const gateway::Gateway& gw, const std::vector<Instance>& instances,
        const Labels& labels, const RunOptions& options)
      : cfg_(cfg), gw_(gw), instances_(instances), labels_(labels), options_(options),
        cache_(cfg.output_dir / "artifacts") {
    for (const auto& inst : instances_) owners_.emplace(inst.repo, inst.instance_id);
    ctx_.gateway = &gw_;
    ctx_.pair_id = cfg_.pair_id;
    ctx_.cache = &cache_;
    ctx_.artifact_owner = &owners_;
    ctx_.embedder = &embedder_;
    ctx_.judge = &judge_;
    ctx_.few_shot_pool = [this](const Instance& inst, strategies::FewShotPool pool) {
      return few_shot_pool(inst, pool);
    };
  }

  strategies::RunContext& context() { return ctx_; }
  std::size_t executed() const { return executed_; }
  std::size_t skipped() const { return skipped_; }
  bool stopped() const { return stop_.load(); }

  void set_successful(std::map<std::string, RunRecord> by_instance) { successful_ = std::move(by_instance); }

  // Runs every task missing from its store.
  void run(const std::vector<Task>& tasks) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&] {
      while (!stop_.load()) {
        std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          execute(tasks[i]);
        } catch (...) {
          std::lock_guard lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
          stop_ = true;
        }
      }
    };
    int n = std::min<int>(cfg_.parallelism, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (fatal) std::rethrow_exception(fatal);
  }

 private:
  void execute(const Task& t) {
    std::string method_id = t.method->id();
    std::uint64_t seed = derive_seed(cfg_.seed, method_id, t.instance->instance_id, t.replicate);
    RunRecord::Key key{cfg_.pair_id, method_id, t.instance->instance_id, seed};
    if (t.store->contains(key)) {
      ++skipped_;
      return;
    }
    if (options_.max_new_runs) {
      std::size_t claimed = claimed_.fetch_add(1);
      if (claimed >= *options_.max_new_runs) {
        stop_ = true;
        return;
      }
    }
    auto cfg = *t.method;
    cfg.seed = seed;
    RunRecord r;
    try {
      r = strategies::run_method(cfg, *t.instance, cfg_.strong, cfg_.weak, ctx_);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidValue) throw;
      r = failed_record(key, e.what());
    } catch (const std::exception& e) {
      r = failed_record(key, e.what());
    }
    if (auto it = labels_.find({method_id, t.instance->instance_id}); it != labels_.end()) {
      r.resolved = it->second;
    } else if (auto l = t.instance->resolved_label.find(method_id); l != t.instance->resolved_label.end()) {
      r.resolved = l->second;
    }
    if (t.store->append(r)) {
      ++executed_;
      if (options_.on_record) options_.on_record(r);
    }
  }

  RunRecord failed_record(const RunRecord::Key& key, const std::string& message) {
    RunRecord r;
    std::tie(r.pair_id, r.method_id, r.instance_id, r.seed) = key;
    r.error = message;
    r.resolved = false;
    spdlog::warn("{} on {} failed: {}", r.method_id, r.instance_id, message);
    return r;
  }

  std::vector<augment::FewShotExample> few_shot_pool(const Instance& inst, strategies::FewShotPool pool) const {
    std::vector<augment::FewShotExample> out;
    for (const auto& other : instances_) {
      if (other.repo != inst.repo || other.instance_id == inst.instance_id) continue;
      std::optional<std::string> patch;
      if (pool == strategies::FewShotPool::Gold) {
        patch = other.gold_patch;
      } else if (auto it = successful_.find(other.instance_id); it != successful_.end()) {
        patch = it->second.final_patch;
      }
      if (!patch) continue;
      out.push_back({other.problem_statement, patchkit::diff_paths(*patch), *patch, other.instance_id});
    }
    return out;
  }

  const ExperimentConfig& cfg_;
  const gateway::Gateway& gw_;
  const std::vector<Instance>& instances_;
  const Labels& labels_;
  const RunOptions& options_;
  augment::ArtifactCache cache_;
  std::map<std::string, std::string> owners_;
  augment::HashedBagOfWords embedder_;
  strategies::GoldPatchJudge judge_;
  strategies::RunContext ctx_;
  std::map<std::string, RunRecord> successful_;
  std::atomic<std::size_t> executed_{0};
  std::atomic<std::size_t> skipped_{0};
  std::atomic<std::size_t> claimed_{0};
  std::atomic<bool> stop_{false};
};

Money mean_cost(const std::vector<RunRecord>& records) {
  if (records.empty()) return Money{};
  __extension__ typedef __int128 wide;
  wide sum = 0;
  for (const auto& r : records) sum += r.total_cost.micros();
  wide n = static_cast<wide>(records.size());
  return Money::from_micros(static_cast<std::int64_t>((sum + n / 2) / n));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  return run_experiment(cfg, make_gateway(cfg), options);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::shared_ptr<gateway::Gateway> gateway,
                                const RunOptions& options) {
  cfg.validate();
  auto instances = load_dataset(cfg.dataset, cfg.max_files);
  Labels labels = cfg.labels ? load_labels(*cfg.labels) : Labels{};

  RunStore store(cfg.output_dir / "runs");
  std::unique_ptr<RunStore> calibration_store;
  Sweep sweep(cfg, *gateway, instances, labels, options);

  bool want_costs = std::any_of(cfg.methods.begin(), cfg.methods.end(), needs_unit_costs);
  bool want_pool = std::any_of(cfg.methods.begin(), cfg.methods.end(), needs_successful_pool);
  if (want_costs || want_pool) {
    // Calibration: base runs on the whole dataset. Listed base methods share
    // the main store; otherwise they live beside it.
    std::vector<strategies::MethodConfig> base;
    std::vector<Task> tasks;
    std::vector<RunStore*> stores;
    for (const char* id : {"base_strong", "base_weak"}) {
      auto listed = std::find_if(cfg.methods.begin(), cfg.methods.end(),
                                 [&](const strategies::MethodConfig& m) { return m.id() == id; });
      if (listed == cfg.methods.end() && !calibration_store) {
        calibration_store = std::make_unique<RunStore>(cfg.output_dir / "calibration");
      }
      base.push_back(listed == cfg.methods.end() ? strategies::method_from_id(id) : *listed);
      stores.push_back(listed == cfg.methods.end() ? calibration_store.get() : &store);
    }
    for (std::size_t b = 0; b < base.size(); ++b) {
      for (const auto& inst : instances) tasks.push_back({&base[b], &inst, 0, stores[b]});
    }
    sweep.run(tasks);
    if (!sweep.stopped()) {
      std::vector<RunRecord> per_role[2];
      std::map<std::string, RunRecord> successful;
      for (std::size_t b = 0; b < base.size(); ++b) {
        for (const auto& inst : instances) {
          auto id = base[b].id();
          auto r = stores[b]->find({cfg.pair_id, id, inst.instance_id, derive_seed(cfg.seed, id, inst.instance_id)});
          if (!r) continue;
          if (b == 0 && r->resolved.value_or(false) && r->final_patch) successful.emplace(inst.instance_id, *r);
          per_role[b].push_back(std::move(*r));
        }
      }
      sweep.context().unit_costs = std::make_pair(mean_cost(per_role[0]), mean_cost(per_role[1]));
      sweep.set_successful(std::move(successful));
      if (want_costs && sweep.context().unit_costs->second.is_zero()) {
        throw Error(ErrorCode::ConfigError, "base_weak calibration cost is zero; set sc_n explicitly");
      }
    }
  }

  if (!sweep.stopped()) {
    std::vector<Task> tasks;
    for (const auto& m : cfg.methods) {
      for (int rep = 0; rep < cfg.replicates; ++rep) {
        for (const auto& inst : instances) tasks.push_back({&m, &inst, rep, &store});
      }
    }
    sweep.run(tasks);
  }
  store.compact();
  if (calibration_store) calibration_store->compact();

  ExperimentReport report;
  report.executed = sweep.executed();
  report.skipped = sweep.skipped();
  std::set<std::string> listed;
  for (const auto& m : cfg.methods) listed.insert(m.id());
  std::vector<RunRecord> mine;
  for (auto& r : store.records()) {
    if (r.pair_id != cfg.pair_id || !listed.count(r.method_id)) continue;
    if (r.error) ++report.failed;
    mine.push_back(std::move(r));
  }
  if (sweep.stopped() || mine.empty()) return report;

  auto sums = analytics::aggregate(mine, cfg.pair_id);
  for (const auto& m : cfg.methods) {
    auto it = std::find_if(sums.begin(), sums.end(), [&](const MethodSummary& s) { return s.method_id == m.id(); });
    if (it != sums.end()) report.summaries.push_back(*it);
  }
  report.summary_csv = cfg.output_dir / "summary.csv";
  std::ofstream out(report.summary_csv, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + report.summary_csv.string());
  analytics::write_summary_csv(out, report.summaries);
  return report;
}

}  // namespace cascade::harness
