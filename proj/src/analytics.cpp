#include "cascade/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "cascade/error.hpp"

namespace cascade::analytics {

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string out = buf;
  if (out.find_first_not_of("-0.") == std::string::npos && out[0] == '-') out.erase(0, 1);
  return out;
}

constexpr const char* kSummaryHeader =
    "method_id,resolution_rate,avg_strong_iters,avg_weak_iters,valid_patch_rate,total_cost,efficiency";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::DecodeError, "line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
  }
}

bool better(const FrontierPoint& a, const FrontierPoint& b) {
  if (a.performance != b.performance) return a.performance > b.performance;
  return std::tie(a.cost, a.method_id, a.pair_id) < std::tie(b.cost, b.method_id, b.pair_id);
}

}  // namespace

std::vector<MethodSummary> aggregate(const std::vector<RunRecord>& records, const std::string& pair_id) {
  std::map<std::string, std::vector<const RunRecord*>> by_method;
  for (const auto& r : records) {
    if (r.pair_id == pair_id) by_method[r.method_id].push_back(&r);
  }
  if (by_method.empty()) throw Error(ErrorCode::EmptyRecordSet, "no records for pair '" + pair_id + "'");

  std::vector<MethodSummary> out;
  for (const auto& [method, rows] : by_method) {
    std::size_t resolved = 0, valid = 0, unknown = 0;
    std::int64_t strong = 0, weak = 0;
    Money cost;
    for (const auto* r : rows) {
      if (!r->resolved.has_value()) ++unknown;
      if (r->resolved.value_or(false)) ++resolved;
      if (r->valid) ++valid;
      strong += r->strong_calls;
      weak += r->weak_calls;
      cost += r->total_cost;
    }
    if (unknown > 0) {
      spdlog::warn("{}/{}: {} of {} records have no resolution label; counted as unresolved", pair_id, method,
                   unknown, rows.size());
    }
    MethodSummary s;
    s.method_id = method;
    s.pair_id = pair_id;
    s.instances = rows.size();
    double n = static_cast<double>(rows.size());
    s.resolution_rate = static_cast<double>(resolved) / n;
    s.valid_patch_rate = static_cast<double>(valid) / n;
    s.avg_strong_iters = static_cast<double>(strong) / n;
    s.avg_weak_iters = static_cast<double>(weak) / n;
    s.total_cost = cost;
    s.efficiency = efficiency_of(s.resolution_rate, cost);
    out.push_back(std::move(s));
  }
  return out;
}

FrontierPoint to_point(const MethodSummary& summary) {
  return {summary.total_cost, summary.resolution_rate, summary.method_id, summary.pair_id};
}

std::vector<FrontierPoint> to_points(const std::vector<MethodSummary>& summaries) {
  std::vector<FrontierPoint> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) out.push_back(to_point(s));
  return out;
}

std::vector<FrontierPoint> frontier(std::vector<FrontierPoint> points) {
  std::sort(points.begin(), points.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return better(a, b);
  });
  std::vector<FrontierPoint> out;
  for (auto& p : points) {
    if (out.empty() || p.performance > out.back().performance) out.push_back(std::move(p));
  }
  return out;
}

std::optional<FrontierPoint> recommend(const std::vector<FrontierPoint>& points, Money budget,
                                       double min_performance) {
  std::optional<FrontierPoint> best;
  for (const auto& p : points) {
    if (p.cost > budget || p.performance < min_performance) continue;
    if (!best || better(p, *best)) best = p;
  }
  return best;
}

std::optional<double> staircase_at(const std::vector<FrontierPoint>& staircase, Money cost) {
  std::optional<double> value;
  for (const auto& p : staircase) {
    if (p.cost <= cost) value = std::max(value.value_or(p.performance), p.performance);
  }
  return value;
}

std::vector<Money> regime_shift(const std::vector<FrontierPoint>& a, const std::vector<FrontierPoint>& b) {
  std::set<std::int64_t> knots;
  for (const auto& p : a) knots.insert(p.cost.micros());
  for (const auto& p : b) knots.insert(p.cost.micros());
  // Midpoints are on the micro-dollar grid; a knot spacing of 1 micro has no interior.
  std::vector<std::int64_t> probes(knots.begin(), knots.end());
  for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
    std::int64_t lo = probes[i], hi = probes[i + 1];
    if (hi - lo > 1) knots.insert(lo + (hi - lo) / 2);
  }

  std::vector<Money> out;
  int leader = 0;  // 1: a, -1: b
  for (auto micros : knots) {
    Money c = Money::from_micros(micros);
    auto va = staircase_at(a, c);
    auto vb = staircase_at(b, c);
    if (!va || !vb || *va == *vb) continue;
    int now = *va > *vb ? 1 : -1;
    if (leader != 0 && now != leader) out.push_back(c);
    leader = now;
  }
  return out;
}

RetrievalMetrics retrieval_metrics(const std::vector<RankedRetrieval>& rankings, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidValue, "k must be positive");
  if (rankings.empty()) throw Error(ErrorCode::EmptyGold, "no rankings");
  double recall = 0.0, rr = 0.0;
  for (const auto& r : rankings) {
    if (r.gold_paths.empty()) throw Error(ErrorCode::EmptyGold, r.instance_id);
    std::set<std::string> seen;
    std::size_t hits = 0;
    double first = 0.0;
    for (std::size_t i = 0; i < r.ranked_paths.size(); ++i) {
      const auto& path = r.ranked_paths[i];
      if (!seen.insert(path).second) {
        throw Error(ErrorCode::InvalidValue, r.instance_id + ": duplicate ranked path " + path);
      }
      if (i >= k || !r.gold_paths.count(path)) continue;
      ++hits;
      if (first == 0.0) first = 1.0 / static_cast<double>(i + 1);
    }
    recall += static_cast<double>(hits) / static_cast<double>(r.gold_paths.size());
    rr += first;
  }
  double n = static_cast<double>(rankings.size());
  return {recall / n, rr / n, rankings.size()};
}

std::vector<RankedRetrieval> rankings_from(const std::vector<Instance>& instances) {
  std::vector<RankedRetrieval> out;
  for (const auto& inst : instances) {
    if (!inst.gold_patch) continue;
    RankedRetrieval r;
    r.instance_id = inst.instance_id;
    for (const auto& f : inst.retrieved_files) r.ranked_paths.push_back(f.path);
    for (auto& p : patchkit::diff_paths(*inst.gold_patch)) r.gold_paths.insert(std::move(p));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LocalizationRow> localization_report(const std::vector<RunRecord>& records,
                                                 const std::vector<Instance>& instances) {
  std::map<std::string, patchkit::LocalizationSet> gold;
  for (const auto& inst : instances) {
    if (inst.gold_patch) gold.emplace(inst.instance_id, patchkit::extract_localization(*inst.gold_patch));
  }
  if (gold.empty()) throw Error(ErrorCode::NoGoldPatches, "no instance carries a gold patch");

  struct Acc {
    LocalizationRow row;
    patchkit::LocalizationScores sum;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  auto add = [](patchkit::PRF& to, const patchkit::PRF& v) {
    to.precision += v.precision;
    to.recall += v.recall;
    to.f1 += v.f1;
  };
  for (const auto& r : records) {
    auto& a = acc[{r.pair_id, r.method_id}];
    a.row.pair_id = r.pair_id;
    a.row.method_id = r.method_id;
    auto g = gold.find(r.instance_id);
    if (!r.valid || !r.final_patch || g == gold.end()) {
      ++a.row.excluded;
      continue;
    }
    auto s = patchkit::localization_scores(patchkit::extract_localization(*r.final_patch), g->second);
    add(a.sum.file, s.file);
    add(a.sum.module, s.module);
    add(a.sum.line, s.line);
    ++a.row.evaluated;
  }

  std::vector<LocalizationRow> out;
  for (auto& [_, a] : acc) {
    if (a.row.evaluated > 0) {
      double n = static_cast<double>(a.row.evaluated);
      auto mean = [n](const patchkit::PRF& v) { return patchkit::PRF{v.precision / n, v.recall / n, v.f1 / n}; };
      a.row.mean = {mean(a.sum.file), mean(a.sum.module), mean(a.sum.line)};
    }
    out.push_back(std::move(a.row));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<MethodSummary>& summaries) {
  out << kSummaryHeader << '\n';
  for (const auto& s : summaries) {
    out << s.method_id << ',' << fixed(s.resolution_rate, 6) << ',' << fixed(s.avg_strong_iters, 4) << ','
        << fixed(s.avg_weak_iters, 4) << ',' << fixed(s.valid_patch_rate, 6) << ',' << s.total_cost.to_string(6)
        << ',' << fixed(s.efficiency, 4) << '\n';
  }
}

std::vector<MethodSummary> read_summary_csv(std::istream& in, const std::string& pair_id) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != kSummaryHeader) {
    throw Error(ErrorCode::DecodeError, "line 1: expected header '" + std::string(kSummaryHeader) + "'");
  }
  std::vector<MethodSummary> out;
  std::set<std::string> ids;
  while (next()) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 7) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": expected 7 columns");
    }
    MethodSummary s;
    s.method_id = cells[0];
    s.pair_id = pair_id;
    if (s.method_id.empty() || !ids.insert(s.method_id).second) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": empty or repeated method_id");
    }
    s.resolution_rate = parse_number(cells[1], line_no, "resolution_rate");
    s.avg_strong_iters = parse_number(cells[2], line_no, "avg_strong_iters");
    s.avg_weak_iters = parse_number(cells[3], line_no, "avg_weak_iters");
    s.valid_patch_rate = parse_number(cells[4], line_no, "valid_patch_rate");
    try {
      s.total_cost = Money::parse(cells[5]);
    } catch (const Error&) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": bad total_cost '" + cells[5] + "'");
    }
    s.efficiency = parse_number(cells[6], line_no, "efficiency");
    if (s.resolution_rate < 0 || s.resolution_rate > 1 || s.valid_patch_rate < 0 || s.valid_patch_rate > 1) {
      throw Error(ErrorCode::DecodeError, "line " + std::to_string(line_no) + ": rate outside [0, 1]");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<MethodSummary> read_summary_csv_file(const std::string& path, const std::string& pair_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return read_summary_csv(in, pair_id);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail());
  }
}

void write_frontier_csv(std::ostream& out, const std::vector<FrontierPoint>& points) {
  out << "cost,performance,method_id\n";
  for (const auto& p : points) {
    out << p.cost.to_string(6) << ',' << fixed(p.performance, 6) << ','
        << (p.pair_id.empty() ? p.method_id : p.pair_id + "/" + p.method_id) << '\n';
  }
}

void write_crossings_csv(std::ostream& out, const std::vector<Money>& crossings) {
  out << "cost\n";
  for (auto c : crossings) out << c.to_string(6) << '\n';
}

std::string format_iterations(double strong, double weak) { return fixed(strong, 2) + "s + " + fixed(weak, 2) + "w"; }

}  // namespace cascade::analytics
