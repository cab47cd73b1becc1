#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cascade/core.hpp"
#include "cascade/money.hpp"
#include "cascade/patchkit.hpp"

namespace cascade::analytics {

struct FrontierPoint {
  Money cost;
  double performance = 0.0;
  std::string method_id;
  std::string pair_id;

  friend bool operator==(const FrontierPoint&, const FrontierPoint&) = default;
};

struct RankedRetrieval {
  std::string instance_id;
  std::vector<std::string> ranked_paths;
  std::set<std::string> gold_paths;
};

// One summary per method_id among records of `pair_id`, ordered by method_id.
// Records with an unknown resolution count as unresolved (logged).
std::vector<MethodSummary> aggregate(const std::vector<RunRecord>& records, const std::string& pair_id);

FrontierPoint to_point(const MethodSummary& summary);
std::vector<FrontierPoint> to_points(const std::vector<MethodSummary>& summaries);

// Non-dominated staircase, strictly increasing in cost and performance.
std::vector<FrontierPoint> frontier(std::vector<FrontierPoint> points);

// Best feasible point: cost <= budget, performance >= min_performance.
// Ties: lower cost, then method_id, then pair_id. nullopt means infeasible.
std::optional<FrontierPoint> recommend(const std::vector<FrontierPoint>& points, Money budget,
                                       double min_performance);

// Value of a staircase as a right-continuous step function; nullopt below its
// first knot.
std::optional<double> staircase_at(const std::vector<FrontierPoint>& staircase, Money cost);

// Costs at which the leading staircase changes. Only costs where both
// staircases are defined are compared; equal values lead nobody.
std::vector<Money> regime_shift(const std::vector<FrontierPoint>& a, const std::vector<FrontierPoint>& b);

struct RetrievalMetrics {
  double recall_at_k = 0.0;
  double mrr = 0.0;
  std::size_t instances = 0;
};

// Reciprocal rank only counts hits inside the top k.
RetrievalMetrics retrieval_metrics(const std::vector<RankedRetrieval>& rankings, std::size_t k);

// Retrieval rankings for every instance that carries a gold patch.
std::vector<RankedRetrieval> rankings_from(const std::vector<Instance>& instances);

struct LocalizationRow {
  std::string pair_id;
  std::string method_id;
  patchkit::LocalizationScores mean;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
};

// Mean file/module/line scores per (pair, method) over records with a valid
// final patch whose instance has a gold patch.
std::vector<LocalizationRow> localization_report(const std::vector<RunRecord>& records,
                                                 const std::vector<Instance>& instances);

// Summary CSV: method_id, resolution_rate, avg_strong_iters, avg_weak_iters,
// valid_patch_rate, total_cost, efficiency.
void write_summary_csv(std::ostream& out, const std::vector<MethodSummary>& summaries);
std::vector<MethodSummary> read_summary_csv(std::istream& in, const std::string& pair_id);
std::vector<MethodSummary> read_summary_csv_file(const std::string& path, const std::string& pair_id);

// Frontier CSV: cost, performance, method_id. Points with a pair_id are
// written as "pair_id/method_id".
void write_frontier_csv(std::ostream& out, const std::vector<FrontierPoint>& points);
void write_crossings_csv(std::ostream& out, const std::vector<Money>& crossings);

// "1.32s + 0.00w"
std::string format_iterations(double strong, double weak);

}  // namespace cascade::analytics
