#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cascade::patchkit {

// One SEARCH/REPLACE edit. `search` and `replace` hold whole lines, each
// terminated by '\n'; an empty `replace` deletes the matched lines.
struct Edit {
  std::string path;
  std::string search;
  std::string replace;

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct EditScript {
  std::vector<Edit> edits;

  friend bool operator==(const EditScript&, const EditScript&) = default;
};

// Extracts every SEARCH/REPLACE edit from the fenced blocks of a model reply.
// Throws NoEditBlocks or MalformedBlock.
EditScript parse_edits(std::string_view model_output);

struct Ambiguity {
  std::size_t edit_index = 0;
  std::size_t match_count = 0;
};

struct ApplyResult {
  std::map<std::string, std::string> files;
  std::string diff;  // empty when the edits change nothing
  std::vector<Ambiguity> ambiguities;
};

// Applies the edits in order, each against the current content of its file.
// A search block matching more than once is applied at its first occurrence
// and reported in `ambiguities`. Throws UnknownPath or SearchNotFound.
ApplyResult apply_edits(const EditScript& script, const std::map<std::string, std::string>& files);

// GNU-style unified diff of one file; empty when before == after.
std::string unified_diff(const std::string& path, std::string_view before, std::string_view after,
                         int context = 3);

// Classic sequence-matcher ratio 2*M/(|a|+|b|) with no junk heuristic, where
// the pair is evaluated in lexicographic order so the result is symmetric.
double patch_similarity(std::string_view a, std::string_view b);

// Directional variant: exactly the ratio of matcher(a, b).
double sequence_ratio(std::string_view a, std::string_view b);

struct LocalizationSet {
  std::set<std::string> files;
  std::set<std::pair<std::string, int>> lines;
  // Module granularity is file granularity.
  std::set<std::string> modules;

  friend bool operator==(const LocalizationSet&, const LocalizationSet&) = default;
};

// Files touched by a unified diff and the original line numbers it removes.
// A pure insertion contributes the original line preceding it (0 when the
// insertion is at the top of the file). Throws MalformedDiff.
LocalizationSet extract_localization(std::string_view patch);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LocalizationScores {
  PRF file;
  PRF module;
  PRF line;
};

LocalizationScores localization_scores(const LocalizationSet& pred, const LocalizationSet& gold);

template <typename T>
PRF set_prf(const std::set<T>& pred, const std::set<T>& gold) {
  if (pred.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  std::size_t hit = 0;
  for (const auto& p : pred) hit += gold.count(p);
  PRF out;
  out.precision = pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
  out.recall = gold.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(gold.size());
  double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

// Canonical form of a diff's changes: per file (sorted by path), the removed
// and added lines in order with trailing whitespace stripped. Two diffs with
// equal normal forms make the same edit regardless of context or offsets.
std::string normalized_changes(std::string_view patch);

// Paths named in the diff headers, in order of appearance.
std::vector<std::string> diff_paths(std::string_view patch);

}  // namespace cascade::patchkit
