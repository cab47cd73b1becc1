#include "cascade/patchkit.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>

#include "cascade/error.hpp"

namespace cascade::patchkit {

namespace {

constexpr std::string_view kSearchMarker = "<<<<<<< SEARCH";
constexpr std::string_view kDivider = "=======";
constexpr std::string_view kReplaceMarker = ">>>>>>> REPLACE";

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view trim(std::string_view s) {
  s = rstrip(s);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Splits on '\n'; pieces carry no terminator. A trailing '\n' does not
// produce a final empty piece.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

// A file as a list of lines plus whether the final line is newline-terminated.
struct LineFile {
  std::vector<std::string> lines;
  bool trailing_newline = true;

  static LineFile from(std::string_view content) {
    LineFile f;
    for (auto piece : split_lines(content)) f.lines.emplace_back(piece);
    f.trailing_newline = content.empty() || content.back() == '\n';
    return f;
  }

  std::string join() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out += lines[i];
      if (i + 1 < lines.size() || trailing_newline) out += '\n';
    }
    return out;
  }
};

}  // namespace

EditScript parse_edits(std::string_view model_output) {
  enum class State { Outside, Idle, Search, Replace };
  State state = State::Outside;
  EditScript script;
  std::string path;
  Edit current;
  bool saw_marker = false;
  auto malformed = [](const std::string& why) { return Error(ErrorCode::MalformedBlock, why); };

  for (auto raw : split_lines(model_output)) {
    std::string_view line = rstrip(raw);
    bool fence = starts_with(trim(line), "```");
    switch (state) {
      case State::Outside:
        if (fence) {
          state = State::Idle;
          path.clear();
        }
        break;
      case State::Idle:
        if (fence) {
          state = State::Outside;
        } else if (starts_with(line, "### ")) {
          path = std::string(trim(line.substr(4)));
        } else if (line == kSearchMarker) {
          saw_marker = true;
          if (path.empty()) throw malformed("SEARCH block without a preceding '### <path>' header");
          current = Edit{path, {}, {}};
          state = State::Search;
        } else if (line == kDivider || line == kReplaceMarker) {
          throw malformed("'" + std::string(line) + "' outside a SEARCH block");
        }
        break;
      case State::Search:
        if (line == kDivider) {
          if (current.search.empty()) throw malformed("empty SEARCH block for " + current.path);
          state = State::Replace;
        } else if (line == kSearchMarker || line == kReplaceMarker || fence) {
          throw malformed("SEARCH block for " + current.path + " is not closed by '======='");
        } else {
          current.search.append(raw);
          current.search += '\n';
        }
        break;
      case State::Replace:
        if (line == kReplaceMarker) {
          script.edits.push_back(std::move(current));
          current = Edit{};
          state = State::Idle;
        } else if (line == kSearchMarker || line == kDivider || fence) {
          throw malformed("REPLACE block for " + current.path + " is not closed by '>>>>>>> REPLACE'");
        } else {
          current.replace.append(raw);
          current.replace += '\n';
        }
        break;
    }
  }
  if (state == State::Search || state == State::Replace) {
    throw malformed("edit for " + current.path + " is truncated");
  }
  if (script.edits.empty()) {
    throw Error(ErrorCode::NoEditBlocks, saw_marker ? "no complete edit found" : "no fenced SEARCH/REPLACE block found");
  }
  return script;
}

ApplyResult apply_edits(const EditScript& script, const std::map<std::string, std::string>& files) {
  ApplyResult result;
  result.files = files;
  std::vector<std::string> order;
  for (std::size_t e = 0; e < script.edits.size(); ++e) {
    const Edit& edit = script.edits[e];
    auto it = result.files.find(edit.path);
    if (it == result.files.end()) throw Error(ErrorCode::UnknownPath, edit.path);
    if (edit.search.empty()) throw Error(ErrorCode::SearchNotFound, "empty search block for " + edit.path);
    LineFile file = LineFile::from(it->second);
    auto needle = split_lines(edit.search);
    std::optional<std::size_t> first;
    std::size_t matches = 0;
    if (needle.size() <= file.lines.size()) {
      for (std::size_t start = 0; start + needle.size() <= file.lines.size(); ++start) {
        bool hit = true;
        for (std::size_t k = 0; k < needle.size() && hit; ++k) hit = file.lines[start + k] == needle[k];
        if (hit) {
          if (!first) first = start;
          ++matches;
        }
      }
    }
    if (!first) throw Error(ErrorCode::SearchNotFound, "search block not found in " + edit.path);
    if (matches > 1) result.ambiguities.push_back({e, matches});
    std::vector<std::string> replaced(file.lines.begin(), file.lines.begin() + static_cast<std::ptrdiff_t>(*first));
    for (auto piece : split_lines(edit.replace)) replaced.emplace_back(piece);
    replaced.insert(replaced.end(), file.lines.begin() + static_cast<std::ptrdiff_t>(*first + needle.size()),
                    file.lines.end());
    file.lines = std::move(replaced);
    if (file.lines.empty()) file.trailing_newline = true;
    it->second = file.join();
    if (std::find(order.begin(), order.end(), edit.path) == order.end()) order.push_back(edit.path);
  }
  for (const auto& path : order) {
    result.diff += unified_diff(path, files.at(path), result.files.at(path));
  }
  return result;
}

namespace {

struct DiffLine {
  std::string_view text;
  bool newline = true;
  friend bool operator==(const DiffLine&, const DiffLine&) = default;
};

std::vector<DiffLine> diff_lines(std::string_view content) {
  std::vector<DiffLine> out;
  for (auto piece : split_lines(content)) out.push_back({piece, true});
  if (!content.empty() && content.back() != '\n') out.back().newline = false;
  return out;
}

enum class OpKind { Equal, Delete, Insert };

struct Op {
  OpKind kind;
  std::size_t a;  // index into old lines (position before the op for inserts)
  std::size_t b;  // index into new lines (position before the op for deletes)
};

// Myers O(ND) shortest edit script over a[alo,ahi) x b[blo,bhi).
void myers(const std::vector<DiffLine>& a, const std::vector<DiffLine>& b, std::size_t alo, std::size_t ahi,
           std::size_t blo, std::size_t bhi, std::vector<Op>& out) {
  const long n = static_cast<long>(ahi - alo);
  const long m = static_cast<long>(bhi - blo);
  const long max = n + m;
  if (max == 0) return;
  std::vector<long> v(static_cast<std::size_t>(2 * max + 2), 0);
  const long off = max + 1;
  std::vector<std::vector<long>> trace;
  long found = -1;
  for (long d = 0; d <= max && found < 0; ++d) {
    trace.emplace_back(v.begin() + (off - d - 1), v.begin() + (off + d + 2));
    for (long k = -d; k <= d; k += 2) {
      long x = (k == -d || (k != d && v[off + k - 1] < v[off + k + 1])) ? v[off + k + 1] : v[off + k - 1] + 1;
      long y = x - k;
      while (x < n && y < m && a[alo + x] == b[blo + y]) {
        ++x;
        ++y;
      }
      v[off + k] = x;
      if (x >= n && y >= m) {
        found = d;
        break;
      }
    }
  }
  std::vector<Op> rev;
  long x = n;
  long y = m;
  for (long d = found; d >= 0; --d) {
    const auto& snap = trace[static_cast<std::size_t>(d)];
    auto at = [&](long k) { return snap[static_cast<std::size_t>(k + d + 1)]; };
    long k = x - y;
    long prev_k = (k == -d || (k != d && at(k - 1) < at(k + 1))) ? k + 1 : k - 1;
    long prev_x = d == 0 ? 0 : at(prev_k);
    long prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      --x;
      --y;
      rev.push_back({OpKind::Equal, alo + static_cast<std::size_t>(x), blo + static_cast<std::size_t>(y)});
    }
    if (d > 0) {
      if (x == prev_x) {
        rev.push_back({OpKind::Insert, alo + static_cast<std::size_t>(x), blo + static_cast<std::size_t>(prev_y)});
      } else {
        rev.push_back({OpKind::Delete, alo + static_cast<std::size_t>(prev_x), blo + static_cast<std::size_t>(y)});
      }
    }
    x = prev_x;
    y = prev_y;
  }
  out.insert(out.end(), rev.rbegin(), rev.rend());
}

std::string range_spec(std::size_t start0, std::size_t count) {
  if (count == 0) return std::to_string(start0) + ",0";
  if (count == 1) return std::to_string(start0 + 1);
  return std::to_string(start0 + 1) + "," + std::to_string(count);
}

}  // namespace

std::string unified_diff(const std::string& path, std::string_view before, std::string_view after, int context) {
  auto a = diff_lines(before);
  auto b = diff_lines(after);
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  if (prefix == a.size() && prefix == b.size()) return {};

  std::vector<Op> ops;
  for (std::size_t i = 0; i < prefix; ++i) ops.push_back({OpKind::Equal, i, i});
  myers(a, b, prefix, a.size() - suffix, prefix, b.size() - suffix, ops);
  for (std::size_t i = suffix; i > 0; --i) ops.push_back({OpKind::Equal, a.size() - i, b.size() - i});

  // Within each change run, list deletions before insertions.
  for (std::size_t i = 0; i < ops.size();) {
    if (ops[i].kind == OpKind::Equal) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < ops.size() && ops[j].kind != OpKind::Equal) ++j;
    std::stable_partition(ops.begin() + static_cast<std::ptrdiff_t>(i), ops.begin() + static_cast<std::ptrdiff_t>(j),
                          [](const Op& op) { return op.kind == OpKind::Delete; });
    std::size_t a0 = ops[i].a;
    std::size_t b0 = ops[i].b;
    std::size_t ai = a0;
    std::size_t bi = b0;
    for (std::size_t k = i; k < j; ++k) {
      if (ops[k].kind == OpKind::Delete) {
        ops[k].a = ai++;
        ops[k].b = b0;
      } else {
        ops[k].a = ai;
        ops[k].b = bi++;
      }
    }
    i = j;
  }

  std::vector<std::size_t> changes;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind != OpKind::Equal) changes.push_back(i);
  }
  const std::size_t ctx = static_cast<std::size_t>(std::max(context, 0));
  std::string out = "--- a/" + path + "\n+++ b/" + path + "\n";
  std::size_t g = 0;
  while (g < changes.size()) {
    std::size_t first = changes[g];
    std::size_t last = first;
    std::size_t h = g + 1;
    while (h < changes.size() && changes[h] - last - 1 <= 2 * ctx) last = changes[h++];
    std::size_t lo = first >= ctx ? first - ctx : 0;
    std::size_t hi = std::min(ops.size(), last + 1 + ctx);
    std::size_t old_count = 0;
    std::size_t new_count = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (ops[i].kind != OpKind::Insert) ++old_count;
      if (ops[i].kind != OpKind::Delete) ++new_count;
    }
    out += "@@ -" + range_spec(ops[lo].a, old_count) + " +" + range_spec(ops[lo].b, new_count) + " @@\n";
    for (std::size_t i = lo; i < hi; ++i) {
      const Op& op = ops[i];
      const DiffLine& line = op.kind == OpKind::Insert ? b[op.b] : a[op.a];
      out += op.kind == OpKind::Equal ? ' ' : (op.kind == OpKind::Delete ? '-' : '+');
      out.append(line.text);
      out += '\n';
      if (!line.newline) out += "\\ No newline at end of file\n";
    }
    g = h;
  }
  return out;
}

double sequence_ratio(std::string_view a, std::string_view b) {
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  if (la + lb == 0) return 1.0;
  std::array<std::vector<std::size_t>, 256> b2j;
  for (std::size_t j = 0; j < lb; ++j) b2j[static_cast<unsigned char>(b[j])].push_back(j);

  std::vector<std::size_t> prev(lb + 1, 0);
  std::vector<std::size_t> cur(lb + 1, 0);
  std::vector<std::size_t> prev_touched;
  std::vector<std::size_t> cur_touched;

  // Returns (i, j, k): the longest a[i,i+k) == b[j,j+k) in the window, earliest
  // in a and then earliest in b among maximal ones.
  auto longest = [&](std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
    std::size_t besti = alo;
    std::size_t bestj = blo;
    std::size_t bestk = 0;
    for (std::size_t i = alo; i < ahi; ++i) {
      for (std::size_t j : b2j[static_cast<unsigned char>(a[i])]) {
        if (j < blo) continue;
        if (j >= bhi) break;
        // prev/cur are indexed by j+1 so that index 0 stands for "before b".
        std::size_t k = prev[j] + 1;
        cur[j + 1] = k;
        cur_touched.push_back(j + 1);
        if (k > bestk) {
          besti = i + 1 - k;
          bestj = j + 1 - k;
          bestk = k;
        }
      }
      for (std::size_t t : prev_touched) prev[t] = 0;
      prev_touched.clear();
      std::swap(prev, cur);
      std::swap(prev_touched, cur_touched);
    }
    for (std::size_t t : prev_touched) prev[t] = 0;
    prev_touched.clear();
    return std::array<std::size_t, 3>{besti, bestj, bestk};
  };

  std::size_t matched = 0;
  std::vector<std::array<std::size_t, 4>> stack{{0, la, 0, lb}};
  while (!stack.empty()) {
    auto [alo, ahi, blo, bhi] = stack.back();
    stack.pop_back();
    auto [i, j, k] = longest(alo, ahi, blo, bhi);
    if (k == 0) continue;
    matched += k;
    if (alo < i && blo < j) stack.push_back({alo, i, blo, j});
    if (i + k < ahi && j + k < bhi) stack.push_back({i + k, ahi, j + k, bhi});
  }
  return 2.0 * static_cast<double>(matched) / static_cast<double>(la + lb);
}

double patch_similarity(std::string_view a, std::string_view b) {
  return a <= b ? sequence_ratio(a, b) : sequence_ratio(b, a);
}

namespace {

struct Hunk {
  long old_start = 0;
  long old_count = 0;
  long new_start = 0;
  long new_count = 0;
  std::vector<std::string_view> lines;
};

struct FileDiff {
  std::string old_path;
  std::string new_path;
  std::vector<Hunk> hunks;

  const std::string& path() const { return new_path == "/dev/null" ? old_path : new_path; }
};

std::string header_path(std::string_view rest) {
  if (auto tab = rest.find('\t'); tab != std::string_view::npos) rest = rest.substr(0, tab);
  rest = trim(rest);
  if (rest == "/dev/null") return std::string(rest);
  if (starts_with(rest, "a/") || starts_with(rest, "b/")) rest.remove_prefix(2);
  return std::string(rest);
}

bool parse_range(std::string_view& s, long& start, long& count) {
  auto read = [&](long& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || p == s.data()) return false;
    s.remove_prefix(static_cast<std::size_t>(p - s.data()));
    return true;
  };
  if (!read(start)) return false;
  count = 1;
  if (!s.empty() && s.front() == ',') {
    s.remove_prefix(1);
    if (!read(count)) return false;
  }
  return start >= 0 && count >= 0;
}

Hunk parse_hunk_header(std::string_view line) {
  auto bad = [&] { return Error(ErrorCode::MalformedDiff, "bad hunk header '" + std::string(line) + "'"); };
  std::string_view s = line;
  if (!starts_with(s, "@@ -")) throw bad();
  s.remove_prefix(4);
  Hunk h;
  if (!parse_range(s, h.old_start, h.old_count)) throw bad();
  if (!starts_with(s, " +")) throw bad();
  s.remove_prefix(2);
  if (!parse_range(s, h.new_start, h.new_count)) throw bad();
  if (!starts_with(s, " @@")) throw bad();
  return h;
}

std::vector<FileDiff> parse_diff(std::string_view patch) {
  auto lines = split_lines(patch);
  std::vector<FileDiff> files;
  std::size_t i = 0;
  while (i < lines.size()) {
    std::string_view line = lines[i];
    if (starts_with(line, "--- ") && i + 1 < lines.size() && starts_with(lines[i + 1], "+++ ")) {
      FileDiff fd;
      fd.old_path = header_path(line.substr(4));
      fd.new_path = header_path(lines[i + 1].substr(4));
      if (fd.path().empty() || fd.path() == "/dev/null") {
        throw Error(ErrorCode::MalformedDiff, "file header without a path");
      }
      files.push_back(std::move(fd));
      i += 2;
      continue;
    }
    if (starts_with(line, "@@")) {
      if (files.empty()) throw Error(ErrorCode::MalformedDiff, "hunk before any file header");
      Hunk h = parse_hunk_header(line);
      long old_left = h.old_count;
      long new_left = h.new_count;
      ++i;
      while ((old_left > 0 || new_left > 0) && i < lines.size()) {
        std::string_view body = lines[i];
        char tag = body.empty() ? ' ' : body.front();
        if (tag == '\\') {
          h.lines.push_back(body);
          ++i;
          continue;
        }
        if (tag == ' ') {
          --old_left;
          --new_left;
        } else if (tag == '-') {
          --old_left;
        } else if (tag == '+') {
          --new_left;
        } else {
          break;
        }
        if (old_left < 0 || new_left < 0) throw Error(ErrorCode::MalformedDiff, "hunk longer than its header");
        h.lines.push_back(body.empty() ? std::string_view(" ") : body);
        ++i;
      }
      if (old_left != 0 || new_left != 0) throw Error(ErrorCode::MalformedDiff, "hunk shorter than its header");
      while (i < lines.size() && starts_with(lines[i], "\\")) h.lines.push_back(lines[i++]);
      files.back().hunks.push_back(std::move(h));
      continue;
    }
    ++i;
  }
  if (files.empty()) throw Error(ErrorCode::MalformedDiff, "no file headers in diff");
  return files;
}

}  // namespace

LocalizationSet extract_localization(std::string_view patch) {
  LocalizationSet out;
  for (const auto& fd : parse_diff(patch)) {
    const std::string& path = fd.path();
    out.files.insert(path);
    for (const auto& h : fd.hunks) {
      long old_line = h.old_count == 0 ? h.old_start + 1 : h.old_start;
      bool in_block = false;
      bool block_removes = false;
      long anchor = 0;
      auto flush = [&] {
        if (in_block && !block_removes) out.lines.insert({path, static_cast<int>(anchor)});
        in_block = false;
        block_removes = false;
      };
      for (auto body : h.lines) {
        char tag = body.front();
        if (tag == '\\') continue;
        if (tag == ' ') {
          flush();
          ++old_line;
          continue;
        }
        if (!in_block) {
          in_block = true;
          anchor = old_line - 1;
        }
        if (tag == '-') {
          block_removes = true;
          out.lines.insert({path, static_cast<int>(old_line)});
          ++old_line;
        }
      }
      flush();
    }
  }
  out.modules = out.files;
  return out;
}

LocalizationScores localization_scores(const LocalizationSet& pred, const LocalizationSet& gold) {
  LocalizationScores s;
  s.file = set_prf(pred.files, gold.files);
  s.module = set_prf(pred.modules, gold.modules);
  s.line = set_prf(pred.lines, gold.lines);
  return s;
}

std::string normalized_changes(std::string_view patch) {
  std::map<std::string, std::string> per_file;
  for (const auto& fd : parse_diff(patch)) {
    std::string& acc = per_file[fd.path()];
    for (const auto& h : fd.hunks) {
      for (auto body : h.lines) {
        if (body.front() == '-' || body.front() == '+') {
          acc.append(rstrip(body));
          acc += '\n';
        }
      }
    }
  }
  std::string out;
  for (const auto& [path, changes] : per_file) {
    out += "### " + path + "\n" + changes;
  }
  return out;
}

std::vector<std::string> diff_paths(std::string_view patch) {
  std::vector<std::string> out;
  for (const auto& fd : parse_diff(patch)) {
    if (std::find(out.begin(), out.end(), fd.path()) == out.end()) out.push_back(fd.path());
  }
  return out;
}

}  // namespace cascade::patchkit
