#include <algorithm>
#include <cctype>
#include <fstream>

#include "cascade/error.hpp"
#include "cascade/prompts.hpp"

namespace cascade::prompts {

namespace detail {
extern const char* const kBaseBody;
extern const char* const kRepoSummaryBody;
extern const char* const kRepoFAQBody;
extern const char* const kRepoStructureBody;
extern const char* const kFewShotBody;
extern const char* const kPlanBody;
extern const char* const kInstanceQABody;
extern const char* const kPromptReductionBody;
extern const char* const kRouterBody;
extern const char* const kUniversalSCBody;
}  // namespace detail

namespace {

const std::string& strong_first_refine_body() {
  static const std::string body = std::string(detail::kBaseBody) +
                                  "\n\nAn expert proposed the following solution:\n{strong_output}\n"
                                  "Reformat or minimally correct it into valid *SEARCH/REPLACE* edits.";
  return body;
}

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls visit(literal_text) and visit_placeholder(name) in body order.
template <typename Literal, typename Placeholder>
void scan(std::string_view body, Literal&& literal, Placeholder&& placeholder) {
  std::size_t i = 0;
  std::size_t text_start = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && is_name_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        literal(body.substr(text_start, i - text_start));
        placeholder(std::string(body.substr(i + 1, j - i - 1)));
        i = j + 1;
        text_start = i;
        continue;
      }
    }
    ++i;
  }
  literal(body.substr(text_start));
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool has_word(const std::string& haystack, std::string_view word) {
  std::size_t pos = 0;
  auto boundary = [&](std::size_t at) {
    return at >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[at]));
  };
  while ((pos = haystack.find(word, pos)) != std::string::npos) {
    bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
    if (left && boundary(pos + word.size())) return true;
    pos += word.size();
  }
  return false;
}

}  // namespace

std::string_view template_body(TemplateId id) {
  switch (id) {
    case TemplateId::Base: return detail::kBaseBody;
    case TemplateId::RepoSummary: return detail::kRepoSummaryBody;
    case TemplateId::RepoFAQ: return detail::kRepoFAQBody;
    case TemplateId::RepoStructure: return detail::kRepoStructureBody;
    case TemplateId::FewShot: return detail::kFewShotBody;
    case TemplateId::Plan: return detail::kPlanBody;
    case TemplateId::InstanceQA: return detail::kInstanceQABody;
    case TemplateId::PromptReduction: return detail::kPromptReductionBody;
    case TemplateId::Router: return detail::kRouterBody;
    case TemplateId::UniversalSC: return detail::kUniversalSCBody;
    case TemplateId::StrongFirstRefine: return strong_first_refine_body();
  }
  return {};
}

std::string_view template_name(TemplateId id) {
  switch (id) {
    case TemplateId::Base: return "base";
    case TemplateId::RepoSummary: return "repo_summary";
    case TemplateId::RepoFAQ: return "repo_faq";
    case TemplateId::RepoStructure: return "repo_structure";
    case TemplateId::FewShot: return "few_shot";
    case TemplateId::Plan: return "plan";
    case TemplateId::InstanceQA: return "instance_qa";
    case TemplateId::PromptReduction: return "prompt_reduction";
    case TemplateId::Router: return "router";
    case TemplateId::UniversalSC: return "universal_sc";
    case TemplateId::StrongFirstRefine: return "strong_first_refine";
  }
  return {};
}

std::vector<std::string> placeholders(TemplateId id) {
  std::vector<std::string> names;
  scan(template_body(id), [](std::string_view) {},
       [&](const std::string& name) {
         if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
       });
  return names;
}

std::string render(TemplateId id, const Bindings& bindings) {
  std::string out;
  scan(
      template_body(id), [&](std::string_view text) { out.append(text); },
      [&](const std::string& name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw Error(ErrorCode::MissingBinding, name);
        out += it->second;
      });
  return out;
}

std::string format_retrieval(const std::vector<FileContext>& files) {
  std::vector<std::pair<std::string, std::string>> sections;
  sections.reserve(files.size());
  for (const auto& f : files) sections.emplace_back(f.path, f.content);
  return format_retrieval(sections);
}

std::string format_retrieval(const std::vector<std::pair<std::string, std::string>>& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += '\n';
    out += "### " + sections[i].first + "\n" + sections[i].second;
    if (!sections[i].second.empty() && sections[i].second.back() != '\n') out += '\n';
  }
  // the template supplies the newline before "--- END FILE ---"
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

RouterVerdict parse_router_verdict(std::string_view text) {
  const std::string up = upper(text);
  bool simple = has_word(up, "SIMPLE");
  bool complex = has_word(up, "COMPLEX");
  if (simple && !complex) return {Verdict::Simple, false};
  if (complex && !simple) return {Verdict::Complex, false};
  return {Verdict::Complex, true};
}

std::optional<int> parse_selected_patch(std::string_view text, int n_samples) {
  const std::string up = upper(text);
  const std::string marker = "SELECTED_PATCH:";
  auto pos = up.find(marker);
  if (pos == std::string::npos) return std::nullopt;
  pos += marker.size();
  while (pos < up.size() && (up[pos] == ' ' || up[pos] == '\t' || up[pos] == '*' || up[pos] == '#')) ++pos;
  std::size_t start = pos;
  long value = 0;
  while (pos < up.size() && std::isdigit(static_cast<unsigned char>(up[pos])) && pos - start < 9) {
    value = value * 10 + (up[pos] - '0');
    ++pos;
  }
  if (pos == start) return std::nullopt;
  if (value < 1 || value > n_samples) return std::nullopt;
  return static_cast<int>(value);
}

std::vector<std::pair<std::string, std::string>> parse_reduced_context(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string path;
  std::string body;
  bool in_fence = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    std::string_view line = raw;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    std::string_view lead = line;
    while (!lead.empty() && (lead.front() == ' ' || lead.front() == '\t')) lead.remove_prefix(1);
    bool fence = lead.substr(0, 3) == "```";
    if (in_fence) {
      if (fence) {
        in_fence = false;
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.first == path; });
        if (it == out.end()) {
          out.emplace_back(path, body);
        } else {
          it->second += body;
        }
        path.clear();
      } else {
        body.append(raw);
        body += '\n';
      }
    } else if (line.substr(0, 4) == "### ") {
      std::string_view p = line.substr(4);
      while (!p.empty() && p.front() == ' ') p.remove_prefix(1);
      path = std::string(p);
    } else if (fence && !path.empty()) {
      in_fence = true;
      body.clear();
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (out.empty()) throw Error(ErrorCode::EmptyReduction, "no '### <path>' + fenced code sections found");
  return out;
}

std::vector<std::filesystem::path> export_templates(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (auto id : kAllTemplates) {
    auto path = dir / (std::string(template_name(id)) + ".txt");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << template_body(id);
    written.push_back(path);
  }
  return written;
}

}  // namespace cascade::prompts
