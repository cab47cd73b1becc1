#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascade/core.hpp"

namespace cascade::prompts {

enum class TemplateId {
  Base,
  RepoSummary,
  RepoFAQ,
  RepoStructure,
  FewShot,
  Plan,
  InstanceQA,
  PromptReduction,
  Router,
  UniversalSC,
  StrongFirstRefine,
};

inline constexpr std::array<TemplateId, 11> kAllTemplates = {
    TemplateId::Base,       TemplateId::RepoSummary,     TemplateId::RepoFAQ, TemplateId::RepoStructure,
    TemplateId::FewShot,    TemplateId::Plan,            TemplateId::InstanceQA, TemplateId::PromptReduction,
    TemplateId::Router,     TemplateId::UniversalSC,     TemplateId::StrongFirstRefine,
};

// Slot fillers for the few-shot header line.
inline constexpr std::string_view kSimilarFiller = "similar ";
inline constexpr std::string_view kSuccessfulFiller = " that were successful";

std::string_view template_body(TemplateId id);
// snake_case name, also the exported file stem.
std::string_view template_name(TemplateId id);
// Distinct placeholder names in order of first appearance.
std::vector<std::string> placeholders(TemplateId id);

using Bindings = std::map<std::string, std::string>;

// Substitutes every {name} in the body. Bound values are inserted verbatim and
// never rescanned. Throws MissingBinding naming the first unbound placeholder.
std::string render(TemplateId id, const Bindings& bindings);

// "### <path>\n<content>" blocks in the given order, separated by newlines.
std::string format_retrieval(const std::vector<FileContext>& files);
std::string format_retrieval(const std::vector<std::pair<std::string, std::string>>& sections);

enum class Verdict { Simple, Complex };

struct RouterVerdict {
  Verdict verdict = Verdict::Complex;
  bool fallback = false;  // neither or both labels present
};

// Total: anything other than exactly one of SIMPLE/COMPLEX (case-insensitive,
// whole word) routes to Complex with the fallback flag set.
RouterVerdict parse_router_verdict(std::string_view text);

// 1-based index after the first "SELECTED_PATCH:" marker, if within [1, n].
std::optional<int> parse_selected_patch(std::string_view text, int n_samples);

// "### <path>" headers each followed by a fenced code block, merged per path
// in first-appearance order. Throws EmptyReduction when nothing is found.
std::vector<std::pair<std::string, std::string>> parse_reduced_context(std::string_view text);

// Writes <name>.txt for every template into `dir`; returns the written paths.
std::vector<std::filesystem::path> export_templates(const std::filesystem::path& dir);

}  // namespace cascade::prompts
