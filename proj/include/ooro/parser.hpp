#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ooro/annotations.hpp"
#include "ooro/occlusion.hpp"

namespace ooro {

struct ParsedStatement {
  std::string raw_line;
  std::string occluder_text;
  std::string occludee_text;
  std::optional<std::pair<std::size_t, std::size_t>> resolved;
};

struct ParseReport {
  std::vector<ParsedStatement> statements;
  std::vector<std::string> unmatched_labels;  // normalized, first-seen order, no repeats
  std::optional<std::vector<std::size_t>> ordered_list;
  bool sequence_mismatch{false};  // an enumerated item's number differs from its instance index
  bool all_zero{true};
  std::size_t ignored_lines{0};
};

/// Instances per category, used for singleton index completion.
using CategoryCounts = std::map<std::string, std::size_t, std::less<>>;

CategoryCounts category_counts(const Scene& scene);

/// Lowercases, trims punctuation and whitespace, strips a leading "object ",
/// collapses whitespace. With `counts`, a bare category that has exactly one
/// instance gains the index " 0".
std::string normalize_label(std::string_view text, const CategoryCounts* counts = nullptr);

/// Total: lines that do not parse are counted, never thrown.
std::pair<OcclusionRelations, ParseReport> parse_response(std::string_view text, const Scene& scene);

/// "<name_i> occludes <name_j>" per edge, row-major, newline-terminated lines.
std::string relations_to_statements(const OcclusionRelations& r, const CategoryList& names);

nlohmann::json parse_report_to_json(const ParseReport& report);

}  // namespace ooro
