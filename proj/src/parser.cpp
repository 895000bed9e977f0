#include "ooro/parser.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace ooro {

namespace {

constexpr std::string_view kKeyword = "occludes";
constexpr std::string_view kTrimChars = " \t\r\n.,;:!?\"'`*_()[]{}<>";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s, std::string_view chars) {
  const auto first = s.find_first_not_of(chars);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(chars);
  return s.substr(first, last - first + 1);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

struct ListMarker {
  std::string_view rest;
  std::optional<std::size_t> number;
  bool marked{false};
};

// Strips "-", "*", "•", "+" bullets and "3." / "3)" enumerations.
ListMarker strip_list_marker(std::string_view line) {
  ListMarker out;
  std::string_view s = trim(line, " \t\r");
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    for (std::string_view bullet : {"-", "*", "+", "\xE2\x80\xA2"}) {
      if (s.starts_with(bullet) && (s.size() == bullet.size() || is_space(s[bullet.size()]))) {
        s = trim(s.substr(bullet.size()), " \t");
        out.marked = changed = true;
      }
    }
  }
  std::size_t k = 0;
  while (k < s.size() && k < 9 && is_digit(s[k])) ++k;
  if (k > 0 && k < s.size() && (s[k] == '.' || s[k] == ')') &&
      (k + 1 == s.size() || is_space(s[k + 1]))) {
    out.number = std::stoul(std::string(s.substr(0, k)));
    out.marked = true;
    s = trim(s.substr(k + 1), " \t");
  }
  out.rest = s;
  return out;
}

// Position of the first whole-word "occludes" in an already lowercased line.
std::size_t find_keyword(std::string_view lower) {
  for (std::size_t pos = lower.find(kKeyword); pos != std::string_view::npos;
       pos = lower.find(kKeyword, pos + 1)) {
    const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
    const std::size_t end = pos + kKeyword.size();
    const bool right_ok = end == lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
    if (left_ok && right_ok) return pos;
  }
  return std::string_view::npos;
}

class LabelResolver {
 public:
  explicit LabelResolver(const Scene& scene) : counts_(category_counts(scene)) {
    for (std::size_t k = 0; k < scene.instances.size(); ++k) {
      index_.emplace(normalize_category(scene.instances[k].display_name), k);
    }
  }

  std::string normalize(std::string_view text) const { return normalize_label(text, &counts_); }

  std::optional<std::size_t> resolve(const std::string& normalized) const {
    const auto it = index_.find(normalized);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  CategoryCounts counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

void note_unmatched(ParseReport& report, const std::string& label) {
  if (label.empty()) return;
  if (std::find(report.unmatched_labels.begin(), report.unmatched_labels.end(), label) ==
      report.unmatched_labels.end()) {
    report.unmatched_labels.push_back(label);
  }
}

}  // namespace

CategoryCounts category_counts(const Scene& scene) {
  CategoryCounts counts;
  for (const auto& inst : scene.instances) ++counts[normalize_category(inst.category)];
  return counts;
}

std::string normalize_label(std::string_view text, const CategoryCounts* counts) {
  std::string label = normalize_category(trim(lowercase(text), kTrimChars));
  while (label.starts_with("object ")) {
    // "object 0" is itself a category label, not a prefixed one.
    const std::string rest(trim(std::string_view(label).substr(7), kTrimChars));
    if (rest.empty() || std::all_of(rest.begin(), rest.end(), is_digit)) break;
    label = rest;
  }
  if (counts && !label.empty() && !split_display_name(label)) {
    const auto it = counts->find(label);
    if (it != counts->end() && it->second == 1) label += " 0";
  }
  return label;
}

std::pair<OcclusionRelations, ParseReport> parse_response(std::string_view text,
                                                          const Scene& scene) {
  const LabelResolver resolver(scene);
  OcclusionRelations relations(scene.size());
  ParseReport report;
  std::vector<std::size_t> ordered;
  bool seen_statement = false;

  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view raw = text.substr(start, end - start);
    start = end + 1;

    const std::string_view line = trim(raw, " \t\r");
    if (line.empty()) continue;
    const ListMarker marker = strip_list_marker(line);
    const std::string lower = lowercase(marker.rest);
    const std::size_t kw = find_keyword(lower);

    if (kw != std::string_view::npos) {
      seen_statement = true;
      ParsedStatement st;
      st.raw_line = std::string(line);
      st.occluder_text = std::string(trim(marker.rest.substr(0, kw), " \t"));
      st.occludee_text = std::string(trim(marker.rest.substr(kw + kKeyword.size()), " \t"));
      const std::string a = resolver.normalize(st.occluder_text);
      const std::string b = resolver.normalize(st.occludee_text);
      const auto i = resolver.resolve(a);
      const auto j = resolver.resolve(b);
      if (i && j) {
        if (*i == *j) {
          ++report.ignored_lines;
          continue;
        }
        relations.set_occludes(*i, *j);
        st.resolved = std::make_pair(*i, *j);
      } else {
        if (!i) note_unmatched(report, a);
        if (!j) note_unmatched(report, b);
      }
      report.statements.push_back(std::move(st));
    } else if (!seen_statement && marker.marked) {
      const std::string label = resolver.normalize(marker.rest);
      if (const auto idx = resolver.resolve(label)) {
        ordered.push_back(*idx);
        if (marker.number && *marker.number != *idx) report.sequence_mismatch = true;
      } else {
        note_unmatched(report, label);
      }
    } else {
      ++report.ignored_lines;
    }
  }

  if (!ordered.empty()) report.ordered_list = std::move(ordered);
  report.all_zero = is_all_zero(relations);
  return {std::move(relations), std::move(report)};
}

std::string relations_to_statements(const OcclusionRelations& r, const CategoryList& names) {
  std::string out;
  for (std::size_t i = 0; i < r.n(); ++i) {
    for (std::size_t j = 0; j < r.n(); ++j) {
      if (r.occludes(i, j)) out += names.at(i) + " occludes " + names.at(j) + "\n";
    }
  }
  return out;
}

nlohmann::json parse_report_to_json(const ParseReport& report) {
  nlohmann::json statements = nlohmann::json::array();
  for (const auto& st : report.statements) {
    nlohmann::json s = {{"raw", st.raw_line},
                        {"occluder", st.occluder_text},
                        {"occludee", st.occludee_text},
                        {"resolved", nullptr}};
    if (st.resolved) s["resolved"] = {st.resolved->first, st.resolved->second};
    statements.push_back(std::move(s));
  }
  nlohmann::json out = {{"statements", std::move(statements)},
                        {"unmatched_labels", report.unmatched_labels},
                        {"ordered_list", nullptr},
                        {"sequence_mismatch", report.sequence_mismatch},
                        {"all_zero", report.all_zero},
                        {"ignored_lines", report.ignored_lines}};
  if (report.ordered_list) out["ordered_list"] = *report.ordered_list;
  return out;
}

}  // namespace ooro
