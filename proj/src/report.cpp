#include "ooro/report.hpp"

#include <fstream>

#include "ooro/error.hpp"

namespace ooro {

using nlohmann::json;

bool is_llm_method(const std::string& method) { return method == "gpt"; }

json prediction_to_json(const PredictionRecord& record) {
  json diagnostics = {{"all_zero", record.all_zero},
                      {"error", record.error ? json(*record.error) : json()}};
  json provenance;
  if (is_llm_method(record.method)) {
    diagnostics["unmatched_labels"] = record.unmatched_labels;
    diagnostics["ignored_lines"] = record.ignored_lines;
    diagnostics["sequence_mismatch"] = record.sequence_mismatch;
    provenance = {{"model", record.model},
                  {"cache_key", record.cache_key},
                  {"temperature", record.temperature}};
  } else {
    if (record.method == "bbbd") diagnostics["missing_masks"] = record.missing_masks;
    provenance = {{"baseline", record.method}};
  }
  return {{"image_id", record.image_id},
          {"method", record.method},
          {"signed", signed_to_json(record.matrix)},
          {"diagnostics", std::move(diagnostics)},
          {"provenance", std::move(provenance)}};
}

PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord r;
  try {
    r.image_id = j.at("image_id").get<std::int64_t>();
    r.method = j.at("method").get<std::string>();
    r.matrix = signed_from_json(j.at("signed"));
    from_signed(r.matrix);  // validates the encoding
    const json& d = j.value("diagnostics", json::object());
    r.all_zero = d.value("all_zero", is_all_zero(from_signed(r.matrix)));
    if (d.contains("error") && d["error"].is_string()) r.error = d["error"].get<std::string>();
    r.unmatched_labels = d.value("unmatched_labels", std::vector<std::string>{});
    r.ignored_lines = d.value("ignored_lines", std::size_t{0});
    r.sequence_mismatch = d.value("sequence_mismatch", false);
    r.missing_masks = d.value("missing_masks", std::vector<std::string>{});
    const json& p = j.value("provenance", json::object());
    r.model = p.value("model", std::string{});
    r.cache_key = p.value("cache_key", std::string{});
    r.temperature = p.value("temperature", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedAnnotation, std::string("prediction record: ") + e.what());
  }
  return r;
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedAnnotation,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions_jsonl(const std::filesystem::path& path,
                             const std::vector<PredictionRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  for (const auto& r : records) out << prediction_to_json(r).dump() << '\n';
}

namespace {

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string export_dot(const OcclusionRelations& relations, const Scene& scene) {
  std::string out = "digraph " + dot_quote("image " + std::to_string(scene.image_id)) + " {\n";
  for (const auto& inst : scene.instances) out += "  " + dot_quote(inst.display_name) + ";\n";
  for (std::size_t i = 0; i < relations.n(); ++i) {
    for (std::size_t j = 0; j < relations.n(); ++j) {
      if (relations.occludes(i, j)) {
        out += "  " + dot_quote(scene.instances.at(i).display_name) + " -> " +
               dot_quote(scene.instances.at(j).display_name) + ";\n";
      }
    }
  }
  out += "}\n";
  return out;
}

std::string export_dot(const PredictionRecord& record, const Scene& scene) {
  const auto relations = from_signed(record.matrix);
  if (relations.n() != scene.size()) {
    throw Error(ErrorKind::InconsistentMatrix,
                "prediction has " + std::to_string(relations.n()) + " instances, scene has " +
                    std::to_string(scene.size()));
  }
  return export_dot(relations, scene);
}

}  // namespace ooro
