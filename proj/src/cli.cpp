#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>
#include <unordered_map>

#include "CLI11.hpp"
#include "ooro/annotations.hpp"
#include "ooro/baselines.hpp"
#include "ooro/error.hpp"
#include "ooro/llm.hpp"
#include "ooro/metrics.hpp"
#include "ooro/parser.hpp"
#include "ooro/report.hpp"

namespace ooro {

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitReplay = 3;

// Runs f(0..n-1) on up to `jobs` threads; f must not throw.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) f(k);
    });
  }
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  out << text;
}

struct IngestArgs {
  std::string cocoa;
  std::string instaorder;
  std::string coco;
  std::string out;
  bool exclude_crowd{false};
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  if (a.cocoa.empty() == a.instaorder.empty()) {
    err << "usage: ingest needs exactly one of --cocoa or --instaorder\n";
    return kExitInput;
  }
  if (!a.instaorder.empty() && a.coco.empty()) {
    err << "usage: --instaorder requires --coco\n";
    return kExitInput;
  }
  IngestOptions options;
  options.include_crowd = !a.exclude_crowd;
  std::vector<Scene> scenes;
  std::size_t unmatched = 0;
  if (!a.cocoa.empty()) {
    scenes = load_cocoa(a.cocoa, options);
  } else {
    auto loaded = load_instaorder(a.instaorder, a.coco, options);
    scenes = std::move(loaded.scenes);
    unmatched = loaded.unmatched_image_ids.size();
    if (unmatched) {
      err << "warning: skipped " << unmatched << " InstaOrder records with image ids absent from "
          << a.coco << " (first: " << loaded.unmatched_image_ids.front() << ")\n";
    }
  }
  write_scenes_jsonl(a.out, scenes);
  std::size_t instances = 0;
  for (const auto& s : scenes) instances += s.size();
  out << scenes.size() << " scenes, " << instances << " instances\n";
  return kExitOk;
}

struct PredictArgs {
  std::string scenes;
  std::string method;
  std::string out;
  std::string cache;
  std::string images;
  std::string model{"gpt-4o"};
  std::string endpoint{"https://api.openai.com/v1/chat/completions"};
  bool live{false};
  bool replay_only{false};
  bool include_bboxes{false};
  unsigned jobs{4};
};

PredictionRecord predict_baseline(BaselineKind kind, const Scene& scene) {
  PredictionRecord rec;
  rec.image_id = scene.image_id;
  rec.method = std::string(to_string(kind));
  OcclusionRelations rel(scene.size());
  try {
    rel = predict(kind, scene);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  if (kind == BaselineKind::BBBD) {
    for (const auto k : instances_missing_masks(scene)) {
      rec.missing_masks.push_back(scene.instances[k].display_name);
    }
  }
  rec.matrix = to_signed(rel);
  rec.all_zero = is_all_zero(rel);
  return rec;
}

PredictionRecord predict_llm(LlmClient& client, const PredictArgs& a, const Scene& scene,
                             std::atomic<std::size_t>& cache_misses) {
  PredictionRecord rec;
  rec.image_id = scene.image_id;
  rec.method = "gpt";
  rec.model = client.config().model;
  rec.temperature = client.config().temperature;
  OcclusionRelations rel(scene.size());
  try {
    std::vector<std::pair<std::string, BBox>> boxes;
    if (a.include_bboxes) {
      for (const auto& inst : scene.instances) boxes.emplace_back(inst.display_name, inst.bbox);
    }
    const PromptSpec prompt = build_prompt(category_csv(scene), a.include_bboxes, boxes);
    const auto image = read_bytes(std::filesystem::path(a.images) / scene.file_name);
    const QueryResult answer = client.query(image, prompt);
    rec.cache_key = answer.cache_key;
    auto [parsed, report] = parse_response(answer.text, scene);
    rel = std::move(parsed);
    rec.unmatched_labels = std::move(report.unmatched_labels);
    rec.ignored_lines = report.ignored_lines;
    rec.sequence_mismatch = report.sequence_mismatch;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CacheMiss) ++cache_misses;
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.matrix = to_signed(rel);
  rec.all_zero = is_all_zero(rel);
  return rec;
}

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const bool llm = a.method == "gpt";
  const auto baseline = baseline_from_string(a.method);
  if (!llm && !baseline) {
    err << "usage: --method must be one of area, yaxis, bbbd, gpt\n";
    return kExitInput;
  }
  if (llm && (a.live == a.replay_only)) {
    err << "usage: --method gpt needs exactly one of --live or --replay-only\n";
    return kExitInput;
  }
  if (llm && (a.cache.empty() || a.images.empty())) {
    err << "usage: --method gpt needs --cache and --images\n";
    return kExitInput;
  }
  const auto scenes = read_scenes_jsonl(a.scenes);
  std::vector<PredictionRecord> records(scenes.size());
  std::atomic<std::size_t> cache_misses{0};

  if (llm) {
    ResponseCache cache(a.cache);
    LlmConfig config;
    config.endpoint = a.endpoint;
    config.model = a.model;
    config.mode = a.live ? QueryMode::Live : QueryMode::Replay;
    if (a.live) {
      if (const char* key = std::getenv("OORO_API_KEY")) config.api_key = key;
    }
    LlmClient client(config, cache);
    parallel_for(scenes.size(), a.jobs,
                 [&](std::size_t k) { records[k] = predict_llm(client, a, scenes[k], cache_misses); });
  } else {
    parallel_for(scenes.size(), a.jobs,
                 [&](std::size_t k) { records[k] = predict_baseline(*baseline, scenes[k]); });
  }

  write_predictions_jsonl(a.out, records);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.error ? 1 : 0;
  out << records.size() << " predictions written, " << failed << " with errors";
  if (llm) out << ", " << cache_misses.load() << " cache misses";
  out << "\n";
  if (llm && a.replay_only && cache_misses.load() * 10 > scenes.size()) {
    err << "error: " << cache_misses.load() << " of " << scenes.size()
        << " scenes missed the replay cache (limit 10%)\n";
    return kExitReplay;
  }
  return kExitOk;
}

struct EvalArgs {
  std::vector<std::string> pred;
  std::string scenes;
  std::string pair_mode{"all"};
  std::string out;
  std::string csv;
  std::string dataset;
};

json provenance_of(const std::string& method, const std::vector<const PredictionRecord*>& recs) {
  if (!is_llm_method(method)) return {{"baseline", method}};
  std::vector<std::string> models;
  std::vector<double> temperatures;
  for (const auto* r : recs) {
    if (std::find(models.begin(), models.end(), r->model) == models.end()) models.push_back(r->model);
    if (std::find(temperatures.begin(), temperatures.end(), r->temperature) == temperatures.end()) {
      temperatures.push_back(r->temperature);
    }
  }
  return {{"models", models}, {"temperatures", temperatures}};
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto mode = pair_mode_from_string(a.pair_mode);
  if (!mode) {
    err << "usage: --pair-mode must be all or gt-occluded\n";
    return kExitInput;
  }
  const PairMode alternate = *mode == PairMode::All ? PairMode::GtOccluded : PairMode::All;
  const auto scenes = read_scenes_jsonl(a.scenes);
  std::unordered_map<std::int64_t, std::size_t> by_id;
  for (std::size_t k = 0; k < scenes.size(); ++k) by_id.emplace(scenes[k].image_id, k);

  std::vector<PredictionRecord> records;
  for (const auto& path : a.pred) {
    auto part = read_predictions_jsonl(path);
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  std::vector<std::string> methods;
  std::map<std::string, std::vector<const PredictionRecord*>> grouped;
  for (const auto& r : records) {
    if (!by_id.count(r.image_id)) {
      err << "error: prediction for image_id " << r.image_id << " not found in " << a.scenes << "\n";
      return kExitInput;
    }
    if (!grouped.count(r.method)) methods.push_back(r.method);
    grouped[r.method].push_back(&r);
  }

  const std::string dataset =
      a.dataset.empty() ? std::filesystem::path(a.scenes).stem().string() : a.dataset;
  json reports = json::array();
  std::string csv = report_csv_header() + "\n";
  for (const auto& method : methods) {
    const auto& recs = grouped[method];
    for (const PairMode m : {*mode, alternate}) {
      std::vector<SceneEvaluation> evals;
      evals.reserve(recs.size());
      for (const auto* r : recs) {
        const Scene& scene = scenes[by_id.at(r->image_id)];
        evals.push_back(scene_accuracy(from_signed(r->matrix), scene.ground_truth, m, r->image_id));
      }
      EvaluationReport report;
      try {
        report = aggregate(std::move(evals), method, dataset, m);
      } catch (const Error& e) {
        err << "error: " << method << " (" << to_string(m) << "): " << e.what() << "\n";
        return kExitInput;
      }
      json j = report_to_json(report);
      j["provenance"] = provenance_of(method, recs);
      reports.push_back(std::move(j));
      csv += report_csv_row(report) + "\n";
      if (m == *mode) {
        char line[160];
        std::snprintf(line, sizeof line, "micro=%.4f macro=%.4f all_zero_rate=%.4f", report.micro_accuracy,
                      report.macro_accuracy, report.all_zero_rate);
        out << method << " " << line << " pair_mode=" << to_string(m)
            << " incomparable=" << report.incomparable_count << "\n";
      }
    }
  }

  const json doc = {{"dataset", dataset},
                    {"pair_mode", to_string(*mode)},
                    {"pair_definition",
                     "ordered pairs (i,j), i != j; a mutual ground-truth pair counts as two "
                     "independent ordered pairs"},
                    {"reports", std::move(reports)}};
  if (!a.out.empty()) {
    write_text(a.out, doc.dump(2) + "\n");
    std::filesystem::path csv_path = a.csv;
    if (csv_path.empty()) csv_path = std::filesystem::path(a.out).replace_extension(".csv");
    write_text(csv_path, csv);
  }
  return kExitOk;
}

struct GraphArgs {
  std::string scenes;
  std::string pred;
  std::int64_t image_id{0};
  std::string out;
};

int cmd_graph(const GraphArgs& a, std::ostream& out, std::ostream& err) {
  const auto scenes = read_scenes_jsonl(a.scenes);
  const auto scene = std::find_if(scenes.begin(), scenes.end(),
                                  [&](const Scene& s) { return s.image_id == a.image_id; });
  if (scene == scenes.end()) {
    err << "error: image_id " << a.image_id << " not in " << a.scenes << "\n";
    return kExitInput;
  }
  std::string dot;
  if (a.pred.empty()) {
    dot = export_dot(scene->ground_truth, *scene);
  } else {
    const auto records = read_predictions_jsonl(a.pred);
    const auto rec = std::find_if(records.begin(), records.end(),
                                  [&](const PredictionRecord& r) { return r.image_id == a.image_id; });
    if (rec == records.end()) {
      err << "error: image_id " << a.image_id << " not in " << a.pred << "\n";
      return kExitInput;
    }
    dot = export_dot(*rec, *scene);
  }
  if (a.out.empty()) {
    out << dot;
  } else {
    write_text(a.out, dot);
  }
  return kExitOk;
}

struct ParseArgs {
  std::string response;
  std::string categories;
  std::string categories_file;
};

int cmd_parse(const ParseArgs& a, std::ostream& out, std::ostream& err) {
  std::string csv = a.categories;
  if (!a.categories_file.empty()) {
    csv = read_text(a.categories_file);
    csv = csv.substr(0, csv.find('\n'));
  }
  if (csv.empty()) {
    err << "usage: parse needs --categories or --categories-file\n";
    return kExitInput;
  }
  const Scene scene = scene_from_display_names(split_csv(csv));
  const auto [relations, report] = parse_response(read_text(a.response), scene);
  const json doc = {{"signed", signed_to_json(to_signed(relations))},
                    {"report", parse_report_to_json(report)}};
  out << doc.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occlusion order recovery: ingest, predict, evaluate, export graphs"};
  app.name("ooro");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Normalize COCOA or InstaOrder+COCO annotations");
  ingest_cmd->add_option("--cocoa", ingest.cocoa, "COCOA annotation JSON");
  ingest_cmd->add_option("--instaorder", ingest.instaorder, "InstaOrder annotation JSON");
  ingest_cmd->add_option("--coco", ingest.coco, "COCO instances JSON (with --instaorder)");
  ingest_cmd->add_option("--out", ingest.out, "Scenes JSONL output")->required();
  ingest_cmd->add_flag("--exclude-crowd", ingest.exclude_crowd, "Drop iscrowd instances");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict occlusion relations per scene");
  predict_cmd->add_option("--scenes", predict.scenes, "Scenes JSONL")->required();
  predict_cmd->add_option("--method", predict.method, "area | yaxis | bbbd | gpt")->required();
  predict_cmd->add_option("--out", predict.out, "Predictions JSONL output")->required();
  predict_cmd->add_option("--cache", predict.cache, "Record/replay cache JSONL (gpt)");
  predict_cmd->add_option("--images", predict.images, "Image directory (gpt)");
  predict_cmd->add_option("--model", predict.model, "Model identifier (gpt)");
  predict_cmd->add_option("--endpoint", predict.endpoint, "Chat-completions URL (gpt)");
  predict_cmd->add_flag("--live", predict.live, "Query the endpoint on cache misses");
  predict_cmd->add_flag("--replay-only", predict.replay_only, "Answer only from the cache");
  predict_cmd->add_flag("--include-bboxes", predict.include_bboxes,
                        "Add instance bounding boxes to the prompt");
  predict_cmd->add_option("--jobs", predict.jobs, "Parallel scenes / in-flight requests");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--pred", eval.pred, "Predictions JSONL (repeatable)")->required();
  eval_cmd->add_option("--scenes", eval.scenes, "Scenes JSONL")->required();
  eval_cmd->add_option("--pair-mode", eval.pair_mode, "all | gt-occluded");
  eval_cmd->add_option("--out", eval.out, "Report JSON output");
  eval_cmd->add_option("--csv", eval.csv, "Report CSV output (default: --out with .csv)");
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset label (default: scenes file stem)");

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("graph", "Export an occlusion order graph as DOT");
  graph_cmd->add_option("--scenes", graph.scenes, "Scenes JSONL")->required();
  graph_cmd->add_option("--pred", graph.pred, "Predictions JSONL (default: ground truth)");
  graph_cmd->add_option("--image-id", graph.image_id, "Scene image id")->required();
  graph_cmd->add_option("--out", graph.out, "DOT output (default: stdout)");

  ParseArgs parse;
  auto* parse_cmd = app.add_subcommand("parse", "Parse one raw model response");
  parse_cmd->add_option("--response", parse.response, "Response text file")->required();
  parse_cmd->add_option("--categories", parse.categories, "Category CSV line");
  parse_cmd->add_option("--categories-file", parse.categories_file, "File with the category CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out, err);
    if (*predict_cmd) return cmd_predict(predict, out, err);
    if (*eval_cmd) return cmd_eval(eval, out, err);
    if (*graph_cmd) return cmd_graph(graph, out, err);
    if (*parse_cmd) return cmd_parse(parse, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace ooro
