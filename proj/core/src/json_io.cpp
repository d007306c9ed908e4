#include "cadet/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

namespace cadet {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open file: " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open file for writing: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw ValidationError("write failed: " + path);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ParseError(where + ": unknown field '" + key + "'");
    }
  }
}

void check_header(const json& j, const std::string& type, const std::string& where) {
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw ParseError(where + ": missing schema_version");
  }
  if (j["schema_version"].get<int>() != kSchemaVersion) {
    throw ParseError(where + ": schema_version " +
                     std::to_string(j["schema_version"].get<int>()) + " unsupported, expected " +
                     std::to_string(kSchemaVersion));
  }
  if (!j.contains("type") || j["type"].get<std::string>() != type) {
    throw ParseError(where + ": expected type '" + type + "'");
  }
}

template <typename T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what());
  }
}

// Boxes are stored corner-form. A width-form encoding cannot reload the far
// corner exactly: x1 + (x2 - x1) misses x2 by an ulp whenever the rounding
// lattice lines up badly, and for odd-mantissa corners no representable width
// hits at all.
json box_to_json(int frame, const Box& b) {
  return json::array({frame, b.x1, b.y1, b.x2, b.y2});
}

std::pair<int, Box> box_from_json(const json& j, int tube_id, const std::string& where) {
  if (!j.is_array() || j.size() != 5) {
    throw ParseError(where + ": box entries must be [frame, x1, y1, x2, y2]");
  }
  const int frame = j[0].get<int>();
  const Box b{j[1].get<double>(), j[2].get<double>(), j[3].get<double>(), j[4].get<double>()};
  if (b.x2 < b.x1 || b.y2 < b.y1) {
    throw ValidationError(where + ": tube " + std::to_string(tube_id) + " frame " +
                          std::to_string(frame) + " has negative box size");
  }
  return {frame, b};
}

json segment_to_json(const ActivitySegment& seg) {
  return json{{"label", seg.label},
              {"start_frame", seg.interval.start_frame},
              {"end_frame", seg.interval.end_frame},
              {"score", seg.score}};
}

ActivitySegment segment_from_json(const json& j, const std::string& where) {
  check_keys(j, {"label", "start_frame", "end_frame", "score"}, where);
  ActivitySegment seg;
  seg.label = field<int>(j, "label", where);
  seg.interval.start_frame = field<int>(j, "start_frame", where);
  seg.interval.end_frame = field<int>(j, "end_frame", where);
  seg.score = field<double>(j, "score", where);
  return seg;
}

std::string style_name(ScenarioStyle style) {
  return style == ScenarioStyle::kRoad ? "road" : "saras";
}

ScenarioStyle style_from_name(const std::string& name, const std::string& where) {
  if (name == "road") return ScenarioStyle::kRoad;
  if (name == "saras") return ScenarioStyle::kSaras;
  throw ParseError(where + ": unknown style '" + name + "'");
}

}  // namespace

void save_annotation(const std::string& path, const VideoAnnotation& annotation) {
  validate_annotation(annotation);
  json tubes = json::array();
  for (const TubeAnnotation& tube : annotation.tubes) {
    json boxes = json::array();
    for (const auto& [frame, box] : tube.boxes) boxes.push_back(box_to_json(frame, box));
    tubes.push_back(json{{"id", tube.id},
                         {"action_label", tube.action_label},
                         {"confidence", tube.confidence},
                         {"boxes", boxes}});
  }
  json activities = json::array();
  for (const ActivitySegment& seg : annotation.activities) {
    activities.push_back(segment_to_json(seg));
  }
  const json j{{"schema_version", kSchemaVersion},
               {"type", "video_annotation"},
               {"video_id", annotation.video_id},
               {"n_frames", annotation.n_frames},
               {"height", annotation.height},
               {"width", annotation.width},
               {"atomic_vocab", annotation.atomic_vocab},
               {"activity_vocab", annotation.activity_vocab},
               {"tubes", tubes},
               {"activities", activities}};
  write_json(path, j);
}

VideoAnnotation load_annotation(const std::string& path) {
  const json j = read_json(path);
  check_header(j, "video_annotation", path);
  check_keys(j,
             {"schema_version", "type", "video_id", "n_frames", "height", "width",
              "atomic_vocab", "activity_vocab", "tubes", "activities"},
             path);
  VideoAnnotation a;
  a.video_id = field<std::string>(j, "video_id", path);
  a.n_frames = field<int>(j, "n_frames", path);
  a.height = field<int>(j, "height", path);
  a.width = field<int>(j, "width", path);
  a.atomic_vocab = field<std::vector<std::string>>(j, "atomic_vocab", path);
  a.activity_vocab = field<std::vector<std::string>>(j, "activity_vocab", path);
  for (const json& tj : j.at("tubes")) {
    check_keys(tj, {"id", "action_label", "confidence", "boxes"}, path);
    TubeAnnotation tube;
    tube.id = field<int>(tj, "id", path);
    tube.action_label = field<int>(tj, "action_label", path);
    tube.confidence = field<double>(tj, "confidence", path);
    for (const json& bj : tj.at("boxes")) {
      const auto [frame, box] = box_from_json(bj, tube.id, path);
      if (!tube.boxes.emplace(frame, box).second) {
        throw ValidationError(path + ": tube " + std::to_string(tube.id) +
                              " has two boxes at frame " + std::to_string(frame));
      }
    }
    a.tubes.push_back(std::move(tube));
  }
  for (const json& sj : j.at("activities")) {
    a.activities.push_back(segment_from_json(sj, path));
  }
  validate_annotation(a);
  return a;
}

void save_scenario_config(const std::string& path, const ScenarioConfig& cfg) {
  json grammar = json::array();
  for (const auto& [label, tmpl] : cfg.grammar) {
    grammar.push_back(json{{"activity", label}, {"atoms", tmpl.atoms}, {"ordered", tmpl.ordered}});
  }
  const json j{{"schema_version", kSchemaVersion},
               {"type", "scenario_config"},
               {"style", style_name(cfg.style)},
               {"n_videos", cfg.n_videos},
               {"frames_per_video", cfg.frames_per_video},
               {"frame_height", cfg.frame_height},
               {"frame_width", cfg.frame_width},
               {"grammar", grammar},
               {"noise",
                json{{"box_jitter_sigma", cfg.noise.box_jitter_sigma},
                     {"tube_drop_prob", cfg.noise.tube_drop_prob},
                     {"label_flip_prob", cfg.noise.label_flip_prob}}},
               {"seed", cfg.seed},
               {"test_fraction", cfg.test_fraction},
               {"snippet_len", cfg.snippet_len},
               {"max_parallel_tubes", cfg.max_parallel_tubes}};
  write_json(path, j);
}

ScenarioConfig load_scenario_config(const std::string& path) {
  const json j = read_json(path);
  check_header(j, "scenario_config", path);
  check_keys(j,
             {"schema_version", "type", "style", "n_videos", "frames_per_video", "frame_height",
              "frame_width", "grammar", "noise", "seed", "test_fraction", "snippet_len",
              "max_parallel_tubes"},
             path);
  ScenarioConfig cfg;
  cfg.style = style_from_name(field<std::string>(j, "style", path), path);
  cfg.n_videos = field<int>(j, "n_videos", path);
  cfg.frames_per_video = field<int>(j, "frames_per_video", path);
  cfg.frame_height = field<int>(j, "frame_height", path);
  cfg.frame_width = field<int>(j, "frame_width", path);
  cfg.seed = field<std::uint64_t>(j, "seed", path);
  cfg.test_fraction = field<double>(j, "test_fraction", path);
  cfg.snippet_len = field<int>(j, "snippet_len", path);
  cfg.max_parallel_tubes = field<int>(j, "max_parallel_tubes", path);
  const json& noise = j.at("noise");
  check_keys(noise, {"box_jitter_sigma", "tube_drop_prob", "label_flip_prob"}, path + ": noise");
  cfg.noise.box_jitter_sigma = field<double>(noise, "box_jitter_sigma", path);
  cfg.noise.tube_drop_prob = field<double>(noise, "tube_drop_prob", path);
  cfg.noise.label_flip_prob = field<double>(noise, "label_flip_prob", path);
  cfg.grammar.clear();
  if (j.contains("grammar")) {
    for (const json& gj : j.at("grammar")) {
      check_keys(gj, {"activity", "atoms", "ordered"}, path + ": grammar");
      const int label = field<int>(gj, "activity", path);
      ActivityTemplate tmpl;
      tmpl.atoms = field<std::vector<int>>(gj, "atoms", path);
      tmpl.ordered = field<bool>(gj, "ordered", path);
      if (!cfg.grammar.emplace(label, std::move(tmpl)).second) {
        throw ValidationError(path + ": duplicate activity " + std::to_string(label) +
                              " in grammar");
      }
    }
  }
  if (cfg.grammar.empty()) {
    cfg.grammar = (cfg.style == ScenarioStyle::kRoad ? road_default_scenario()
                                                     : saras_default_scenario())
                      .grammar;
  }
  return cfg;
}

namespace {

std::string pooling_name(PoolingMode mode) {
  switch (mode) {
    case PoolingMode::kStandard: return "standard";
    case PoolingMode::kDeformable: return "deformable";
    case PoolingMode::kModulated: return "modulated";
  }
  throw ValidationError("unreachable pooling mode");
}

PoolingMode pooling_from_name(const std::string& name, const std::string& where) {
  if (name == "standard") return PoolingMode::kStandard;
  if (name == "deformable") return PoolingMode::kDeformable;
  if (name == "modulated") return PoolingMode::kModulated;
  throw ParseError(where + ": unknown pooling mode '" + name + "'");
}

}  // namespace

void save_pipeline_config(const std::string& path, const PipelineConfig& cfg) {
  validate_pipeline_config(cfg);
  const json j{{"schema_version", kSchemaVersion},
               {"type", "pipeline_config"},
               {"snippet_len", cfg.snippet_len},
               {"tube_len", cfg.tube_len},
               {"delta", cfg.delta},
               {"k", cfg.k},
               {"n_s", cfg.n_s},
               {"gamma", cfg.gamma},
               {"pooling", pooling_name(cfg.pooling)},
               {"d_node", cfg.d_node},
               {"d_h", cfg.d_h},
               {"d_out", cfg.d_out},
               {"kappa", cfg.kappa},
               {"readout", cfg.readout == ReadoutMode::kFinal ? "final" : "concat"},
               {"background", cfg.background ? "present" : "absent"},
               {"lr", cfg.lr},
               {"momentum", cfg.momentum},
               {"epochs", cfg.epochs},
               {"seed", cfg.seed},
               {"offsets_shared_over_time", cfg.offsets_shared_over_time},
               {"render",
                json{{"channels", cfg.render.channels},
                     {"feature_h", cfg.render.feature_h},
                     {"feature_w", cfg.render.feature_w},
                     {"noise_amp", cfg.render.noise_amp}}}};
  write_json(path, j);
}

PipelineConfig load_pipeline_config(const std::string& path) {
  const json j = read_json(path);
  check_header(j, "pipeline_config", path);
  check_keys(j,
             {"schema_version", "type", "snippet_len", "tube_len", "delta", "k", "n_s", "gamma",
              "pooling", "d_node", "d_h", "d_out", "kappa", "readout", "background", "lr",
              "momentum", "epochs", "seed", "offsets_shared_over_time", "render"},
             path);
  PipelineConfig cfg;
  cfg.snippet_len = field<int>(j, "snippet_len", path);
  cfg.tube_len = field<int>(j, "tube_len", path);
  cfg.delta = field<int>(j, "delta", path);
  cfg.k = field<int>(j, "k", path);
  cfg.n_s = field<int>(j, "n_s", path);
  cfg.gamma = field<double>(j, "gamma", path);
  cfg.pooling = pooling_from_name(field<std::string>(j, "pooling", path), path);
  cfg.d_node = field<int>(j, "d_node", path);
  cfg.d_h = field<int>(j, "d_h", path);
  cfg.d_out = field<int>(j, "d_out", path);
  cfg.kappa = field<int>(j, "kappa", path);
  const std::string readout = field<std::string>(j, "readout", path);
  if (readout != "final" && readout != "concat") {
    throw ParseError(path + ": unknown readout '" + readout + "'");
  }
  cfg.readout = readout == "final" ? ReadoutMode::kFinal : ReadoutMode::kConcat;
  const std::string background = field<std::string>(j, "background", path);
  if (background != "present" && background != "absent") {
    throw ParseError(path + ": background must be 'present' or 'absent'");
  }
  cfg.background = background == "present";
  cfg.lr = field<double>(j, "lr", path);
  cfg.momentum = field<double>(j, "momentum", path);
  cfg.epochs = field<int>(j, "epochs", path);
  cfg.seed = field<std::uint64_t>(j, "seed", path);
  cfg.offsets_shared_over_time = field<bool>(j, "offsets_shared_over_time", path);
  const json& render = j.at("render");
  check_keys(render, {"channels", "feature_h", "feature_w", "noise_amp"}, path + ": render");
  cfg.render.channels = field<int>(render, "channels", path);
  cfg.render.feature_h = field<int>(render, "feature_h", path);
  cfg.render.feature_w = field<int>(render, "feature_w", path);
  cfg.render.noise_amp = field<double>(render, "noise_amp", path);
  cfg.render.snippet_len = cfg.snippet_len;
  validate_pipeline_config(cfg);
  return cfg;
}

void save_detections(const std::string& path, const DetectionsFile& detections) {
  json videos = json::array();
  for (const VideoDetections& v : detections.videos) {
    json snippets = json::array();
    for (const SnippetPrediction& p : v.snippets) {
      snippets.push_back(json{{"snippet_index", p.snippet_index},
                              {"label", p.label},
                              {"node_count", p.node_count},
                              {"probabilities", p.probabilities}});
    }
    json segments = json::array();
    for (const ActivitySegment& seg : v.segments) segments.push_back(segment_to_json(seg));
    videos.push_back(json{{"video_id", v.video_id},
                          {"n_frames", v.n_frames},
                          {"snippets", snippets},
                          {"smoothed_labels", v.smoothed_labels},
                          {"segments", segments}});
  }
  write_json(path, json{{"schema_version", kSchemaVersion},
                        {"type", "detections"},
                        {"videos", videos}});
}

DetectionsFile load_detections(const std::string& path) {
  const json j = read_json(path);
  check_header(j, "detections", path);
  check_keys(j, {"schema_version", "type", "videos"}, path);
  DetectionsFile out;
  for (const json& vj : j.at("videos")) {
    check_keys(vj, {"video_id", "n_frames", "snippets", "smoothed_labels", "segments"}, path);
    VideoDetections v;
    v.video_id = field<std::string>(vj, "video_id", path);
    v.n_frames = field<int>(vj, "n_frames", path);
    for (const json& sj : vj.at("snippets")) {
      check_keys(sj, {"snippet_index", "label", "node_count", "probabilities"}, path);
      SnippetPrediction p;
      p.snippet_index = field<int>(sj, "snippet_index", path);
      p.label = field<int>(sj, "label", path);
      p.node_count = field<int>(sj, "node_count", path);
      p.probabilities = field<std::vector<double>>(sj, "probabilities", path);
      v.snippets.push_back(std::move(p));
    }
    v.smoothed_labels = field<std::vector<int>>(vj, "smoothed_labels", path);
    for (const json& sj : vj.at("segments")) v.segments.push_back(segment_from_json(sj, path));
    out.videos.push_back(std::move(v));
  }
  return out;
}

namespace {

json edges_to_json(const EdgeList& edges) {
  json out = json::array();
  for (const auto& [a, b] : edges) out.push_back(json::array({a, b}));
  return out;
}

EdgeList edges_from_json(const json& j, const std::string& where) {
  EdgeList out;
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 2) throw ParseError(where + ": edges must be [a, b] pairs");
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

}  // namespace

void save_graph_dump(const std::string& path, const std::string& video_id,
                     const std::vector<GraphDump>& graphs) {
  json items = json::array();
  for (const GraphDump& g : graphs) {
    json adjacency = json::array();
    for (int i = 0; i < g.graph.node_count; ++i) {
      json row = json::array();
      for (int jx = 0; jx < g.graph.node_count; ++jx) {
        row.push_back(static_cast<int>(
            g.graph.merged_adjacency[static_cast<std::size_t>(i) * g.graph.node_count + jx]));
      }
      adjacency.push_back(row);
    }
    items.push_back(json{{"snippet_index", g.snippet_index},
                         {"tube_ids", g.graph.tube_ids},
                         {"node_labels", g.graph.node_labels},
                         {"order_edges", edges_to_json(g.graph.order_edges)},
                         {"similarity_edges", edges_to_json(g.graph.similarity_edges)},
                         {"label_edges", edges_to_json(g.graph.label_edges)},
                         {"adjacency", adjacency}});
  }
  write_json(path, json{{"schema_version", kSchemaVersion},
                        {"type", "scene_graphs"},
                        {"video_id", video_id},
                        {"graphs", items}});
}

std::pair<std::string, std::vector<GraphDump>> load_graph_dump(const std::string& path) {
  const json j = read_json(path);
  check_header(j, "scene_graphs", path);
  check_keys(j, {"schema_version", "type", "video_id", "graphs"}, path);
  std::pair<std::string, std::vector<GraphDump>> out;
  out.first = field<std::string>(j, "video_id", path);
  for (const json& gj : j.at("graphs")) {
    check_keys(gj,
               {"snippet_index", "tube_ids", "node_labels", "order_edges", "similarity_edges",
                "label_edges", "adjacency"},
               path);
    GraphDump g;
    g.snippet_index = field<int>(gj, "snippet_index", path);
    g.graph.tube_ids = field<std::vector<int>>(gj, "tube_ids", path);
    g.graph.node_labels = field<std::vector<int>>(gj, "node_labels", path);
    g.graph.node_count = static_cast<int>(g.graph.tube_ids.size());
    g.graph.order_edges = edges_from_json(gj.at("order_edges"), path);
    g.graph.similarity_edges = edges_from_json(gj.at("similarity_edges"), path);
    g.graph.label_edges = edges_from_json(gj.at("label_edges"), path);
    const json& adjacency = gj.at("adjacency");
    for (const json& row : adjacency) {
      for (const json& cell : row) {
        g.graph.merged_adjacency.push_back(cell.get<double>());
      }
    }
    if (g.graph.merged_adjacency.size() !=
        static_cast<std::size_t>(g.graph.node_count) * g.graph.node_count) {
      throw ParseError(path + ": adjacency size does not match node count");
    }
    out.second.push_back(std::move(g));
  }
  return out;
}

void save_metrics(const std::string& path, const MetricsFile& metrics) {
  if (metrics.results.size() != metrics.thresholds.size()) {
    throw ValidationError("metrics thresholds and results differ in length");
  }
  json results = json::array();
  for (std::size_t i = 0; i < metrics.results.size(); ++i) {
    const MapResult& r = metrics.results[i];
    json per_class = json::array();
    for (const auto& [label, ap] : r.per_class_ap) {
      per_class.push_back(json{{"label", label},
                               {"ap", ap},
                               {"ap_interpolated", r.per_class_ap_interpolated.at(label)}});
    }
    results.push_back(json{{"iou_threshold", metrics.thresholds[i]},
                           {"map", r.map},
                           {"map_interpolated", r.map_interpolated},
                           {"n_classes_in_mean", r.n_classes_in_mean},
                           {"per_class", per_class}});
  }
  json j{{"schema_version", kSchemaVersion},
         {"type", "metrics"},
         {"task", metrics.task},
         {"thresholds", metrics.thresholds},
         {"results", results}};
  if (metrics.has_classification) {
    json per_class = json::array();
    for (const auto& row : metrics.classification.per_class) {
      per_class.push_back(json{{"label", row.label},
                               {"precision", row.precision},
                               {"recall", row.recall},
                               {"f1", row.f1},
                               {"support", row.support}});
    }
    j["classification"] = json{{"accuracy", metrics.classification.accuracy},
                               {"macro_precision", metrics.classification.macro_precision},
                               {"macro_recall", metrics.classification.macro_recall},
                               {"macro_f1", metrics.classification.macro_f1},
                               {"per_class", per_class}};
  }
  write_json(path, j);
}

MetricsFile load_metrics(const std::string& path) {
  const json j = read_json(path);
  check_header(j, "metrics", path);
  check_keys(j, {"schema_version", "type", "task", "thresholds", "results", "classification"},
             path);
  MetricsFile out;
  out.task = field<std::string>(j, "task", path);
  out.thresholds = field<std::vector<double>>(j, "thresholds", path);
  for (const json& rj : j.at("results")) {
    check_keys(rj, {"iou_threshold", "map", "map_interpolated", "n_classes_in_mean", "per_class"},
               path);
    MapResult r;
    r.map = field<double>(rj, "map", path);
    r.map_interpolated = field<double>(rj, "map_interpolated", path);
    r.n_classes_in_mean = field<int>(rj, "n_classes_in_mean", path);
    for (const json& pj : rj.at("per_class")) {
      check_keys(pj, {"label", "ap", "ap_interpolated"}, path);
      const int label = field<int>(pj, "label", path);
      r.per_class_ap[label] = field<double>(pj, "ap", path);
      r.per_class_ap_interpolated[label] = field<double>(pj, "ap_interpolated", path);
    }
    out.results.push_back(std::move(r));
  }
  if (j.contains("classification")) {
    out.has_classification = true;
    const json& cj = j.at("classification");
    check_keys(cj, {"accuracy", "macro_precision", "macro_recall", "macro_f1", "per_class"},
               path);
    out.classification.accuracy = field<double>(cj, "accuracy", path);
    out.classification.macro_precision = field<double>(cj, "macro_precision", path);
    out.classification.macro_recall = field<double>(cj, "macro_recall", path);
    out.classification.macro_f1 = field<double>(cj, "macro_f1", path);
    for (const json& pj : cj.at("per_class")) {
      check_keys(pj, {"label", "precision", "recall", "f1", "support"}, path);
      ClassificationReport::PerClass row;
      row.label = field<int>(pj, "label", path);
      row.precision = field<double>(pj, "precision", path);
      row.recall = field<double>(pj, "recall", path);
      row.f1 = field<double>(pj, "f1", path);
      row.support = field<int>(pj, "support", path);
      out.classification.per_class.push_back(row);
    }
  }
  return out;
}

void save_train_log(const std::string& path, const std::vector<EpochLog>& log, int best_epoch,
                    double best_val_accuracy) {
  json epochs = json::array();
  for (const EpochLog& e : log) {
    epochs.push_back(json{{"epoch", e.epoch},
                          {"mean_loss", e.mean_loss},
                          {"train_accuracy", e.train_accuracy},
                          {"val_accuracy", e.val_accuracy}});
  }
  write_json(path, json{{"schema_version", kSchemaVersion},
                        {"type", "train_log"},
                        {"best_epoch", best_epoch},
                        {"best_val_accuracy", best_val_accuracy},
                        {"epochs", epochs}});
}

void save_dataset(const std::string& dir, const ScenarioConfig& cfg,
                  const GeneratedDataset& dataset) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "clean");
  fs::create_directories(fs::path(dir) / "noisy");
  save_scenario_config((fs::path(dir) / "scenario.json").string(), cfg);
  std::vector<std::string> train_ids, test_ids;
  for (const int v : dataset.train_indices) {
    train_ids.push_back(dataset.clean[static_cast<std::size_t>(v)].video_id);
  }
  for (const int v : dataset.test_indices) {
    test_ids.push_back(dataset.clean[static_cast<std::size_t>(v)].video_id);
  }
  write_json((fs::path(dir) / "splits.json").string(),
             json{{"schema_version", kSchemaVersion},
                  {"type", "splits"},
                  {"train", train_ids},
                  {"test", test_ids}});
  for (std::size_t i = 0; i < dataset.clean.size(); ++i) {
    const std::string name = dataset.clean[i].video_id + ".json";
    save_annotation((fs::path(dir) / "clean" / name).string(), dataset.clean[i]);
    save_annotation((fs::path(dir) / "noisy" / name).string(), dataset.noisy[i]);
  }
}

LoadedDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  LoadedDataset out;
  out.scenario = load_scenario_config((fs::path(dir) / "scenario.json").string());
  const std::string splits_path = (fs::path(dir) / "splits.json").string();
  const json splits = read_json(splits_path);
  check_header(splits, "splits", splits_path);
  check_keys(splits, {"schema_version", "type", "train", "test"}, splits_path);
  const auto train_ids = field<std::vector<std::string>>(splits, "train", splits_path);
  const auto test_ids = field<std::vector<std::string>>(splits, "test", splits_path);
  for (const std::string& id : train_ids) {
    out.train_indices.push_back(static_cast<int>(out.clean.size()));
    out.clean.push_back(load_annotation((fs::path(dir) / "clean" / (id + ".json")).string()));
    out.noisy.push_back(load_annotation((fs::path(dir) / "noisy" / (id + ".json")).string()));
  }
  for (const std::string& id : test_ids) {
    out.test_indices.push_back(static_cast<int>(out.clean.size()));
    out.clean.push_back(load_annotation((fs::path(dir) / "clean" / (id + ".json")).string()));
    out.noisy.push_back(load_annotation((fs::path(dir) / "noisy" / (id + ".json")).string()));
  }
  return out;
}

}  // namespace cadet
