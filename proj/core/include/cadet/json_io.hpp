#pragma once

#include <string>
#include <vector>

#include "cadet/dataset.hpp"
#include "cadet/metrics.hpp"
#include "cadet/pipeline.hpp"
#include "cadet/scene_graph.hpp"

namespace cadet {

// All schemas carry schema_version and a type tag; unknown fields are
// rejected, version mismatches are explicit errors. Keys serialize sorted, so
// save -> load -> save is byte-stable.

void save_annotation(const std::string& path, const VideoAnnotation& annotation);
VideoAnnotation load_annotation(const std::string& path);

void save_scenario_config(const std::string& path, const ScenarioConfig& cfg);
ScenarioConfig load_scenario_config(const std::string& path);

void save_pipeline_config(const std::string& path, const PipelineConfig& cfg);
PipelineConfig load_pipeline_config(const std::string& path);

struct VideoDetections {
  std::string video_id;
  int n_frames = 0;
  std::vector<SnippetPrediction> snippets;
  std::vector<int> smoothed_labels;
  std::vector<ActivitySegment> segments;
};

struct DetectionsFile {
  std::vector<VideoDetections> videos;
};

void save_detections(const std::string& path, const DetectionsFile& detections);
DetectionsFile load_detections(const std::string& path);

struct GraphDump {
  int snippet_index = 0;
  SceneGraph graph;
};

void save_graph_dump(const std::string& path, const std::string& video_id,
                     const std::vector<GraphDump>& graphs);
std::pair<std::string, std::vector<GraphDump>> load_graph_dump(const std::string& path);

struct MetricsFile {
  std::string task;
  std::vector<double> thresholds;
  std::vector<MapResult> results;  // parallel to thresholds
  bool has_classification = false;
  ClassificationReport classification;
};

void save_metrics(const std::string& path, const MetricsFile& metrics);
MetricsFile load_metrics(const std::string& path);

void save_train_log(const std::string& path, const std::vector<EpochLog>& log, int best_epoch,
                    double best_val_accuracy);

// Dataset directory layout: scenario.json, splits.json, clean/<id>.json,
// noisy/<id>.json.
void save_dataset(const std::string& dir, const ScenarioConfig& cfg,
                  const GeneratedDataset& dataset);

struct LoadedDataset {
  ScenarioConfig scenario;
  std::vector<VideoAnnotation> clean;
  std::vector<VideoAnnotation> noisy;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

LoadedDataset load_dataset(const std::string& dir);

}  // namespace cadet
