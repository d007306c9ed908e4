#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cadet/dataset.hpp"
#include "cadet/gcn.hpp"
#include "cadet/metrics.hpp"
#include "cadet/roi_pool.hpp"
#include "cadet/scene_graph.hpp"

namespace cadet {

enum class PoolingMode { kStandard, kDeformable, kModulated };

struct PipelineConfig {
  int snippet_len = kSnippetLen;
  int tube_len = kSnippetLen;
  int delta = kMicroTubeGap;
  int k = 7;
  int n_s = 2;
  double gamma = 0.1;
  PoolingMode pooling = PoolingMode::kDeformable;
  int d_node = 256;
  int d_h = 512;
  int d_out = 2048;
  int kappa = 2;
  ReadoutMode readout = ReadoutMode::kFinal;
  bool background = true;  // a background class follows the activity classes
  double lr = 0.01;
  double momentum = 0.9;
  int epochs = 60;
  std::uint64_t seed = 0;
  bool offsets_shared_over_time = false;
  RenderConfig render;
};

void validate_pipeline_config(const PipelineConfig& cfg);

// Activity classes in the label space, background included when configured.
int n_activity_classes(const PipelineConfig& cfg, const std::vector<std::string>& activity_vocab);

struct ModelParams {
  OffsetPredictor offset;
  Tensor w_proj, b_proj;
  GcnParams gcn;
};

ModelParams init_params(const PipelineConfig& cfg, int n_activity);
std::vector<Tensor> trainable_params(const ModelParams& params);
std::map<std::string, Tensor> named_params(const ModelParams& params);

// Copies values from a loaded checkpoint into freshly shaped parameters.
void load_params(ModelParams& params, const std::map<std::string, Tensor>& loaded);

// 1-based inclusive frame ranges of the full snippets; the trailing remainder
// is dropped.
std::vector<std::pair<int, int>> segment_video(int n_frames, int snippet_len);

// Tubes overlapping the snippet, cut to exactly snippet_len boxes (missing
// frames replicate the nearest annotated box).
std::vector<ActionTube> snippet_tubes(const VideoAnnotation& annotation, int snippet_index,
                                      int snippet_len);

struct SnippetGraph {
  SceneGraph graph;
  Tensor node_features;  // canonical tube order, one projected row per node
};

// Pool -> project -> scene graph for one snippet. A tube-less snippet gets a
// single whole-frame node. Also serves graph dump exports.
SnippetGraph snippet_scene_graph(const FeatureVolume& features, std::vector<ActionTube> tubes,
                                 const ModelParams& params, const PipelineConfig& cfg,
                                 int frame_width, int frame_height);

struct SnippetForward {
  Tensor logits;
  int node_count = 0;
};

// snippet_scene_graph followed by GCN and classifier logits.
SnippetForward snippet_forward(const FeatureVolume& features, std::vector<ActionTube> tubes,
                               const ModelParams& params, const PipelineConfig& cfg,
                               int frame_width, int frame_height);

struct SnippetPrediction {
  int snippet_index = 0;
  int label = 0;
  std::vector<double> probabilities;
  int node_count = 0;
};

// features_from supplies rendered feature volumes; tubes_from supplies the
// detected tubes (they differ when detections are noisy).
std::vector<SnippetPrediction> classify_video(const VideoAnnotation& features_from,
                                              const VideoAnnotation& tubes_from,
                                              const ModelParams& params,
                                              const PipelineConfig& cfg);

// Single left-to-right pass absorbing isolated flips between equal neighbors.
std::vector<int> smooth_labels(std::vector<int> labels);

// Maximal runs of equal labels; score is the mean probability of the run's
// class. Runs of skip_label (pass a negative value to keep all) are dropped.
std::vector<ActivitySegment> extract_segments(const std::vector<int>& labels,
                                              const std::vector<std::vector<double>>& probabilities,
                                              int snippet_len, int skip_label);

struct TrainExample {
  std::string video_id;
  int snippet_index = 0;
  FeatureVolume features;
  std::vector<ActionTube> tubes;
  int activity_label = 0;
};

// Activity label of one snippet: the segment covering it fully, else the
// background class (requires background when gaps exist).
int snippet_activity_label(const VideoAnnotation& annotation, int snippet_index,
                           const PipelineConfig& cfg);

std::vector<TrainExample> assemble_examples(const std::vector<VideoAnnotation>& feature_source,
                                            const std::vector<VideoAnnotation>& tube_source,
                                            const std::vector<int>& video_indices,
                                            const PipelineConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;  // best-validation values
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
};

TrainResult train(const std::vector<TrainExample>& train_set,
                  const std::vector<TrainExample>& val_set, const PipelineConfig& cfg,
                  int n_activity);

}  // namespace cadet
