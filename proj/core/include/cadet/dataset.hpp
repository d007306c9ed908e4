#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cadet/geometry.hpp"
#include "cadet/rng.hpp"
#include "cadet/roi_pool.hpp"

namespace cadet {

enum class ScenarioStyle { kRoad, kSaras };

struct ActivityTemplate {
  std::vector<int> atoms;  // atomic labels present in every snippet of the activity
  bool ordered = false;    // agents placed left-to-right in template order
};

struct NoiseConfig {
  double box_jitter_sigma = 0.0;
  double tube_drop_prob = 0.0;
  double label_flip_prob = 0.0;
};

struct ScenarioConfig {
  ScenarioStyle style = ScenarioStyle::kRoad;
  int n_videos = 50;
  int frames_per_video = 96;
  int frame_height = 64;
  int frame_width = 64;
  std::map<int, ActivityTemplate> grammar;
  NoiseConfig noise;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  int snippet_len = kSnippetLen;
  int max_parallel_tubes = 4;
};

// Six driving-scene activity classes over seven atomic labels, with background
// gaps between segments.
ScenarioConfig road_default_scenario();

// Eight contiguous procedure phases over eight atomic labels, no background.
ScenarioConfig saras_default_scenario();

int n_atomic_labels(const ScenarioConfig& cfg);

struct TubeAnnotation {
  int id = 0;
  int action_label = 0;
  FrameBoxMap boxes;  // absolute 1-based frames
  double confidence = 0.0;
};

struct VideoAnnotation {
  std::string video_id;
  int n_frames = 0;
  int height = 0, width = 0;
  std::vector<TubeAnnotation> tubes;
  std::vector<ActivitySegment> activities;  // background gaps are implicit
  std::vector<std::string> atomic_vocab;
  std::vector<std::string> activity_vocab;
};

void validate_annotation(const VideoAnnotation& a);

struct GeneratedDataset {
  std::vector<VideoAnnotation> clean;
  std::vector<VideoAnnotation> noisy;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

// Clean ground truth plus a noisy detection copy per video, deterministic in
// the config seed.
GeneratedDataset generate_scenarios(const ScenarioConfig& cfg);

struct RenderConfig {
  int channels = 64;
  int feature_h = 38;
  int feature_w = 38;
  int snippet_len = kSnippetLen;
  double noise_amp = 0.01;
};

// Stand-in backbone features: per frame, each tube raises channel
// (label mod C) by a bilinear bump peaking at the box center, on top of a
// low-amplitude noise floor seeded by (video id, snippet index) only.
FeatureVolume render_feature_volume(const VideoAnnotation& annotation, int snippet_index,
                                    const RenderConfig& cfg);

}  // namespace cadet
