#include "cadet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cadet {

namespace {

std::vector<std::string> numbered_names(const std::string& prefix, int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    names.push_back(prefix + "_" + std::to_string(i));
  }
  return names;
}

void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.grammar.empty()) throw ValidationError("scenario grammar is empty");
  if (cfg.n_videos < 1) throw ValidationError("scenario needs at least one video");
  if (cfg.snippet_len < 2) throw ValidationError("snippet length must be >= 2");
  if (cfg.frames_per_video < 2 * cfg.snippet_len) {
    throw ValidationError("videos need at least two snippets of frames");
  }
  if (cfg.frame_height < 8 || cfg.frame_width < 8) {
    throw ValidationError("frame size too small to place boxes");
  }
  if (cfg.noise.box_jitter_sigma < 0.0) throw ValidationError("box jitter must be >= 0");
  for (const double p : {cfg.noise.tube_drop_prob, cfg.noise.label_flip_prob}) {
    if (p < 0.0 || p > 1.0) throw ValidationError("noise probabilities must lie in [0,1]");
  }
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw ValidationError("test fraction must lie in [0,1)");
  }
  std::set<std::vector<int>> seen;
  for (const auto& [label, tmpl] : cfg.grammar) {
    if (label < 0) throw ValidationError("negative activity label in grammar");
    if (tmpl.atoms.empty()) {
      throw ValidationError("activity " + std::to_string(label) + " has an empty template");
    }
    if (static_cast<int>(tmpl.atoms.size()) > cfg.max_parallel_tubes) {
      throw ValidationError("activity " + std::to_string(label) + " needs " +
                            std::to_string(tmpl.atoms.size()) +
                            " simultaneous tubes, above the configured maximum of " +
                            std::to_string(cfg.max_parallel_tubes));
    }
    for (const int atom : tmpl.atoms) {
      if (atom < 0) throw ValidationError("negative atomic label in grammar");
    }
    std::vector<int> key = tmpl.atoms;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) {
      throw ValidationError("two activities share the same atom multiset; templates must be distinguishable");
    }
  }
}

struct SegmentPlan {
  int label = 0;
  int first_snippet = 0;
  int n_snippets = 0;
};

// Partition the snippet axis into activity segments of 2..4 snippets, with
// optional 1..2-snippet background gaps in road style. Contiguous styles tile
// the axis exactly.
std::vector<SegmentPlan> plan_segments(const ScenarioConfig& cfg, int snippets_total, Rng& rng,
                                       std::vector<int>& deck, std::size_t& deck_at) {
  auto draw_label = [&] {
    if (deck_at == deck.size()) {
      shuffle_indices(rng, deck);
      deck_at = 0;
    }
    return deck[deck_at++];
  };
  std::vector<SegmentPlan> plan;
  int cursor = 0;
  const bool road = cfg.style == ScenarioStyle::kRoad;
  while (snippets_total - cursor >= 2) {
    if (road && !plan.empty() && snippets_total - cursor >= 3 &&
        uniform_real(rng, 0.0, 1.0) < 0.45) {
      cursor += uniform_int(rng, 1, std::min(2, snippets_total - cursor - 2));
    }
    const int remaining = snippets_total - cursor;
    int len;
    if (remaining >= 6) {
      len = uniform_int(rng, 2, 4);
    } else if (remaining == 5) {
      len = uniform_int(rng, 2, 3);
    } else {
      len = road ? std::min(remaining, uniform_int(rng, 2, 4)) : remaining;
    }
    plan.push_back(SegmentPlan{draw_label(), cursor, len});
    cursor += len;
  }
  return plan;
}

struct AgentTrack {
  int atom = 0;
  double cx0 = 0.0, cy0 = 0.0;  // center at segment start
  double cx1 = 0.0, cy1 = 0.0;  // center at segment end
  double w = 0.0, h = 0.0;
};

Box track_box_at(const AgentTrack& a, double t) {
  const double cx = a.cx0 + t * (a.cx1 - a.cx0);
  const double cy = a.cy0 + t * (a.cy1 - a.cy0);
  return Box{cx - a.w / 2.0, cy - a.h / 2.0, cx + a.w / 2.0, cy + a.h / 2.0};
}

VideoAnnotation generate_clean_video(const ScenarioConfig& cfg, int video_index, Rng& rng,
                                     std::vector<int>& deck, std::size_t& deck_at) {
  const int snippets_total = cfg.frames_per_video / cfg.snippet_len;
  VideoAnnotation video;
  video.video_id = (cfg.style == ScenarioStyle::kRoad ? "road_" : "saras_") +
                   std::string(video_index < 10 ? "00" : video_index < 100 ? "0" : "") +
                   std::to_string(video_index);
  video.n_frames = cfg.frames_per_video;
  video.height = cfg.frame_height;
  video.width = cfg.frame_width;
  video.atomic_vocab = numbered_names("atom", n_atomic_labels(cfg));
  video.activity_vocab = numbered_names("activity", static_cast<int>(cfg.grammar.size()));

  const std::vector<SegmentPlan> plan = plan_segments(cfg, snippets_total, rng, deck, deck_at);
  int tube_id = 0;
  for (std::size_t si = 0; si < plan.size(); ++si) {
    const SegmentPlan& seg = plan[si];
    const int first_frame = seg.first_snippet * cfg.snippet_len + 1;
    int last_frame = (seg.first_snippet + seg.n_snippets) * cfg.snippet_len;
    const bool is_last = si + 1 == plan.size();
    if (cfg.style == ScenarioStyle::kSaras && is_last) last_frame = cfg.frames_per_video;

    ActivitySegment activity;
    activity.label = seg.label;
    activity.interval = TemporalInterval{first_frame, last_frame};
    activity.score = 1.0;
    video.activities.push_back(activity);

    const ActivityTemplate& tmpl = cfg.grammar.at(seg.label);
    const int n_agents = static_cast<int>(tmpl.atoms.size());
    std::vector<AgentTrack> agents(static_cast<std::size_t>(n_agents));
    for (int a = 0; a < n_agents; ++a) {
      AgentTrack& track = agents[static_cast<std::size_t>(a)];
      track.atom = tmpl.atoms[static_cast<std::size_t>(a)];
      track.w = uniform_real(rng, cfg.frame_width * 0.15, cfg.frame_width * 0.30);
      track.h = uniform_real(rng, cfg.frame_height * 0.15, cfg.frame_height * 0.30);
      track.cx0 = uniform_real(rng, track.w / 2.0, cfg.frame_width - track.w / 2.0);
      track.cy0 = uniform_real(rng, track.h / 2.0, cfg.frame_height - track.h / 2.0);
      track.cx1 = uniform_real(rng, track.w / 2.0, cfg.frame_width - track.w / 2.0);
      track.cy1 = uniform_real(rng, track.h / 2.0, cfg.frame_height - track.h / 2.0);
    }
    if (tmpl.ordered) {
      // Template order realized as left-to-right appearance: sort whole tracks
      // so each keeps its own in-frame geometry, then hand out atoms by rank.
      std::stable_sort(agents.begin(), agents.end(),
                       [](const AgentTrack& a, const AgentTrack& b) { return a.cx0 < b.cx0; });
      for (int a = 0; a < n_agents; ++a) {
        agents[static_cast<std::size_t>(a)].atom = tmpl.atoms[static_cast<std::size_t>(a)];
      }
    }

    const int seg_frames = last_frame - first_frame;
    for (const AgentTrack& track : agents) {
      TubeAnnotation tube;
      tube.id = tube_id++;
      tube.action_label = track.atom;
      tube.confidence = uniform_real(rng, 0.7, 1.0);
      for (int f = first_frame; f <= last_frame; ++f) {
        const double t = seg_frames > 0 ? static_cast<double>(f - first_frame) / seg_frames : 0.0;
        tube.boxes[f] = track_box_at(track, t);
      }
      video.tubes.push_back(std::move(tube));
    }
  }
  return video;
}

VideoAnnotation apply_noise(const VideoAnnotation& clean, const ScenarioConfig& cfg, Rng& rng) {
  VideoAnnotation noisy = clean;
  noisy.tubes.clear();
  const int n_atoms = n_atomic_labels(cfg);
  for (const TubeAnnotation& tube : clean.tubes) {
    if (uniform_real(rng, 0.0, 1.0) < cfg.noise.tube_drop_prob) continue;
    TubeAnnotation copy = tube;
    if (uniform_real(rng, 0.0, 1.0) < cfg.noise.label_flip_prob && n_atoms > 1) {
      const int shift = uniform_int(rng, 1, n_atoms - 1);
      copy.action_label = (copy.action_label + shift) % n_atoms;
    }
    for (auto& [frame, box] : copy.boxes) {
      (void)frame;
      const double s = cfg.noise.box_jitter_sigma;
      Box b{box.x1 + normal(rng, 0.0, s), box.y1 + normal(rng, 0.0, s),
            box.x2 + normal(rng, 0.0, s), box.y2 + normal(rng, 0.0, s)};
      if (b.x1 > b.x2) std::swap(b.x1, b.x2);
      if (b.y1 > b.y2) std::swap(b.y1, b.y2);
      box = clamp_box(b, clean.width, clean.height);
    }
    noisy.tubes.push_back(std::move(copy));
  }
  return noisy;
}

}  // namespace

ScenarioConfig road_default_scenario() {
  ScenarioConfig cfg;
  cfg.style = ScenarioStyle::kRoad;
  cfg.grammar[0] = ActivityTemplate{{0, 1}, false};
  cfg.grammar[1] = ActivityTemplate{{0, 2}, true};
  cfg.grammar[2] = ActivityTemplate{{1, 2, 3}, false};
  cfg.grammar[3] = ActivityTemplate{{3, 4}, false};
  cfg.grammar[4] = ActivityTemplate{{2, 5}, true};
  cfg.grammar[5] = ActivityTemplate{{4, 5, 6}, true};
  return cfg;
}

ScenarioConfig saras_default_scenario() {
  ScenarioConfig cfg;
  cfg.style = ScenarioStyle::kSaras;
  cfg.grammar[0] = ActivityTemplate{{0}, false};
  cfg.grammar[1] = ActivityTemplate{{0, 1}, true};
  cfg.grammar[2] = ActivityTemplate{{1, 2}, false};
  cfg.grammar[3] = ActivityTemplate{{2, 3, 4}, true};
  cfg.grammar[4] = ActivityTemplate{{4, 5}, false};
  cfg.grammar[5] = ActivityTemplate{{5, 6}, true};
  cfg.grammar[6] = ActivityTemplate{{6, 7}, false};
  cfg.grammar[7] = ActivityTemplate{{0, 7}, false};
  return cfg;
}

int n_atomic_labels(const ScenarioConfig& cfg) {
  int n = 0;
  for (const auto& [label, tmpl] : cfg.grammar) {
    (void)label;
    for (const int atom : tmpl.atoms) n = std::max(n, atom + 1);
  }
  return n;
}

void validate_annotation(const VideoAnnotation& a) {
  if (a.video_id.empty()) throw ValidationError("annotation without a video id");
  if (a.n_frames < 1 || a.height < 1 || a.width < 1) {
    throw ValidationError("annotation for video '" + a.video_id + "' has empty dimensions");
  }
  for (const TubeAnnotation& tube : a.tubes) {
    if (tube.boxes.empty()) {
      throw ValidationError("tube " + std::to_string(tube.id) + " in video '" + a.video_id +
                            "' has no boxes");
    }
    if (tube.confidence < 0.0 || tube.confidence > 1.0) {
      throw ValidationError("tube " + std::to_string(tube.id) + " in video '" + a.video_id +
                            "' has confidence outside [0,1]");
    }
    for (const auto& [frame, box] : tube.boxes) {
      if (frame < 1 || frame > a.n_frames) {
        throw ValidationError("tube " + std::to_string(tube.id) + " in video '" + a.video_id +
                              "' has a box at frame " + std::to_string(frame) +
                              " outside [1," + std::to_string(a.n_frames) + "]");
      }
      validate_box(box);
      if (box.x2 > a.width || box.y2 > a.height || box.x1 < 0.0 || box.y1 < 0.0) {
        throw ValidationError("tube " + std::to_string(tube.id) + " in video '" + a.video_id +
                              "' leaves the frame at frame " + std::to_string(frame));
      }
    }
  }
  for (const ActivitySegment& seg : a.activities) {
    if (seg.interval.start_frame < 1 || seg.interval.end_frame > a.n_frames ||
        seg.interval.start_frame > seg.interval.end_frame) {
      throw ValidationError("activity segment outside video '" + a.video_id + "'");
    }
  }
}

GeneratedDataset generate_scenarios(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  GeneratedDataset out;
  for (int v = 0; v < cfg.n_videos; ++v) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(v)));
    std::vector<int> deck;
    for (const auto& [label, tmpl] : cfg.grammar) {
      (void)tmpl;
      deck.push_back(label);
    }
    shuffle_indices(rng, deck);
    std::size_t deck_at = 0;
    VideoAnnotation clean = generate_clean_video(cfg, v, rng, deck, deck_at);
    validate_annotation(clean);
    VideoAnnotation noisy = apply_noise(clean, cfg, rng);
    validate_annotation(noisy);
    out.clean.push_back(std::move(clean));
    out.noisy.push_back(std::move(noisy));
  }
  const int n_test = static_cast<int>(std::lround(cfg.n_videos * cfg.test_fraction));
  const int n_train = cfg.n_videos - n_test;
  for (int v = 0; v < cfg.n_videos; ++v) {
    (v < n_train ? out.train_indices : out.test_indices).push_back(v);
  }
  return out;
}

FeatureVolume render_feature_volume(const VideoAnnotation& annotation, int snippet_index,
                                    const RenderConfig& cfg) {
  if (cfg.channels < 1 || cfg.feature_h < 2 || cfg.feature_w < 2) {
    throw ValidationError("feature volume dimensions too small");
  }
  const int first_frame = snippet_index * cfg.snippet_len + 1;
  const int last_frame = first_frame + cfg.snippet_len - 1;
  if (snippet_index < 0 || last_frame > annotation.n_frames) {
    throw ValidationError("snippet " + std::to_string(snippet_index) +
                          " outside video '" + annotation.video_id + "'");
  }
  const double scale_x = static_cast<double>(cfg.feature_w) / annotation.width;
  const double scale_y = static_cast<double>(cfg.feature_h) / annotation.height;
  if (std::abs(scale_x - scale_y) > 1e-9) {
    throw ValidationError("feature grid must preserve the frame aspect ratio");
  }

  const std::size_t plane = static_cast<std::size_t>(cfg.feature_h) * cfg.feature_w;
  std::vector<double> data(static_cast<std::size_t>(cfg.channels) * cfg.snippet_len * plane,
                           0.0);
  Rng rng(derive_seed(fnv1a64(annotation.video_id), static_cast<std::uint64_t>(snippet_index)));
  if (cfg.noise_amp > 0.0) {
    for (double& v : data) v = uniform_real(rng, 0.0, cfg.noise_amp);
  }

  for (const TubeAnnotation& tube : annotation.tubes) {
    const int channel = tube.action_label % cfg.channels;
    for (int f = first_frame; f <= last_frame; ++f) {
      const auto it = tube.boxes.find(f);
      if (it == tube.boxes.end()) continue;
      const Box& box = it->second;
      const double cx = 0.5 * (box.x1 + box.x2);
      const double cy = 0.5 * (box.y1 + box.y2);
      const double half_w = 0.5 * (box.x2 - box.x1);
      const double half_h = 0.5 * (box.y2 - box.y1);
      if (half_w <= 0.0 || half_h <= 0.0) continue;
      const int t = f - first_frame;
      double* frame_plane =
          data.data() + (static_cast<std::size_t>(channel) * cfg.snippet_len + t) * plane;
      const int gy0 = std::max(0, static_cast<int>(std::floor(box.y1 * scale_y)));
      const int gy1 = std::min(cfg.feature_h - 1, static_cast<int>(std::ceil(box.y2 * scale_y)));
      const int gx0 = std::max(0, static_cast<int>(std::floor(box.x1 * scale_x)));
      const int gx1 = std::min(cfg.feature_w - 1, static_cast<int>(std::ceil(box.x2 * scale_x)));
      for (int gy = gy0; gy <= gy1; ++gy) {
        const double y_img = (gy + 0.5) / scale_y;
        const double ty = 1.0 - std::abs(y_img - cy) / half_h;
        if (ty <= 0.0) continue;
        for (int gx = gx0; gx <= gx1; ++gx) {
          const double x_img = (gx + 0.5) / scale_x;
          const double tx = 1.0 - std::abs(x_img - cx) / half_w;
          if (tx <= 0.0) continue;
          frame_plane[static_cast<std::size_t>(gy) * cfg.feature_w + gx] += tx * ty;
        }
      }
    }
  }

  FeatureVolume fv;
  fv.values = Tensor({cfg.channels, cfg.snippet_len, cfg.feature_h, cfg.feature_w},
                     std::move(data));
  fv.spatial_scale = scale_x;
  return fv;
}

}  // namespace cadet
