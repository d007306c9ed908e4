#include "cadet/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace cadet {

void validate_pipeline_config(const PipelineConfig& cfg) {
  if (cfg.snippet_len < 2) throw ValidationError("snippet length must be >= 2");
  if (cfg.tube_len != cfg.snippet_len) {
    throw ValidationError("tube length must match snippet length");
  }
  if (cfg.delta < 1 || cfg.snippet_len % (cfg.delta + 1) != 0) {
    throw ValidationError("micro-tube gap " + std::to_string(cfg.delta) +
                          " does not tile a " + std::to_string(cfg.snippet_len) +
                          "-frame snippet");
  }
  if (cfg.k < 1 || cfg.n_s < 1) throw ValidationError("pooling needs k >= 1 and n_s >= 1");
  if (cfg.gamma < 0.0) throw ValidationError("offset magnitude scale must be >= 0");
  if (cfg.d_node < 1 || cfg.d_h < 1 || cfg.d_out < 1) {
    throw ValidationError("network widths must be positive");
  }
  if (cfg.kappa < 1) throw ValidationError("similarity neighbor count must be >= 1");
  if (cfg.lr <= 0.0) throw ValidationError("learning rate must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw ValidationError("momentum must lie in [0,1)");
  }
  if (cfg.epochs < 1) throw ValidationError("training needs at least one epoch");
  if (cfg.render.snippet_len != cfg.snippet_len) {
    throw ValidationError("render snippet length must match the pipeline");
  }
  if (cfg.render.channels < 1 || cfg.render.feature_h < 2 || cfg.render.feature_w < 2) {
    throw ValidationError("feature volume dimensions too small");
  }
}

int n_activity_classes(const PipelineConfig& cfg, const std::vector<std::string>& activity_vocab) {
  if (activity_vocab.empty()) throw ValidationError("empty activity vocabulary");
  return static_cast<int>(activity_vocab.size()) + (cfg.background ? 1 : 0);
}

ModelParams init_params(const PipelineConfig& cfg, int n_activity) {
  validate_pipeline_config(cfg);
  Rng rng(derive_seed(cfg.seed, 0x70617261));
  ModelParams p;
  p.offset = make_offset_predictor(cfg.render.channels, cfg.tube_len, cfg.k,
                                   cfg.pooling == PoolingMode::kModulated,
                                   cfg.offsets_shared_over_time);
  const int in_dim = cfg.render.channels * cfg.tube_len * cfg.k * cfg.k;
  const double bound = std::sqrt(1.0 / in_dim);
  std::vector<double> w(static_cast<std::size_t>(in_dim) * cfg.d_node);
  for (double& v : w) v = uniform_real(rng, -bound, bound);
  p.w_proj = Tensor({in_dim, cfg.d_node}, std::move(w), true);
  p.b_proj = Tensor::zeros({cfg.d_node}, true);
  p.gcn = make_gcn_params(cfg.d_node, cfg.d_h, cfg.d_out, n_activity, cfg.readout, rng);
  return p;
}

std::vector<Tensor> trainable_params(const ModelParams& params) {
  return {params.offset.weight, params.offset.bias, params.w_proj, params.b_proj,
          params.gcn.w1,        params.gcn.b1,      params.gcn.w2,  params.gcn.b2,
          params.gcn.w3,        params.gcn.b3,      params.gcn.wc,  params.gcn.bc};
}

std::map<std::string, Tensor> named_params(const ModelParams& params) {
  return {{"offset.weight", params.offset.weight},
          {"offset.bias", params.offset.bias},
          {"proj.weight", params.w_proj},
          {"proj.bias", params.b_proj},
          {"gcn.w1", params.gcn.w1},
          {"gcn.b1", params.gcn.b1},
          {"gcn.w2", params.gcn.w2},
          {"gcn.b2", params.gcn.b2},
          {"gcn.w3", params.gcn.w3},
          {"gcn.b3", params.gcn.b3},
          {"classifier.weight", params.gcn.wc},
          {"classifier.bias", params.gcn.bc}};
}

void load_params(ModelParams& params, const std::map<std::string, Tensor>& loaded) {
  std::map<std::string, Tensor> expected = named_params(params);
  if (loaded.size() != expected.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(loaded.size()) +
                          " tensors, expected " + std::to_string(expected.size()));
  }
  for (auto& [name, target] : expected) {
    const auto it = loaded.find(name);
    if (it == loaded.end()) throw ValidationError("checkpoint is missing tensor '" + name + "'");
    if (it->second.shape() != target.shape()) {
      throw ValidationError("checkpoint tensor '" + name + "' has shape " +
                            shape_str(it->second.shape()) + ", expected " +
                            shape_str(target.shape()));
    }
    std::copy(it->second.values().begin(), it->second.values().end(), target.values().begin());
  }
}

std::vector<std::pair<int, int>> segment_video(int n_frames, int snippet_len) {
  if (n_frames < 1) throw ValidationError("video without frames");
  if (snippet_len < 1) throw ValidationError("snippet length must be >= 1");
  std::vector<std::pair<int, int>> out;
  for (int start = 1; start + snippet_len - 1 <= n_frames; start += snippet_len) {
    out.emplace_back(start, start + snippet_len - 1);
  }
  return out;
}

std::vector<ActionTube> snippet_tubes(const VideoAnnotation& annotation, int snippet_index,
                                      int snippet_len) {
  const int first = snippet_index * snippet_len + 1;
  const int last = first + snippet_len - 1;
  if (snippet_index < 0 || last > annotation.n_frames) {
    throw ValidationError("snippet " + std::to_string(snippet_index) + " outside video '" +
                          annotation.video_id + "'");
  }
  std::vector<ActionTube> tubes;
  for (const TubeAnnotation& src : annotation.tubes) {
    if (src.boxes.empty()) continue;
    if (src.boxes.begin()->first > last || src.boxes.rbegin()->first < first) continue;
    ActionTube tube;
    tube.id = src.id;
    tube.snippet_index = snippet_index;
    tube.action_label = src.action_label;
    tube.confidence = src.confidence;
    tube.first_frame = 0;
    for (int f = first; f <= last; ++f) {
      auto it = src.boxes.find(f);
      if (it != src.boxes.end() && tube.first_frame == 0) tube.first_frame = f;
      if (it == src.boxes.end()) {
        // Nearest annotated frame stands in for a missing one.
        const auto after = src.boxes.lower_bound(f);
        if (after == src.boxes.end()) {
          it = std::prev(src.boxes.end());
        } else if (after == src.boxes.begin()) {
          it = after;
        } else {
          const auto before = std::prev(after);
          it = (f - before->first) <= (after->first - f) ? before : after;
        }
      }
      tube.boxes.push_back(it->second);
    }
    if (tube.first_frame == 0) tube.first_frame = first;
    tubes.push_back(std::move(tube));
  }
  return tubes;
}

namespace {

ActionTube whole_frame_tube(int snippet_index, int snippet_len, int width, int height) {
  ActionTube tube;
  tube.id = -1;
  tube.snippet_index = snippet_index;
  tube.first_frame = snippet_index * snippet_len + 1;
  tube.action_label = kBackgroundNodeLabel;
  tube.confidence = 1.0;
  tube.boxes.assign(static_cast<std::size_t>(snippet_len),
                    Box{0.0, 0.0, static_cast<double>(width), static_cast<double>(height)});
  return tube;
}

Tensor pool_tube(const FeatureVolume& features, const ActionTube& tube, const ModelParams& params,
                 const PipelineConfig& cfg) {
  const Tensor standard = roi_pool_3d(features, tube, cfg.k, cfg.n_s);
  if (cfg.pooling == PoolingMode::kStandard) return standard;
  const OffsetField field = predict_offsets(standard, params.offset);
  if (cfg.pooling == PoolingMode::kDeformable) {
    return deformable_roi_pool_3d(features, tube, field.offsets, cfg.gamma, cfg.n_s);
  }
  return modulated_deformable_roi_pool_3d(features, tube, field.offsets, field.modulation,
                                          cfg.gamma, cfg.n_s);
}

}  // namespace

SnippetGraph snippet_scene_graph(const FeatureVolume& features, std::vector<ActionTube> tubes,
                                 const ModelParams& params, const PipelineConfig& cfg,
                                 int frame_width, int frame_height) {
  validate_feature_volume(features);
  int snippet_index = 0;
  if (tubes.empty()) {
    tubes.push_back(whole_frame_tube(snippet_index, cfg.snippet_len, frame_width, frame_height));
  } else {
    snippet_index = tubes.front().snippet_index;
  }
  for (const ActionTube& t : tubes) {
    if (static_cast<int>(t.boxes.size()) != cfg.tube_len) {
      throw ValidationError("tube " + std::to_string(t.id) + " has " +
                            std::to_string(t.boxes.size()) + " boxes, expected " +
                            std::to_string(cfg.tube_len));
    }
  }

  const std::vector<int> order = canonical_tube_order(tubes);
  std::vector<ActionTube> sorted;
  sorted.reserve(tubes.size());
  for (const int i : order) sorted.push_back(tubes[static_cast<std::size_t>(i)]);

  std::vector<Tensor> rows;
  rows.reserve(sorted.size());
  for (const ActionTube& tube : sorted) {
    const Tensor pooled = pool_tube(features, tube, params, cfg);
    rows.push_back(project_node_features(pooled, params.w_proj, params.b_proj));
  }
  SnippetGraph out;
  out.node_features = stack_rows(rows);
  out.graph = build_scene_graph(sorted, out.node_features, cfg.kappa);
  return out;
}

SnippetForward snippet_forward(const FeatureVolume& features, std::vector<ActionTube> tubes,
                               const ModelParams& params, const PipelineConfig& cfg,
                               int frame_width, int frame_height) {
  const SnippetGraph sg =
      snippet_scene_graph(features, std::move(tubes), params, cfg, frame_width, frame_height);
  const Tensor readout = gcn_forward(sg.node_features, sg.graph.merged_adjacency, params.gcn);

  SnippetForward out;
  out.logits = classify_logits(readout, params.gcn);
  out.node_count = sg.graph.node_count;
  return out;
}

std::vector<SnippetPrediction> classify_video(const VideoAnnotation& features_from,
                                              const VideoAnnotation& tubes_from,
                                              const ModelParams& params,
                                              const PipelineConfig& cfg) {
  validate_pipeline_config(cfg);
  if (features_from.n_frames != tubes_from.n_frames) {
    throw ValidationError("feature and tube annotations disagree on video length for '" +
                          features_from.video_id + "'");
  }
  const auto snippets = segment_video(features_from.n_frames, cfg.snippet_len);
  std::vector<SnippetPrediction> predictions;
  for (std::size_t s = 0; s < snippets.size(); ++s) {
    const int snippet_index = static_cast<int>(s);
    const FeatureVolume features =
        render_feature_volume(features_from, snippet_index, cfg.render);
    std::vector<ActionTube> tubes = snippet_tubes(tubes_from, snippet_index, cfg.snippet_len);
    const SnippetForward fw = snippet_forward(features, std::move(tubes), params, cfg,
                                              features_from.width, features_from.height);
    SnippetPrediction pred;
    pred.snippet_index = snippet_index;
    pred.probabilities = softmax(fw.logits.values());
    pred.label = static_cast<int>(
        std::max_element(pred.probabilities.begin(), pred.probabilities.end()) -
        pred.probabilities.begin());
    pred.node_count = fw.node_count;
    predictions.push_back(std::move(pred));
  }
  return predictions;
}

std::vector<int> smooth_labels(std::vector<int> labels) {
  if (labels.empty()) throw ValidationError("smoothing an empty label sequence");
  for (std::size_t i = 1; i + 1 < labels.size(); ++i) {
    if (labels[i] != labels[i - 1] && labels[i + 1] == labels[i - 1]) {
      labels[i] = labels[i - 1];
    }
  }
  return labels;
}

std::vector<ActivitySegment> extract_segments(const std::vector<int>& labels,
                                              const std::vector<std::vector<double>>& probabilities,
                                              int snippet_len, int skip_label) {
  if (labels.size() != probabilities.size()) {
    throw ValidationError("label and probability counts differ");
  }
  std::vector<ActivitySegment> segments;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i < labels.size() && labels[i] == labels[run_start]) continue;
    const int label = labels[run_start];
    if (label != skip_label) {
      ActivitySegment seg;
      seg.label = label;
      seg.interval.start_frame = static_cast<int>(run_start) * snippet_len + 1;
      seg.interval.end_frame = static_cast<int>(i) * snippet_len;
      double score = 0.0;
      for (std::size_t j = run_start; j < i; ++j) {
        const auto& p = probabilities[j];
        if (label < 0 || label >= static_cast<int>(p.size())) {
          throw ValidationError("label outside probability vector");
        }
        score += p[static_cast<std::size_t>(label)];
      }
      seg.score = score / static_cast<double>(i - run_start);
      segments.push_back(seg);
    }
    run_start = i;
  }
  return segments;
}

int snippet_activity_label(const VideoAnnotation& annotation, int snippet_index,
                           const PipelineConfig& cfg) {
  const int first = snippet_index * cfg.snippet_len + 1;
  const int last = first + cfg.snippet_len - 1;
  for (const ActivitySegment& seg : annotation.activities) {
    if (seg.interval.start_frame <= first && seg.interval.end_frame >= last) {
      return seg.label;
    }
  }
  if (!cfg.background) {
    throw ValidationError("snippet " + std::to_string(snippet_index) + " of video '" +
                          annotation.video_id +
                          "' is not covered by any activity and no background class exists");
  }
  return static_cast<int>(annotation.activity_vocab.size());
}

std::vector<TrainExample> assemble_examples(const std::vector<VideoAnnotation>& feature_source,
                                            const std::vector<VideoAnnotation>& tube_source,
                                            const std::vector<int>& video_indices,
                                            const PipelineConfig& cfg) {
  if (feature_source.size() != tube_source.size()) {
    throw ValidationError("feature and tube annotation counts differ");
  }
  std::vector<TrainExample> examples;
  for (const int v : video_indices) {
    if (v < 0 || v >= static_cast<int>(feature_source.size())) {
      throw ValidationError("video index " + std::to_string(v) + " outside dataset");
    }
    const VideoAnnotation& clean = feature_source[static_cast<std::size_t>(v)];
    const VideoAnnotation& tubes_from = tube_source[static_cast<std::size_t>(v)];
    const auto snippets = segment_video(clean.n_frames, cfg.snippet_len);
    for (std::size_t s = 0; s < snippets.size(); ++s) {
      TrainExample ex;
      ex.video_id = clean.video_id;
      ex.snippet_index = static_cast<int>(s);
      ex.features = render_feature_volume(clean, ex.snippet_index, cfg.render);
      ex.tubes = snippet_tubes(tubes_from, ex.snippet_index, cfg.snippet_len);
      ex.activity_label = snippet_activity_label(clean, ex.snippet_index, cfg);
      examples.push_back(std::move(ex));
    }
  }
  return examples;
}

namespace {

double evaluate_accuracy(const std::vector<TrainExample>& examples, const ModelParams& params,
                         const PipelineConfig& cfg, int frame_width, int frame_height) {
  if (examples.empty()) return 0.0;
  int correct = 0;
  for (const TrainExample& ex : examples) {
    const SnippetForward fw =
        snippet_forward(ex.features, ex.tubes, params, cfg, frame_width, frame_height);
    const std::vector<double>& z = fw.logits.values();
    const int label = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (label == ex.activity_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::map<std::string, std::vector<double>> snapshot_values(const ModelParams& params) {
  std::map<std::string, std::vector<double>> snap;
  for (const auto& [name, tensor] : named_params(params)) {
    snap[name] = tensor.values();
  }
  return snap;
}

void restore_values(ModelParams& params, const std::map<std::string, std::vector<double>>& snap) {
  for (auto& [name, tensor] : named_params(params)) {
    tensor.values() = snap.at(name);
  }
}

}  // namespace

TrainResult train(const std::vector<TrainExample>& train_set,
                  const std::vector<TrainExample>& val_set, const PipelineConfig& cfg,
                  int n_activity) {
  validate_pipeline_config(cfg);
  if (train_set.empty()) throw ValidationError("training set is empty");
  for (const TrainExample& ex : train_set) {
    if (ex.activity_label < 0 || ex.activity_label >= n_activity) {
      throw ValidationError("activity label " + std::to_string(ex.activity_label) +
                            " outside the " + std::to_string(n_activity) + "-class space");
    }
  }

  // Frame size only shapes the whole-frame fallback box; recover it from the
  // volume geometry.
  const int frame_width = static_cast<int>(std::lround(
      train_set.front().features.values.dim(3) / train_set.front().features.spatial_scale));
  const int frame_height = static_cast<int>(std::lround(
      train_set.front().features.values.dim(2) / train_set.front().features.spatial_scale));

  TrainResult result;
  result.params = init_params(cfg, n_activity);
  SgdMomentum optimizer(trainable_params(result.params), cfg.lr, cfg.momentum);

  std::map<std::string, std::vector<double>> best = snapshot_values(result.params);
  result.best_epoch = 0;
  result.best_val_accuracy = -1.0;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 0x65706f00u + static_cast<std::uint64_t>(epoch)));
    shuffle_indices(shuffle_rng, order);

    double loss_sum = 0.0;
    int correct = 0;
    for (const std::size_t idx : order) {
      const TrainExample& ex = train_set[idx];
      Tape tape;
      TapeScope scope(tape);
      const SnippetForward fw =
          snippet_forward(ex.features, ex.tubes, result.params, cfg, frame_width, frame_height);
      const Tensor loss = softmax_cross_entropy(fw.logits, ex.activity_label);
      const double loss_value = loss.item();
      if (!std::isfinite(loss_value)) {
        throw ValidationError("non-finite loss at epoch " + std::to_string(epoch) +
                              ", video '" + ex.video_id + "' snippet " +
                              std::to_string(ex.snippet_index));
      }
      loss_sum += loss_value;
      const std::vector<double>& z = fw.logits.values();
      if (static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin()) ==
          ex.activity_label) {
        ++correct;
      }
      tape.backward(loss);
      optimizer.step();
    }

    EpochLog log;
    log.epoch = epoch;
    log.mean_loss = loss_sum / static_cast<double>(train_set.size());
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    log.val_accuracy = val_set.empty()
                           ? log.train_accuracy
                           : evaluate_accuracy(val_set, result.params, cfg, frame_width,
                                               frame_height);
    result.log.push_back(log);
    if (log.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = log.val_accuracy;
      result.best_epoch = epoch;
      best = snapshot_values(result.params);
    }
  }
  restore_values(result.params, best);
  return result;
}

}  // namespace cadet
