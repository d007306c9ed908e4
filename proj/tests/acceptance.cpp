// Release gates for the whole pipeline, one independently scripted check per
// guarantee. Each prints a single PASS/FAIL line; the process exits 0 only
// when every gate holds. argv[1] must name the command-line tool binary (the
// determinism gate drives it as a subprocess).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cadet/dataset.hpp"
#include "cadet/geometry.hpp"
#include "cadet/gradcheck.hpp"
#include "cadet/json_io.hpp"
#include "cadet/metrics.hpp"
#include "cadet/pipeline.hpp"
#include "cadet/rng.hpp"
#include "cadet/roi_pool.hpp"
#include "cadet/tensor.hpp"

namespace fs = std::filesystem;
using namespace cadet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

// ---- gate 1: every differentiable op against central differences ----------

Outcome gate_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto entries = run_gradient_checks(20);
  const double elapsed = seconds_since(t0);

  bool pass = elapsed < 120.0;
  std::string worst_name;
  double worst = -1.0;
  for (const GradCheckEntry& e : entries) {
    if (e.n_seeds < 20 || !(e.max_rel_err < 1e-4)) pass = false;
    if (e.max_rel_err > worst) {
      worst = e.max_rel_err;
      worst_name = e.name;
    }
  }
  return {pass, fmt("%zu op inputs, 20 seeds each, worst rel err %.2e (%s), %.1fs", entries.size(),
                    worst, worst_name.c_str(), elapsed)};
}

// ---- gate 2: trivial-parameter pooling reductions --------------------------

Tensor random_value_tensor(Shape shape, Rng& rng, double lo, double hi) {
  std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)));
  for (double& v : data) v = uniform_real(rng, lo, hi);
  return Tensor(std::move(shape), std::move(data));
}

Outcome gate_reductions() {
  Rng rng(0xacc2);
  double worst_zero = 0.0, worst_unit = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int c = uniform_int(rng, 1, 3), l = uniform_int(rng, 1, 3);
    const int k = uniform_int(rng, 1, 3), n_s = uniform_int(rng, 1, 2);
    const int h = uniform_int(rng, 6, 10), w = uniform_int(rng, 6, 10);
    const double scale = i % 3 == 0 ? 0.5 : 1.0;
    const FeatureVolume fv{random_value_tensor({c, l, h, w}, rng, -1.0, 1.0), scale};
    const double img_w = w / scale, img_h = h / scale;
    ActionTube tube;
    for (int t = 0; t < l; ++t) {
      Box b;
      b.x1 = uniform_real(rng, 0.05 * img_w, 0.35 * img_w);
      b.y1 = uniform_real(rng, 0.05 * img_h, 0.35 * img_h);
      b.x2 = uniform_real(rng, 0.55 * img_w, 0.95 * img_w);
      b.y2 = uniform_real(rng, 0.55 * img_h, 0.95 * img_h);
      tube.boxes.push_back(b);
    }

    const Tensor standard = roi_pool_3d(fv, tube, k, n_s);
    const Tensor zero_off = Tensor::zeros({l, k, k, 2});
    const Tensor deformed_zero = deformable_roi_pool_3d(fv, tube, zero_off, 0.1, n_s);
    for (std::int64_t j = 0; j < standard.numel(); ++j) {
      worst_zero = std::max(worst_zero,
                            std::abs(standard.values()[static_cast<std::size_t>(j)] -
                                     deformed_zero.values()[static_cast<std::size_t>(j)]));
    }

    const Tensor off = random_value_tensor({l, k, k, 2}, rng, -0.3, 0.3);
    const Tensor unit_mod = Tensor::full({l, k, k}, 1.0);
    const Tensor deformed = deformable_roi_pool_3d(fv, tube, off, 0.1, n_s);
    const Tensor modulated = modulated_deformable_roi_pool_3d(fv, tube, off, unit_mod, 0.1, n_s);
    for (std::int64_t j = 0; j < deformed.numel(); ++j) {
      worst_unit = std::max(worst_unit,
                            std::abs(deformed.values()[static_cast<std::size_t>(j)] -
                                     modulated.values()[static_cast<std::size_t>(j)]));
    }
  }
  const bool pass = worst_zero <= 1e-12 && worst_unit <= 1e-12;
  return {pass, fmt("100 instances; zero-offset gap %.2e, unit-modulation gap %.2e", worst_zero,
                    worst_unit)};
}

// ---- gate 3: offsets on a linear field shift bin means analytically --------

Outcome gate_linear_field() {
  Rng rng(0xacc3);
  double worst = 0.0;
  const int n_instances = 50;
  for (int i = 0; i < n_instances; ++i) {
    const int c = uniform_int(rng, 1, 2), l = uniform_int(rng, 1, 2);
    const int k = uniform_int(rng, 1, 3), n_s = uniform_int(rng, 1, 3);
    const int h = 12, w = 12;
    const double scale = i % 2 == 0 ? 1.0 : 0.5;

    // f(x, y) = a x + b y + d per channel and frame, exact under bilinear
    // interpolation away from the padding
    std::vector<double> a(static_cast<std::size_t>(c) * l), b(a.size()), d(a.size());
    for (double& v : a) v = uniform_real(rng, -2.0, 2.0);
    for (double& v : b) v = uniform_real(rng, -2.0, 2.0);
    for (double& v : d) v = uniform_real(rng, -1.0, 1.0);
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(c) * l * h * w);
    for (int ci = 0; ci < c; ++ci) {
      for (int t = 0; t < l; ++t) {
        const std::size_t ct = static_cast<std::size_t>(ci) * l + static_cast<std::size_t>(t);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) data.push_back(a[ct] * x + b[ct] * y + d[ct]);
        }
      }
    }
    const FeatureVolume fv{Tensor({c, l, h, w}, std::move(data)), scale};

    ActionTube tube;
    for (int t = 0; t < l; ++t) {
      Box box;  // grid extent [1.5, 10.5] with offset headroom on both sides
      box.x1 = uniform_real(rng, 1.5, 4.0) / scale;
      box.y1 = uniform_real(rng, 1.5, 4.0) / scale;
      box.x2 = uniform_real(rng, 7.0, 10.5) / scale;
      box.y2 = uniform_real(rng, 7.0, 10.5) / scale;
      tube.boxes.push_back(box);
    }
    const Tensor off = random_value_tensor({l, k, k, 2}, rng, -0.3, 0.3);

    const Tensor standard = roi_pool_3d(fv, tube, k, n_s);
    const Tensor shifted = deformable_roi_pool_3d(fv, tube, off);  // default gamma

    for (int ci = 0; ci < c; ++ci) {
      for (int t = 0; t < l; ++t) {
        const std::size_t ct = static_cast<std::size_t>(ci) * l + static_cast<std::size_t>(t);
        const Box& box = tube.boxes[static_cast<std::size_t>(t)];
        const double grid_w = (box.x2 - box.x1) * scale;
        const double grid_h = (box.y2 - box.y1) * scale;
        for (int bin = 0; bin < k * k; ++bin) {
          const std::size_t out_at = ct * static_cast<std::size_t>(k) * k +
                                     static_cast<std::size_t>(bin);
          const std::size_t off_at =
              (static_cast<std::size_t>(t) * k * k + static_cast<std::size_t>(bin)) * 2;
          const double want = standard.values()[out_at] +
                              a[ct] * 0.1 * off.values()[off_at] * grid_w +
                              b[ct] * 0.1 * off.values()[off_at + 1] * grid_h;
          worst = std::max(worst, std::abs(shifted.values()[out_at] - want));
        }
      }
    }
  }
  return {worst <= 1e-10, fmt("%d instances; worst analytic-shift gap %.2e", n_instances, worst)};
}

// ---- gate 4: chain linking against exhaustive path enumeration -------------

Outcome gate_linking() {
  // Candidate lattice: score in {0, 1}, box either X (8x5) or Y (5x2, inside
  // X). IoU(X, Y) = 10/40 = 0.25; every partial sum is an exact dyadic, so
  // scores compare exactly.
  const Box box_x{0.0, 0.0, 8.0, 5.0};
  const Box box_y{0.0, 0.0, 5.0, 2.0};
  long instances = 0;
  for (int n_steps = 1; n_steps <= 3; ++n_steps) {
    std::vector<int> counts(static_cast<std::size_t>(n_steps), 1);
    for (;;) {
      int slots = 0;
      for (const int n : counts) slots += n;
      const long assignments = 1L << (2 * slots);  // 2 bits per candidate
      for (long code = 0; code < assignments; ++code) {
        std::vector<std::vector<MicroTube>> steps(static_cast<std::size_t>(n_steps));
        long bits = code;
        for (int t = 0; t < n_steps; ++t) {
          for (int j = 0; j < counts[static_cast<std::size_t>(t)]; ++j) {
            MicroTube mt;
            mt.start_frame = 1 + t * 4;
            mt.delta = 3;
            mt.class_scores = {static_cast<double>(bits & 1)};
            mt.start_box = mt.end_box = (bits & 2) ? box_y : box_x;
            bits >>= 2;
            steps[static_cast<std::size_t>(t)].push_back(std::move(mt));
          }
        }

        // exhaustive best path, lexicographically first among ties
        double best_score = -1e300;
        std::vector<int> best_path;
        std::vector<int> path(static_cast<std::size_t>(n_steps), 0);
        for (;;) {
          double score = 0.0;
          for (int t = 0; t < n_steps; ++t) {
            const MicroTube& mt =
                steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(path[static_cast<std::size_t>(t)])];
            score += mt.class_scores[0];
            if (t > 0) {
              const MicroTube& prev = steps[static_cast<std::size_t>(t - 1)]
                                           [static_cast<std::size_t>(path[static_cast<std::size_t>(t - 1)])];
              score += box_iou(prev.end_box, mt.start_box);
            }
          }
          if (score > best_score) {
            best_score = score;
            best_path = path;
          }
          int at = n_steps - 1;
          while (at >= 0 && path[static_cast<std::size_t>(at)] + 1 ==
                                counts[static_cast<std::size_t>(at)]) {
            path[static_cast<std::size_t>(at)] = 0;
            --at;
          }
          if (at < 0) break;
          ++path[static_cast<std::size_t>(at)];
        }

        const std::vector<LinkedChain> chains = link_micro_tubes(steps, 0, 1.0);
        if (chains.empty()) {
          return {false, fmt("no chain returned on a %d-step instance", n_steps)};
        }
        const LinkedChain& got = chains.front();
        if (got.start_step != 0 || got.score != best_score || got.candidates != best_path) {
          std::ostringstream oss;
          oss << "disagreement after " << instances << " instances: got score " << got.score
              << ", want " << best_score;
          return {false, oss.str()};
        }
        ++instances;
      }
      int at = n_steps - 1;
      while (at >= 0 && counts[static_cast<std::size_t>(at)] == 3) {
        counts[static_cast<std::size_t>(at)] = 1;
        --at;
      }
      if (at < 0) break;
      ++counts[static_cast<std::size_t>(at)];
    }
  }
  return {true, fmt("%ld instances, exact score and path agreement", instances)};
}

// ---- gate 5: label smoothing branch table and closure properties -----------

Outcome gate_smoothing() {
  const int A = 0, B = 1;
  if (smooth_labels({A, A, B, A, A}) != std::vector<int>{A, A, A, A, A}) {
    return {false, "isolated flip between equal neighbors was not absorbed"};
  }
  if (smooth_labels({A, A, B, B}) != std::vector<int>{A, A, B, B}) {
    return {false, "a genuine boundary was altered"};
  }
  if (smooth_labels({A}) != std::vector<int>{A}) {
    return {false, "a single-element sequence changed"};
  }

  Rng rng(0xacc5);
  for (int i = 0; i < 10000; ++i) {
    std::vector<int> seq(static_cast<std::size_t>(uniform_int(rng, 1, 12)));
    for (int& v : seq) v = uniform_int(rng, 0, 3);
    const std::vector<int> once = smooth_labels(seq);
    if (smooth_labels(once) != once) {
      return {false, fmt("not idempotent on random sequence %d", i)};
    }
    const std::set<int> before(seq.begin(), seq.end());
    for (const int v : once) {
      if (before.count(v) == 0) return {false, fmt("invented label %d on sequence %d", v, i)};
    }
  }
  return {true, "branch table, idempotence and label closure over 10000 sequences"};
}

// ---- gate 6: greedy matching against assignment enumeration, mAP sweep -----

struct OracleAssignment {
  int tp = 0;
  double iou_sum = 0.0;
  std::vector<int> gt_choice;

  bool better_than(const OracleAssignment& other) const {
    if (tp != other.tp) return tp > other.tp;
    if (iou_sum != other.iou_sum) return iou_sum > other.iou_sum;
    return gt_choice < other.gt_choice;
  }
};

MatchOutput oracle_match(const MatchInput& input, double delta) {
  const int m = static_cast<int>(input.scores.size());
  MatchOutput out;
  out.order.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) out.order[static_cast<std::size_t>(i)] = i;
  std::sort(out.order.begin(), out.order.end(), [&](int x, int y) {
    if (input.scores[static_cast<std::size_t>(x)] != input.scores[static_cast<std::size_t>(y)]) {
      return input.scores[static_cast<std::size_t>(x)] > input.scores[static_cast<std::size_t>(y)];
    }
    if (input.content_keys[static_cast<std::size_t>(x)] !=
        input.content_keys[static_cast<std::size_t>(y)]) {
      return input.content_keys[static_cast<std::size_t>(x)] <
             input.content_keys[static_cast<std::size_t>(y)];
    }
    return x < y;
  });
  out.true_positive.assign(static_cast<std::size_t>(m), 0);
  out.matched_gt.assign(static_cast<std::size_t>(m), -1);
  std::vector<char> gt_used(static_cast<std::size_t>(input.n_ground_truth), 0);

  std::size_t begin = 0;
  while (begin < out.order.size()) {
    std::size_t end = begin;
    while (end < out.order.size() &&
           input.scores[static_cast<std::size_t>(out.order[end])] ==
               input.scores[static_cast<std::size_t>(out.order[begin])]) {
      ++end;
    }
    const std::size_t g_n = end - begin;

    // Odometer over every assignment of the group; -1 means unmatched. The
    // IoU sum folds in member order so equal assignments compare identically.
    OracleAssignment best;
    best.tp = -1;
    std::vector<int> choice(g_n, -1);
    for (;;) {
      bool valid = true;
      OracleAssignment cur;
      cur.gt_choice = choice;
      std::vector<char> taken(static_cast<std::size_t>(input.n_ground_truth), 0);
      for (std::size_t i = 0; i < g_n && valid; ++i) {
        const int g = choice[i];
        if (g < 0) continue;
        const int det = out.order[begin + i];
        if (gt_used[static_cast<std::size_t>(g)] || taken[static_cast<std::size_t>(g)] ||
            input.iou[static_cast<std::size_t>(det)][static_cast<std::size_t>(g)] < delta) {
          valid = false;
          break;
        }
        taken[static_cast<std::size_t>(g)] = 1;
        cur.tp += 1;
        cur.iou_sum += input.iou[static_cast<std::size_t>(det)][static_cast<std::size_t>(g)];
      }
      if (valid && cur.better_than(best)) best = cur;

      std::size_t at = 0;
      while (at < g_n && choice[at] + 1 == input.n_ground_truth) {
        choice[at] = -1;
        ++at;
      }
      if (at == g_n) break;
      ++choice[at];
    }

    for (std::size_t i = 0; i < g_n; ++i) {
      const int g = best.gt_choice[i];
      if (g >= 0) {
        gt_used[static_cast<std::size_t>(g)] = 1;
        out.true_positive[begin + i] = 1;
        out.matched_gt[begin + i] = g;
      }
    }
    begin = end;
  }
  return out;
}

Outcome gate_matching() {
  Rng rng(0xacc6);
  for (int i = 0; i < 1000; ++i) {
    MatchInput input;
    const int m = uniform_int(rng, 0, 5);
    input.n_ground_truth = uniform_int(rng, 0, 5);
    for (int det = 0; det < m; ++det) {
      input.scores.push_back(uniform_int(rng, 0, 7) * 0.125);  // dyadic, ties common
      input.content_keys.push_back({uniform_real(rng, 0.0, 1.0)});
      std::vector<double> row(static_cast<std::size_t>(input.n_ground_truth));
      for (double& v : row) v = uniform_int(rng, 0, 4) * 0.25;
      input.iou.push_back(std::move(row));
    }
    const double delta = i % 2 == 0 ? 0.25 : 0.5;
    const MatchOutput got = match_detections(input, delta);
    const MatchOutput want = oracle_match(input, delta);
    if (got.order != want.order || got.true_positive != want.true_positive ||
        got.matched_gt != want.matched_gt) {
      return {false, fmt("matching disagrees with enumeration on instance %d", i)};
    }
  }

  // threshold sweep: stricter overlap must never raise the mean AP
  Rng sweep_rng(0xacc66);
  for (int i = 0; i < 1000; ++i) {
    std::vector<ActivitySegment> gt, dets;
    for (int label = 0; label < 3; ++label) {
      const int n_gt = uniform_int(sweep_rng, 0, 3);
      for (int g = 0; g < n_gt; ++g) {
        const int start = uniform_int(sweep_rng, 1, 80);
        gt.push_back({label, {start, start + uniform_int(sweep_rng, 2, 14)}, 1.0});
      }
      const int n_det = uniform_int(sweep_rng, 0, 4);
      for (int d = 0; d < n_det; ++d) {
        const int start = uniform_int(sweep_rng, 1, 80);
        dets.push_back({label,
                        {start, start + uniform_int(sweep_rng, 2, 14)},
                        uniform_int(sweep_rng, 0, 7) * 0.125});
      }
    }
    if (gt.empty()) continue;
    double prev = 2.0, prev_interp = 2.0;
    for (double delta = 0.1; delta < 0.95; delta += 0.1) {
      const MapResult r = temporal_detection_map(dets, gt, delta);
      if (r.map > prev || r.map_interpolated > prev_interp) {
        return {false, fmt("mAP rose from %.4f to %.4f at threshold %.1f (instance %d)", prev,
                           r.map, delta, i)};
      }
      prev = r.map;
      prev_interp = r.map_interpolated;
    }
  }
  return {true, "1000 matching instances agree; mAP non-increasing over 1000 sweeps"};
}

// ---- gate 7: synthetic end-to-end training --------------------------------

PipelineConfig desk_pipeline() {
  PipelineConfig cfg;
  cfg.k = 3;
  cfg.n_s = 2;
  cfg.d_node = 32;
  cfg.d_h = 32;
  cfg.d_out = 64;
  cfg.kappa = 2;
  cfg.readout = ReadoutMode::kFinal;
  cfg.background = true;
  cfg.lr = 0.005;
  cfg.momentum = 0.9;
  cfg.epochs = 40;
  cfg.seed = 0;
  cfg.offsets_shared_over_time = true;
  cfg.render.channels = 8;
  cfg.render.feature_h = 16;
  cfg.render.feature_w = 16;
  cfg.render.noise_amp = 0.01;
  cfg.render.snippet_len = cfg.snippet_len;
  return cfg;
}

struct ExampleSets {
  std::vector<TrainExample> train, val;
};

ExampleSets assemble_sets(const GeneratedDataset& ds, const PipelineConfig& cfg) {
  ExampleSets sets;
  sets.train = assemble_examples(ds.clean, ds.noisy, ds.train_indices, cfg);
  sets.val = assemble_examples(ds.clean, ds.noisy, ds.test_indices, cfg);
  return sets;
}

// mean validation accuracy over the last 10 epochs: a fixed-budget measure
// that ignores single-epoch spikes
double plateau_accuracy(const std::vector<EpochLog>& log) {
  const std::size_t tail = std::min<std::size_t>(10, log.size());
  double sum = 0.0;
  for (std::size_t i = log.size() - tail; i < log.size(); ++i) sum += log[i].val_accuracy;
  return sum / static_cast<double>(tail);
}

double test_split_map50(const GeneratedDataset& ds, const ModelParams& params,
                        const PipelineConfig& cfg, int n_activity) {
  std::vector<ActivitySegment> dets, gt;
  int base = 0;
  for (const int v : ds.test_indices) {
    const VideoAnnotation& clean = ds.clean[static_cast<std::size_t>(v)];
    const VideoAnnotation& noisy = ds.noisy[static_cast<std::size_t>(v)];
    const auto preds = classify_video(clean, noisy, params, cfg);
    std::vector<int> labels;
    std::vector<std::vector<double>> probs;
    for (const SnippetPrediction& p : preds) {
      labels.push_back(p.label);
      probs.push_back(p.probabilities);
    }
    for (ActivitySegment seg :
         extract_segments(smooth_labels(labels), probs, cfg.snippet_len, n_activity - 1)) {
      seg.interval.start_frame += base;
      seg.interval.end_frame += base;
      dets.push_back(seg);
    }
    for (ActivitySegment seg : clean.activities) {
      seg.interval.start_frame += base;
      seg.interval.end_frame += base;
      gt.push_back(seg);
    }
    base += clean.n_frames + 100;  // videos never overlap on the shared axis
  }
  return temporal_detection_map(dets, gt, 0.5).map;
}

Outcome gate_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig base_cfg = desk_pipeline();

  ScenarioConfig scenario = road_default_scenario();
  const GeneratedDataset clean_ds = generate_scenarios(scenario);
  const int n_activity =
      n_activity_classes(base_cfg, clean_ds.clean.front().activity_vocab);

  double clean_acc = 0.0, clean_map = 0.0;
  {
    const ExampleSets sets = assemble_sets(clean_ds, base_cfg);
    const TrainResult result = train(sets.train, sets.val, base_cfg, n_activity);
    clean_acc = result.best_val_accuracy;
    clean_map = test_split_map50(clean_ds, result.params, base_cfg, n_activity);
  }

  scenario.noise = {2.0, 0.1, 0.05};
  const GeneratedDataset noisy_ds = generate_scenarios(scenario);
  const ExampleSets noisy_sets = assemble_sets(noisy_ds, base_cfg);

  double sum_deformable = 0.0, sum_standard = 0.0;
  std::string runs;
  for (const PoolingMode mode : {PoolingMode::kDeformable, PoolingMode::kStandard}) {
    for (const std::uint64_t seed : {0, 1, 2}) {
      PipelineConfig cfg = base_cfg;
      cfg.pooling = mode;
      cfg.seed = seed;
      const TrainResult result = train(noisy_sets.train, noisy_sets.val, cfg, n_activity);
      const double acc = plateau_accuracy(result.log);
      (mode == PoolingMode::kDeformable ? sum_deformable : sum_standard) += acc;
      runs += fmt(" %s/s%llu=%.4f", mode == PoolingMode::kDeformable ? "def" : "std",
                  static_cast<unsigned long long>(seed), acc);
    }
  }
  const double mean_deformable = sum_deformable / 3.0;
  const double mean_standard = sum_standard / 3.0;
  const double elapsed = seconds_since(t0);

  const bool pass = base_cfg.epochs <= 200 && clean_acc >= 0.95 && clean_map >= 0.90 &&
                    mean_deformable >= mean_standard && elapsed < 1800.0;
  return {pass, fmt("clean acc=%.4f map@0.5=%.4f (%d epochs); noisy plateau def=%.4f std=%.4f"
                    " over%s; %.0fs",
                    clean_acc, clean_map, base_cfg.epochs, mean_deformable, mean_standard,
                    runs.c_str(), elapsed)};
}

// ---- gate 8: byte determinism through the command line ---------------------

int run_tool(const std::string& command) {
  const int raw = std::system(command.c_str());
  if (raw == -1) return -1;
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -2;
}

std::string slurp_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* why) {
  std::set<std::string> names_a, names_b;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.is_regular_file()) names_a.insert(fs::relative(entry.path(), a).string());
  }
  for (const auto& entry : fs::recursive_directory_iterator(b)) {
    if (entry.is_regular_file()) names_b.insert(fs::relative(entry.path(), b).string());
  }
  if (names_a != names_b) {
    *why = "directory trees hold different files";
    return false;
  }
  for (const std::string& name : names_a) {
    if (slurp_bytes(a / name) != slurp_bytes(b / name)) {
      *why = "file " + name + " differs";
      return false;
    }
  }
  return true;
}

Outcome gate_determinism(const std::string& tool) {
  if (tool.empty()) return {false, "no tool binary path given"};

  const fs::path root = fs::temp_directory_path() / "cadet_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string quiet = " >> " + (root / "tool.log").string() + " 2>&1";

  const std::string gen_flags =
      " generate --videos 4 --frames 48 --seed 9 --jitter 1.5 --drop 0.1 --flip 0.05 --out ";
  for (const char* dir : {"g1", "g2"}) {
    const int rc = run_tool(tool + gen_flags + (root / dir).string() + quiet);
    if (rc != 0) return {false, fmt("generate into %s exited with %d", dir, rc)};
  }
  std::string why;
  if (!same_tree(root / "g1", root / "g2", &why)) {
    return {false, "repeated generate differs: " + why};
  }

  PipelineConfig cfg = desk_pipeline();
  cfg.epochs = 4;
  save_pipeline_config((root / "pipeline.json").string(), cfg);
  const std::string train_flags = " train --dataset " + (root / "g1").string() + " --config " +
                                  (root / "pipeline.json").string() + " --out ";
  for (const char* name : {"ck1.bin", "ck2.bin"}) {
    const int rc = run_tool(tool + train_flags + (root / name).string() + quiet);
    if (rc != 0) return {false, fmt("train run %s exited with %d", name, rc)};
  }
  if (slurp_bytes(root / "ck1.bin") != slurp_bytes(root / "ck2.bin")) {
    return {false, "repeated train produced different checkpoints"};
  }
  if (slurp_bytes(root / "ck1.bin").empty()) {
    return {false, "train produced an empty checkpoint"};
  }
  return {true, "generate and train are byte-identical across repeated runs"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string tool = argc > 1 ? argv[1] : "";

  const std::vector<std::pair<int, std::function<Outcome()>>> gates = {
      {1, gate_gradients},
      {2, gate_reductions},
      {3, gate_linear_field},
      {4, gate_linking},
      {5, gate_smoothing},
      {6, gate_matching},
      {7, gate_end_to_end},
      {8, [&] { return gate_determinism(tool); }},
  };

  bool all = true;
  for (const auto& [id, gate] : gates) {
    Outcome outcome;
    try {
      outcome = gate();
    } catch (const std::exception& e) {
      outcome = {false, std::string("unexpected error: ") + e.what()};
    }
    std::printf("criterion %d: %s  %s\n", id, outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
    all = all && outcome.pass;
  }
  return all ? 0 : 1;
}
