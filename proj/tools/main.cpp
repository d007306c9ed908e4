#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cadet/checkpoint.hpp"
#include "cadet/dataset.hpp"
#include "cadet/errors.hpp"
#include "cadet/gradcheck.hpp"
#include "cadet/json_io.hpp"
#include "cadet/metrics.hpp"
#include "cadet/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

// Videos are concatenated onto one global frame axis with a guard gap, so
// per-video segments can never overlap across videos.
constexpr int kVideoFrameGap = 100;

cadet::PoolingMode parse_pooling(const std::string& name) {
  if (name == "standard") return cadet::PoolingMode::kStandard;
  if (name == "deformable") return cadet::PoolingMode::kDeformable;
  if (name == "modulated") return cadet::PoolingMode::kModulated;
  throw cadet::ValidationError("unknown pooling mode '" + name + "'");
}

struct GenerateArgs {
  std::string out;
  std::string config;
  std::string style = "road";
  int videos = 0;
  int frames = 0;
  std::uint64_t seed = 0;
  double jitter = 0.0, drop = 0.0, flip = 0.0;
  double test_fraction = 0.0;
  CLI::Option *opt_videos = nullptr, *opt_frames = nullptr, *opt_seed = nullptr,
              *opt_jitter = nullptr, *opt_drop = nullptr, *opt_flip = nullptr,
              *opt_test_fraction = nullptr;
};

int run_generate(const GenerateArgs& args) {
  cadet::ScenarioConfig cfg;
  if (!args.config.empty()) {
    cfg = cadet::load_scenario_config(args.config);
  } else {
    cfg = args.style == "saras" ? cadet::saras_default_scenario()
                                : cadet::road_default_scenario();
  }
  if (args.opt_videos->count() > 0) cfg.n_videos = args.videos;
  if (args.opt_frames->count() > 0) cfg.frames_per_video = args.frames;
  if (args.opt_seed->count() > 0) cfg.seed = args.seed;
  if (args.opt_jitter->count() > 0) cfg.noise.box_jitter_sigma = args.jitter;
  if (args.opt_drop->count() > 0) cfg.noise.tube_drop_prob = args.drop;
  if (args.opt_flip->count() > 0) cfg.noise.label_flip_prob = args.flip;
  if (args.opt_test_fraction->count() > 0) cfg.test_fraction = args.test_fraction;

  const cadet::GeneratedDataset dataset = cadet::generate_scenarios(cfg);
  cadet::save_dataset(args.out, cfg, dataset);
  std::printf("wrote %zu videos (%zu train / %zu test) to %s\n", dataset.clean.size(),
              dataset.train_indices.size(), dataset.test_indices.size(), args.out.c_str());
  return kExitOk;
}

struct TrainArgs {
  std::string dataset;
  std::string out;
  std::string config;
  std::string log;
  int epochs = 0;
  std::uint64_t seed = 0;
  double lr = 0.0;
  std::string pooling;
  CLI::Option *opt_epochs = nullptr, *opt_seed = nullptr, *opt_lr = nullptr,
              *opt_pooling = nullptr;
};

cadet::PipelineConfig resolve_pipeline_config(const std::string& path) {
  return path.empty() ? cadet::PipelineConfig{} : cadet::load_pipeline_config(path);
}

const std::vector<std::string>& activity_vocab(const cadet::LoadedDataset& ds) {
  if (ds.clean.empty()) throw cadet::ValidationError("dataset holds no videos");
  return ds.clean.front().activity_vocab;
}

int run_train(const TrainArgs& args) {
  const cadet::LoadedDataset ds = cadet::load_dataset(args.dataset);
  cadet::PipelineConfig cfg = resolve_pipeline_config(args.config);
  if (args.opt_epochs->count() > 0) cfg.epochs = args.epochs;
  if (args.opt_seed->count() > 0) cfg.seed = args.seed;
  if (args.opt_lr->count() > 0) cfg.lr = args.lr;
  if (args.opt_pooling->count() > 0) cfg.pooling = parse_pooling(args.pooling);
  cadet::validate_pipeline_config(cfg);

  const int n_activity = cadet::n_activity_classes(cfg, activity_vocab(ds));
  const auto train_set = cadet::assemble_examples(ds.clean, ds.noisy, ds.train_indices, cfg);
  const auto val_set = cadet::assemble_examples(ds.clean, ds.noisy, ds.test_indices, cfg);

  const cadet::TrainResult result = cadet::train(train_set, val_set, cfg, n_activity);
  cadet::save_checkpoint(args.out, cadet::named_params(result.params));
  if (!args.log.empty()) {
    cadet::save_train_log(args.log, result.log, result.best_epoch, result.best_val_accuracy);
  }
  std::printf("trained %d epochs on %zu snippets; best val accuracy %.4f at epoch %d\n",
              cfg.epochs, train_set.size(), result.best_val_accuracy, result.best_epoch);
  std::printf("checkpoint: %s\n", args.out.c_str());
  return kExitOk;
}

struct DetectArgs {
  std::string checkpoint;
  std::string dataset;
  std::string out;
  std::string config;
  std::string split = "test";
  std::string dump_graphs;
  std::string pooling;
  CLI::Option* opt_pooling = nullptr;
};

std::vector<int> split_indices(const cadet::LoadedDataset& ds, const std::string& split) {
  if (split == "train") return ds.train_indices;
  if (split == "test") return ds.test_indices;
  std::vector<int> all(ds.clean.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

int run_detect(const DetectArgs& args) {
  const cadet::LoadedDataset ds = cadet::load_dataset(args.dataset);
  cadet::PipelineConfig cfg = resolve_pipeline_config(args.config);
  if (args.opt_pooling->count() > 0) cfg.pooling = parse_pooling(args.pooling);
  cadet::validate_pipeline_config(cfg);

  const int n_activity = cadet::n_activity_classes(cfg, activity_vocab(ds));
  cadet::ModelParams params = cadet::init_params(cfg, n_activity);
  cadet::load_params(params, cadet::load_checkpoint(args.checkpoint));

  const int skip_label = cfg.background ? n_activity - 1 : -1;
  if (!args.dump_graphs.empty()) {
    std::filesystem::create_directories(args.dump_graphs);
  }

  cadet::DetectionsFile file;
  for (const int v : split_indices(ds, args.split)) {
    const cadet::VideoAnnotation& clean = ds.clean.at(static_cast<std::size_t>(v));
    const cadet::VideoAnnotation& noisy = ds.noisy.at(static_cast<std::size_t>(v));

    cadet::VideoDetections det;
    det.video_id = clean.video_id;
    det.n_frames = clean.n_frames;
    det.snippets = cadet::classify_video(clean, noisy, params, cfg);
    if (!det.snippets.empty()) {
      std::vector<int> labels;
      std::vector<std::vector<double>> probabilities;
      for (const cadet::SnippetPrediction& p : det.snippets) {
        labels.push_back(p.label);
        probabilities.push_back(p.probabilities);
      }
      det.smoothed_labels = cadet::smooth_labels(labels);
      det.segments =
          cadet::extract_segments(det.smoothed_labels, probabilities, cfg.snippet_len, skip_label);
    }

    if (!args.dump_graphs.empty()) {
      std::vector<cadet::GraphDump> dumps;
      for (std::size_t s = 0; s < det.snippets.size(); ++s) {
        const int snippet_index = static_cast<int>(s);
        const cadet::FeatureVolume features =
            cadet::render_feature_volume(clean, snippet_index, cfg.render);
        auto tubes = cadet::snippet_tubes(noisy, snippet_index, cfg.snippet_len);
        const cadet::SnippetGraph sg = cadet::snippet_scene_graph(
            features, std::move(tubes), params, cfg, clean.width, clean.height);
        dumps.push_back({snippet_index, sg.graph});
      }
      const auto path = std::filesystem::path(args.dump_graphs) / (clean.video_id + ".json");
      cadet::save_graph_dump(path.string(), clean.video_id, dumps);
    }

    file.videos.push_back(std::move(det));
  }

  cadet::save_detections(args.out, file);
  std::size_t n_segments = 0;
  for (const auto& v : file.videos) n_segments += v.segments.size();
  std::printf("detected %zu segments over %zu videos\n", n_segments, file.videos.size());
  return kExitOk;
}

struct EvalArgs {
  std::string detections;
  std::string dataset;
  std::string out;
  std::string config;
  std::string task;
  std::vector<double> ious = {0.1, 0.2, 0.3, 0.4, 0.5};
};

// Offset of each detections-file video on the shared frame axis.
std::vector<int> video_frame_offsets(const cadet::DetectionsFile& det) {
  std::vector<int> offsets;
  int base = 0;
  for (const cadet::VideoDetections& v : det.videos) {
    offsets.push_back(base);
    base += v.n_frames + kVideoFrameGap;
  }
  return offsets;
}

int run_eval(const EvalArgs& args) {
  const cadet::DetectionsFile det = cadet::load_detections(args.detections);
  const cadet::LoadedDataset ds = cadet::load_dataset(args.dataset);
  const cadet::PipelineConfig cfg = resolve_pipeline_config(args.config);

  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < ds.clean.size(); ++i) by_id[ds.clean[i].video_id] = i;
  std::vector<std::size_t> video_of;  // detections-file order -> dataset index
  for (const cadet::VideoDetections& v : det.videos) {
    const auto it = by_id.find(v.video_id);
    if (it == by_id.end()) {
      throw cadet::ValidationError("detections reference video '" + v.video_id +
                                   "' absent from the dataset");
    }
    if (ds.clean[it->second].n_frames != v.n_frames) {
      throw cadet::ValidationError("video '" + v.video_id + "' has " +
                                   std::to_string(ds.clean[it->second].n_frames) +
                                   " frames in the dataset but " + std::to_string(v.n_frames) +
                                   " in the detections");
    }
    video_of.push_back(it->second);
  }
  const std::vector<int> offsets = video_frame_offsets(det);

  cadet::MetricsFile metrics;
  metrics.task = args.task;

  if (args.task == "classify") {
    std::vector<int> predictions, truth;
    for (std::size_t i = 0; i < det.videos.size(); ++i) {
      const cadet::VideoAnnotation& clean = ds.clean[video_of[i]];
      const auto snippets = cadet::segment_video(clean.n_frames, cfg.snippet_len);
      if (det.videos[i].smoothed_labels.size() != snippets.size()) {
        throw cadet::ValidationError("video '" + clean.video_id + "' has " +
                                     std::to_string(det.videos[i].smoothed_labels.size()) +
                                     " predicted snippets, expected " +
                                     std::to_string(snippets.size()));
      }
      for (std::size_t s = 0; s < snippets.size(); ++s) {
        predictions.push_back(det.videos[i].smoothed_labels[s]);
        truth.push_back(cadet::snippet_activity_label(clean, static_cast<int>(s), cfg));
      }
    }
    metrics.has_classification = true;
    metrics.classification = cadet::classification_report(predictions, truth);
    cadet::save_metrics(args.out, metrics);
    std::printf("classify: accuracy %.4f  macro-f1 %.4f  (%zu snippets)\n",
                metrics.classification.accuracy, metrics.classification.macro_f1,
                predictions.size());
    return kExitOk;
  }

  if (args.task == "temporal") {
    std::vector<cadet::ActivitySegment> dets, gt;
    for (std::size_t i = 0; i < det.videos.size(); ++i) {
      for (cadet::ActivitySegment seg : det.videos[i].segments) {
        seg.interval.start_frame += offsets[i];
        seg.interval.end_frame += offsets[i];
        dets.push_back(seg);
      }
      for (cadet::ActivitySegment seg : ds.clean[video_of[i]].activities) {
        seg.interval.start_frame += offsets[i];
        seg.interval.end_frame += offsets[i];
        gt.push_back(seg);
      }
    }
    for (const double delta : args.ious) {
      metrics.thresholds.push_back(delta);
      metrics.results.push_back(cadet::temporal_detection_map(dets, gt, delta));
    }
  } else if (args.task == "frame") {
    std::vector<cadet::BoxDetection> dets, gt;
    for (std::size_t i = 0; i < det.videos.size(); ++i) {
      const auto collect = [&](const cadet::VideoAnnotation& a,
                               std::vector<cadet::BoxDetection>& sink) {
        for (const cadet::TubeAnnotation& tube : a.tubes) {
          for (const auto& [frame, box] : tube.boxes) {
            sink.push_back({frame + offsets[i], tube.action_label, box, tube.confidence});
          }
        }
      };
      collect(ds.noisy[video_of[i]], dets);
      collect(ds.clean[video_of[i]], gt);
    }
    for (const double delta : args.ious) {
      metrics.thresholds.push_back(delta);
      metrics.results.push_back(cadet::frame_map(dets, gt, delta));
    }
  } else {  // video
    std::vector<cadet::TubeDetection> dets, gt;
    for (std::size_t i = 0; i < det.videos.size(); ++i) {
      const auto collect = [&](const cadet::VideoAnnotation& a,
                               std::vector<cadet::TubeDetection>& sink) {
        for (const cadet::TubeAnnotation& tube : a.tubes) {
          cadet::TubeDetection td;
          td.label = tube.action_label;
          td.score = tube.confidence;
          for (const auto& [frame, box] : tube.boxes) td.boxes[frame + offsets[i]] = box;
          sink.push_back(std::move(td));
        }
      };
      collect(ds.noisy[video_of[i]], dets);
      collect(ds.clean[video_of[i]], gt);
    }
    for (const double delta : args.ious) {
      metrics.thresholds.push_back(delta);
      metrics.results.push_back(cadet::video_map(dets, gt, delta));
    }
  }

  cadet::save_metrics(args.out, metrics);
  std::printf("%-8s %10s %12s\n", "iou", "mAP", "mAP(101pt)");
  for (std::size_t i = 0; i < metrics.thresholds.size(); ++i) {
    std::printf("%-8.2f %10.4f %12.4f\n", metrics.thresholds[i], metrics.results[i].map,
                metrics.results[i].map_interpolated);
  }
  return kExitOk;
}

int run_gradcheck(int seeds) {
  const auto entries = cadet::run_gradient_checks(seeds);
  for (const cadet::GradCheckEntry& e : entries) {
    std::printf("%-32s %10.3e\n", e.name.c_str(), e.max_rel_err);
  }
  const double worst = cadet::max_gradient_error(entries);
  std::printf("worst %.3e over %d seeds\n", worst, seeds);
  if (worst >= 1e-4) {
    std::fprintf(stderr, "gradient check failed: %.3e >= 1e-4\n", worst);
    return kExitCheck;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic complex-activity detection pipeline"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "write a synthetic dataset to a directory");
  c_gen->add_option("--out", gen.out, "output dataset directory")->required();
  CLI::Option* gen_config = c_gen->add_option("--config", gen.config, "scenario config file");
  c_gen->add_option("--style", gen.style, "scenario style")
      ->check(CLI::IsMember({"road", "saras"}))
      ->excludes(gen_config);
  gen.opt_videos = c_gen->add_option("--videos", gen.videos, "number of videos");
  gen.opt_frames = c_gen->add_option("--frames", gen.frames, "frames per video");
  gen.opt_seed = c_gen->add_option("--seed", gen.seed, "generator seed");
  gen.opt_jitter = c_gen->add_option("--jitter", gen.jitter, "box jitter sigma, pixels");
  gen.opt_drop = c_gen->add_option("--drop", gen.drop, "tube drop probability");
  gen.opt_flip = c_gen->add_option("--flip", gen.flip, "label flip probability");
  gen.opt_test_fraction = c_gen->add_option("--test-fraction", gen.test_fraction,
                                            "fraction of videos held out for testing");

  TrainArgs tr;
  CLI::App* c_train = app.add_subcommand("train", "train a model on a generated dataset");
  c_train->add_option("--dataset", tr.dataset, "dataset directory")->required();
  c_train->add_option("--out", tr.out, "checkpoint output path")->required();
  c_train->add_option("--config", tr.config, "pipeline config file");
  c_train->add_option("--log", tr.log, "training log output path");
  tr.opt_epochs = c_train->add_option("--epochs", tr.epochs, "epoch count");
  tr.opt_seed = c_train->add_option("--seed", tr.seed, "training seed");
  tr.opt_lr = c_train->add_option("--lr", tr.lr, "learning rate");
  tr.opt_pooling = c_train->add_option("--pooling", tr.pooling, "pooling mode")
                       ->check(CLI::IsMember({"standard", "deformable", "modulated"}));

  DetectArgs de;
  CLI::App* c_detect = app.add_subcommand("detect", "run detection with a trained checkpoint");
  c_detect->add_option("--checkpoint", de.checkpoint, "checkpoint path")->required();
  c_detect->add_option("--dataset", de.dataset, "dataset directory")->required();
  c_detect->add_option("--out", de.out, "detections output path")->required();
  c_detect->add_option("--config", de.config, "pipeline config file");
  c_detect->add_option("--split", de.split, "video split to process")
      ->check(CLI::IsMember({"train", "test", "all"}));
  c_detect->add_option("--dump-graphs", de.dump_graphs, "directory for per-video graph dumps");
  de.opt_pooling = c_detect->add_option("--pooling", de.pooling, "pooling mode")
                       ->check(CLI::IsMember({"standard", "deformable", "modulated"}));

  EvalArgs ev;
  CLI::App* c_eval = app.add_subcommand("eval", "score detections against ground truth");
  c_eval->add_option("--detections", ev.detections, "detections file")->required();
  c_eval->add_option("--dataset", ev.dataset, "dataset directory")->required();
  c_eval->add_option("--out", ev.out, "metrics output path")->required();
  c_eval->add_option("--config", ev.config, "pipeline config file");
  c_eval->add_option("--task", ev.task, "evaluation task")
      ->required()
      ->check(CLI::IsMember({"temporal", "frame", "video", "classify"}));
  c_eval->add_option("--iou", ev.ious, "IoU thresholds")->delimiter(',');

  int gradcheck_seeds = 20;
  CLI::App* c_grad = app.add_subcommand("gradcheck", "finite-difference check of every op");
  c_grad->add_option("--seeds", gradcheck_seeds, "random instances per op")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (c_gen->parsed()) return run_generate(gen);
    if (c_train->parsed()) return run_train(tr);
    if (c_detect->parsed()) return run_detect(de);
    if (c_eval->parsed()) return run_eval(ev);
    return run_gradcheck(gradcheck_seeds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
