#pragma once

#include <map>
#include <vector>

#include "cadet/geometry.hpp"

namespace cadet {

struct ClassificationReport {
  struct PerClass {
    int label = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    int support = 0;
  };
  double accuracy = 0.0;
  std::vector<PerClass> per_class;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
};

ClassificationReport classification_report(const std::vector<int>& predictions,
                                           const std::vector<int>& ground_truth);

struct DetectionMatch {
  double score = 0.0;
  bool true_positive = false;
};

struct ClassMatches {
  std::vector<DetectionMatch> detections;
  int n_ground_truth = 0;
};

// Precision-at-each-true-positive divided by ground-truth count. Equal scores
// rank true positives first, then list order.
double average_precision(const ClassMatches& matches);

// 101-point interpolated variant of the same ranking.
double average_precision_interpolated(const ClassMatches& matches);

// One class's matching problem: per detection a score, a content key making
// the processing order independent of input permutation, and its IoU against
// every ground truth of the class.
struct MatchInput {
  std::vector<double> scores;
  std::vector<std::vector<double>> content_keys;
  std::vector<std::vector<double>> iou;  // [detection][ground truth]
  int n_ground_truth = 0;
};

struct MatchOutput {
  std::vector<int> order;          // canonical processing order (indices into input)
  std::vector<char> true_positive; // aligned with order
  std::vector<int> matched_gt;     // aligned with order; -1 when unmatched
};

// Greedy matching in descending score; within an equal-score group the
// assignment maximizes (true positives, then summed IoU, then lexicographically
// smallest ground-truth index vector). Each ground truth matches at most once.
MatchOutput match_detections(const MatchInput& input, double delta);

struct MapResult {
  std::map<int, double> per_class_ap;
  std::map<int, double> per_class_ap_interpolated;
  double map = 0.0;
  double map_interpolated = 0.0;
  int n_classes_in_mean = 0;
};

MapResult temporal_detection_map(const std::vector<ActivitySegment>& detections,
                                 const std::vector<ActivitySegment>& ground_truth, double delta);

struct BoxDetection {
  int frame = 0;
  int label = 0;
  Box box;
  double score = 0.0;
};

MapResult frame_map(const std::vector<BoxDetection>& detections,
                    const std::vector<BoxDetection>& ground_truth, double delta);

struct TubeDetection {
  int label = 0;
  FrameBoxMap boxes;
  double score = 0.0;
};

MapResult video_map(const std::vector<TubeDetection>& detections,
                    const std::vector<TubeDetection>& ground_truth, double delta);

}  // namespace cadet
