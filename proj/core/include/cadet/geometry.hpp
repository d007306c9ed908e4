#pragma once

#include <map>
#include <utility>
#include <vector>

#include "cadet/errors.hpp"

namespace cadet {

inline constexpr int kSnippetLen = 12;
inline constexpr int kMicroTubeGap = 3;
inline constexpr int kMicroTubesPerSnippet = 3;

// Axis-aligned box, corner form, in memory and on disk.
struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

void validate_box(const Box& b);
double box_area(const Box& b);
double box_iou(const Box& a, const Box& b);
Box clamp_box(const Box& b, double width, double height);

// A pair of detections delta frames apart; intermediate boxes are interpolated.
struct MicroTube {
  int start_frame = 0;
  int delta = 1;
  Box start_box;
  Box end_box;
  std::vector<double> class_scores;
};

// One atomic action instance over a single snippet: one box per snippet frame.
struct ActionTube {
  int id = 0;
  int snippet_index = 0;
  int first_frame = 0;
  std::vector<Box> boxes;
  int action_label = 0;
  double confidence = 0.0;
};

// All frames start_frame .. start_frame+delta inclusive; endpoints exact,
// intermediates linear per coordinate.
std::vector<std::pair<int, Box>> interpolate_micro_tube(const MicroTube& mt);

// Chain of 3 micro-tubes covering snippet-relative frame pairs
// (0,3), (4,7), (8,11). Label = argmax of mean class scores.
ActionTube assemble_snippet_tubes(const std::vector<MicroTube>& chain,
                                  int snippet_len = kSnippetLen);

// Inverse slicing: endpoint boxes of each micro-tube, one-hot scores.
std::vector<MicroTube> split_tube(const ActionTube& tube, int n_classes,
                                  int delta = kMicroTubeGap);

struct LinkedChain {
  int start_step = 0;
  std::vector<int> candidates;  // index into the candidate set of each step
  double score = 0.0;
};

// Per-class Viterbi linking over maximal blocks of steps with remaining
// candidates: maximizes sum of class scores plus lambda * IoU continuity.
// Chains are pulled best-first; ties resolved toward lower candidate indices.
std::vector<LinkedChain> link_micro_tubes(
    const std::vector<std::vector<MicroTube>>& steps, int class_label,
    double lambda = 1.0);

// Inclusive frame interval.
struct TemporalInterval {
  int start_frame = 0;
  int end_frame = 0;
};

double temporal_iou(const TemporalInterval& a, const TemporalInterval& b);

struct ActivitySegment {
  int label = 0;
  TemporalInterval interval;
  double score = 0.0;
};

using FrameBoxMap = std::map<int, Box>;

// Temporal IoU of the frame spans times mean spatial IoU over the frames both
// tubes cover.
double spatiotemporal_tube_iou(const FrameBoxMap& a, const FrameBoxMap& b);

}  // namespace cadet
