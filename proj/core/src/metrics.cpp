#include "cadet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cadet/errors.hpp"

namespace cadet {

ClassificationReport classification_report(const std::vector<int>& predictions,
                                           const std::vector<int>& ground_truth) {
  if (predictions.size() != ground_truth.size()) {
    throw ValidationError("prediction count " + std::to_string(predictions.size()) +
                          " does not match ground truth count " +
                          std::to_string(ground_truth.size()));
  }
  if (predictions.empty()) throw ValidationError("empty classification report");

  std::set<int> labels(predictions.begin(), predictions.end());
  labels.insert(ground_truth.begin(), ground_truth.end());

  ClassificationReport report;
  int correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == ground_truth[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());

  for (const int label : labels) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const bool p = predictions[i] == label;
      const bool t = ground_truth[i] == label;
      if (p && t) ++tp;
      if (p && !t) ++fp;
      if (!p && t) ++fn;
    }
    ClassificationReport::PerClass row;
    row.label = label;
    row.support = tp + fn;
    row.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    row.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    row.f1 = row.precision + row.recall > 0.0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    report.per_class.push_back(row);
    report.macro_precision += row.precision;
    report.macro_recall += row.recall;
    report.macro_f1 += row.f1;
  }
  const double n = static_cast<double>(labels.size());
  report.macro_precision /= n;
  report.macro_recall /= n;
  report.macro_f1 /= n;
  return report;
}

namespace {

// Rank detections by score descending, true positives before false positives
// at equal score, otherwise keeping list order.
std::vector<int> ap_ranking(const ClassMatches& matches) {
  std::vector<int> order(matches.detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const DetectionMatch& da = matches.detections[static_cast<std::size_t>(a)];
    const DetectionMatch& db = matches.detections[static_cast<std::size_t>(b)];
    if (da.score != db.score) return da.score > db.score;
    return da.true_positive && !db.true_positive;
  });
  return order;
}

}  // namespace

double average_precision(const ClassMatches& matches) {
  if (matches.n_ground_truth < 0) throw ValidationError("negative ground truth count");
  if (matches.n_ground_truth == 0) return 0.0;
  const std::vector<int> order = ap_ranking(matches);
  double ap = 0.0;
  int tp_seen = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (matches.detections[static_cast<std::size_t>(order[rank])].true_positive) {
      ++tp_seen;
      ap += static_cast<double>(tp_seen) / static_cast<double>(rank + 1);
    }
  }
  return ap / matches.n_ground_truth;
}

double average_precision_interpolated(const ClassMatches& matches) {
  if (matches.n_ground_truth < 0) throw ValidationError("negative ground truth count");
  if (matches.n_ground_truth == 0) return 0.0;
  const std::vector<int> order = ap_ranking(matches);
  std::vector<double> precision, recall;
  int tp_seen = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (matches.detections[static_cast<std::size_t>(order[rank])].true_positive) ++tp_seen;
    precision.push_back(static_cast<double>(tp_seen) / static_cast<double>(rank + 1));
    recall.push_back(static_cast<double>(tp_seen) / matches.n_ground_truth);
  }
  double ap = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    double best = 0.0;
    for (std::size_t j = 0; j < precision.size(); ++j) {
      if (recall[j] >= r) best = std::max(best, precision[j]);
    }
    ap += best;
  }
  return ap / 101.0;
}

namespace {

struct GroupAssignment {
  int tp_count = 0;
  double iou_sum = 0.0;
  std::vector<int> gt_choice;  // per group member, -1 for none

  bool better_than(const GroupAssignment& other) const {
    if (tp_count != other.tp_count) return tp_count > other.tp_count;
    if (iou_sum != other.iou_sum) return iou_sum > other.iou_sum;
    return gt_choice < other.gt_choice;
  }
};

// Exhaustive assignment search over one equal-score group. Group sizes stay
// tiny in practice; the caller bounds the search space before entering. The
// running IoU sum rides the argument list: subtracting on backtrack would
// leave rounding residue behind, making the comparison depend on enumeration
// order instead of the assignment alone.
void search_group(const MatchInput& input, double delta, const std::vector<int>& members,
                  std::size_t at, std::vector<char>& gt_used, double iou_sum,
                  GroupAssignment& current, GroupAssignment& best) {
  if (at == members.size()) {
    current.iou_sum = iou_sum;
    if (current.better_than(best)) best = current;
    return;
  }
  // Upper bound: every remaining member matches.
  if (current.tp_count + static_cast<int>(members.size() - at) < best.tp_count) return;
  const int det = members[at];
  for (int g = 0; g < input.n_ground_truth; ++g) {
    if (gt_used[static_cast<std::size_t>(g)]) continue;
    const double iou = input.iou[static_cast<std::size_t>(det)][static_cast<std::size_t>(g)];
    if (iou < delta) continue;
    gt_used[static_cast<std::size_t>(g)] = 1;
    current.tp_count += 1;
    current.gt_choice.push_back(g);
    search_group(input, delta, members, at + 1, gt_used, iou_sum + iou, current, best);
    current.gt_choice.pop_back();
    current.tp_count -= 1;
    gt_used[static_cast<std::size_t>(g)] = 0;
  }
  current.gt_choice.push_back(-1);
  search_group(input, delta, members, at + 1, gt_used, iou_sum, current, best);
  current.gt_choice.pop_back();
}

GroupAssignment assign_group(const MatchInput& input, double delta,
                             const std::vector<int>& members, std::vector<char>& gt_used) {
  double space = 1.0;
  for (std::size_t i = 0; i < members.size(); ++i) space *= input.n_ground_truth + 1;
  if (members.size() <= 12 && space <= 2e5) {
    GroupAssignment best;
    best.tp_count = -1;
    GroupAssignment current;
    search_group(input, delta, members, 0, gt_used, 0.0, current, best);
    return best;
  }
  // Degenerate huge group: best-IoU sequential fallback.
  GroupAssignment out;
  for (const int det : members) {
    int best_g = -1;
    double best_iou = 0.0;
    for (int g = 0; g < input.n_ground_truth; ++g) {
      if (gt_used[static_cast<std::size_t>(g)]) continue;
      const double iou = input.iou[static_cast<std::size_t>(det)][static_cast<std::size_t>(g)];
      if (iou >= delta && iou > best_iou) {
        best_iou = iou;
        best_g = g;
      }
    }
    out.gt_choice.push_back(best_g);
    if (best_g >= 0) {
      gt_used[static_cast<std::size_t>(best_g)] = 1;
      out.tp_count += 1;
      out.iou_sum += best_iou;
    }
  }
  // Undo: the caller re-applies the chosen assignment.
  for (const int g : out.gt_choice) {
    if (g >= 0) gt_used[static_cast<std::size_t>(g)] = 0;
  }
  return out;
}

}  // namespace

MatchOutput match_detections(const MatchInput& input, double delta) {
  const std::size_t m = input.scores.size();
  if (input.content_keys.size() != m || input.iou.size() != m) {
    throw ValidationError("matching input fields have mismatched lengths");
  }
  for (const auto& row : input.iou) {
    if (static_cast<int>(row.size()) != input.n_ground_truth) {
      throw ValidationError("IoU row length does not match ground truth count");
    }
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("IoU threshold must be in (0,1]");

  MatchOutput out;
  out.order.resize(m);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    const double sa = input.scores[static_cast<std::size_t>(a)];
    const double sb = input.scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    if (input.content_keys[static_cast<std::size_t>(a)] !=
        input.content_keys[static_cast<std::size_t>(b)]) {
      return input.content_keys[static_cast<std::size_t>(a)] <
             input.content_keys[static_cast<std::size_t>(b)];
    }
    return a < b;
  });

  out.true_positive.assign(m, 0);
  out.matched_gt.assign(m, -1);
  std::vector<char> gt_used(static_cast<std::size_t>(std::max(0, input.n_ground_truth)), 0);

  std::size_t begin = 0;
  while (begin < m) {
    std::size_t end = begin;
    while (end < m && input.scores[static_cast<std::size_t>(out.order[end])] ==
                          input.scores[static_cast<std::size_t>(out.order[begin])]) {
      ++end;
    }
    std::vector<int> members(out.order.begin() + static_cast<std::ptrdiff_t>(begin),
                             out.order.begin() + static_cast<std::ptrdiff_t>(end));
    const GroupAssignment chosen = assign_group(input, delta, members, gt_used);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const int g = chosen.gt_choice[i];
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

namespace {

struct ClassProblem {
  MatchInput input;
};

MapResult map_from_problems(std::map<int, MatchInput>& problems, double delta) {
  MapResult result;
  double ap_sum = 0.0, ap_interp_sum = 0.0;
  for (auto& [label, input] : problems) {
    const MatchOutput matched = match_detections(input, delta);
    ClassMatches matches;
    matches.n_ground_truth = input.n_ground_truth;
    for (std::size_t i = 0; i < matched.order.size(); ++i) {
      matches.detections.push_back(
          DetectionMatch{input.scores[static_cast<std::size_t>(matched.order[i])],
                         matched.true_positive[i] != 0});
    }
    const double ap = average_precision(matches);
    const double ap_interp = average_precision_interpolated(matches);
    result.per_class_ap[label] = ap;
    result.per_class_ap_interpolated[label] = ap_interp;
    if (input.n_ground_truth > 0) {
      ap_sum += ap;
      ap_interp_sum += ap_interp;
      result.n_classes_in_mean += 1;
    }
  }
  if (result.n_classes_in_mean > 0) {
    result.map = ap_sum / result.n_classes_in_mean;
    result.map_interpolated = ap_interp_sum / result.n_classes_in_mean;
  }
  return result;
}

}  // namespace

MapResult temporal_detection_map(const std::vector<ActivitySegment>& detections,
                                 const std::vector<ActivitySegment>& ground_truth, double delta) {
  std::map<int, std::vector<const ActivitySegment*>> gt_by_class;
  for (const ActivitySegment& g : ground_truth) gt_by_class[g.label].push_back(&g);

  std::map<int, MatchInput> problems;
  for (const auto& [label, gts] : gt_by_class) {
    problems[label].n_ground_truth = static_cast<int>(gts.size());
  }
  for (const ActivitySegment& d : detections) {
    MatchInput& input = problems[d.label];
    input.scores.push_back(d.score);
    input.content_keys.push_back({static_cast<double>(d.interval.start_frame),
                                  static_cast<double>(d.interval.end_frame)});
    std::vector<double> row;
    const auto it = gt_by_class.find(d.label);
    if (it != gt_by_class.end()) {
      for (const ActivitySegment* g : it->second) {
        row.push_back(temporal_iou(d.interval, g->interval));
      }
    }
    input.iou.push_back(std::move(row));
  }
  return map_from_problems(problems, delta);
}

MapResult frame_map(const std::vector<BoxDetection>& detections,
                    const std::vector<BoxDetection>& ground_truth, double delta) {
  std::map<int, std::vector<const BoxDetection*>> gt_by_class;
  for (const BoxDetection& g : ground_truth) gt_by_class[g.label].push_back(&g);

  std::map<int, MatchInput> problems;
  for (const auto& [label, gts] : gt_by_class) {
    problems[label].n_ground_truth = static_cast<int>(gts.size());
  }
  for (const BoxDetection& d : detections) {
    MatchInput& input = problems[d.label];
    input.scores.push_back(d.score);
    input.content_keys.push_back(
        {static_cast<double>(d.frame), d.box.x1, d.box.y1, d.box.x2, d.box.y2});
    std::vector<double> row;
    const auto it = gt_by_class.find(d.label);
    if (it != gt_by_class.end()) {
      for (const BoxDetection* g : it->second) {
        row.push_back(d.frame == g->frame ? box_iou(d.box, g->box) : 0.0);
      }
    }
    input.iou.push_back(std::move(row));
  }
  return map_from_problems(problems, delta);
}

MapResult video_map(const std::vector<TubeDetection>& detections,
                    const std::vector<TubeDetection>& ground_truth, double delta) {
  std::map<int, std::vector<const TubeDetection*>> gt_by_class;
  for (const TubeDetection& g : ground_truth) gt_by_class[g.label].push_back(&g);

  std::map<int, MatchInput> problems;
  for (const auto& [label, gts] : gt_by_class) {
    problems[label].n_ground_truth = static_cast<int>(gts.size());
  }
  for (const TubeDetection& d : detections) {
    if (d.boxes.empty()) throw ValidationError("tube detection without boxes");
    MatchInput& input = problems[d.label];
    input.scores.push_back(d.score);
    std::vector<double> key;
    for (const auto& [frame, box] : d.boxes) {
      key.push_back(static_cast<double>(frame));
      key.push_back(box.x1);
      key.push_back(box.y1);
      key.push_back(box.x2);
      key.push_back(box.y2);
    }
    input.content_keys.push_back(std::move(key));
    std::vector<double> row;
    const auto it = gt_by_class.find(d.label);
    if (it != gt_by_class.end()) {
      for (const TubeDetection* g : it->second) {
        row.push_back(spatiotemporal_tube_iou(d.boxes, g->boxes));
      }
    }
    input.iou.push_back(std::move(row));
  }
  return map_from_problems(problems, delta);
}

}  // namespace cadet
