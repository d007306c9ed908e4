#include "cadet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cadet {

void validate_box(const Box& b) {
  if (!std::isfinite(b.x1) || !std::isfinite(b.y1) || !std::isfinite(b.x2) ||
      !std::isfinite(b.y2)) {
    throw ValidationError("box has non-finite coordinates");
  }
  if (b.x1 > b.x2 || b.y1 > b.y2) {
    throw ValidationError("box corners out of order: (" + std::to_string(b.x1) + "," +
                          std::to_string(b.y1) + "," + std::to_string(b.x2) + "," +
                          std::to_string(b.y2) + ")");
  }
}

double box_area(const Box& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = box_area(a) + box_area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

Box clamp_box(const Box& b, double width, double height) {
  Box out;
  out.x1 = std::clamp(b.x1, 0.0, width);
  out.y1 = std::clamp(b.y1, 0.0, height);
  out.x2 = std::clamp(b.x2, 0.0, width);
  out.y2 = std::clamp(b.y2, 0.0, height);
  return out;
}

std::vector<std::pair<int, Box>> interpolate_micro_tube(const MicroTube& mt) {
  if (mt.delta < 1) throw ValidationError("micro-tube gap must be >= 1");
  validate_box(mt.start_box);
  validate_box(mt.end_box);
  std::vector<std::pair<int, Box>> out;
  out.reserve(static_cast<std::size_t>(mt.delta) + 1);
  out.emplace_back(mt.start_frame, mt.start_box);
  for (int i = 1; i < mt.delta; ++i) {
    const double t = static_cast<double>(i) / mt.delta;
    Box b;
    b.x1 = mt.start_box.x1 + t * (mt.end_box.x1 - mt.start_box.x1);
    b.y1 = mt.start_box.y1 + t * (mt.end_box.y1 - mt.start_box.y1);
    b.x2 = mt.start_box.x2 + t * (mt.end_box.x2 - mt.start_box.x2);
    b.y2 = mt.start_box.y2 + t * (mt.end_box.y2 - mt.start_box.y2);
    out.emplace_back(mt.start_frame + i, b);
  }
  out.emplace_back(mt.start_frame + mt.delta, mt.end_box);
  return out;
}

ActionTube assemble_snippet_tubes(const std::vector<MicroTube>& chain, int snippet_len) {
  if (chain.empty()) throw ValidationError("micro-tube chain is empty");
  const int span = chain.front().delta + 1;
  if (snippet_len % span != 0 ||
      static_cast<int>(chain.size()) != snippet_len / span) {
    throw ValidationError("chain of " + std::to_string(chain.size()) +
                          " micro-tubes with gap " + std::to_string(chain.front().delta) +
                          " does not cover a " + std::to_string(snippet_len) +
                          "-frame snippet");
  }
  const std::size_t n_classes = chain.front().class_scores.size();
  if (n_classes == 0) throw ValidationError("micro-tube has no class scores");

  ActionTube tube;
  tube.first_frame = chain.front().start_frame;
  tube.snippet_index = chain.front().start_frame >= 1
                           ? (chain.front().start_frame - 1) / snippet_len
                           : 0;
  std::vector<double> mean_scores(n_classes, 0.0);
  int expected_start = chain.front().start_frame;
  for (const MicroTube& mt : chain) {
    if (mt.delta != chain.front().delta) {
      throw ValidationError("micro-tube gaps differ within one chain");
    }
    if (mt.start_frame != expected_start) {
      throw ValidationError("micro-tube chain has a frame coverage gap at frame " +
                            std::to_string(expected_start));
    }
    if (mt.class_scores.size() != n_classes) {
      throw ValidationError("micro-tube class score lengths differ within one chain");
    }
    for (const auto& [frame, box] : interpolate_micro_tube(mt)) {
      (void)frame;
      tube.boxes.push_back(box);
    }
    for (std::size_t c = 0; c < n_classes; ++c) mean_scores[c] += mt.class_scores[c];
    expected_start += span;
  }
  for (double& s : mean_scores) s /= static_cast<double>(chain.size());
  const auto best = std::max_element(mean_scores.begin(), mean_scores.end());
  tube.action_label = static_cast<int>(best - mean_scores.begin());
  tube.confidence = *best;
  return tube;
}

std::vector<MicroTube> split_tube(const ActionTube& tube, int n_classes, int delta) {
  const int span = delta + 1;
  if (tube.boxes.empty() || static_cast<int>(tube.boxes.size()) % span != 0) {
    throw ValidationError("tube of " + std::to_string(tube.boxes.size()) +
                          " boxes cannot split into micro-tubes of gap " +
                          std::to_string(delta));
  }
  if (tube.action_label < 0 || tube.action_label >= n_classes) {
    throw ValidationError("tube label " + std::to_string(tube.action_label) +
                          " outside class range");
  }
  std::vector<MicroTube> out;
  for (std::size_t i = 0; i + span <= tube.boxes.size() + 0u; i += span) {
    MicroTube mt;
    mt.start_frame = tube.first_frame + static_cast<int>(i);
    mt.delta = delta;
    mt.start_box = tube.boxes[i];
    mt.end_box = tube.boxes[i + static_cast<std::size_t>(delta)];
    mt.class_scores.assign(static_cast<std::size_t>(n_classes), 0.0);
    mt.class_scores[static_cast<std::size_t>(tube.action_label)] = tube.confidence;
    out.push_back(std::move(mt));
  }
  return out;
}

namespace {

struct BlockChain {
  int start_step = 0;
  std::vector<int> candidates;
  double score = 0.0;
};

// Viterbi over one block of consecutive steps, all with remaining candidates.
// Suffix scores are folded right-to-left; ties keep the lowest candidate index,
// which makes the reconstructed chain the lexicographically smallest maximizer.
BlockChain best_block_chain(const std::vector<std::vector<MicroTube>>& steps,
                            const std::vector<std::vector<int>>& avail, int b0, int b1,
                            int class_label, double lambda) {
  const int n_steps = b1 - b0 + 1;
  std::vector<std::vector<double>> suffix(static_cast<std::size_t>(n_steps));
  std::vector<std::vector<int>> next(static_cast<std::size_t>(n_steps));
  auto score_of = [&](int step, int cand) {
    return steps[static_cast<std::size_t>(step)][static_cast<std::size_t>(cand)]
        .class_scores[static_cast<std::size_t>(class_label)];
  };
  for (int t = n_steps - 1; t >= 0; --t) {
    const int step = b0 + t;
    const auto& cands = avail[static_cast<std::size_t>(step)];
    suffix[static_cast<std::size_t>(t)].resize(cands.size());
    next[static_cast<std::size_t>(t)].assign(cands.size(), -1);
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      const int cand = cands[ci];
      double value = score_of(step, cand);
      if (t + 1 < n_steps) {
        const auto& next_cands = avail[static_cast<std::size_t>(step + 1)];
        const Box& end_box =
            steps[static_cast<std::size_t>(step)][static_cast<std::size_t>(cand)].end_box;
        double best = -std::numeric_limits<double>::infinity();
        int best_j = -1;
        for (std::size_t j = 0; j < next_cands.size(); ++j) {
          const Box& start_next = steps[static_cast<std::size_t>(step + 1)]
                                       [static_cast<std::size_t>(next_cands[j])]
                                           .start_box;
          const double link = lambda * box_iou(end_box, start_next) +
                              suffix[static_cast<std::size_t>(t + 1)][j];
          if (link > best) {
            best = link;
            best_j = static_cast<int>(j);
          }
        }
        value += best;
        next[static_cast<std::size_t>(t)][ci] = best_j;
      }
      suffix[static_cast<std::size_t>(t)][ci] = value;
    }
  }
  int head = 0;
  for (std::size_t ci = 1; ci < suffix[0].size(); ++ci) {
    if (suffix[0][ci] > suffix[0][static_cast<std::size_t>(head)]) head = static_cast<int>(ci);
  }
  BlockChain chain;
  chain.start_step = b0;
  chain.score = suffix[0][static_cast<std::size_t>(head)];
  int at = head;
  for (int t = 0; t < n_steps; ++t) {
    chain.candidates.push_back(avail[static_cast<std::size_t>(b0 + t)][static_cast<std::size_t>(at)]);
    at = next[static_cast<std::size_t>(t)][static_cast<std::size_t>(at)];
  }
  return chain;
}

}  // namespace

std::vector<LinkedChain> link_micro_tubes(const std::vector<std::vector<MicroTube>>& steps,
                                          int class_label, double lambda) {
  if (class_label < 0) throw ValidationError("negative class label");
  if (lambda < 0.0) throw ValidationError("linking weight must be >= 0");
  for (const auto& cands : steps) {
    for (const MicroTube& mt : cands) {
      if (class_label >= static_cast<int>(mt.class_scores.size())) {
        throw ValidationError("class label " + std::to_string(class_label) +
                              " outside candidate score range");
      }
    }
  }

  std::vector<std::vector<int>> avail(steps.size());
  for (std::size_t t = 0; t < steps.size(); ++t) {
    avail[t].resize(steps[t].size());
    for (std::size_t i = 0; i < steps[t].size(); ++i) avail[t][i] = static_cast<int>(i);
  }

  std::vector<LinkedChain> chains;
  for (;;) {
    // Maximal runs of steps that still have candidates.
    std::vector<std::pair<int, int>> blocks;
    int t = 0;
    const int n = static_cast<int>(steps.size());
    while (t < n) {
      if (avail[static_cast<std::size_t>(t)].empty()) {
        ++t;
        continue;
      }
      int end = t;
      while (end + 1 < n && !avail[static_cast<std::size_t>(end + 1)].empty()) ++end;
      blocks.emplace_back(t, end);
      t = end + 1;
    }
    if (blocks.empty()) break;

    bool have_best = false;
    BlockChain best;
    for (const auto& [b0, b1] : blocks) {
      BlockChain c = best_block_chain(steps, avail, b0, b1, class_label, lambda);
      if (!have_best || c.score > best.score ||
          (c.score == best.score && c.start_step < best.start_step) ||
          (c.score == best.score && c.start_step == best.start_step &&
           c.candidates < best.candidates)) {
        best = std::move(c);
        have_best = true;
      }
    }
    for (std::size_t i = 0; i < best.candidates.size(); ++i) {
      auto& column = avail[static_cast<std::size_t>(best.start_step) + i];
      column.erase(std::find(column.begin(), column.end(), best.candidates[i]));
    }
    chains.push_back(LinkedChain{best.start_step, std::move(best.candidates), best.score});
  }
  return chains;
}

double temporal_iou(const TemporalInterval& a, const TemporalInterval& b) {
  if (a.start_frame > a.end_frame || b.start_frame > b.end_frame) {
    throw ValidationError("temporal interval ends before it starts");
  }
  const int inter = std::min(a.end_frame, b.end_frame) - std::max(a.start_frame, b.start_frame) + 1;
  if (inter <= 0) return 0.0;
  const int len_a = a.end_frame - a.start_frame + 1;
  const int len_b = b.end_frame - b.start_frame + 1;
  return static_cast<double>(inter) / static_cast<double>(len_a + len_b - inter);
}

double spatiotemporal_tube_iou(const FrameBoxMap& a, const FrameBoxMap& b) {
  if (a.empty() || b.empty()) throw ValidationError("tube IoU of an empty tube");
  const TemporalInterval span_a{a.begin()->first, a.rbegin()->first};
  const TemporalInterval span_b{b.begin()->first, b.rbegin()->first};
  const double t_iou = temporal_iou(span_a, span_b);
  if (t_iou == 0.0) return 0.0;
  double spatial = 0.0;
  int n = 0;
  for (const auto& [frame, box] : a) {
    const auto it = b.find(frame);
    if (it == b.end()) continue;
    spatial += box_iou(box, it->second);
    ++n;
  }
  if (n == 0) return 0.0;
  return t_iou * (spatial / n);
}

}  // namespace cadet
