#pragma once

#include <string>
#include <vector>

namespace cadet {

// Worst central-difference error seen for one op input across all seeds.
struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  int n_seeds = 0;
};

// Finite-difference sweep over every differentiable building block: bilinear
// sampling, the three pooling variants, the offset predictor, the graph
// convolution layer, both readout modes and the classifier head. Each seed
// draws a fresh random instance per op; results are deterministic for a given
// n_seeds. Losses project outputs through random positive weights so that
// symmetric gradient errors cannot cancel.
std::vector<GradCheckEntry> run_gradient_checks(int n_seeds = 20);

double max_gradient_error(const std::vector<GradCheckEntry>& entries);

}  // namespace cadet
