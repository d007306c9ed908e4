#pragma once

#include "cadet/geometry.hpp"
#include "cadet/tensor.hpp"

namespace cadet {

// Backbone features for one snippet: (C, M, H_f, W_f) plus the ratio of
// feature-grid cells to image pixels.
struct FeatureVolume {
  Tensor values;
  double spatial_scale = 1.0;
};

void validate_feature_volume(const FeatureVolume& fv);

// C-vector at fractional grid position (x, y), zero-padded outside the extent.
// Differentiable in the features and in x and y.
Tensor bilinear_sample(const FeatureVolume& fv, int frame, const Tensor& x, const Tensor& y);

// Average pooling of n_s x n_s interior samples per bin over a k x k grid,
// one grid per tube frame. Output (C, L, k, k).
Tensor roi_pool_3d(const FeatureVolume& fv, const ActionTube& tube, int k = 7, int n_s = 2);

// Same grid, with each bin's sample points translated by
// (gamma * dx * box_w, gamma * dy * box_h) in feature-grid units.
// offsets: (L, k, k, 2) normalized displacements.
Tensor deformable_roi_pool_3d(const FeatureVolume& fv, const ActionTube& tube,
                              const Tensor& offsets, double gamma = 0.1, int n_s = 2);

// Deformable result with each bin scaled by its modulation value in [0,1].
// modulation: (L, k, k).
Tensor modulated_deformable_roi_pool_3d(const FeatureVolume& fv, const ActionTube& tube,
                                        const Tensor& offsets, const Tensor& modulation,
                                        double gamma = 0.1, int n_s = 2);

// Fully-connected predictor from standard-pooled features to the offset field.
struct OffsetPredictor {
  Tensor weight;  // (C*L*k*k, out_dim)
  Tensor bias;    // (out_dim)
  bool modulated = false;
  bool shared_over_time = false;  // one offset grid broadcast over all L frames
};

OffsetPredictor make_offset_predictor(int c, int l, int k, bool modulated,
                                      bool shared_over_time);

struct OffsetField {
  Tensor offsets;     // (L, k, k, 2)
  Tensor modulation;  // (L, k, k), defined only for modulated predictors
};

OffsetField predict_offsets(const Tensor& pooled, const OffsetPredictor& p);

}  // namespace cadet
