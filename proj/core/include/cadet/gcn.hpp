#pragma once

#include <vector>

#include "cadet/rng.hpp"
#include "cadet/tensor.hpp"

namespace cadet {

enum class ReadoutMode { kFinal, kConcat };

struct GcnParams {
  Tensor w1, b1;  // d_node -> d_h
  Tensor w2, b2;  // d_h -> d_h
  Tensor w3, b3;  // d_h -> d_out
  Tensor wc, bc;  // readout dim -> n_activity
  ReadoutMode readout = ReadoutMode::kFinal;
};

GcnParams make_gcn_params(int d_node, int d_h, int d_out, int n_activity, ReadoutMode readout,
                          Rng& rng);

// Dimension of the readout vector the classifier consumes.
int readout_dim(int d_h, int d_out, ReadoutMode readout);

// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
std::vector<double> normalize_adjacency(const std::vector<double>& adjacency, int node_count);

// relu(A_hat H W + b)
Tensor gcn_layer_forward(const Tensor& h, const Tensor& a_hat, const Tensor& w, const Tensor& b);

Tensor graph_readout(const std::vector<Tensor>& layer_outputs, ReadoutMode readout);

// node_features (K, d_node) -> readout vector.
Tensor gcn_forward(const Tensor& node_features, const std::vector<double>& adjacency,
                   const GcnParams& params);

Tensor classify_logits(const Tensor& readout, const GcnParams& params);

struct SnippetClassification {
  std::vector<double> probabilities;
  int label = 0;
};

// Softmax probabilities with lowest-index argmax tie-break.
SnippetClassification classify_snippet(const Tensor& readout, const GcnParams& params);

}  // namespace cadet
