#include "cadet/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadet/errors.hpp"

namespace cadet {

namespace {

Tensor init_linear(int in_dim, int out_dim, Rng& rng) {
  const double bound = std::sqrt(1.0 / in_dim);
  std::vector<double> data(static_cast<std::size_t>(in_dim) * out_dim);
  for (double& v : data) v = uniform_real(rng, -bound, bound);
  return Tensor({in_dim, out_dim}, std::move(data), true);
}

}  // namespace

int readout_dim(int d_h, int d_out, ReadoutMode readout) {
  return readout == ReadoutMode::kFinal ? d_out : d_h + d_h + d_out;
}

GcnParams make_gcn_params(int d_node, int d_h, int d_out, int n_activity, ReadoutMode readout,
                          Rng& rng) {
  if (d_node < 1 || d_h < 1 || d_out < 1 || n_activity < 2) {
    throw ValidationError("gcn dimensions must be positive with >= 2 activity classes");
  }
  GcnParams p;
  p.w1 = init_linear(d_node, d_h, rng);
  p.b1 = Tensor::zeros({d_h}, true);
  p.w2 = init_linear(d_h, d_h, rng);
  p.b2 = Tensor::zeros({d_h}, true);
  p.w3 = init_linear(d_h, d_out, rng);
  p.b3 = Tensor::zeros({d_out}, true);
  p.wc = init_linear(readout_dim(d_h, d_out, readout), n_activity, rng);
  p.bc = Tensor::zeros({n_activity}, true);
  p.readout = readout;
  return p;
}

std::vector<double> normalize_adjacency(const std::vector<double>& adjacency, int node_count) {
  if (node_count < 1 ||
      adjacency.size() != static_cast<std::size_t>(node_count) * node_count) {
    throw ShapeError("adjacency size does not match node count " + std::to_string(node_count));
  }
  for (int i = 0; i < node_count; ++i) {
    if (adjacency[static_cast<std::size_t>(i) * node_count + i] != 0.0) {
      throw ValidationError("adjacency diagonal must be zero before normalization");
    }
    for (int j = i + 1; j < node_count; ++j) {
      if (adjacency[static_cast<std::size_t>(i) * node_count + j] !=
          adjacency[static_cast<std::size_t>(j) * node_count + i]) {
        throw ValidationError("adjacency must be symmetric");
      }
    }
  }
  std::vector<double> with_loops(adjacency);
  for (int i = 0; i < node_count; ++i) {
    with_loops[static_cast<std::size_t>(i) * node_count + i] = 1.0;
  }
  std::vector<double> inv_sqrt_degree(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) {
    double deg = 0.0;
    for (int j = 0; j < node_count; ++j) {
      deg += with_loops[static_cast<std::size_t>(i) * node_count + j];
    }
    inv_sqrt_degree[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
  }
  std::vector<double> out(with_loops.size());
  for (int i = 0; i < node_count; ++i) {
    for (int j = 0; j < node_count; ++j) {
      out[static_cast<std::size_t>(i) * node_count + j] =
          inv_sqrt_degree[static_cast<std::size_t>(i)] *
          with_loops[static_cast<std::size_t>(i) * node_count + j] *
          inv_sqrt_degree[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

Tensor gcn_layer_forward(const Tensor& h, const Tensor& a_hat, const Tensor& w, const Tensor& b) {
  return relu(add_rowvec(matmul(matmul(a_hat, h), w), b));
}

Tensor graph_readout(const std::vector<Tensor>& layer_outputs, ReadoutMode readout) {
  if (layer_outputs.empty()) throw ValidationError("readout of zero layers");
  if (readout == ReadoutMode::kFinal) {
    return mean_rows(layer_outputs.back());
  }
  std::vector<Tensor> means;
  means.reserve(layer_outputs.size());
  for (const Tensor& layer : layer_outputs) means.push_back(mean_rows(layer));
  return concat1d(means);
}

Tensor gcn_forward(const Tensor& node_features, const std::vector<double>& adjacency,
                   const GcnParams& params) {
  if (!node_features.defined() || node_features.ndim() != 2) {
    throw ShapeError("gcn input must be a (K, d_node) matrix");
  }
  const int k_n = node_features.dim(0);
  const Tensor a_hat({k_n, k_n}, normalize_adjacency(adjacency, k_n));
  const Tensor h1 = gcn_layer_forward(node_features, a_hat, params.w1, params.b1);
  const Tensor h2 = gcn_layer_forward(h1, a_hat, params.w2, params.b2);
  const Tensor h3 = gcn_layer_forward(h2, a_hat, params.w3, params.b3);
  return graph_readout({h1, h2, h3}, params.readout);
}

Tensor classify_logits(const Tensor& readout, const GcnParams& params) {
  if (readout.ndim() != 1 || readout.dim(0) != params.wc.dim(0)) {
    throw ShapeError("readout of " + shape_str(readout.shape()) +
                     " does not match classifier input " + shape_str(params.wc.shape()));
  }
  const Tensor row = reshape(readout, {1, readout.dim(0)});
  return reshape(add_rowvec(matmul(row, params.wc), params.bc), {params.wc.dim(1)});
}

SnippetClassification classify_snippet(const Tensor& readout, const GcnParams& params) {
  const Tensor logits = classify_logits(readout, params);
  SnippetClassification result;
  result.probabilities = softmax(logits.values());
  result.label = static_cast<int>(
      std::max_element(result.probabilities.begin(), result.probabilities.end()) -
      result.probabilities.begin());
  return result;
}

}  // namespace cadet
