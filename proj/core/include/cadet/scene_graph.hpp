#pragma once

#include <utility>
#include <vector>

#include "cadet/geometry.hpp"
#include "cadet/tensor.hpp"

namespace cadet {

// Label carried by the whole-frame placeholder node of a tube-less snippet.
// It never participates in label edges.
inline constexpr int kBackgroundNodeLabel = -1;

using EdgeList = std::vector<std::pair<int, int>>;

struct SceneGraph {
  std::vector<int> tube_ids;
  std::vector<int> node_labels;
  EdgeList order_edges;       // directed chain
  EdgeList similarity_edges;  // undirected, stored with first < second
  EdgeList label_edges;       // undirected, stored with first < second
  std::vector<double> merged_adjacency;  // node_count^2, row-major 0/1
  int node_count = 0;
};

// Appearance order: first frame, then box-center x at first appearance, then
// tube id. All graph construction sorts tubes with this key first, which makes
// the result independent of input order up to node relabeling.
std::vector<int> canonical_tube_order(const std::vector<ActionTube>& tubes);

// d_node projection of flattened pooled tube features: x W + b.
Tensor project_node_features(const Tensor& pooled, const Tensor& w_proj, const Tensor& b_proj);

EdgeList build_order_edges(const std::vector<ActionTube>& tubes);

// kappa nearest neighbors per node under cosine distance, undirected union.
// features: (K, d) value matrix.
EdgeList build_similarity_edges(const Tensor& features, int kappa);

EdgeList build_label_edges(const std::vector<ActionTube>& tubes);

std::vector<double> merge_graphs(const EdgeList& order, const EdgeList& similarity,
                                 const EdgeList& label, int node_count);

// Full construction over canonically sorted tubes; node_features rows must
// already follow canonical order.
SceneGraph build_scene_graph(const std::vector<ActionTube>& sorted_tubes,
                             const Tensor& node_features, int kappa);

}  // namespace cadet
