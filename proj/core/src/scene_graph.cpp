#include "cadet/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

namespace cadet {

namespace {

double center_x_at_first_appearance(const ActionTube& tube) {
  if (tube.boxes.empty()) throw ValidationError("tube without boxes in scene graph");
  const Box& b = tube.boxes.front();
  return 0.5 * (b.x1 + b.x2);
}

std::tuple<int, double, int> order_key(const ActionTube& tube) {
  return {tube.first_frame, center_x_at_first_appearance(tube), tube.id};
}

void add_undirected(std::vector<double>& adj, int n, int a, int b) {
  if (a == b) return;
  adj[static_cast<std::size_t>(a) * n + b] = 1.0;
  adj[static_cast<std::size_t>(b) * n + a] = 1.0;
}

}  // namespace

std::vector<int> canonical_tube_order(const std::vector<ActionTube>& tubes) {
  for (const ActionTube& tube : tubes) {
    if (tube.boxes.empty()) throw ValidationError("tube without boxes in scene graph");
  }
  std::vector<int> order(tubes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return order_key(tubes[static_cast<std::size_t>(a)]) <
           order_key(tubes[static_cast<std::size_t>(b)]);
  });
  return order;
}

Tensor project_node_features(const Tensor& pooled, const Tensor& w_proj, const Tensor& b_proj) {
  if (!pooled.defined()) throw ShapeError("projection of an undefined tensor");
  const int in_dim = static_cast<int>(pooled.numel());
  if (w_proj.ndim() != 2 || w_proj.dim(0) != in_dim || b_proj.ndim() != 1 ||
      b_proj.dim(0) != w_proj.dim(1)) {
    throw ShapeError("node projection parameters do not match input of " +
                     std::to_string(in_dim) + " values");
  }
  const Tensor flat = reshape(pooled, {1, in_dim});
  return reshape(add_rowvec(matmul(flat, w_proj), b_proj), {w_proj.dim(1)});
}

EdgeList build_order_edges(const std::vector<ActionTube>& tubes) {
  if (tubes.empty()) throw ValidationError("scene graph needs at least one node");
  const std::vector<int> order = canonical_tube_order(tubes);
  EdgeList edges;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    edges.emplace_back(order[i], order[i + 1]);
  }
  return edges;
}

EdgeList build_similarity_edges(const Tensor& features, int kappa) {
  if (!features.defined() || features.ndim() != 2) {
    throw ShapeError("similarity needs a (K, d) feature matrix");
  }
  if (kappa < 1) throw ValidationError("neighbor count must be >= 1");
  const int k_n = features.dim(0);
  const int d = features.dim(1);
  const double* rows = features.values().data();

  std::vector<double> norms(static_cast<std::size_t>(k_n), 0.0);
  for (int i = 0; i < k_n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = rows[static_cast<std::size_t>(i) * d + j];
      acc += v * v;
    }
    norms[static_cast<std::size_t>(i)] = std::sqrt(acc);
  }
  auto cosine_distance = [&](int a, int b) {
    const double na = norms[static_cast<std::size_t>(a)];
    const double nb = norms[static_cast<std::size_t>(b)];
    if (na == 0.0 || nb == 0.0) return 1.0;
    double dot = 0.0;
    for (int j = 0; j < d; ++j) {
      dot += rows[static_cast<std::size_t>(a) * d + j] * rows[static_cast<std::size_t>(b) * d + j];
    }
    return 1.0 - dot / (na * nb);
  };

  std::vector<std::vector<double>> dist(static_cast<std::size_t>(k_n),
                                        std::vector<double>(static_cast<std::size_t>(k_n), 0.0));
  for (int i = 0; i < k_n; ++i) {
    for (int j = i + 1; j < k_n; ++j) {
      dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          dist[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = cosine_distance(i, j);
    }
  }

  std::vector<std::vector<bool>> picked(static_cast<std::size_t>(k_n),
                                        std::vector<bool>(static_cast<std::size_t>(k_n), false));
  for (int i = 0; i < k_n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < k_n; ++j) {
      if (j != i) others.push_back(j);
    }
    std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
      const double da = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
      const double db = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
      if (da != db) return da < db;
      return a < b;
    });
    const int take = std::min<int>(kappa, static_cast<int>(others.size()));
    for (int t = 0; t < take; ++t) {
      picked[static_cast<std::size_t>(i)][static_cast<std::size_t>(others[static_cast<std::size_t>(t)])] = true;
    }
  }

  EdgeList edges;
  for (int i = 0; i < k_n; ++i) {
    for (int j = i + 1; j < k_n; ++j) {
      if (picked[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ||
          picked[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
        edges.emplace_back(i, j);
      }
    }
  }
  return edges;
}

EdgeList build_label_edges(const std::vector<ActionTube>& tubes) {
  if (tubes.empty()) throw ValidationError("scene graph needs at least one node");
  std::map<int, std::vector<int>> by_label;
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    if (tubes[i].action_label == kBackgroundNodeLabel) continue;
    by_label[tubes[i].action_label].push_back(static_cast<int>(i));
  }
  EdgeList edges;
  for (const auto& [label, members] : by_label) {
    (void)label;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        edges.emplace_back(members[a], members[b]);
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<double> merge_graphs(const EdgeList& order, const EdgeList& similarity,
                                 const EdgeList& label, int node_count) {
  if (node_count < 1) throw ValidationError("merge needs at least one node");
  std::vector<double> adj(static_cast<std::size_t>(node_count) * node_count, 0.0);
  for (const EdgeList* set : {&order, &similarity, &label}) {
    for (const auto& [a, b] : *set) {
      if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
        throw ValidationError("edge endpoint outside node range");
      }
      add_undirected(adj, node_count, a, b);
    }
  }
  return adj;
}

SceneGraph build_scene_graph(const std::vector<ActionTube>& sorted_tubes,
                             const Tensor& node_features, int kappa) {
  if (sorted_tubes.empty()) throw ValidationError("scene graph needs at least one node");
  if (node_features.ndim() != 2 ||
      node_features.dim(0) != static_cast<int>(sorted_tubes.size())) {
    throw ShapeError("node feature rows do not match tube count");
  }
  SceneGraph g;
  g.node_count = static_cast<int>(sorted_tubes.size());
  for (const ActionTube& tube : sorted_tubes) {
    g.tube_ids.push_back(tube.id);
    g.node_labels.push_back(tube.action_label);
  }
  g.order_edges = build_order_edges(sorted_tubes);
  g.similarity_edges = build_similarity_edges(node_features, kappa);
  g.label_edges = build_label_edges(sorted_tubes);
  g.merged_adjacency = merge_graphs(g.order_edges, g.similarity_edges, g.label_edges, g.node_count);
  return g;
}

}  // namespace cadet
