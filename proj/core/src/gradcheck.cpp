#include "cadet/gradcheck.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "cadet/errors.hpp"
#include "cadet/gcn.hpp"
#include "cadet/geometry.hpp"
#include "cadet/rng.hpp"
#include "cadet/roi_pool.hpp"
#include "cadet/tensor.hpp"

namespace cadet {

namespace {

constexpr double kEps = 1e-5;

Tensor random_leaf(Shape shape, Rng& rng, double lo, double hi) {
  std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)));
  for (double& v : data) v = uniform_real(rng, lo, hi);
  return Tensor(std::move(shape), std::move(data), true);
}

Tensor random_weights(std::int64_t n, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (double& v : w) v = uniform_real(rng, 0.5, 1.5);
  return Tensor({static_cast<int>(n)}, std::move(w));
}

Tensor project(const Tensor& out, const Tensor& weights) {
  return sum(mul(reshape(out, {static_cast<int>(out.numel())}), weights));
}

FeatureVolume random_volume(int c, int m, int h, int w, Rng& rng) {
  return FeatureVolume{random_leaf({c, m, h, w}, rng, -1.0, 1.0), 1.0};
}

// Corners off the cell lattice with >= 1.3 cells of margin, so small offset
// perturbations never cross the zero-padding boundary.
ActionTube random_tube(int frames, Rng& rng) {
  ActionTube tube;
  for (int t = 0; t < frames; ++t) {
    Box b;
    b.x1 = uniform_real(rng, 1.3, 2.3);
    b.y1 = uniform_real(rng, 1.3, 2.3);
    b.x2 = uniform_real(rng, 5.7, 6.7);
    b.y2 = uniform_real(rng, 5.7, 6.7);
    tube.boxes.push_back(b);
  }
  return tube;
}

struct Harness {
  std::vector<GradCheckEntry> entries;

  void note(const std::string& name, double err) {
    for (GradCheckEntry& e : entries) {
      if (e.name == name) {
        e.max_rel_err = std::max(e.max_rel_err, err);
        e.n_seeds += 1;
        return;
      }
    }
    entries.push_back({name, err, 1});
  }
};

void check_bilinear(Harness& h, Rng& rng, std::uint64_t seed) {
  FeatureVolume fv = random_volume(3, 2, 7, 9, rng);
  const int frame = uniform_int(rng, 0, 1);
  // fractional parts away from the lattice, where bilinear weights kink
  Tensor x = Tensor::scalar(uniform_int(rng, 0, 7) + uniform_real(rng, 0.15, 0.85), true);
  Tensor y = Tensor::scalar(uniform_int(rng, 0, 5) + uniform_real(rng, 0.15, 0.85), true);
  const Tensor weights = random_weights(3, rng);
  auto f = [&] { return project(bilinear_sample(fv, frame, x, y), weights); };
  h.note("bilinear sample / features", check_gradients(f, fv.values, kEps, 64, seed));
  h.note("bilinear sample / position", std::max(check_gradients(f, x, kEps),
                                                check_gradients(f, y, kEps)));
}

void check_pooling(Harness& h, Rng& rng, std::uint64_t seed) {
  const int k = 2, n_s = 2, l = 2;
  FeatureVolume fv = random_volume(2, l, 8, 8, rng);
  const ActionTube tube = random_tube(l, rng);
  Tensor off = random_leaf({l, k, k, 2}, rng, -0.25, 0.25);
  Tensor mod = random_leaf({l, k, k}, rng, 0.2, 0.8);
  const Tensor weights = random_weights(2 * l * k * k, rng);

  auto f_std = [&] { return project(roi_pool_3d(fv, tube, k, n_s), weights); };
  h.note("standard pool / features", check_gradients(f_std, fv.values, kEps, 96, seed));

  auto f_def = [&] { return project(deformable_roi_pool_3d(fv, tube, off, 0.1, n_s), weights); };
  h.note("deformable pool / features", check_gradients(f_def, fv.values, kEps, 96, seed + 1));
  h.note("deformable pool / offsets", check_gradients(f_def, off, kEps));

  auto f_mod = [&] {
    return project(modulated_deformable_roi_pool_3d(fv, tube, off, mod, 0.1, n_s), weights);
  };
  h.note("modulated pool / features", check_gradients(f_mod, fv.values, kEps, 96, seed + 2));
  h.note("modulated pool / offsets", check_gradients(f_mod, off, kEps));
  h.note("modulated pool / modulation", check_gradients(f_mod, mod, kEps));
}

void check_offset_predictor(Harness& h, Rng& rng, std::uint64_t seed) {
  const int c = 2, l = 2, k = 2;
  const bool modulated = (seed % 2) == 0;
  const bool shared = (seed / 2 % 2) == 0;
  OffsetPredictor p = make_offset_predictor(c, l, k, modulated, shared);
  for (double& v : p.weight.values()) v = uniform_real(rng, -0.3, 0.3);
  for (double& v : p.bias.values()) v = uniform_real(rng, -0.3, 0.3);
  Tensor pooled = random_leaf({c, l, k, k}, rng, -1.0, 1.0);
  const Tensor w_off = random_weights(static_cast<std::int64_t>(l) * k * k * 2, rng);
  const Tensor w_mod = random_weights(static_cast<std::int64_t>(l) * k * k, rng);
  auto f = [&] {
    const OffsetField field = predict_offsets(pooled, p);
    Tensor loss = project(field.offsets, w_off);
    if (modulated) loss = add(loss, project(field.modulation, w_mod));
    return loss;
  };
  h.note("offset predictor / weight", check_gradients(f, p.weight, kEps, 80, seed));
  h.note("offset predictor / bias", check_gradients(f, p.bias, kEps));
  h.note("offset predictor / input", check_gradients(f, pooled, kEps));
}

void check_graph_layer(Harness& h, Rng& rng) {
  const int k_n = 4, d_in = 5, d_out = 6;
  std::vector<double> adjacency(static_cast<std::size_t>(k_n) * k_n, 0.0);
  for (int i = 0; i < k_n; ++i) {
    for (int j = i + 1; j < k_n; ++j) {
      if (uniform_real(rng, 0.0, 1.0) < 0.5) {
        adjacency[static_cast<std::size_t>(i) * k_n + j] = 1.0;
        adjacency[static_cast<std::size_t>(j) * k_n + i] = 1.0;
      }
    }
  }
  const Tensor a_hat({k_n, k_n}, normalize_adjacency(adjacency, k_n));
  const Tensor weights = random_weights(k_n * d_out, rng);

  // redraw until every pre-activation clears the relu kink by a wide margin
  Tensor x, w, b;
  for (;;) {
    x = random_leaf({k_n, d_in}, rng, -0.7, 0.7);
    w = random_leaf({d_in, d_out}, rng, -0.7, 0.7);
    b = random_leaf({d_out}, rng, -0.3, 0.3);
    const Tensor pre = add_rowvec(matmul(matmul(a_hat, x), w), b);
    double min_abs = 1e30;
    for (double v : pre.values()) min_abs = std::min(min_abs, std::abs(v));
    if (min_abs > 1e-3) break;
  }

  auto f = [&] { return project(gcn_layer_forward(x, a_hat, w, b), weights); };
  h.note("graph layer / input", check_gradients(f, x, kEps));
  h.note("graph layer / weight", check_gradients(f, w, kEps));
  h.note("graph layer / bias", check_gradients(f, b, kEps));
}

void check_readout(Harness& h, Rng& rng, std::uint64_t seed) {
  const int k_n = 3, d_h = 4, d_out = 5;
  const ReadoutMode mode = (seed % 2) == 0 ? ReadoutMode::kFinal : ReadoutMode::kConcat;
  Tensor h1 = random_leaf({k_n, d_h}, rng, -1.0, 1.0);
  Tensor h2 = random_leaf({k_n, d_h}, rng, -1.0, 1.0);
  Tensor h3 = random_leaf({k_n, d_out}, rng, -1.0, 1.0);
  const Tensor weights = random_weights(readout_dim(d_h, d_out, mode), rng);
  auto f = [&] { return project(graph_readout({h1, h2, h3}, mode), weights); };
  double err = check_gradients(f, h3, kEps);
  if (mode == ReadoutMode::kConcat) {
    err = std::max({err, check_gradients(f, h1, kEps), check_gradients(f, h2, kEps)});
  }
  h.note("readout / layer outputs", err);
}

void check_classifier(Harness& h, Rng& rng) {
  const int d_read = 6, n_act = 4;
  GcnParams p;
  p.wc = random_leaf({d_read, n_act}, rng, -0.7, 0.7);
  p.bc = random_leaf({n_act}, rng, -0.3, 0.3);
  Tensor readout = random_leaf({d_read}, rng, -1.0, 1.0);
  const int target = uniform_int(rng, 0, n_act - 1);
  auto f = [&] { return softmax_cross_entropy(classify_logits(readout, p), target); };
  h.note("classifier / weight", check_gradients(f, p.wc, kEps));
  h.note("classifier / bias", check_gradients(f, p.bc, kEps));
  h.note("classifier / input", check_gradients(f, readout, kEps));
}

}  // namespace

std::vector<GradCheckEntry> run_gradient_checks(int n_seeds) {
  if (n_seeds < 1) throw ValidationError("gradient check needs at least one seed");
  Harness h;
  for (int s = 0; s < n_seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    Rng rng(0x6772616400000000ull + seed);
    check_bilinear(h, rng, seed);
    check_pooling(h, rng, seed);
    check_offset_predictor(h, rng, seed);
    check_graph_layer(h, rng);
    check_readout(h, rng, seed);
    check_classifier(h, rng);
  }
  return h.entries;
}

double max_gradient_error(const std::vector<GradCheckEntry>& entries) {
  double worst = 0.0;
  for (const GradCheckEntry& e : entries) worst = std::max(worst, e.max_rel_err);
  return worst;
}

}  // namespace cadet
