#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cadet/gcn.hpp"
#include "cadet/geometry.hpp"
#include "cadet/rng.hpp"
#include "cadet/roi_pool.hpp"
#include "cadet/tensor.hpp"

namespace {

cadet::Tensor random_tensor(cadet::Shape shape, cadet::Rng& rng) {
  const std::int64_t n = cadet::shape_numel(shape);
  std::vector<double> data(static_cast<std::size_t>(n));
  for (double& v : data) v = cadet::uniform_real(rng, -1.0, 1.0);
  return cadet::Tensor(std::move(shape), std::move(data));
}

// 38x38 grid at quarter resolution, i.e. a 152x152 frame.
constexpr int kC = 64, kL = 8, kH = 38, kW = 38;
constexpr double kScale = 0.25;

cadet::FeatureVolume bench_volume(cadet::Rng& rng, bool requires_grad = false) {
  cadet::Tensor values = random_tensor({kC, kL, kH, kW}, rng);
  values.set_requires_grad(requires_grad);
  return cadet::FeatureVolume{std::move(values), kScale};
}

cadet::ActionTube bench_tube(cadet::Rng& rng) {
  cadet::ActionTube tube;
  tube.id = 1;
  for (int t = 0; t < kL; ++t) {
    const double x = cadet::uniform_real(rng, 10.0, 60.0);
    const double y = cadet::uniform_real(rng, 10.0, 60.0);
    tube.boxes.push_back({x, y, x + 70.0, y + 70.0});
  }
  return tube;
}

void bm_matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  cadet::Rng rng(7);
  cadet::Tensor a = random_tensor({n, n}, rng);
  cadet::Tensor b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    cadet::Tensor c = cadet::matmul(a, b);
    benchmark::DoNotOptimize(c.values().data());
  }
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128);

void bm_roi_pool(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  cadet::Rng rng(11);
  cadet::FeatureVolume fv = bench_volume(rng);
  cadet::ActionTube tube = bench_tube(rng);
  for (auto _ : state) {
    cadet::Tensor pooled = cadet::roi_pool_3d(fv, tube, k);
    benchmark::DoNotOptimize(pooled.values().data());
  }
}
BENCHMARK(bm_roi_pool)->Arg(3)->Arg(7);

void bm_deformable_pool(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  cadet::Rng rng(13);
  cadet::FeatureVolume fv = bench_volume(rng);
  cadet::ActionTube tube = bench_tube(rng);
  cadet::Tensor offsets = random_tensor({kL, k, k, 2}, rng);
  for (auto _ : state) {
    cadet::Tensor pooled = cadet::deformable_roi_pool_3d(fv, tube, offsets);
    benchmark::DoNotOptimize(pooled.values().data());
  }
}
BENCHMARK(bm_deformable_pool)->Arg(3)->Arg(7);

void bm_modulated_pool(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  cadet::Rng rng(17);
  cadet::FeatureVolume fv = bench_volume(rng);
  cadet::ActionTube tube = bench_tube(rng);
  cadet::Tensor offsets = random_tensor({kL, k, k, 2}, rng);
  cadet::Tensor modulation = cadet::sigmoid(random_tensor({kL, k, k}, rng));
  for (auto _ : state) {
    cadet::Tensor pooled =
        cadet::modulated_deformable_roi_pool_3d(fv, tube, offsets, modulation);
    benchmark::DoNotOptimize(pooled.values().data());
  }
}
BENCHMARK(bm_modulated_pool)->Arg(3)->Arg(7);

// Cost of one pooled gradient: forward under a tape, then backward.
void bm_modulated_pool_backward(benchmark::State& state) {
  const int k = 7;
  cadet::Rng rng(19);
  cadet::FeatureVolume fv = bench_volume(rng, true);
  cadet::ActionTube tube = bench_tube(rng);
  cadet::Tensor offsets = random_tensor({kL, k, k, 2}, rng);
  offsets.set_requires_grad(true);
  cadet::Tensor modulation = random_tensor({kL, k, k}, rng);
  for (auto _ : state) {
    cadet::Tape tape;
    cadet::TapeScope scope(tape);
    cadet::Tensor loss = cadet::sum(cadet::modulated_deformable_roi_pool_3d(
        fv, tube, cadet::mul(offsets, 0.2), cadet::sigmoid(modulation)));
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.values().data());
  }
}
BENCHMARK(bm_modulated_pool_backward);

void bm_gcn_forward(benchmark::State& state) {
  const int nodes = static_cast<int>(state.range(0));
  const int d_node = 256, d_h = 512, d_out = 2048;
  cadet::Rng rng(23);
  cadet::GcnParams params =
      cadet::make_gcn_params(d_node, d_h, d_out, 7, cadet::ReadoutMode::kFinal, rng);
  cadet::Tensor features = random_tensor({nodes, d_node}, rng);
  std::vector<double> adjacency(static_cast<std::size_t>(nodes) * nodes, 0.0);
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = cadet::uniform_real(rng, 0.0, 1.0);
      adjacency[static_cast<std::size_t>(i) * nodes + j] = v;
      adjacency[static_cast<std::size_t>(j) * nodes + i] = v;
    }
  for (auto _ : state) {
    cadet::Tensor readout = cadet::gcn_forward(features, adjacency, params);
    benchmark::DoNotOptimize(readout.values().data());
  }
}
BENCHMARK(bm_gcn_forward)->Arg(4)->Arg(16);

void bm_link_micro_tubes(benchmark::State& state) {
  const int n_steps = static_cast<int>(state.range(0));
  const int n_cands = 10;
  cadet::Rng rng(29);
  std::vector<std::vector<cadet::MicroTube>> steps(static_cast<std::size_t>(n_steps));
  for (int s = 0; s < n_steps; ++s) {
    for (int c = 0; c < n_cands; ++c) {
      cadet::MicroTube mt;
      mt.start_frame = s * 4;
      mt.delta = 4;
      const double x = cadet::uniform_real(rng, 0.0, 80.0);
      const double y = cadet::uniform_real(rng, 0.0, 80.0);
      mt.start_box = {x, y, x + 40.0, y + 40.0};
      mt.end_box = {x + 2.0, y + 2.0, x + 42.0, y + 42.0};
      mt.class_scores = {cadet::uniform_real(rng, 0.0, 1.0)};
      steps[static_cast<std::size_t>(s)].push_back(mt);
    }
  }
  for (auto _ : state) {
    auto chains = cadet::link_micro_tubes(steps, 0);
    benchmark::DoNotOptimize(chains.data());
  }
}
BENCHMARK(bm_link_micro_tubes)->Arg(8)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
