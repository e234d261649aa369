#include <benchmark/benchmark.h>

#include <vector>

#include "fingermi/adam.hpp"
#include "fingermi/losses.hpp"
#include "fingermi/network.hpp"
#include "fingermi/ops.hpp"
#include "fingermi/signal.hpp"
#include "fingermi/stats.hpp"
#include "fingermi/synth.hpp"

using namespace fingermi;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Temporal convolution at FingerNet's first-layer geometry (batch 8).
void BM_TemporalConvForward(benchmark::State& state) {
  const Tensor x = random_tensor({8, 1, 24, 1000}, 1);
  const Tensor k = random_tensor({8, 1, 1, 125}, 2);
  const Tensor b = random_tensor({8}, 3);
  for (auto _ : state) {
    Tape tape;
    Var y = conv2d(tape.constant(x), tape.constant(k), tape.constant(b), {1, 1}, Padding::same({1, 125}));
    benchmark::DoNotOptimize(y.value().data().data());
  }
}
BENCHMARK(BM_TemporalConvForward)->Unit(benchmark::kMillisecond);

void BM_TemporalConvBackward(benchmark::State& state) {
  const Tensor x = random_tensor({8, 1, 24, 1000}, 1);
  Tensor k = random_tensor({8, 1, 1, 125}, 2);
  k.set_requires_grad(true);
  for (auto _ : state) {
    Tape tape;
    tape.backprop(sum(conv2d(tape.constant(x), tape.leaf(k), std::nullopt, {1, 1}, Padding::same({1, 125}))));
  }
}
BENCHMARK(BM_TemporalConvBackward)->Unit(benchmark::kMillisecond);

// Deep-block convolution: 16 -> 32 channels over 31 samples, kernel 5.
void BM_DeepConvForward(benchmark::State& state) {
  const Tensor x = random_tensor({8, 16, 1, 31}, 4);
  const Tensor k = random_tensor({32, 16, 1, 5}, 5);
  for (auto _ : state) {
    Tape tape;
    Var y = conv2d(tape.constant(x), tape.constant(k), std::nullopt, {1, 1}, Padding::same({1, 5}));
    benchmark::DoNotOptimize(y.value().data().data());
  }
}
BENCHMARK(BM_DeepConvForward)->Unit(benchmark::kMicrosecond);

void BM_SpatialDepthwise(benchmark::State& state) {
  const Tensor x = random_tensor({8, 8, 24, 1000}, 6);
  const Tensor k = random_tensor({16, 1, 24, 1}, 7);
  for (auto _ : state) {
    Tape tape;
    Var y = depthwise_conv2d(tape.constant(x), tape.constant(k), 2);
    benchmark::DoNotOptimize(y.value().data().data());
  }
}
BENCHMARK(BM_SpatialDepthwise)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  const ModelSpec spec = state.range(0) == 0 ? eegnet_spec() : state.range(0) == 1 ? fingernet_spec() : deepconvnet_spec();
  const Network net = init_params(spec, 1);
  const Tensor x = random_tensor({8, 1, 24, 1000}, 8);
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, x).data().data());
  state.SetLabel(spec.name);
}
BENCHMARK(BM_ModelForward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

// One optimisation step of FingerNet on a batch of 8: forward, loss, backward, Adam, max-norm.
void BM_FingerNetTrainStep(benchmark::State& state) {
  Network net = init_params(fingernet_spec(), 1);
  net.set_mode(Mode::Training);
  AdamState adam = adam_init(net.params());
  const Tensor x = random_tensor({8, 1, 24, 1000}, 9);
  const std::vector<std::size_t> labels{0, 1, 2, 3, 4, 0, 1, 2};
  Pcg32 rng(10);
  for (auto _ : state) {
    for (auto& p : net.params()) p.zero_grad();
    Tape tape;
    tape.backprop(cross_entropy(log_softmax(forward(net, tape, tape.constant(x), &rng)), labels));
    adam_step(adam, net.params());
    apply_max_norm(net);
  }
}
BENCHMARK(BM_FingerNetTrainStep)->Unit(benchmark::kMillisecond);

void BM_PreprocessRaw(benchmark::State& state) {
  RawSynthSpec spec;
  spec.n_trials_per_class = 2;
  const Recording raw = synth_recording(spec);
  for (auto _ : state) benchmark::DoNotOptimize(preprocess(raw).epochs.data());
}
BENCHMARK(BM_PreprocessRaw)->Unit(benchmark::kMillisecond);

void BM_WilcoxonExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n);
  Pcg32 rng(11);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(a, b).p_value);
}
BENCHMARK(BM_WilcoxonExact)->Arg(9)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
