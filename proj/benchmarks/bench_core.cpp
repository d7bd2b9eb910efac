/** bench_core.cpp - throughput of the hot paths: convolution, fusion, registration, MU-Net */

#include <benchmark/benchmark.h>

#include "hdru/fusion.hpp"
#include "hdru/munet.hpp"
#include "hdru/nn_ops.hpp"
#include "hdru/nunet.hpp"
#include "hdru/registration.hpp"
#include "hdru/rng.hpp"

using namespace hdru;
using namespace hdru::nn;

namespace {

GrayImage noise_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage img(w, h);
    for (float& v : img.pixels()) v = static_cast<float>(rng.uniform());
    return img;
}

Tensor4 noise_tensor(Shape4 s, std::uint64_t seed) {
    Rng rng(seed);
    Tensor4 t(s);
    for (float& v : t.values()) v = static_cast<float>(rng.uniform());
    return t;
}

Burst noise_burst(int size) { return {noise_image(size, size, 1), noise_image(size, size, 2), noise_image(size, size, 3)}; }

}  // namespace

static void BM_ConvDown7x7(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ConvSpec spec{3, 3, 7, 7, 2, ConvMode::downsample};
    const Tensor4 x = noise_tensor({1, 3, size, size}, 4);
    const std::vector<float> k(spec.kernel_size(), 0.01f), b(3, 0.0f);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, k, b, spec));
}
BENCHMARK(BM_ConvDown7x7)->Arg(64)->Arg(256);

static void BM_ConvUp7x7(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const ConvSpec spec{3, 3, 7, 7, 2, ConvMode::upsample};
    const Tensor4 x = noise_tensor({1, 3, size / 2, size / 2}, 5);
    const std::vector<float> k(spec.kernel_size(), 0.01f), b(3, 0.0f);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, k, b, spec));
}
BENCHMARK(BM_ConvUp7x7)->Arg(64)->Arg(256);

static void BM_MertensFuse(benchmark::State& state) {
    const Burst b = noise_burst(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mertens_fuse(b));
}
BENCHMARK(BM_MertensFuse)->Arg(256);

static void BM_PhaseCorrelate(benchmark::State& state) {
    const GrayImage a = noise_image(600, 600, 6);
    const GrayImage b = circular_shift(a, {83, -121});
    for (auto _ : state) benchmark::DoNotOptimize(phase_correlate(a, b));
}
BENCHMARK(BM_PhaseCorrelate);

static void BM_MuNetForward(benchmark::State& state) {
    MuNet net = build_munet();
    init_mertens(net);
    const Tensor4 x = noise_tensor({static_cast<int>(state.range(0)), 3, 256, 256}, 7);
    for (auto _ : state) benchmark::DoNotOptimize(net.graph.forward({{"burst", x}}));
}
BENCHMARK(BM_MuNetForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_MuNetForwardBackward(benchmark::State& state) {
    MuNet net = build_munet();
    init_mertens(net);
    const Tensor4 x = noise_tensor({1, 3, 256, 256}, 8);
    const Tensor4 g({1, 1, 256, 256}, 1.0f);
    for (auto _ : state) {
        Tape tape;
        net.graph.forward({{"burst", x}}, &tape);
        benchmark::DoNotOptimize(net.graph.backward(tape, {{"fused", g}}));
    }
}
BENCHMARK(BM_MuNetForwardBackward)->Unit(benchmark::kMillisecond);

static void BM_NuNetForward(benchmark::State& state) {
    const NuNet d = build_nunet(1);
    const Tensor4 x = noise_tensor({1, 1, 256, 256}, 9);
    for (auto _ : state) benchmark::DoNotOptimize(d.graph.forward({{"candidate", x}}));
}
BENCHMARK(BM_NuNetForward)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
