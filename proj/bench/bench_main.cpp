// Serial reference vs OpenMP kernels. Thread count is the benchmark argument.
#include <benchmark/benchmark.h>

#include "qsr/parallel.hpp"
#include "qsr/patchmatch.hpp"
#include "qsr/phantom.hpp"
#include "qsr/resample.hpp"

namespace {

const qsr::Image2D& blur_input() {
    static const qsr::Image2D img = [] {
        qsr::PhantomSpec spec;
        spec.patients = 1;
        spec.slices_per_patient = 1;
        spec.size = 512;
        return qsr::generate_dataset(spec)[0].slices[0];
    }();
    return img;
}

struct MatchInput {
    qsr::Dataset lr, hr;
    qsr::MatchConfig cfg;
};

const MatchInput& match_input() {
    static const MatchInput in = [] {
        qsr::PhantomSpec spec;
        spec.seed = 3;
        spec.patients = 4;
        spec.slices_per_patient = 8;
        spec.size = 128;
        auto [lr, hr] = qsr::generate_similar_pair(spec, 0.25);
        qsr::MatchConfig cfg;
        cfg.patch_size = 32;
        cfg.stride = 16;
        return MatchInput{std::move(lr), std::move(hr), cfg};
    }();
    return in;
}

void BM_BlurSerial(benchmark::State& state) {
    const auto& img = blur_input();
    for (auto _ : state) benchmark::DoNotOptimize(qsr::serial::gaussian_blur(img, 3.0));
}

void BM_BlurParallel(benchmark::State& state) {
    qsr::set_thread_count(static_cast<int>(state.range(0)));
    const auto& img = blur_input();
    for (auto _ : state) benchmark::DoNotOptimize(qsr::gaussian_blur(img, 3.0));
}

void BM_MatchSerial(benchmark::State& state) {
    const auto& in = match_input();
    for (auto _ : state) benchmark::DoNotOptimize(qsr::serial::match_hierarchical(in.lr, in.hr, in.cfg));
}

void BM_MatchParallel(benchmark::State& state) {
    qsr::set_thread_count(static_cast<int>(state.range(0)));
    const auto& in = match_input();
    for (auto _ : state) benchmark::DoNotOptimize(qsr::match_hierarchical(in.lr, in.hr, in.cfg));
}

}  // namespace

BENCHMARK(BM_BlurSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BlurParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MatchSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MatchParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
