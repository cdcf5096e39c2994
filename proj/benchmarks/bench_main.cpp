#include <benchmark/benchmark.h>

#include "polsim/abm.hpp"
#include "polsim/metrics.hpp"
#include "polsim/nn.hpp"

using namespace polsim;

namespace {

const FacilityLayout& layout() {
    static const FacilityLayout l =
        FacilityLayout::load_file(std::string(POLSIM_DATA_DIR) + "/default_facility.json");
    return l;
}

void BM_SimulationRun(benchmark::State& state) {
    SimConfig cfg;
    cfg.layout = layout();
    std::uint64_t seed = 1;
    for (auto _ : state) {
        RunResult r = run_simulation(cfg, seed++);
        benchmark::DoNotOptimize(r.transitions.data());
    }
}
BENCHMARK(BM_SimulationRun)->Unit(benchmark::kMillisecond);

void BM_TriangularSampling(benchmark::State& state) {
    const TriangularSpec spec{20, 50, 120};
    Rng rng(3);
    double acc = 0;
    for (auto _ : state) acc += sample_triangular(spec, rng);
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_TriangularSampling);

void BM_ForwardBatch32(benchmark::State& state) {
    Rng rng(5);
    const DenseNet net = DenseNet::mlp_default(rng);
    Matrix x(32, kFeatureDim);
    for (double& v : x.data) v = rng.uniform01();
    for (auto _ : state) {
        Matrix out = forward_eval(net, x);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_ForwardBatch32);

void BM_TrainStepMlp(benchmark::State& state) {
    Rng rng(5);
    DenseNet net = DenseNet::mlp_default(rng);
    Matrix x(32, kFeatureDim);
    for (double& v : x.data) v = rng.uniform01();
    std::vector<int> labels(32);
    for (int& l : labels) l = static_cast<int>(rng.uniform_index(6));
    const Targets y = Targets::for_labels(labels);
    Rng drop(9);
    for (auto _ : state) {
        const ForwardCache cache = forward_train(net, x, drop);
        Gradients g;
        benchmark::DoNotOptimize(backward(net, cache, y, &g));
    }
}
BENCHMARK(BM_TrainStepMlp);

void BM_Wasserstein(benchmark::State& state) {
    Rng rng(7);
    std::vector<double> a(10000), b(10000);
    for (double& v : a) v = rng.uniform01();
    for (double& v : b) v = rng.uniform01();
    for (auto _ : state) benchmark::DoNotOptimize(wasserstein_1d(a, b));
}
BENCHMARK(BM_Wasserstein)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
