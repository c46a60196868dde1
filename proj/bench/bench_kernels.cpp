// Serial vs OpenMP consensus kernels. Arguments: nodes, values per node.

#include "dtshare/graph.hpp"
#include "dtshare/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace dtshare;

namespace {

struct Fixture {
    Topology topology;
    std::vector<double> current, lagged, out;
    std::vector<std::uint8_t> mask;

    Fixture(int n, std::size_t dim) : topology(presets::cycle(n)) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        current.resize(n * dim);
        lagged.resize(n * dim);
        out.resize(n * dim);
        for (auto& v : current) v = u(rng);
        for (auto& v : lagged) v = u(rng);
        mask.assign(topology.adjacency().size(), 1);
        for (std::size_t i = 0; i < mask.size(); i += 3) mask[i] = 0;
    }
    kernels::Csr csr() const { return {topology.offsets(), topology.adjacency()}; }
};

template<auto Kernel>
void laplacian(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(1));
    Fixture f(static_cast<int>(state.range(0)), dim);
    for (auto _ : state) {
        Kernel(f.csr(), dim, f.current, f.lagged, 1e-3, f.out);
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.out.size()));
}

template<auto Kernel>
void mix(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(1));
    Fixture f(static_cast<int>(state.range(0)), dim);
    for (auto _ : state) {
        Kernel(f.csr(), dim, f.current, f.lagged, 0.25, f.mask, f.out);
        benchmark::DoNotOptimize(f.out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.out.size()));
}

template<auto Kernel>
void spread(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(1));
    const auto n = static_cast<std::size_t>(state.range(0));
    Fixture f(static_cast<int>(n), dim);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(n, dim, f.current));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.current.size()));
}

void sizes(benchmark::internal::Benchmark* b) {
    for (int n : {6, 64})
        for (int dim : {1024, 65536}) b->Args({n, dim});
}

} // namespace

BENCHMARK(laplacian<kernels::serial::laplacian_step>)->Name("laplacian_step/serial")->Apply(sizes);
BENCHMARK(laplacian<kernels::omp::laplacian_step>)->Name("laplacian_step/omp")->Apply(sizes);
BENCHMARK(mix<kernels::serial::neighbor_mix>)->Name("neighbor_mix/serial")->Apply(sizes);
BENCHMARK(mix<kernels::omp::neighbor_mix>)->Name("neighbor_mix/omp")->Apply(sizes);
BENCHMARK(spread<kernels::serial::disagreement>)->Name("disagreement/serial")->Apply(sizes);
BENCHMARK(spread<kernels::omp::disagreement>)->Name("disagreement/omp")->Apply(sizes);

BENCHMARK_MAIN();
