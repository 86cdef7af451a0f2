// Serial reference kernels against the OpenMP kernels on a fitted Wulff domain.
// The benchmark argument is the number of cells per side.

#include "iamcf/domain.hpp"
#include "iamcf/kernels.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

namespace {

using namespace iamcf;

struct Fixture {
    MinkowskiNorm F = MinkowskiNorm::lq(2, 4.0, 0.05);
    std::unique_ptr<GridDomain> d;
    std::vector<double> v;

    explicit Fixture(int cells)
    {
        d = std::make_unique<GridDomain>(Lattice::square(cells, -8, 8),
                                         Obstacle::wulff(WulffShape(F, Vec::Zero(2), 1.0)));
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> U(0.05, 1.0);
        v.assign(d->node_count(), 1.0);
        for (int k : d->free_nodes()) v[k] = U(rng);
    }
};

Fixture& fixture(int cells)
{
    static std::map<int, std::unique_ptr<Fixture>> cache;
    auto& slot = cache[cells];
    if (!slot) slot = std::make_unique<Fixture>(cells);
    return *slot;
}

const EnergyParams kParams{1.2, 0.0};

void BM_energy_serial(benchmark::State& st)
{
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(serial::energy(f.F, f.d->mesh(), f.v, kParams));
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(f.d->mesh().size()));
}

void BM_energy_omp(benchmark::State& st)
{
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(omp::energy(f.F, f.d->mesh(), f.v, kParams));
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(f.d->mesh().size()));
}

void BM_gradient_serial(benchmark::State& st)
{
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    std::vector<double> g;
    for (auto _ : st) {
        benchmark::DoNotOptimize(serial::energy_gradient(f.F, f.d->mesh(), f.v, kParams, g));
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(f.d->mesh().size()));
}

void BM_gradient_omp(benchmark::State& st)
{
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    std::vector<double> g;
    for (auto _ : st) {
        benchmark::DoNotOptimize(omp::energy_gradient(f.F, f.d->mesh(), f.v, kParams, g));
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(f.d->mesh().size()));
}

void BM_hessian(benchmark::State& st, bool parallel)
{
    Fixture& f = fixture(static_cast<int>(st.range(0)));
    HessianAssembler H(*f.d);
    for (auto _ : st) {
        H.assemble(f.F, f.v, kParams, parallel);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(f.d->mesh().size()));
}

} // namespace

BENCHMARK(BM_energy_serial)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_energy_omp)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_gradient_serial)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_gradient_omp)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_hessian, serial, false)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_hessian, omp, true)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
