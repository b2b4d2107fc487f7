// Serial reference vs OpenMP kernels on a slice of the bundled constellation.

#include <benchmark/benchmark.h>

#include "caas/prediction.hpp"
#include "caas/visibility_kernels.hpp"

using namespace caas;
using namespace caas::constellation;

namespace {

struct Fixture {
    std::vector<SatelliteOrbit> orbits;
    std::vector<GroundPoint> gps;

    Fixture() {
        const OrbitalShell shells[] = {{0, 1584, 72, 53.0, 550.0, 1, WalkerPattern::Auto},
                                       {1, 648, 18, 86.4, 1200.0, 1, WalkerPattern::Auto}};
        orbits = build_constellation(shells);
        for (int i = 0; i < 40; ++i) gps.push_back({0.175 * i, 95.0 + 0.5 * i, 0.0});
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_windows_serial(benchmark::State& st) {
    const auto& f = fixture();
    std::span<const SatelliteOrbit> orbits(f.orbits.data(), 200);
    for (auto _ : st) benchmark::DoNotOptimize(coverage_windows_batch_serial(orbits, f.gps, {0, 600}, 10.0));
}

void BM_windows_omp(benchmark::State& st) {
    const auto& f = fixture();
    std::span<const SatelliteOrbit> orbits(f.orbits.data(), 200);
    for (auto _ : st) benchmark::DoNotOptimize(coverage_windows_batch(orbits, f.gps, {0, 600}, 10.0));
}

void BM_snapshot_serial(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(snapshot(std::span<const SatelliteOrbit>(f.orbits), f.gps, 0.0, 10.0));
}

void BM_snapshot_omp(benchmark::State& st) {
    const auto& f = fixture();
    for (auto _ : st) benchmark::DoNotOptimize(snapshot_parallel(f.orbits, f.gps, 0.0, 10.0));
}

template <bool Parallel>
void BM_matrix(benchmark::State& st) {
    const auto& f = fixture();
    const auto snap = snapshot_parallel(f.orbits, f.gps, 0.0, 10.0);
    const auto states = propagate_all(f.orbits, 0.0);
    std::vector<UeId> ids;
    for (int i = 0; i < static_cast<int>(f.gps.size()); ++i) ids.push_back(i);
    std::vector<prediction::Assignment> assignments;
    std::vector<GroundPoint> bores;
    for (const auto& e : snap.entries) {
        assignments.push_back({e.ground_point_id, e.satellite_id});
        bores.push_back(f.gps[static_cast<std::size_t>(e.ground_point_id)]);
    }
    prediction::LinkGeometry geo{states, ids, f.gps};
    channel::LinkParams params;
    for (auto _ : st) {
        if constexpr (Parallel)
            benchmark::DoNotOptimize(prediction::interference_matrix(snap, assignments, bores, params, geo));
        else
            benchmark::DoNotOptimize(prediction::interference_matrix_serial(snap, assignments, bores, params, geo));
    }
}

}  // namespace

BENCHMARK(BM_windows_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_windows_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_snapshot_serial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_snapshot_omp)->Unit(benchmark::kMicrosecond);
BENCHMARK_TEMPLATE(BM_matrix, false)->Unit(benchmark::kMicrosecond);
BENCHMARK_TEMPLATE(BM_matrix, true)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
