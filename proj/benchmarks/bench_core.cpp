#include <benchmark/benchmark.h>

#include <vector>

#include "spikelimits/clt_limits.hpp"
#include "spikelimits/population_model.hpp"
#include "spikelimits/sim_engine.hpp"

using namespace spikelimits;

namespace {

PopulationModel make_model(int p) {
    SpikeSet spikes{{{8.0, 1}, {4.0, 1}}};
    std::vector<double> bulk(static_cast<std::size_t>(p - 2), 1.0);
    return build_general(p, spikes, bulk, 11, ModelMode::covariance,
                         ModelStructure::random_orthogonal);
}

void BM_PhiSuite(benchmark::State& state) {
    const int atoms = static_cast<int>(state.range(0));
    BulkSpectrum h;
    for (int i = 0; i < atoms; ++i) {
        h.atoms.push_back(0.5 + static_cast<double>(i) / atoms);
        h.weights.push_back(1.0 / atoms);
    }
    for (auto _ : state) benchmark::DoNotOptimize(phi_suite(8.0, h, 0.5));
}
BENCHMARK(BM_PhiSuite)->Arg(1)->Arg(32)->Arg(1024);

void BM_EigvecVariance(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const PopulationModel m = make_model(p);
    const Eigen::VectorXd P = m.V.col(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            eigvec_variance(m, P, 2 * p, 0, MatrixKind::covariance_matrix, 0.0));
}
BENCHMARK(BM_EigvecVariance)->Arg(50)->Arg(200);

void BM_Replication(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const int n = 2 * p;
    const PopulationModel m = make_model(p);
    const SourceDistribution dist{SourceKind::gaussian};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const Eigen::MatrixXd X = draw_source(p, n, dist, seed++);
        const Eigen::MatrixXd S = sample_cov(observe(m, X), n);
        benchmark::DoNotOptimize(extract_spiked(S, m.spikes));
    }
}
BENCHMARK(BM_Replication)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
