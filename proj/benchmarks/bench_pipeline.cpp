#include <benchmark/benchmark.h>

#include "btprint/btsnoop.hpp"
#include "btprint/demux.hpp"
#include "btprint/features.hpp"
#include "btprint/learners.hpp"
#include "btprint/selection.hpp"
#include "btprint/synth.hpp"

using namespace btprint;

namespace {

std::vector<PacketRecord> sample_session(std::size_t n) {
    return generate_session(default_fleet()[0], n, 42);
}

Dataset sample_dataset(std::size_t sessions_per_class) {
    const auto fleet = default_fleet();
    std::vector<LabeledSession> sessions;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < sessions_per_class; ++i) {
            LabeledSession s;
            s.label = fleet[c].name;
            s.session_id = s.label + std::to_string(i);
            s.packets = generate_session(fleet[c], 300, derive_seed(1, s.label, std::to_string(i)));
            sessions.push_back(std::move(s));
        }
    SelectionConfig config;
    return prepare_filter_data(sessions, FilterSpec::from_name("all-all"), 1, config).train;
}

void BM_ParseDemux(benchmark::State& state) {
    const auto bytes = emit_btsnoop(sample_session(std::size_t(state.range(0))));
    for (auto _ : state) {
        auto records = demux_protocols(parse_btsnoop(bytes), "bench");
        benchmark::DoNotOptimize(records);
    }
    state.SetBytesProcessed(std::int64_t(state.iterations()) * std::int64_t(bytes.size()));
}
BENCHMARK(BM_ParseDemux)->Arg(300)->Arg(3000);

void BM_SignatureKde(benchmark::State& state) {
    const auto session = sample_session(std::size_t(state.range(0)));
    const IatVector iat = extract_iat(session);
    const double t_max = percentile(iat.values, 99.0);
    for (auto _ : state) {
        auto dd = density_distribution(iat, t_max);
        benchmark::DoNotOptimize(dd);
    }
}
BENCHMARK(BM_SignatureKde)->Arg(300)->Arg(1000);

void BM_FitRandomForest(benchmark::State& state) {
    const Dataset ds = sample_dataset(12);
    for (auto _ : state) {
        auto model = fit(AlgorithmId::RandomForest, ds, 7);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_FitRandomForest);

void BM_Predict(benchmark::State& state) {
    const Dataset ds = sample_dataset(12);
    const TrainedModel model = fit(AlgorithmId::RandomForest, ds, 7);
    const Signature& query = ds.signatures.front();
    for (auto _ : state) {
        auto pred = predict(model, query);
        benchmark::DoNotOptimize(pred);
    }
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
