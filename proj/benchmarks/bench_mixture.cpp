#include <benchmark/benchmark.h>

#include "cmix/bounds.hpp"
#include "cmix/filters.hpp"
#include "cmix/mixture.hpp"
#include "cmix/signals.hpp"

using namespace cmix;

namespace {

std::vector<double> bench_signal(std::int64_t n) {
    SignalSpec sig;
    sig.length = n;
    sig.seed = 12;
    return generate(sig);
}

void BM_mixture_run(benchmark::State& state) {
    const auto ys = bench_signal(state.range(0));
    const auto y1 = run_filter(parse_filter_spec("lms:0.05:4", 1.0), ys);
    const auto y2 = run_filter(parse_filter_spec("constant:0.3", 1.0), ys);
    MixtureConfig cfg;
    cfg.learning_rate = derive_constants(1.0, 1.0, cfg.lambda_plus).mu;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_mixture(cfg, ys, y1, y2));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_mixture_run)->Arg(1000)->Arg(100000);

void BM_audit_sweep(benchmark::State& state) {
    const auto ys = bench_signal(state.range(0));
    const auto y1 = run_filter(parse_filter_spec("lms:0.05:4", 1.0), ys);
    const auto y2 = run_filter(parse_filter_spec("constant:0.3", 1.0), ys);
    const TheoremConstants consts = derive_constants(1.0, 1.0, 0.25);
    MixtureConfig cfg;
    cfg.learning_rate = consts.mu;
    const RunHistory hist = run_mixture(cfg, ys, y1, y2);
    for (auto _ : state) {
        double worst = 0.0;
        for (std::size_t i = 0; i < hist.samples.size(); ++i) {
            if (hist.clipped[i]) continue;
            const StepAudit a =
                audit_step(hist.states[i], hist.states[i + 1], hist.samples[i], 0.5, consts);
            worst = std::min(worst, a.slack);
        }
        benchmark::DoNotOptimize(worst);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_audit_sweep)->Arg(1000)->Arg(100000);

} // namespace

BENCHMARK_MAIN();
