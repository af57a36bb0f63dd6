#include <random>

#include <benchmark/benchmark.h>

#include "tcm/decoder.hpp"
#include "tcm/metrics.hpp"
#include "tcm/training.hpp"

using namespace tcm;

namespace {

Model bench_model(std::size_t d) {
    ModelConfig mc;
    mc.d = d;
    mc.dropout = 0.0;
    return Model(mc, build_vocab(synth_corpus({}), 1), 1);
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    const Tensor a = Tensor::gaussian(n, n, 1.0, rng), b = Tensor::gaussian(n, n, 1.0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

static void BM_EncodeAndAttend(benchmark::State& state) {
    Model m = bench_model(static_cast<std::size_t>(state.range(0)));
    const Instance inst = synth_corpus({})[0];
    for (auto _ : state) {
        Tape t;
        t.set_grad_enabled(false);
        benchmark::DoNotOptimize(encode_input(t, m, inst.x, inst.y_prime, ForwardContext::eval()));
    }
}
BENCHMARK(BM_EncodeAndAttend)->Arg(16)->Arg(32);

static void BM_TrainingInstance(benchmark::State& state) {
    const Instance inst = synth_corpus({})[0];
    Model m = bench_model(16);
    for (auto _ : state) {
        Tape t;
        Var l = nll_loss(t, m, inst.x, inst.y_prime, inst.y_aux, ForwardContext::eval());
        t.backward(l);
    }
}
BENCHMARK(BM_TrainingInstance);

static void BM_BeamSearch(benchmark::State& state) {
    Model m = bench_model(16);
    const Instance inst = synth_corpus({})[0];
    const BeamOptions opts{static_cast<std::size_t>(state.range(0)), 10, 30};
    for (auto _ : state) benchmark::DoNotOptimize(beam_search(m, inst.x, inst.y_prime, opts));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(5);

static void BM_CorpusBleu(benchmark::State& state) {
    SynthOptions so;
    so.n_instances = 200;
    const auto corpus = synth_corpus(so);
    std::vector<Tokens> cands, refs;
    for (const auto& inst : corpus) {
        cands.push_back(inst.y_aux);
        refs.push_back(inst.y_prime);
    }
    for (auto _ : state) benchmark::DoNotOptimize(bleu(cands, refs));
}
BENCHMARK(BM_CorpusBleu);
BENCHMARK_MAIN();
