#include <benchmark/benchmark.h>

#include <random>

#include "dbro/aggregators.hpp"
#include "dbro/engine.hpp"
#include "dbro/rng.hpp"

namespace {

using namespace dbro;

Vector gaussian(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Eigen::Index e = 0; e < n; ++e) v(e) = nd(rng);
    return v;
}

SoftmaxData softmax(std::size_t agents, std::size_t feature_dim) {
    SoftmaxSpec s;
    s.agents = agents;
    s.feature_dim = feature_dim;
    s.classes = 10;
    s.samples_per_agent = 50;
    return make_synthetic_softmax(s);
}

void BM_ComponentGradSoftmax(benchmark::State& state) {
    const auto d = softmax(1, static_cast<std::size_t>(state.range(0)));
    Rng rng(1);
    const Vector x = gaussian(rng, static_cast<Eigen::Index>(d.problem.n));
    std::size_t l = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(component_grad(d.problem, 0, l, x));
        l = (l + 1) % 50;
    }
}
BENCHMARK(BM_ComponentGradSoftmax)->Arg(16)->Arg(784);

void BM_SagaEstimate(benchmark::State& state) {
    const auto d = softmax(1, static_cast<std::size_t>(state.range(0)));
    Rng rng(2);
    const Vector x = gaussian(rng, static_cast<Eigen::Index>(d.problem.n));
    SagaState st = saga_init(d.problem, 0, x);
    for (auto _ : state) {
        benchmark::DoNotOptimize(saga_estimate(st, d.problem, 0, x, uniform_index(rng, 50)));
    }
}
BENCHMARK(BM_SagaEstimate)->Arg(16)->Arg(784);

std::vector<InboxMessage> inbox(Rng& rng, std::size_t deg, Eigen::Index n) {
    std::vector<InboxMessage> out;
    for (AgentId j = 0; j < deg; ++j) out.push_back({j + 1, gaussian(rng, n)});
    return out;
}

void BM_ResilientStep(benchmark::State& state) {
    Rng rng(3);
    const Eigen::Index n = 7840;
    const auto msgs = inbox(rng, static_cast<std::size_t>(state.range(0)), n);
    const Vector x = gaussian(rng, n), r = gaussian(rng, n);
    PenaltyConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(resilient_descent_step(x, r, msgs, cfg, 0.01));
}
BENCHMARK(BM_ResilientStep)->Arg(4)->Arg(16);

void BM_Aggregate(benchmark::State& state) {
    Rng rng(4);
    const Eigen::Index n = 7840;
    const auto msgs = inbox(rng, 12, n);
    const Vector x = gaussian(rng, n);
    AggregatorKind k;
    k.type = static_cast<AggregatorType>(state.range(0));
    k.f = 2;
    state.SetLabel(to_string(k.type));
    for (auto _ : state) benchmark::DoNotOptimize(aggregate(k, 0, x, msgs, 0.0, {}));
}
BENCHMARK(BM_Aggregate)
    ->Arg(static_cast<int>(AggregatorType::trimmed_mean))
    ->Arg(static_cast<int>(AggregatorType::coord_median))
    ->Arg(static_cast<int>(AggregatorType::krum))
    ->Arg(static_cast<int>(AggregatorType::geo_median));

void BM_RunIterations(benchmark::State& state) {
    RunConfig c;
    c.set("topology.agents=20");
    c.set("topology.byzantine=4");
    c.set("problem.dim=50");
    c.set("problem.samples_per_agent=100");
    c.set("attack.kind=zero_sum");
    c.set("run.iterations=200");
    c.set("run.record_every=200");
    c.set("run.wall_clock=false");
    c.set("run.threads", std::to_string(state.range(0)));
    const PreparedRun pr = prepare(c);
    for (auto _ : state) benchmark::DoNotOptimize(run(pr.experiment, pr.options));
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_RunIterations)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
