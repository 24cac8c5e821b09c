#include <doctest.h>

#include <cmath>

#include "dbro/engine.hpp"
#include "../support/fixtures.hpp"

using namespace dbro;
using namespace dbro::testing;

namespace {

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Experiment small_experiment(std::uint64_t seed, std::vector<AgentId> byz = {2}) {
    Rng rng(seed);
    Experiment ex;
    do {
        ex.topology = random_connected(rng, 6, 0.3, byz);
    } while (!reliable_connected(ex.topology));
    ex.problem = random_lasso(rng, {5, 6, 7, 5, 6, 7}, 4, 0.2, 0.05);
    return ex;
}

RunOptions base_options(EstimatorKind est = EstimatorKind::saga) {
    RunOptions o;
    o.estimator = est;
    o.penalty.phi = 0.5;
    o.schedule = Schedule::constant(0.01);
    o.iterations = 300;
    o.record_every = 50;
    o.seed = 17;
    o.wall_clock = false;
    return o;
}

void check_rows_identical(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].iteration == b[k].iteration);
        CHECK(a[k].epoch == b[k].epoch);
        CHECK(a[k].optimal_gap == b[k].optimal_gap);
        CHECK(a[k].consensus_error == b[k].consensus_error);
        CHECK(a[k].wall_time == b[k].wall_time);
    }
}

void check_states_identical(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(max_abs(a[i] - b[i]) == 0.0);
}

} // namespace

TEST_CASE("metrics examples") {
    ProblemInstance p;
    p.kind = ProblemKind::synthetic_lasso;
    p.n = 1;
    SampleBatch b;  // f_i(x) = 0.5 x^2
    b.features = Matrix::Ones(1, 1);
    b.targets = Vector::Zero(1);
    p.shards = {b, b, b};
    compute_constants(p);
    const Topology t = path_graph(3, {2});
    const Vector xs = Vector::Zero(1);
    const std::vector<Vector> at_star(3, xs);
    const MetricsRow r0 = compute_metrics(t, p, at_star, xs, std::nullopt);
    CHECK(r0.optimal_gap == 0.0);
    CHECK(r0.consensus_error == 0.0);
    CHECK(r0.distance_sq == 0.0);
    CHECK_FALSE(r0.test_accuracy.has_value());

    const double d = 0.3;
    std::vector<Vector> spread{Vector::Constant(1, d), Vector::Constant(1, -d), Vector::Constant(1, 99.0)};
    const MetricsRow r1 = compute_metrics(t, p, spread, xs, std::nullopt);
    CHECK(r1.consensus_error == doctest::Approx(d * d).epsilon(1e-15));
    CHECK(r1.optimal_gap == doctest::Approx(0.5 * d * d).epsilon(1e-15));
    CHECK(r1.distance_sq == doctest::Approx(2 * d * d).epsilon(1e-15));
}

TEST_CASE("metrics gap is bounded below at the optimum by convexity") {
    Experiment ex = small_experiment(3);
    const auto& rel = ex.topology.reliable();
    const Vector xs = solve_centralized(ex.problem, rel).x;
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        const Vector common = xs + gaussian(rng, 4, 0.5);
        const std::vector<Vector> same(6, common);
        // A common point: the reliable sum is minimized at x*, so the gap is >= 0.
        CHECK(compute_metrics(ex.topology, ex.problem, same, xs, std::nullopt).optimal_gap >= -1e-12);
    }
}

TEST_CASE("runs are deterministic and independent of the thread count") {
    const Experiment ex = small_experiment(5);
    for (auto est : {EstimatorKind::saga, EstimatorKind::lsvrg, EstimatorKind::sgd}) {
        RunOptions o = base_options(est);
        o.attack.kind = AttackKind::gaussian;
        o.attack.seed = 3;
        const RunResult a = run(ex, o);
        const RunResult b = run(ex, o);
        check_rows_identical(a.rows, b.rows);
        check_states_identical(a.states, b.states);
        o.threads = 4;
        const RunResult c = run(ex, o);
        check_rows_identical(a.rows, c.rows);
        check_states_identical(a.states, c.states);
    }
}

TEST_CASE("attack none matches a Byzantine-free network state for state") {
    const Experiment with_b = small_experiment(6, {1, 4});
    Experiment clean = with_b;
    clean.topology = with_b.topology.with_byzantine({});
    for (auto rule : {AggregatorType::penalty, AggregatorType::coord_median}) {
        RunOptions o = base_options();
        o.rule.type = rule;
        o.x_star = solve_centralized(with_b.problem, with_b.topology.reliable()).x;
        const RunResult a = run(with_b, o);
        const RunResult b = run(clean, o);
        check_states_identical(a.states, b.states);
    }
}

TEST_CASE("synchronous rounds match a hand-rolled reference") {
    const Experiment ex = small_experiment(7);
    RunOptions o = base_options(EstimatorKind::full);
    o.iterations = 3;
    o.record_every = 1;
    o.attack.kind = AttackKind::sign_flip;
    const RunResult res = run(ex, o);

    const Topology& t = ex.topology;
    std::vector<Vector> x = default_initial_states(6, 4, o.seed);
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<Vector> next(6);
        for (AgentId i = 0; i < 6; ++i) {
            std::vector<InboxMessage> inbox;
            for (AgentId j : t.neighbors(i)) {
                const bool forged = !t.is_byzantine(i) && t.is_byzantine(j);
                inbox.push_back({j, forged ? forge(o.attack, j, i, k, x, t) : x[j]});
            }
            const Vector xb = resilient_descent_step(x[i], full_grad(ex.problem, i, x[i]), inbox, o.penalty,
                                                     o.schedule.at(k));
            next[i] = prox_step(xb, ex.problem, o.schedule.at(k));
        }
        x = next;
    }
    check_states_identical(res.states, x);
}

TEST_CASE("step traces expose bounded influence under a large attack") {
    const Experiment ex = small_experiment(8);
    RunOptions o = base_options();
    o.attack.kind = AttackKind::same_value;
    o.attack.same_value_magnitude = 1e12;
    std::size_t calls = 0;
    double worst = 0.0;
    o.on_step = [&](const StepTrace& s) {
        ++calls;
        const double cap = s.alpha * o.penalty.phi * static_cast<double>(s.degree);
        worst = std::max(worst, max_abs(s.x_bar - s.x + s.alpha * s.r) / cap);
    };
    run(ex, o);
    CHECK(calls == 300 * ex.topology.reliable().size());
    CHECK(worst <= 1.0 + 1e-12);
}

TEST_CASE("epoch accounting") {
    const Experiment ex = small_experiment(9);
    double q_rel = 0.0;
    for (AgentId i : ex.topology.reliable()) q_rel += static_cast<double>(ex.problem.samples(i));
    const double r = static_cast<double>(ex.topology.reliable().size());

    RunOptions full = base_options(EstimatorKind::full);
    full.iterations = 10;
    full.record_every = 5;
    const RunResult a = run(ex, full);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.rows[0].epoch == 0.0);
    CHECK(a.rows[1].epoch == doctest::Approx(5.0));
    CHECK(a.rows[2].epoch == doctest::Approx(10.0));

    RunOptions saga = base_options(EstimatorKind::saga);
    saga.iterations = 40;
    saga.record_every = 40;
    const RunResult b = run(ex, saga);
    CHECK(b.rows.front().epoch == doctest::Approx(1.0));
    CHECK(b.rows.back().epoch == doctest::Approx(1.0 + 40.0 * r / q_rel));

    RunOptions budget = base_options(EstimatorKind::full);
    budget.iterations = 0;
    budget.epochs = 7.0;
    const RunResult c = run(ex, budget);
    CHECK(c.iterations == 7);
    CHECK(c.rows.back().epoch == doctest::Approx(7.0));

    RunOptions lsvrg = base_options(EstimatorKind::lsvrg);
    lsvrg.iterations = 200;
    lsvrg.record_every = 200;
    lsvrg.lsvrg_probs.assign(6, 1.0);  // always triggers: 2 + q per step
    const RunResult d = run(ex, lsvrg);
    CHECK(d.rows.back().epoch == doctest::Approx(1.0 + 200.0 * (2.0 * r + q_rel) / q_rel));
}

TEST_CASE("divergence keeps the rows recorded so far") {
    const Experiment ex = small_experiment(10);
    RunOptions o = base_options(EstimatorKind::full);
    o.schedule = Schedule::constant(1e3);
    o.iterations = 5000;
    o.record_every = 1;
    const RunResult res = run(ex, o);
    CHECK(res.status == RunResult::Status::diverged);
    CHECK(res.diverged_at > 1);
    CHECK(res.diverged_at < 5000);
    CHECK(res.rows.size() == res.diverged_at);
    CHECK(res.rows.back().iteration == res.diverged_at - 1);
    CHECK(res.message.find("non-finite") != std::string::npos);
}

TEST_CASE("run validates its inputs") {
    const Experiment ex = small_experiment(11);
    RunOptions o = base_options();
    o.penalty.phi = 0.0;
    CHECK_THROWS_AS(run(ex, o), ConfigError);
    o = base_options();
    o.record_every = 0;
    CHECK_THROWS_AS(run(ex, o), ConfigError);
    o = base_options();
    o.rule.type = AggregatorType::krum;
    o.rule.f = 5;
    CHECK_THROWS_AS(run(ex, o), ConfigError);

    Experiment split = ex;
    split.topology = path_graph(6, {2});
    CHECK_THROWS_AS(run(split, base_options()), ConfigError);
}

TEST_CASE("schedules") {
    const Schedule c = Schedule::constant(0.3);
    CHECK(c.at(0) == 0.3);
    CHECK(c.at(1000) == 0.3);
    const Schedule d = Schedule::decaying(2.0, 10.0);
    CHECK(d.at(0) == doctest::Approx(0.2));
    CHECK(d.at(10) == doctest::Approx(0.1));
}

TEST_CASE("default draws") {
    Rng rng(12);
    const ProblemInstance p = random_lasso(rng, {10, 20, 30}, 2, 0.1, 0.0);
    const auto probs = default_lsvrg_probs(p, 4);
    const double hi = 3.0 / 60.0;
    for (double v : probs) {
        CHECK(v >= hi / 2);
        CHECK(v <= hi);
    }
    CHECK(probs == default_lsvrg_probs(p, 4));
    const auto x0 = default_initial_states(3, 5, 9);
    CHECK(x0.size() == 3);
    CHECK(max_abs(x0[0] - default_initial_states(3, 5, 9)[0]) == 0.0);
    CHECK(max_abs(x0[0] - x0[1]) > 0.0);
}
