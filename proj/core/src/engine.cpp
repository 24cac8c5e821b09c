#include "dbro/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "dbro/mnist.hpp"
#include "dbro/rng.hpp"

namespace dbro {

namespace {

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

Schedule Schedule::constant(double alpha) {
    Schedule s;
    s.kind = Kind::constant;
    s.alpha = alpha;
    return s;
}

Schedule Schedule::decaying(double theta, double xi) {
    Schedule s;
    s.kind = Kind::decaying;
    s.theta = theta;
    s.xi = xi;
    return s;
}

double Schedule::at(std::size_t k) const {
    if (kind == Kind::constant) return alpha;
    return theta / (static_cast<double>(k) + xi);
}

OptimumInfo analyze_optimum(const Topology& t, const ProblemInstance& p, double tol) {
    OptimumInfo info;
    const auto& rel = t.reliable();
    auto sol = solve_centralized(p, rel, tol);
    info.x_star = std::move(sol.x);
    info.residual = sol.residual;

    std::vector<Vector> grads;
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(p.n));
    for (AgentId i : rel) {
        grads.push_back(full_grad(p, i, info.x_star));
        mean += grads.back();
    }
    mean /= static_cast<double>(rel.size());
    info.g_prime = g_subgradient(p, info.x_star, mean);
    for (const auto& g : grads) info.psi.push_back(g + info.g_prime);

    info.incidence = incidence(t);
    info.phi_min = t.reliable_edges().empty()
                       ? 0.0
                       : phi_min(info.incidence, info.psi, t.reliable_edges().size());
    return info;
}

std::vector<double> default_lsvrg_probs(const ProblemInstance& p, std::uint64_t seed) {
    const std::size_t m = p.agents();
    std::size_t total = 0;
    for (std::size_t i = 0; i < m; ++i) total += p.samples(i);
    const double hi = std::min(1.0, static_cast<double>(m) / static_cast<double>(total));
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng(stream_seed(seed, Stream::trigger_prob, i));
        out[i] = hi / 2.0 + uniform01(rng) * (hi / 2.0);
    }
    return out;
}

std::vector<Vector> default_initial_states(std::size_t m, std::size_t n, std::uint64_t seed) {
    std::vector<Vector> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng(stream_seed(seed, Stream::init_state, i));
        std::normal_distribution<double> nd(0.0, 1.0);
        out[i].resize(static_cast<Eigen::Index>(n));
        for (Eigen::Index e = 0; e < out[i].size(); ++e) out[i](e) = nd(rng);
    }
    return out;
}

MetricsRow compute_metrics(const Topology& t, const ProblemInstance& p,
                           std::span<const Vector> states, const Vector& x_star,
                           const std::optional<SampleBatch>& test) {
    MetricsRow row;
    const auto& rel = t.reliable();
    const double inv = 1.0 / static_cast<double>(rel.size());
    const double g_star = g_value(p, x_star);
    Vector mean = Vector::Zero(x_star.size());
    double gap = 0.0;
    for (AgentId i : rel) {
        const Vector& x = states[i];
        gap += (local_value(p, i, x) + g_value(p, x)) - (local_value(p, i, x_star) + g_star);
        row.distance_sq += (x - x_star).squaredNorm();
        mean += x;
    }
    mean *= inv;
    double cons = 0.0;
    for (AgentId i : rel) cons += (states[i] - mean).squaredNorm();
    row.optimal_gap = gap * inv;
    row.consensus_error = cons * inv;
    if (test && p.kind == ProblemKind::softmax_regression) {
        row.test_accuracy = test_accuracy(p, mean, *test);
    }
    return row;
}

namespace {

/// Persistent workers for per-iteration fan-out.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t threads) {
        for (std::size_t w = 1; w < threads; ++w) workers_.emplace_back([this] { loop(); });
    }
    ~WorkerPool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    template <class F>
    void parallel_for(std::size_t count, F&& fn) {
        if (workers_.empty()) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        {
            std::lock_guard lk(mu_);
            task_ = [&fn](std::size_t i) { fn(i); };
            count_ = count;
            next_.store(0);
            active_ = workers_.size();
            ++generation_;
        }
        cv_.notify_all();
        drain();
        std::unique_lock lk(mu_);
        done_cv_.wait(lk, [this] { return active_ == 0; });
        task_ = nullptr;
        if (error_) {
            auto e = error_;
            error_ = nullptr;
            std::rethrow_exception(e);
        }
    }

private:
    void drain() {
        for (std::size_t i = next_.fetch_add(1); i < count_; i = next_.fetch_add(1)) {
            try {
                task_(i);
            } catch (...) {
                std::lock_guard lk(mu_);
                if (!error_) error_ = std::current_exception();
            }
        }
    }
    void loop() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
            }
            drain();
            {
                std::lock_guard lk(mu_);
                --active_;
            }
            done_cv_.notify_one();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    std::function<void(std::size_t)> task_;
    std::size_t count_ = 0;
    std::atomic<std::size_t> next_{0};
    std::size_t active_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

struct AgentRuntime {
    Rng sample_rng;
    Rng trigger_rng;
    SagaState saga;
    LsvrgState lsvrg;
    std::uint64_t evals = 0;
};

} // namespace

RunResult run(const Experiment& ex, const RunOptions& opt) {
    const Topology& t = ex.topology;
    const ProblemInstance& p = ex.problem;
    const std::size_t m = t.size();
    if (p.agents() != m) throw ConfigError("problem shard count must equal the agent count");
    if (t.reliable().empty()) throw ConfigError("at least one reliable agent is required");
    if (!reliable_connected(t)) {
        throw ConfigError("reliable agents must form a connected subgraph");
    }
    if (opt.rule.type == AggregatorType::penalty) opt.penalty.validate();
    for (AgentId i = 0; i < m; ++i) {
        if (opt.rule.type != AggregatorType::penalty) opt.rule.validate(t.degree(i));
    }
    if (opt.attack.kind != AttackKind::none) validate_attack(opt.attack, t);
    if (opt.iterations == 0 && !(opt.epochs > 0.0)) throw ConfigError("empty run budget");
    if (opt.record_every == 0) throw ConfigError("record_every must be positive");

    RunResult res;
    res.x_star = opt.x_star ? *opt.x_star : solve_centralized(p, t.reliable()).x;
    std::vector<Vector> states =
        opt.x0 ? *opt.x0 : default_initial_states(m, p.n, opt.seed);
    if (states.size() != m) throw ConfigError("x0 must hold one state per agent");
    res.lsvrg_probs = opt.lsvrg_probs.empty() ? default_lsvrg_probs(p, opt.seed) : opt.lsvrg_probs;
    if (res.lsvrg_probs.size() != m) throw ConfigError("lsvrg_probs must hold one value per agent");

    std::vector<AgentRuntime> rt(m);
    for (AgentId i = 0; i < m; ++i) {
        rt[i].sample_rng.seed(stream_seed(opt.seed, Stream::sample_index, i));
        rt[i].trigger_rng.seed(stream_seed(opt.seed, Stream::lsvrg_trigger, i));
        if (opt.estimator == EstimatorKind::saga) {
            rt[i].saga = saga_init(p, i, states[i], false, &rt[i].evals);
        } else if (opt.estimator == EstimatorKind::lsvrg) {
            rt[i].lsvrg = lsvrg_init(p, i, states[i], res.lsvrg_probs[i], &rt[i].evals);
        }
    }

    double q_reliable = 0.0;
    for (AgentId i : t.reliable()) q_reliable += static_cast<double>(p.samples(i));
    auto epoch_now = [&] {
        std::uint64_t e = 0;
        for (AgentId i : t.reliable()) e += rt[i].evals;
        return static_cast<double>(e) / q_reliable;
    };

    const auto start = std::chrono::steady_clock::now();
    auto record = [&](std::size_t k) {
        MetricsRow row = compute_metrics(t, p, states, res.x_star, ex.test);
        row.iteration = k;
        row.epoch = epoch_now();
        if (opt.wall_clock) {
            row.wall_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        res.rows.push_back(row);
    };
    record(0);

    WorkerPool pool(opt.on_step ? 1 : std::max<std::size_t>(1, opt.threads));
    std::vector<Vector> next(m);
    std::size_t k = 0;
    for (;;) {
        if (opt.iterations > 0 ? k >= opt.iterations : epoch_now() >= opt.epochs) break;
        const double alpha = opt.schedule.at(k);
        const std::vector<Vector>& snapshot = states;

        pool.parallel_for(m, [&](std::size_t i) {
            const bool receiver_reliable = !t.is_byzantine(i);
            std::vector<InboxMessage> inbox;
            std::vector<double> weights;
            for (AgentId j : t.neighbors(i)) {
                if (receiver_reliable && t.is_byzantine(j) && opt.attack.kind != AttackKind::none) {
                    inbox.push_back({j, forge(opt.attack, j, i, k, snapshot, t)});
                } else {
                    inbox.push_back({j, snapshot[j]});
                }
                weights.push_back(t.weights()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }

            AgentRuntime& a = rt[i];
            const Vector& x = snapshot[i];
            const std::size_t q = p.samples(i);
            Estimate est;
            switch (opt.estimator) {
            case EstimatorKind::saga:
                est = saga_estimate(a.saga, p, i, x, uniform_index(a.sample_rng, q));
                break;
            case EstimatorKind::lsvrg: {
                const auto s = uniform_index(a.sample_rng, q);
                est = lsvrg_estimate(a.lsvrg, p, i, x, s, uniform01(a.trigger_rng));
                break;
            }
            case EstimatorKind::sgd:
                est = sgd_estimate(p, i, x, uniform_index(a.sample_rng, q));
                break;
            case EstimatorKind::full:
                est = full_estimate(p, i, x);
                break;
            }
            a.evals += est.grad_evals;

            if (opt.rule.type == AggregatorType::penalty) {
                Vector x_bar = resilient_descent_step(x, est.r, inbox, opt.penalty, alpha);
                if (opt.on_step && receiver_reliable) {
                    opt.on_step(StepTrace{k, i, x, est.r, x_bar, alpha, t.degree(i)});
                }
                next[i] = prox_step(x_bar, p, alpha);
            } else {
                const double self_w = t.weights()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
                const Vector y = aggregate(opt.rule, i, x, inbox, self_w, weights);
                Vector x_bar = y - alpha * est.r;
                if (opt.on_step && receiver_reliable) {
                    opt.on_step(StepTrace{k, i, x, est.r, x_bar, alpha, t.degree(i)});
                }
                next[i] = prox_g(p, alpha, x_bar);
            }
        });

        ++k;
        for (AgentId i = 0; i < m; ++i) {
            if (!all_finite(next[i])) {
                res.status = RunResult::Status::diverged;
                res.diverged_at = k;
                res.message = "non-finite state at agent " + std::to_string(i) + ", iteration " +
                              std::to_string(k);
                break;
            }
        }
        if (res.status == RunResult::Status::diverged) break;
        states.swap(next);
        const bool last = opt.iterations > 0 ? k >= opt.iterations : epoch_now() >= opt.epochs;
        if (k % opt.record_every == 0 || last) record(k);
    }
    res.iterations = k;
    res.states = std::move(states);
    return res;
}

PreparedRun prepare(const RunConfig& cfg) {
    cfg.validate();
    PreparedRun pr;
    pr.config = cfg;
    const std::uint64_t seed = cfg.run.seed;

    std::optional<Topology> topo;
    if (!cfg.topology.file.empty()) {
        std::ifstream in(cfg.topology.file);
        if (!in) throw ConfigError("cannot open topology file '" + cfg.topology.file + "'");
        topo = read_topology(in);
        if (!reliable_connected(*topo)) {
            throw ConfigError("topology file: reliable agents must form a connected subgraph");
        }
    } else {
        topo = gen_connected_erdos_renyi(cfg.topology.agents, cfg.topology.edge_prob,
                                         cfg.topology.byzantine_count(),
                                         cfg.topology.seed.value_or(seed));
    }
    const std::size_t m = topo->size();

    const auto& pc = cfg.problem;
    const std::uint64_t data_seed = pc.seed.value_or(seed);
    ProblemInstance problem;
    std::optional<SampleBatch> test;
    if (pc.kind == ProblemKind::synthetic_lasso) {
        LassoSpec ls;
        ls.agents = m;
        ls.dim = pc.dim;
        ls.samples_per_agent = pc.samples_per_agent;
        ls.beta1 = pc.beta1;
        ls.beta2 = pc.beta2;
        ls.noise = pc.noise;
        ls.sparsity = pc.sparsity;
        ls.heterogeneity = pc.heterogeneity;
        ls.seed = data_seed;
        problem = make_synthetic_lasso(ls);
    } else if (pc.source == DataSource::synthetic) {
        SoftmaxSpec ss;
        ss.agents = m;
        ss.feature_dim = pc.feature_dim;
        ss.classes = pc.classes;
        ss.samples_per_agent = pc.samples_per_agent;
        ss.test_samples = pc.test_samples;
        ss.beta1 = pc.beta1;
        ss.beta2 = pc.beta2;
        ss.separation = pc.separation;
        ss.seed = data_seed;
        auto data = make_synthetic_softmax(ss);
        problem = std::move(data.problem);
        test = std::move(data.test);
    } else {
        auto dir = mnist_dir_from_env();
        if (!dir) throw ConfigError("problem.source = mnist needs DBRO_MNIST_DIR to be set");
        auto data = load_mnist(*dir, pc.train_limit, pc.test_limit);
        problem = make_softmax_problem(data.train, 10, m, pc.beta1, pc.beta2);
        test = std::move(data.test);
    }
    pr.experiment = Experiment{std::move(*topo), std::move(problem), std::move(test)};
    const Topology& t = pr.experiment.topology;
    const ProblemInstance& p = pr.experiment.problem;

    pr.optimum = analyze_optimum(t, p);

    if (cfg.algorithm.phi) {
        pr.phi = *cfg.algorithm.phi;
    } else if (pr.optimum.phi_min > 0.0) {
        pr.phi = cfg.algorithm.phi_factor * pr.optimum.phi_min;
    } else {
        pr.phi = 1e-3;
        pr.warnings.push_back("phi_min is 0 (no reliable edges or zero residuals); phi set to 1e-3");
    }
    if (cfg.algorithm.rule == AggregatorType::penalty && pr.phi < pr.optimum.phi_min) {
        pr.warnings.push_back("phi is below phi_min; the penalized problem may not share the "
                              "centralized minimizer");
    }

    std::size_t q_min = SIZE_MAX, q_max = 0;
    for (AgentId i : t.reliable()) {
        q_min = std::min(q_min, p.samples(i));
        q_max = std::max(q_max, p.samples(i));
    }
    pr.bounds = compute_bounds(bound_inputs(t, p.mu, p.L, q_min, q_max, p.n, pr.phi, p.beta2));

    const auto& sc = cfg.schedule;
    Schedule sched;
    switch (sc.kind) {
    case ScheduleKind::constant:
        sched = Schedule::constant(*sc.alpha);
        if (*sc.alpha > pr.bounds.alpha_max_linear) {
            pr.warnings.push_back("schedule.alpha exceeds the linear-rate step-size bound " +
                                  fmt_g(pr.bounds.alpha_max_linear));
        }
        break;
    case ScheduleKind::auto_constant: {
        double a = pr.bounds.alpha_max_linear;
        if (sc.alpha && *sc.alpha > a) {
            pr.warnings.push_back("schedule.alpha exceeds the linear-rate step-size bound " +
                                  fmt_g(a) + "; using the bound");
        } else if (sc.alpha) {
            a = *sc.alpha;
        }
        sched = Schedule::constant(a);
        break;
    }
    case ScheduleKind::decaying:
        if (sc.xi) {
            sched = Schedule::decaying(*sc.theta, *sc.xi);
        } else {
            schedule_decaying(pr.bounds, *sc.theta, 0);  // rejects theta <= 4/gamma
            sched = Schedule::decaying(*sc.theta, decaying_xi(pr.bounds, *sc.theta));
        }
        break;
    case ScheduleKind::auto_decaying: {
        const double theta = sc.theta_factor * pr.bounds.theta_min;
        sched = Schedule::decaying(theta, decaying_xi(pr.bounds, theta));
        break;
    }
    }
    pr.alpha0 = sched.at(0);

    RunOptions& o = pr.options;
    o.rule.type = cfg.algorithm.rule;
    o.rule.f = cfg.algorithm.f;
    o.estimator = cfg.algorithm.estimator;
    o.penalty = PenaltyConfig{pr.phi, cfg.algorithm.a_norm};
    o.attack = cfg.attack;
    o.attack.seed = derive_seed(seed, cfg.attack.seed);
    o.schedule = sched;
    o.iterations = cfg.run.iterations;
    o.epochs = cfg.run.epochs;
    o.seed = seed;
    o.threads = cfg.run.threads;
    o.wall_clock = cfg.run.wall_clock;
    o.x_star = pr.optimum.x_star;
    if (cfg.algorithm.lsvrg_prob) o.lsvrg_probs.assign(m, *cfg.algorithm.lsvrg_prob);

    o.record_every = cfg.run.record_every;
    if (o.record_every == 0) {
        double iters = static_cast<double>(cfg.run.iterations);
        if (iters == 0.0) {
            double q_rel = 0.0;
            for (AgentId i : t.reliable()) q_rel += static_cast<double>(p.samples(i));
            const double rel = static_cast<double>(t.reliable().size());
            double per_iter = rel / q_rel;
            if (o.estimator == EstimatorKind::full) per_iter = 1.0;
            if (o.estimator == EstimatorKind::lsvrg) per_iter = 2.75 * rel / q_rel;  // 2 + p_i q_i, p_i q_i ~ 0.75
            iters = cfg.run.epochs / per_iter;
        }
        o.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(iters / 100.0));
    }
    return pr;
}

} // namespace dbro
