#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dbro/aggregators.hpp"
#include "dbro/attacks.hpp"
#include "dbro/bounds.hpp"
#include "dbro/config.hpp"
#include "dbro/estimators.hpp"
#include "dbro/resilience.hpp"
#include "dbro/topology.hpp"

namespace dbro {

/// Step-size rule alpha_k.
struct Schedule {
    enum class Kind { constant, decaying } kind = Kind::constant;
    double alpha = 0.0;
    double theta = 0.0;
    double xi = 0.0;

    static Schedule constant(double alpha);
    static Schedule decaying(double theta, double xi);
    double at(std::size_t k) const;
};

/// Network, data and (optional) test set of one experiment.
struct Experiment {
    Topology topology;
    ProblemInstance problem;  ///< one shard per agent, Byzantine agents included
    std::optional<SampleBatch> test;
};

/// Problem constants at the reliable optimum.
struct OptimumInfo {
    Vector x_star;
    double residual = 0.0;
    Vector g_prime;             ///< common subgradient of g at x*: -mean_i grad f_i(x*)
    std::vector<Vector> psi;    ///< grad f_i(x*) + g_prime, one per reliable agent
    IncidenceMatrix incidence;
    double phi_min = 0.0;
};

OptimumInfo analyze_optimum(const Topology& t, const ProblemInstance& p, double tol = 1e-12);

/// Per reliable-agent update, exposed for instrumentation.
struct StepTrace {
    std::size_t iteration;
    AgentId agent;
    const Vector& x;      ///< x_{i,k}
    const Vector& r;      ///< r_{i,k}
    const Vector& x_bar;  ///< pre-prox point
    double alpha;
    std::size_t degree;
};

struct RunOptions {
    AggregatorKind rule;
    EstimatorKind estimator = EstimatorKind::saga;
    PenaltyConfig penalty;
    AttackSpec attack;
    Schedule schedule;
    std::size_t iterations = 0;  ///< when positive, the budget in iterations
    double epochs = 1.0;         ///< otherwise the budget in epochs
    std::size_t record_every = 1;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    bool wall_clock = true;
    std::vector<double> lsvrg_probs;  ///< per agent id; empty = default draw
    std::optional<Vector> x_star;     ///< skips the centralized solve
    std::optional<std::vector<Vector>> x0;  ///< per agent id; default standard normal
    /// Called for every reliable-agent update; forces serial execution.
    std::function<void(const StepTrace&)> on_step;
};

struct MetricsRow {
    double epoch = 0.0;
    std::size_t iteration = 0;
    double optimal_gap = 0.0;
    double consensus_error = 0.0;
    std::optional<double> test_accuracy;
    double wall_time = 0.0;
    double distance_sq = 0.0;  ///< sum_{i in R} ||x_i - x*||^2; not written to CSV
};

struct RunResult {
    enum class Status { completed, diverged } status = Status::completed;
    std::vector<MetricsRow> rows;
    std::vector<Vector> states;  ///< final x_i for every agent id
    std::size_t iterations = 0;
    std::size_t diverged_at = 0;
    std::string message;
    Vector x_star;
    std::vector<double> lsvrg_probs;
};

/// Default LSVRG probabilities: uniform on [m/Q/2, m/Q], Q = sum_i q_i.
std::vector<double> default_lsvrg_probs(const ProblemInstance& p, std::uint64_t seed);

/// Initial states: x_{i,0} ~ N(0, I) on the agent's init_state stream.
std::vector<Vector> default_initial_states(std::size_t m, std::size_t n, std::uint64_t seed);

MetricsRow compute_metrics(const Topology& t, const ProblemInstance& p,
                           std::span<const Vector> states, const Vector& x_star,
                           const std::optional<SampleBatch>& test);

/// Synchronous simulation. Non-finite states end the run with
/// Status::diverged; rows recorded so far are kept.
RunResult run(const Experiment& ex, const RunOptions& opt);

/// A config resolved into runnable pieces.
struct PreparedRun {
    RunConfig config;
    Experiment experiment;
    RunOptions options;
    OptimumInfo optimum;
    TheoryBounds bounds;
    double phi = 0.0;
    double alpha0 = 0.0;
    std::vector<std::string> warnings;
};

/// Builds the topology and data, solves for x*, computes phi and the theory
/// constants and resolves the schedule. Throws ConfigError.
PreparedRun prepare(const RunConfig& cfg);

} // namespace dbro
