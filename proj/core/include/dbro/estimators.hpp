#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dbro/objective.hpp"

namespace dbro {

enum class EstimatorKind { saga, lsvrg, sgd, full };

std::string to_string(EstimatorKind k);
EstimatorKind parse_estimator_kind(const std::string& s);

/// A stochastic gradient and the number of component gradients it cost.
struct Estimate {
    Vector r;
    std::uint64_t grad_evals = 0;
};

/// SAGA gradient table for one agent.
struct SagaState {
    std::vector<Vector> table;   ///< grad f_i^l(u^l)
    std::vector<Vector> points;  ///< u^l; only kept when tracking is enabled
    Vector average;              ///< (1/q_i) sum_l table[l], maintained incrementally
    std::size_t updates_since_sync = 0;

    /// Exact re-summation interval for the running average.
    static constexpr std::size_t kResyncEvery = 1000;
};

/// Loopless SVRG anchor for one agent.
struct LsvrgState {
    Vector anchor;            ///< w_i
    Vector anchor_full_grad;  ///< grad f_i(w_i), exact
    double trigger_prob = 1.0;
};

/// Builds a table with every entry evaluated at x0. Costs q_i evaluations.
SagaState saga_init(const ProblemInstance& p, AgentId agent, const Vector& x0,
                    bool track_points = false, std::uint64_t* grad_evals = nullptr);

/// Anchor at x0 with its exact batch gradient. Costs q_i evaluations.
LsvrgState lsvrg_init(const ProblemInstance& p, AgentId agent, const Vector& x0,
                      double trigger_prob, std::uint64_t* grad_evals = nullptr);

/// r = grad f^s(x) - table[s] + average, using the table before the update;
/// then table[s] <- grad f^s(x). One component evaluation.
Estimate saga_estimate(SagaState& st, const ProblemInstance& p, AgentId agent, const Vector& x,
                       std::size_t sample);

/// r = grad f^s(x) - grad f^s(w) + grad f_i(w) with the anchor before the
/// update; the anchor moves to x iff trigger_draw < trigger_prob.
/// Costs 2 + q_i * [triggered] evaluations.
Estimate lsvrg_estimate(LsvrgState& st, const ProblemInstance& p, AgentId agent, const Vector& x,
                        std::size_t sample, double trigger_draw);

/// Plain component gradient. One evaluation.
Estimate sgd_estimate(const ProblemInstance& p, AgentId agent, const Vector& x,
                      std::size_t sample);

/// Exact batch gradient. q_i evaluations.
Estimate full_estimate(const ProblemInstance& p, AgentId agent, const Vector& x);

/// Gradient-learning quantity of a SAGA table:
/// (1/q_i) sum_l [f^l(u^l) - f^l(x*) - grad f^l(x*)^T (u^l - x*)].
/// Requires a state initialized with track_points.
double saga_tracker(const SagaState& st, const ProblemInstance& p, AgentId agent,
                    const Vector& x_star);

/// The same quantity for an LSVRG anchor: f_i(w) - f_i(x*) - grad f_i(x*)^T (w - x*).
double lsvrg_tracker(const LsvrgState& st, const ProblemInstance& p, AgentId agent,
                     const Vector& x_star);

} // namespace dbro
