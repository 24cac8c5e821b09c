#pragma once

#include <span>
#include <string>

#include "dbro/objective.hpp"
#include "dbro/resilience.hpp"

namespace dbro {

enum class AggregatorType { penalty, average, trimmed_mean, coord_median, krum, geo_median };

std::string to_string(AggregatorType k);
AggregatorType parse_aggregator_type(const std::string& s);

/// Update rule selection. `f` is the trim count for trimmed_mean and the
/// assumed Byzantine count for krum.
struct AggregatorKind {
    AggregatorType type = AggregatorType::penalty;
    std::size_t f = 0;
    double geo_tol = 1e-9;
    std::size_t geo_max_iter = 200;

    /// Checks the trim/Krum constraints for a receiver with `inbox_size`
    /// neighbors (the candidate set is the inbox plus the agent itself).
    void validate(std::size_t inbox_size) const;
};

/// Robust (or plain weighted) combination of the agent's own state with its
/// inbox. `self_weight` and `weights` are only read by `average`.
Vector aggregate(const AggregatorKind& kind, AgentId self_id, const Vector& self_state,
                 std::span<const InboxMessage> inbox, double self_weight,
                 std::span<const double> weights);

/// Geometric median by Weiszfeld iteration. `objective_trace`, when given,
/// receives the objective value after every iteration.
Vector geometric_median(std::span<const Vector> candidates, double tol, std::size_t max_iter,
                        std::vector<double>* objective_trace = nullptr);

/// Baseline update: y = aggregate(...), then prox_{alpha g}(y - alpha r).
Vector baseline_step(const AggregatorKind& kind, AgentId self_id, const Vector& self_state,
                     std::span<const InboxMessage> inbox, double self_weight,
                     std::span<const double> weights, const Vector& r, double alpha,
                     const ProblemInstance& p);

} // namespace dbro
