#pragma once

#include <span>

#include "dbro/objective.hpp"

namespace dbro {

/// Penalty weight and norm for the consensus penalty phi * sum ||x_i - v_j||_a.
struct PenaltyConfig {
    double phi = 1.0;
    int a_norm = 1;  ///< 1 or 2; the dual exponent is infinity or 2

    void validate() const;
    double dual_exponent() const;
};

/// A neighbor payload as seen by the receiver. Reliable and Byzantine
/// payloads are indistinguishable here.
struct InboxMessage {
    AgentId sender;
    Vector payload;
};

/// A subgradient z of ||d||_a with <z, d> = ||d||_a and ||z||_b <= 1.
/// Returns 0 at d = 0.
Vector norm_subgradient(const Vector& d, int a_norm);

/// x_i - alpha r_i - alpha phi sum_j subgrad(x_i - payload_j).
///
/// The sum runs over the inbox in ascending sender order regardless of the
/// order messages arrived in; no screening or weighting is applied.
Vector resilient_descent_step(const Vector& x_i, const Vector& r_i,
                              std::span<const InboxMessage> inbox, const PenaltyConfig& cfg,
                              double alpha);

/// x_{k+1} = prox_{alpha g}(x_bar).
Vector prox_step(const Vector& x_bar, const ProblemInstance& p, double alpha);

} // namespace dbro
