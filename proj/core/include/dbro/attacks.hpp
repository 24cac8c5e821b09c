#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "dbro/topology.hpp"

namespace dbro {

enum class AttackKind { none, zero_sum, gaussian, same_value, sign_flip };

std::string to_string(AttackKind k);
AttackKind parse_attack_kind(const std::string& s);

struct AttackSpec {
    AttackKind kind = AttackKind::none;
    double gaussian_std = 30.0;
    double same_value_magnitude = 1000.0;
    double sign_flip_scale = 1.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-coordinate clamp applied to every forged payload.
inline constexpr double kPayloadClamp = 1e30;

/// Falsified payload z_{ib,k} sent by Byzantine agent `sender` to reliable
/// agent `receiver` at iteration k. `snapshot` holds the iteration-k state of
/// every agent, indexed by agent id. With AttackKind::none the sender's own
/// state is returned.
Vector forge(const AttackSpec& spec, AgentId sender, AgentId receiver, std::uint64_t k,
             std::span<const Vector> snapshot, const Topology& t);

/// Checks every zero-sum receiver (one with a Byzantine neighbor) against
/// its own configuration; throws ConfigError if a weight is zero.
void validate_attack(const AttackSpec& spec, const Topology& t);

/// max_i || sum_{j in R_i} w_ij x_j + sum_{b in B_i} w_ib z_ib ||_inf over
/// reliable receivers with at least one Byzantine neighbor.
double verify_zero_sum_intent(const Topology& t, std::span<const Vector> snapshot,
                              const AttackSpec& spec, std::uint64_t k = 0);

} // namespace dbro
