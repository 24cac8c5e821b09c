#include "dbro/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dbro/rng.hpp"

namespace dbro {

std::string to_string(AttackKind k) {
    switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::zero_sum: return "zero_sum";
    case AttackKind::gaussian: return "gaussian";
    case AttackKind::same_value: return "same_value";
    case AttackKind::sign_flip: return "sign_flip";
    }
    return "unknown";
}

AttackKind parse_attack_kind(const std::string& s) {
    if (s == "none") return AttackKind::none;
    if (s == "zero_sum") return AttackKind::zero_sum;
    if (s == "gaussian") return AttackKind::gaussian;
    if (s == "same_value") return AttackKind::same_value;
    if (s == "sign_flip" || s == "sign_flipping") return AttackKind::sign_flip;
    throw ConfigError("unknown attack kind '" + s + "'");
}

void AttackSpec::validate() const {
    if (kind == AttackKind::gaussian && !(gaussian_std > 0.0)) {
        throw ConfigError("gaussian_std must be positive");
    }
    if (kind == AttackKind::sign_flip && !(sign_flip_scale > 0.0)) {
        throw ConfigError("sign_flip_scale must be positive");
    }
    if (kind == AttackKind::same_value && !(same_value_magnitude > 0.0)) {
        throw ConfigError("same_value_magnitude must be positive");
    }
}

void validate_attack(const AttackSpec& spec, const Topology& t) {
    spec.validate();
    if (spec.kind != AttackKind::zero_sum) return;
    for (AgentId i : t.reliable()) {
        for (AgentId b : t.byzantine_neighbors(i)) {
            if (!(t.weights()(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(i)) > 0.0)) {
                throw ConfigError("zero_sum attack needs w_bi > 0 on every Byzantine edge");
            }
        }
    }
}

namespace {

Vector weighted_reliable_sum(const Topology& t, AgentId i, std::span<const Vector> snapshot,
                             double* weight_total) {
    Vector acc = Vector::Zero(snapshot[i].size());
    double wsum = 0.0;
    for (AgentId j : t.reliable_neighbors(i)) {
        const double w = t.weights()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        acc += w * snapshot[j];
        wsum += w;
    }
    if (weight_total != nullptr) *weight_total = wsum;
    return acc;
}

Vector clamp_payload(Vector v) {
    return v.unaryExpr([](double x) {
        if (std::isnan(x)) return 0.0;
        return std::clamp(x, -kPayloadClamp, kPayloadClamp);
    });
}

} // namespace

Vector forge(const AttackSpec& spec, AgentId sender, AgentId receiver, std::uint64_t k,
             std::span<const Vector> snapshot, const Topology& t) {
    const Vector& own = snapshot[receiver];
    switch (spec.kind) {
    case AttackKind::none:
        return snapshot[sender];
    case AttackKind::zero_sum: {
        const auto byz_count = static_cast<double>(t.byzantine_neighbors(receiver).size());
        const double w_bi =
            t.weights()(static_cast<Eigen::Index>(sender), static_cast<Eigen::Index>(receiver));
        if (byz_count == 0.0 || !(w_bi > 0.0)) {
            throw ConfigError("zero_sum payload undefined for this receiver");
        }
        return clamp_payload(-weighted_reliable_sum(t, receiver, snapshot, nullptr) / byz_count /
                             w_bi);
    }
    case AttackKind::gaussian: {
        double wsum = 0.0;
        Vector mean = weighted_reliable_sum(t, receiver, snapshot, &wsum);
        mean = wsum > 0.0 ? Vector(mean / wsum) : own;
        Rng rng(stream_seed(spec.seed, Stream::attack, sender, derive_seed(receiver, k)));
        std::normal_distribution<double> nd(0.0, spec.gaussian_std);
        for (Eigen::Index e = 0; e < mean.size(); ++e) mean(e) += nd(rng);
        return clamp_payload(std::move(mean));
    }
    case AttackKind::same_value:
        return clamp_payload(Vector::Constant(own.size(), spec.same_value_magnitude));
    case AttackKind::sign_flip: {
        Vector acc = own;
        const auto rel = t.reliable_neighbors(receiver);
        for (AgentId j : rel) acc += snapshot[j];
        return clamp_payload(-spec.sign_flip_scale * acc / static_cast<double>(rel.size() + 1));
    }
    }
    throw Error("unhandled attack kind");
}

double verify_zero_sum_intent(const Topology& t, std::span<const Vector> snapshot,
                              const AttackSpec& spec, std::uint64_t k) {
    double worst = 0.0;
    for (AgentId i : t.reliable()) {
        const auto byz = t.byzantine_neighbors(i);
        if (byz.empty()) continue;
        Vector acc = weighted_reliable_sum(t, i, snapshot, nullptr);
        for (AgentId b : byz) {
            const double w = t.weights()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
            acc += w * forge(spec, b, i, k, snapshot, t);
        }
        if (acc.size() > 0) worst = std::max(worst, acc.cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace dbro
