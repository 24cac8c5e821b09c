#include "dbro/resilience.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace dbro {

void PenaltyConfig::validate() const {
    if (!(phi > 0.0)) throw ConfigError("penalty parameter phi must be positive");
    if (a_norm != 1 && a_norm != 2) throw ConfigError("a_norm must be 1 or 2");
}

double PenaltyConfig::dual_exponent() const {
    return a_norm == 1 ? std::numeric_limits<double>::infinity() : 2.0;
}

Vector norm_subgradient(const Vector& d, int a_norm) {
    if (a_norm == 1) {
        return d.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    }
    if (a_norm == 2) {
        const double nrm = d.norm();
        if (nrm == 0.0) return Vector::Zero(d.size());
        return d / nrm;
    }
    throw ConfigError("a_norm must be 1 or 2");
}

Vector resilient_descent_step(const Vector& x_i, const Vector& r_i,
                              std::span<const InboxMessage> inbox, const PenaltyConfig& cfg,
                              double alpha) {
    if (r_i.size() != x_i.size()) throw Error("gradient dimension mismatch");
    std::vector<std::size_t> order(inbox.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return inbox[a].sender < inbox[b].sender; });

    Vector penalty = Vector::Zero(x_i.size());
    for (std::size_t k : order) {
        if (inbox[k].payload.size() != x_i.size()) throw Error("payload dimension mismatch");
        penalty += norm_subgradient(x_i - inbox[k].payload, cfg.a_norm);
    }
    return x_i - alpha * r_i - alpha * cfg.phi * penalty;
}

Vector prox_step(const Vector& x_bar, const ProblemInstance& p, double alpha) {
    return prox_g(p, alpha, x_bar);
}

} // namespace dbro
