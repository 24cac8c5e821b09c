#include "dbro/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace dbro {

std::string to_string(AggregatorType k) {
    switch (k) {
    case AggregatorType::penalty: return "penalty";
    case AggregatorType::average: return "average";
    case AggregatorType::trimmed_mean: return "trimmed_mean";
    case AggregatorType::coord_median: return "coord_median";
    case AggregatorType::krum: return "krum";
    case AggregatorType::geo_median: return "geo_median";
    }
    return "unknown";
}

AggregatorType parse_aggregator_type(const std::string& s) {
    if (s == "penalty") return AggregatorType::penalty;
    if (s == "average") return AggregatorType::average;
    if (s == "trimmed_mean") return AggregatorType::trimmed_mean;
    if (s == "coord_median" || s == "median") return AggregatorType::coord_median;
    if (s == "krum") return AggregatorType::krum;
    if (s == "geo_median" || s == "geomed") return AggregatorType::geo_median;
    throw ConfigError("unknown algorithm '" + s + "'");
}

void AggregatorKind::validate(std::size_t inbox_size) const {
    const std::size_t count = inbox_size + 1;
    if (type == AggregatorType::trimmed_mean && !(2 * f < count)) {
        throw ConfigError("trimmed_mean needs 2f < candidate count (f=" + std::to_string(f) +
                          ", candidates=" + std::to_string(count) + ")");
    }
    if (type == AggregatorType::krum && count < 2 * f + 3) {
        throw ConfigError("krum needs at least 2f + 3 candidates (f=" + std::to_string(f) +
                          ", candidates=" + std::to_string(count) + ")");
    }
    if (type == AggregatorType::geo_median && !(geo_tol > 0.0 && geo_max_iter > 0)) {
        throw ConfigError("geo_median needs a positive tolerance and iteration cap");
    }
}

namespace {

struct Candidate {
    AgentId id;
    const Vector* state;
};

std::vector<Candidate> candidate_set(AgentId self_id, const Vector& self_state,
                                     std::span<const InboxMessage> inbox) {
    std::vector<Candidate> c;
    c.reserve(inbox.size() + 1);
    c.push_back({self_id, &self_state});
    for (const auto& m : inbox) c.push_back({m.sender, &m.payload});
    std::stable_sort(c.begin(), c.end(),
                     [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
    return c;
}

Vector coordinatewise(const std::vector<Candidate>& c, std::size_t trim, bool median) {
    const Eigen::Index n = c.front().state->size();
    Vector out(n);
    std::vector<double> col(c.size());
    for (Eigen::Index e = 0; e < n; ++e) {
        for (std::size_t k = 0; k < c.size(); ++k) col[k] = (*c[k].state)(e);
        std::sort(col.begin(), col.end());
        if (median) {
            out(e) = col[(col.size() - 1) / 2];  // lower middle for even counts
        } else {
            double acc = 0.0;
            for (std::size_t k = trim; k < col.size() - trim; ++k) acc += col[k];
            out(e) = acc / static_cast<double>(col.size() - 2 * trim);
        }
    }
    return out;
}

Vector krum(const std::vector<Candidate>& c, std::size_t f) {
    const std::size_t count = c.size();
    const std::size_t nearest = count - f - 2;
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<double> d;
    for (std::size_t a = 0; a < count; ++a) {
        d.clear();
        for (std::size_t b = 0; b < count; ++b) {
            if (b != a) d.push_back((*c[a].state - *c[b].state).squaredNorm());
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(nearest), d.end());
        const double score = std::accumulate(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(nearest), 0.0);
        if (score < best_score) {  // strict: ties keep the lowest id
            best_score = score;
            best = a;
        }
    }
    return *c[best].state;
}

double geo_objective(std::span<const Vector> pts, const Vector& y) {
    double acc = 0.0;
    for (const auto& p : pts) acc += (y - p).norm();
    return acc;
}

} // namespace

Vector geometric_median(std::span<const Vector> candidates, double tol, std::size_t max_iter,
                        std::vector<double>* objective_trace) {
    constexpr double kCoincide = 1e-12;
    Vector y = Vector::Zero(candidates.front().size());
    for (const auto& p : candidates) y += p;
    y /= static_cast<double>(candidates.size());

    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector num = Vector::Zero(y.size());
        double den = 0.0;
        for (const auto& p : candidates) {
            const double w = 1.0 / std::max((y - p).norm(), kCoincide);
            num += w * p;
            den += w;
        }
        Vector next = num / den;
        const double step = (next - y).norm();
        y = std::move(next);
        if (objective_trace != nullptr) objective_trace->push_back(geo_objective(candidates, y));
        if (step <= tol * std::max(1.0, y.norm())) break;
    }
    return y;
}

Vector aggregate(const AggregatorKind& kind, AgentId self_id, const Vector& self_state,
                 std::span<const InboxMessage> inbox, double self_weight,
                 std::span<const double> weights) {
    switch (kind.type) {
    case AggregatorType::average: {
        if (weights.size() != inbox.size()) throw Error("one weight per inbox message");
        Vector acc = self_weight * self_state;
        for (std::size_t k = 0; k < inbox.size(); ++k) acc += weights[k] * inbox[k].payload;
        return acc;
    }
    case AggregatorType::trimmed_mean:
        kind.validate(inbox.size());
        return coordinatewise(candidate_set(self_id, self_state, inbox), kind.f, false);
    case AggregatorType::coord_median:
        return coordinatewise(candidate_set(self_id, self_state, inbox), 0, true);
    case AggregatorType::krum:
        kind.validate(inbox.size());
        return krum(candidate_set(self_id, self_state, inbox), kind.f);
    case AggregatorType::geo_median: {
        std::vector<Vector> pts;
        for (const auto& c : candidate_set(self_id, self_state, inbox)) pts.push_back(*c.state);
        return geometric_median(pts, kind.geo_tol, kind.geo_max_iter);
    }
    case AggregatorType::penalty:
        throw Error("the penalty rule is applied by resilient_descent_step, not aggregate()");
    }
    throw Error("unhandled aggregator");
}

Vector baseline_step(const AggregatorKind& kind, AgentId self_id, const Vector& self_state,
                     std::span<const InboxMessage> inbox, double self_weight,
                     std::span<const double> weights, const Vector& r, double alpha,
                     const ProblemInstance& p) {
    const Vector y = aggregate(kind, self_id, self_state, inbox, self_weight, weights);
    return prox_g(p, alpha, y - alpha * r);
}

} // namespace dbro
