#include "dbro/estimators.hpp"

namespace dbro {

std::string to_string(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::saga: return "saga";
    case EstimatorKind::lsvrg: return "lsvrg";
    case EstimatorKind::sgd: return "sgd";
    case EstimatorKind::full: return "full";
    }
    return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& s) {
    if (s == "saga") return EstimatorKind::saga;
    if (s == "lsvrg") return EstimatorKind::lsvrg;
    if (s == "sgd") return EstimatorKind::sgd;
    if (s == "full" || s == "full_batch") return EstimatorKind::full;
    throw ConfigError("unknown estimator '" + s + "'");
}

SagaState saga_init(const ProblemInstance& p, AgentId agent, const Vector& x0, bool track_points,
                    std::uint64_t* grad_evals) {
    const std::size_t q = p.samples(agent);
    SagaState st;
    st.table.reserve(q);
    st.average = Vector::Zero(x0.size());
    for (std::size_t l = 0; l < q; ++l) {
        st.table.push_back(component_grad(p, agent, l, x0));
        st.average += st.table.back();
    }
    st.average /= static_cast<double>(q);
    if (track_points) st.points.assign(q, x0);
    if (grad_evals != nullptr) *grad_evals += q;
    return st;
}

LsvrgState lsvrg_init(const ProblemInstance& p, AgentId agent, const Vector& x0,
                      double trigger_prob, std::uint64_t* grad_evals) {
    if (!(trigger_prob > 0.0 && trigger_prob <= 1.0)) {
        throw ConfigError("LSVRG trigger probability must lie in (0, 1]");
    }
    LsvrgState st;
    st.anchor = x0;
    st.anchor_full_grad = full_grad(p, agent, x0);
    st.trigger_prob = trigger_prob;
    if (grad_evals != nullptr) *grad_evals += p.samples(agent);
    return st;
}

Estimate saga_estimate(SagaState& st, const ProblemInstance& p, AgentId agent, const Vector& x,
                       std::size_t sample) {
    if (sample >= st.table.size()) throw Error("SAGA sample index out of range");
    const double q = static_cast<double>(st.table.size());

    Vector fresh = component_grad(p, agent, sample, x);
    Estimate out{fresh + (st.average - st.table[sample]), 1};

    st.average += (fresh - st.table[sample]) / q;
    st.table[sample] = std::move(fresh);
    if (!st.points.empty()) st.points[sample] = x;

    if (++st.updates_since_sync >= SagaState::kResyncEvery) {
        st.average.setZero();
        for (const auto& g : st.table) st.average += g;
        st.average /= q;
        st.updates_since_sync = 0;
    }
    return out;
}

Estimate lsvrg_estimate(LsvrgState& st, const ProblemInstance& p, AgentId agent, const Vector& x,
                        std::size_t sample, double trigger_draw) {
    const std::size_t q = p.samples(agent);
    if (sample >= q) throw Error("LSVRG sample index out of range");

    Estimate out{st.anchor_full_grad + (component_grad(p, agent, sample, x) -
                                        component_grad(p, agent, sample, st.anchor)),
                 2};
    if (trigger_draw < st.trigger_prob) {
        st.anchor = x;
        st.anchor_full_grad = full_grad(p, agent, x);
        out.grad_evals += q;
    }
    return out;
}

Estimate sgd_estimate(const ProblemInstance& p, AgentId agent, const Vector& x,
                      std::size_t sample) {
    return {component_grad(p, agent, sample, x), 1};
}

Estimate full_estimate(const ProblemInstance& p, AgentId agent, const Vector& x) {
    return {full_grad(p, agent, x), p.samples(agent)};
}

namespace {

double component_divergence(const ProblemInstance& p, AgentId agent, std::size_t l,
                            const Vector& u, const Vector& x_star) {
    return component_value(p, agent, l, u) - component_value(p, agent, l, x_star) -
           component_grad(p, agent, l, x_star).dot(u - x_star);
}

} // namespace

double saga_tracker(const SagaState& st, const ProblemInstance& p, AgentId agent,
                    const Vector& x_star) {
    if (st.points.size() != st.table.size()) {
        throw Error("saga_tracker needs a state initialized with track_points");
    }
    double acc = 0.0;
    for (std::size_t l = 0; l < st.points.size(); ++l) {
        acc += component_divergence(p, agent, l, st.points[l], x_star);
    }
    return acc / static_cast<double>(st.points.size());
}

double lsvrg_tracker(const LsvrgState& st, const ProblemInstance& p, AgentId agent,
                     const Vector& x_star) {
    return local_value(p, agent, st.anchor) - local_value(p, agent, x_star) -
           full_grad(p, agent, x_star).dot(st.anchor - x_star);
}

} // namespace dbro
