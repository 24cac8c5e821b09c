#pragma once

#include <random>
#include <vector>

#include "dbro/objective.hpp"
#include "dbro/rng.hpp"
#include "dbro/topology.hpp"

namespace dbro::testing {

inline Vector gaussian(Rng& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(n);
    for (Eigen::Index e = 0; e < n; ++e) v(e) = nd(rng);
    return v;
}

/// Lasso instance with q[i] Gaussian samples on agent i and per-agent
/// ground-truth perturbations (so local minimizers differ).
inline ProblemInstance random_lasso(Rng& rng, const std::vector<std::size_t>& q, std::size_t n,
                                    double beta1, double beta2, double heterogeneity = 0.5) {
    ProblemInstance p;
    p.kind = ProblemKind::synthetic_lasso;
    p.n = n;
    p.beta1 = beta1;
    p.beta2 = beta2;
    const auto dim = static_cast<Eigen::Index>(n);
    const Vector truth = gaussian(rng, dim);
    for (std::size_t qi : q) {
        SampleBatch b;
        b.features = Matrix(static_cast<Eigen::Index>(qi), dim);
        for (Eigen::Index r = 0; r < b.features.rows(); ++r) b.features.row(r) = gaussian(rng, dim).transpose();
        const Vector local = truth + gaussian(rng, dim, heterogeneity);
        b.targets = b.features * local + gaussian(rng, static_cast<Eigen::Index>(qi), 0.1);
        p.shards.push_back(std::move(b));
    }
    compute_constants(p);
    return p;
}

/// Softmax instance with random features and labels.
inline ProblemInstance random_softmax(Rng& rng, const std::vector<std::size_t>& q,
                                      std::size_t feature_dim, std::size_t classes, double beta1,
                                      double beta2) {
    ProblemInstance p;
    p.kind = ProblemKind::softmax_regression;
    p.classes = classes;
    p.n = feature_dim * classes;
    p.beta1 = beta1;
    p.beta2 = beta2;
    for (std::size_t qi : q) {
        SampleBatch b;
        b.features = Matrix(static_cast<Eigen::Index>(qi), static_cast<Eigen::Index>(feature_dim));
        for (Eigen::Index r = 0; r < b.features.rows(); ++r) {
            b.features.row(r) = gaussian(rng, static_cast<Eigen::Index>(feature_dim)).transpose();
            b.labels.push_back(static_cast<int>(uniform_index(rng, classes)));
        }
        p.shards.push_back(std::move(b));
    }
    compute_constants(p);
    return p;
}

inline Topology path_graph(std::size_t m, std::vector<AgentId> byz = {}) {
    std::vector<Edge> e;
    for (AgentId i = 0; i + 1 < m; ++i) e.push_back({i, i + 1});
    return Topology(m, e, std::move(byz));
}

inline Topology complete_graph(std::size_t m, std::vector<AgentId> byz = {}) {
    std::vector<Edge> e;
    for (AgentId i = 0; i < m; ++i)
        for (AgentId j = i + 1; j < m; ++j) e.push_back({i, j});
    return Topology(m, e, std::move(byz));
}

/// Random connected graph: a random spanning tree plus extra edges.
inline Topology random_connected(Rng& rng, std::size_t m, double extra_prob,
                                 std::vector<AgentId> byz = {}) {
    std::vector<Edge> e;
    for (AgentId i = 1; i < m; ++i) e.push_back({static_cast<AgentId>(uniform_index(rng, i)), i});
    for (AgentId i = 0; i < m; ++i)
        for (AgentId j = i + 1; j < m; ++j)
            if (uniform01(rng) < extra_prob) e.push_back({i, j});
    return Topology(m, e, std::move(byz));
}

} // namespace dbro::testing
