#include "dbro/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "dbro/rng.hpp"

namespace dbro {

Topology::Topology(std::size_t m, std::vector<Edge> edges, std::vector<AgentId> byzantine)
    : m_(m), is_byzantine_(m, false), reliable_index_(m, -1), adjacency_(m) {
    for (auto& e : edges) {
        if (e.first == e.second) {
            throw ConfigError("self-loop on agent " + std::to_string(e.first));
        }
        if (e.first >= m || e.second >= m) {
            throw ConfigError("edge endpoint out of range");
        }
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    std::sort(byzantine.begin(), byzantine.end());
    byzantine.erase(std::unique(byzantine.begin(), byzantine.end()), byzantine.end());
    for (AgentId b : byzantine) {
        if (b >= m) throw ConfigError("Byzantine id out of range");
        is_byzantine_[b] = true;
    }
    byzantine_ = std::move(byzantine);
    for (AgentId i = 0; i < m; ++i) {
        if (!is_byzantine_[i]) {
            reliable_index_[i] = static_cast<std::ptrdiff_t>(reliable_.size());
            reliable_.push_back(i);
        }
    }

    for (const auto& e : edges_) {
        adjacency_[e.first].push_back(e.second);
        adjacency_[e.second].push_back(e.first);
        if (!is_byzantine_[e.first] && !is_byzantine_[e.second]) reliable_edges_.push_back(e);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

    weights_ = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (const auto& e : edges_) {
        const double w =
            1.0 / (1.0 + static_cast<double>(std::max(adjacency_[e.first].size(),
                                                       adjacency_[e.second].size())));
        weights_(static_cast<Eigen::Index>(e.first), static_cast<Eigen::Index>(e.second)) = w;
        weights_(static_cast<Eigen::Index>(e.second), static_cast<Eigen::Index>(e.first)) = w;
    }
    for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
        weights_(i, i) = 1.0 - weights_.row(i).sum();
    }
}

std::vector<AgentId> Topology::reliable_neighbors(AgentId i) const {
    std::vector<AgentId> out;
    for (AgentId j : neighbors(i)) {
        if (!is_byzantine_[j]) out.push_back(j);
    }
    return out;
}

std::vector<AgentId> Topology::byzantine_neighbors(AgentId i) const {
    std::vector<AgentId> out;
    for (AgentId j : neighbors(i)) {
        if (is_byzantine_[j]) out.push_back(j);
    }
    return out;
}

Topology Topology::with_byzantine(std::vector<AgentId> byzantine) const {
    return Topology(m_, edges_, std::move(byzantine));
}

Topology gen_erdos_renyi(std::size_t m, double edge_prob, std::size_t byz_count,
                         std::uint64_t seed, std::uint64_t attempt) {
    if (m == 0) throw ConfigError("agent count must be positive");
    if (byz_count >= m) throw ConfigError("byz_count must be smaller than the agent count");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
        throw ConfigError("edge probability must lie in [0, 1]");
    }

    Rng edge_rng(stream_seed(seed, Stream::topology, attempt));
    std::vector<Edge> edges;
    for (AgentId i = 0; i < m; ++i) {
        for (AgentId j = i + 1; j < m; ++j) {
            if (uniform01(edge_rng) < edge_prob) edges.push_back({i, j});
        }
    }

    Rng byz_rng(stream_seed(seed, Stream::byzantine_selection, attempt));
    std::vector<AgentId> perm(m);
    std::iota(perm.begin(), perm.end(), AgentId{0});
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(byz_rng, m - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(byz_count);
    return Topology(m, std::move(edges), std::move(perm));
}

Topology gen_connected_erdos_renyi(std::size_t m, double edge_prob, std::size_t byz_count,
                                   std::uint64_t seed, std::size_t max_attempts) {
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        Topology t = gen_erdos_renyi(m, edge_prob, byz_count, seed, attempt);
        if (reliable_connected(t)) return t;
    }
    throw ConfigError("no Erdos-Renyi draw with a connected reliable subgraph after " +
                      std::to_string(max_attempts) +
                      " attempts; the reliable agents must form a connected subgraph");
}

bool reliable_connected(const Topology& t) {
    const auto& rel = t.reliable();
    if (rel.empty()) return false;
    std::vector<bool> seen(t.size(), false);
    std::queue<AgentId> frontier;
    frontier.push(rel.front());
    seen[rel.front()] = true;
    std::size_t visited = 1;
    while (!frontier.empty()) {
        const AgentId u = frontier.front();
        frontier.pop();
        for (AgentId v : t.neighbors(u)) {
            if (t.is_byzantine(v) || seen[v]) continue;
            seen[v] = true;
            ++visited;
            frontier.push(v);
        }
    }
    return visited == rel.size();
}

IncidenceMatrix incidence(const Topology& t) {
    if (!reliable_connected(t)) {
        throw ConfigError("reliable subgraph is disconnected");
    }
    const auto& redges = t.reliable_edges();
    IncidenceMatrix inc;
    inc.pi = Matrix::Zero(static_cast<Eigen::Index>(t.reliable().size()),
                          static_cast<Eigen::Index>(redges.size()));
    for (std::size_t e = 0; e < redges.size(); ++e) {
        const auto col = static_cast<Eigen::Index>(e);
        inc.pi(t.reliable_index(redges[e].first), col) = 1.0;
        inc.pi(t.reliable_index(redges[e].second), col) = -1.0;
    }
    if (inc.pi.size() == 0) return inc;

    Eigen::JacobiSVD<Matrix> svd(inc.pi);
    const Vector& sv = svd.singularValues();
    inc.lambda_max = sv.maxCoeff();
    inc.lambda_min = 0.0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > kSingularThreshold * inc.lambda_max) {
            ++inc.rank;
            inc.lambda_min = sv(k);  // singular values are sorted descending
        }
    }
    return inc;
}

double phi_min(const IncidenceMatrix& inc, std::span<const Vector> grads_at_opt,
               std::size_t n_edges_reliable) {
    if (!(inc.lambda_min > 0.0)) {
        throw ConfigError("phi_min requires a positive smallest nonzero singular value");
    }
    double worst = 0.0;
    for (const auto& g : grads_at_opt) {
        if (g.size() > 0) worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    const double r = static_cast<double>(inc.pi.rows());
    return std::pow(r, 1.5) * std::sqrt(static_cast<double>(n_edges_reliable)) * worst /
           inc.lambda_min;
}

namespace {

double lp_norm(const Eigen::Ref<const Vector>& v, double p) {
    if (v.size() == 0) return 0.0;
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

} // namespace

Certificate equivalence_certificate(const IncidenceMatrix& inc, const Matrix& psi, double phi,
                                    double b_norm) {
    if (!(phi > 0.0)) throw ConfigError("certificate requires phi > 0");
    if (psi.rows() != inc.pi.rows()) throw ConfigError("psi row count must equal |R|");

    Certificate cert;
    const Eigen::Index n_edges = inc.pi.cols();
    if (n_edges == 0) {
        cert.y = Matrix::Zero(0, psi.cols());
        cert.residual = psi.size() ? psi.cwiseAbs().maxCoeff() : 0.0;
        cert.valid = cert.residual <= 1e-8;
        return cert;
    }
    // Per-coordinate least squares through the pseudo-inverse.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(inc.pi);
    cod.setThreshold(kSingularThreshold);
    const Matrix pinv = cod.pseudoInverse();
    cert.y = -(pinv * psi) / phi;

    const Matrix residual = phi * (inc.pi * cert.y) + psi;
    cert.residual = residual.size() ? residual.cwiseAbs().maxCoeff() : 0.0;
    const double psi_inf = psi.size() ? psi.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index e = 0; e < n_edges; ++e) {
        cert.dual_norm = std::max(cert.dual_norm, lp_norm(cert.y.row(e).transpose(), b_norm));
    }
    cert.valid = cert.residual <= 1e-8 * std::max(1.0, psi_inf) && cert.dual_norm <= 1.0 + 1e-10;
    return cert;
}

void write_topology(std::ostream& os, const Topology& t) {
    os << t.size() << ' ' << t.byzantine().size() << '\n';
    for (const auto& e : t.edges()) os << e.first << ' ' << e.second << '\n';
    for (std::size_t k = 0; k < t.byzantine().size(); ++k) {
        if (k) os << ' ';
        os << t.byzantine()[k];
    }
    os << '\n';
}

Topology read_topology(std::istream& is) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        return false;
    };
    if (!next_line()) throw ConfigError("topology file is empty");
    std::istringstream header(line);
    std::size_t m = 0, byz = 0;
    if (!(header >> m >> byz)) throw ConfigError("topology header must be 'm byz_count'");

    std::vector<std::string> rest;
    while (next_line()) rest.push_back(line);
    // Trailing blank lines are tolerated; the Byzantine line is the last
    // non-edge line (possibly empty when byz_count is 0).
    while (!rest.empty() && rest.back().find_first_not_of(" \t") == std::string::npos &&
           (byz > 0 || rest.size() > 1)) {
        rest.pop_back();
    }
    std::vector<AgentId> byzantine;
    std::vector<Edge> edges;
    std::size_t edge_lines = rest.size();
    if (byz > 0) {
        if (rest.empty()) throw ConfigError("topology file is missing the Byzantine id line");
        std::istringstream bl(rest.back());
        AgentId b;
        while (bl >> b) byzantine.push_back(b);
        if (byzantine.size() != byz) throw ConfigError("Byzantine id count does not match header");
        edge_lines = rest.size() - 1;
    } else if (!rest.empty() && rest.back().find_first_not_of(" \t") == std::string::npos) {
        edge_lines = rest.size() - 1;
    }
    for (std::size_t k = 0; k < edge_lines; ++k) {
        std::istringstream el(rest[k]);
        AgentId i, j;
        if (!(el >> i >> j)) throw ConfigError("malformed edge line: '" + rest[k] + "'");
        edges.push_back({i, j});
    }
    return Topology(m, std::move(edges), std::move(byzantine));
}

} // namespace dbro
