#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "dbro/types.hpp"

namespace dbro {

/// Undirected edge with first < second.
struct Edge {
    AgentId first;
    AgentId second;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected agent network with a Byzantine subset.
///
/// Immutable after construction. Weights follow the Metropolis-Hastings rule
/// and are only consumed by attack formulas and averaging baselines.
class Topology {
public:
    Topology() = default;

    /// Validates edges (no self-loops, ids < m), deduplicates and sorts them,
    /// and builds the Metropolis-Hastings weight matrix.
    Topology(std::size_t m, std::vector<Edge> edges, std::vector<AgentId> byzantine);

    std::size_t size() const noexcept { return m_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<AgentId>& byzantine() const noexcept { return byzantine_; }
    const std::vector<AgentId>& reliable() const noexcept { return reliable_; }
    const std::vector<Edge>& reliable_edges() const noexcept { return reliable_edges_; }
    const Matrix& weights() const noexcept { return weights_; }

    bool is_byzantine(AgentId i) const { return is_byzantine_.at(i); }
    std::span<const AgentId> neighbors(AgentId i) const { return adjacency_.at(i); }
    std::size_t degree(AgentId i) const { return adjacency_.at(i).size(); }

    /// Reliable neighbors of i (excluding i), ascending.
    std::vector<AgentId> reliable_neighbors(AgentId i) const;
    /// Byzantine neighbors of i, ascending.
    std::vector<AgentId> byzantine_neighbors(AgentId i) const;

    /// Row index of a reliable agent inside the reliable ordering, or -1.
    std::ptrdiff_t reliable_index(AgentId i) const { return reliable_index_.at(i); }

    /// Same edges, with a different Byzantine set.
    Topology with_byzantine(std::vector<AgentId> byzantine) const;

private:
    std::size_t m_ = 0;
    std::vector<Edge> edges_;
    std::vector<AgentId> byzantine_;
    std::vector<AgentId> reliable_;
    std::vector<Edge> reliable_edges_;
    std::vector<bool> is_byzantine_;
    std::vector<std::ptrdiff_t> reliable_index_;
    std::vector<std::vector<AgentId>> adjacency_;
    Matrix weights_;
};

/// One Erdős-Rényi draw G(m, p) with a uniformly chosen Byzantine subset.
///
/// The RNG stream is documented so that golden files stay valid: a
/// mt19937_64 seeded with stream_seed(seed, Stream::topology, attempt) decides
/// pairs (i, j), i < j, in lexicographic order with one uniform01() draw each
/// (edge iff draw < p). A second mt19937_64 seeded with
/// stream_seed(seed, Stream::byzantine_selection, attempt) runs a forward
/// Fisher-Yates shuffle of 0..m-1 using uniform_index(); the first byz_count
/// entries become Byzantine.
Topology gen_erdos_renyi(std::size_t m, double edge_prob, std::size_t byz_count,
                         std::uint64_t seed, std::uint64_t attempt = 0);

/// Retries gen_erdos_renyi with attempt = 0, 1, ... until the reliable
/// subgraph is connected; throws ConfigError after max_attempts.
Topology gen_connected_erdos_renyi(std::size_t m, double edge_prob, std::size_t byz_count,
                                   std::uint64_t seed, std::size_t max_attempts = 100);

/// True iff the subgraph induced on the reliable agents is connected.
bool reliable_connected(const Topology& t);

/// Signed node-edge incidence matrix of the reliable subgraph.
struct IncidenceMatrix {
    Matrix pi;              ///< |R| x |E_R|; +1 at the smaller endpoint, -1 at the larger
    double lambda_min = 0;  ///< smallest nonzero singular value
    double lambda_max = 0;  ///< largest singular value
    std::size_t rank = 0;   ///< number of nonzero singular values
};

/// Nonzero threshold for singular values, relative to lambda_max.
inline constexpr double kSingularThreshold = 1e-10;

IncidenceMatrix incidence(const Topology& t);

/// Smallest penalty that makes the penalized problem exact:
/// |R|^{3/2} sqrt(|E_R|) max_i ||grad_i||_inf / lambda_min.
/// grads_at_opt holds one vector per reliable agent.
double phi_min(const IncidenceMatrix& inc, std::span<const Vector> grads_at_opt,
               std::size_t n_edges_reliable);

struct Certificate {
    Matrix y;                   ///< |E_R| x n, one dual vector per reliable edge
    double residual = 0;        ///< ||phi Pi y + Psi||_inf
    double dual_norm = 0;       ///< max_e ||y_e||_b
    bool valid = false;
};

/// Least-squares dual certificate y = -pinv(Pi) Psi / phi, solved per
/// coordinate. psi is |R| x n (row i: grad f_i(x*) + g'(x*)). b_norm is the
/// dual exponent (2 or +infinity).
Certificate equivalence_certificate(const IncidenceMatrix& inc, const Matrix& psi, double phi,
                                    double b_norm);

/// Plain-text adjacency format: "m byz_count", one "i j" line per edge, then
/// the Byzantine ids on a single line (empty when byz_count is 0).
void write_topology(std::ostream& os, const Topology& t);
Topology read_topology(std::istream& is);

} // namespace dbro
