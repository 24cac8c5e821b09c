#pragma once

#include <cstddef>
#include <vector>

#include "dbro/topology.hpp"

namespace dbro {

/// Inputs to the convergence-constant calculators.
struct BoundInputs {
    double mu = 0.0;
    double L = 0.0;
    std::size_t q_min = 1;
    std::size_t q_max = 1;
    std::size_t n = 1;        ///< decision dimension
    double phi = 0.0;
    double beta2 = 0.0;       ///< l1 weight; the l1 subgradient bound is n * beta2^2
    std::size_t reliable = 0; ///< |R|
    std::vector<std::size_t> reliable_neighbors;   ///< |R_i| for i in R
    std::vector<std::size_t> byzantine_neighbors;  ///< |B_i| for i in R
};

/// Builds BoundInputs from a topology and problem constants.
BoundInputs bound_inputs(const Topology& t, double mu, double L, std::size_t q_min,
                         std::size_t q_max, std::size_t n, double phi, double beta2);

struct TheoryBounds {
    double gamma = 0.0;    ///< mu L / (mu + L)
    double kappa_f = 0.0;  ///< L / mu
    double kappa_q = 0.0;  ///< q_max / q_min
    double P1_c = 0.0;
    double P2 = 0.0;
    double E = 0.0;        ///< 4 P2 / gamma
    double P1_d = 0.0;
    double alpha_max_linear = 0.0;
    double theta_min = 0.0;  ///< decaying schedules need theta > theta_min = 4 / gamma
    double mu = 0.0;
    std::size_t q_min = 1;
};

TheoryBounds compute_bounds(const BoundInputs& in);

/// 1 / (kappa_q (32 (1 + kappa_f)^2 + q_min) mu).
double stepsize_constant_max(const TheoryBounds& b, std::size_t q_min, double mu);

/// kappa_q (64 (1 + kappa_f)^2 + q_min) mu theta.
double decaying_xi(const TheoryBounds& b, double theta);

/// theta / (k + xi). Throws ConfigError when theta <= 4 / gamma.
double schedule_decaying(const TheoryBounds& b, double theta, std::size_t k);

struct ErrorRadii {
    double linear = 0.0;     ///< 4 (P1_c alpha / gamma + E)
    double sublinear = 0.0;  ///< E
};

ErrorRadii error_radii(const TheoryBounds& b, double alpha);

/// 4 n (4 alpha (4 + r_a^2) / gamma + (r_a / gamma)^2) phi^2 |R|^3.
double penalty_radius(const TheoryBounds& b, double alpha, double r_a, std::size_t n,
                        double phi, std::size_t reliable);

/// Constant of the sublinear envelope ||x_k - x*||^2 <= Xi / (k + xi).
double decaying_envelope_constant(const TheoryBounds& b, double theta, double init_dist_sq);

} // namespace dbro
