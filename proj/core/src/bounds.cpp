#include "dbro/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dbro {

BoundInputs bound_inputs(const Topology& t, double mu, double L, std::size_t q_min,
                         std::size_t q_max, std::size_t n, double phi, double beta2) {
    BoundInputs in;
    in.mu = mu;
    in.L = L;
    in.q_min = q_min;
    in.q_max = q_max;
    in.n = n;
    in.phi = phi;
    in.beta2 = beta2;
    in.reliable = t.reliable().size();
    for (AgentId i : t.reliable()) {
        in.reliable_neighbors.push_back(t.reliable_neighbors(i).size());
        in.byzantine_neighbors.push_back(t.byzantine_neighbors(i).size());
    }
    return in;
}

TheoryBounds compute_bounds(const BoundInputs& in) {
    if (!(in.mu > 0.0 && in.L >= in.mu)) throw ConfigError("bounds need 0 < mu <= L");
    if (in.q_min == 0 || in.q_max < in.q_min) throw ConfigError("bounds need 1 <= q_min <= q_max");
    if (!(in.phi >= 0.0)) throw ConfigError("bounds need phi >= 0");

    double sum_r2 = 0.0, sum_b2 = 0.0;
    for (auto r : in.reliable_neighbors) sum_r2 += static_cast<double>(r * r);
    for (auto b : in.byzantine_neighbors) sum_b2 += static_cast<double>(b * b);
    const double n = static_cast<double>(in.n);
    const double phi2 = in.phi * in.phi;

    TheoryBounds b;
    b.mu = in.mu;
    b.q_min = in.q_min;
    b.gamma = in.mu * in.L / (in.mu + in.L);
    b.kappa_f = in.L / in.mu;
    b.kappa_q = static_cast<double>(in.q_max) / static_cast<double>(in.q_min);
    b.P1_c = 16.0 * n * phi2 * sum_r2 + 4.0 * n * phi2 * sum_b2;
    b.P2 = n * phi2 * sum_b2 / b.gamma;
    b.E = 4.0 * b.P2 / b.gamma;
    const double g_hat = n * in.beta2 * in.beta2;
    b.P1_d = 16.0 * static_cast<double>(in.reliable) * g_hat + b.P1_c;
    b.alpha_max_linear = stepsize_constant_max(b, in.q_min, in.mu);
    b.theta_min = 4.0 / b.gamma;
    return b;
}

double stepsize_constant_max(const TheoryBounds& b, std::size_t q_min, double mu) {
    const double k = 1.0 + b.kappa_f;
    return 1.0 / (b.kappa_q * (32.0 * k * k + static_cast<double>(q_min)) * mu);
}

double decaying_xi(const TheoryBounds& b, double theta) {
    const double k = 1.0 + b.kappa_f;
    return b.kappa_q * (64.0 * k * k + static_cast<double>(b.q_min)) * b.mu * theta;
}

double schedule_decaying(const TheoryBounds& b, double theta, std::size_t k) {
    if (!(theta > b.theta_min)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", b.theta_min);
        throw ConfigError(std::string("decaying schedule needs theta > 4/gamma = ") + buf);
    }
    return theta / (static_cast<double>(k) + decaying_xi(b, theta));
}

ErrorRadii error_radii(const TheoryBounds& b, double alpha) {
    return {4.0 * (b.P1_c * alpha / b.gamma + b.E), b.E};
}

double penalty_radius(const TheoryBounds& b, double alpha, double r_a, std::size_t n,
                        double phi, std::size_t reliable) {
    const double r3 = std::pow(static_cast<double>(reliable), 3);
    const double t = 4.0 * alpha * (4.0 + r_a * r_a) / b.gamma + (r_a / b.gamma) * (r_a / b.gamma);
    return 4.0 * static_cast<double>(n) * t * phi * phi * r3;
}

double decaying_envelope_constant(const TheoryBounds& b, double theta, double init_dist_sq) {
    const double xi = decaying_xi(b, theta);
    const double gt = b.gamma * theta;
    const double first = theta * theta * b.P1_d / (gt - 1.0);
    const double second = (xi - gt / 4.0) * init_dist_sq + theta * theta * b.P1_d / xi +
                          theta * b.P2 - xi * b.E;
    return std::max(first, second);
}

} // namespace dbro
