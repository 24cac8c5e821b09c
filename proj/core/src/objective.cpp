#include "dbro/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dbro/rng.hpp"

namespace dbro {

std::string to_string(ProblemKind k) {
    switch (k) {
    case ProblemKind::softmax_regression: return "softmax";
    case ProblemKind::synthetic_lasso: return "synthetic_lasso";
    }
    return "unknown";
}

ProblemKind parse_problem_kind(const std::string& s) {
    if (s == "softmax" || s == "softmax_regression") return ProblemKind::softmax_regression;
    if (s == "synthetic_lasso" || s == "lasso") return ProblemKind::synthetic_lasso;
    throw ConfigError("unknown problem kind '" + s + "'");
}

std::size_t ProblemInstance::feature_dim() const {
    return kind == ProblemKind::softmax_regression ? n / std::max<std::size_t>(classes, 1) : n;
}

namespace {

void check_sample(const ProblemInstance& p, AgentId agent, std::size_t sample) {
    if (agent >= p.shards.size()) throw Error("agent id out of range");
    if (sample >= p.shards[agent].size()) {
        throw Error("sample index " + std::to_string(sample) + " out of range for agent " +
                    std::to_string(agent));
    }
}

// Class scores for one feature row; x is laid out in class blocks.
Vector class_scores(const ProblemInstance& p, const Eigen::Ref<const Vector>& feat,
                    const Vector& x) {
    const auto d = static_cast<Eigen::Index>(p.feature_dim());
    Vector s(static_cast<Eigen::Index>(p.classes));
    for (Eigen::Index c = 0; c < s.size(); ++c) s(c) = x.segment(c * d, d).dot(feat);
    return s;
}

double log_sum_exp(const Vector& s) {
    const double top = s.maxCoeff();
    return top + std::log((s.array() - top).exp().sum());
}

} // namespace

double component_value(const ProblemInstance& p, AgentId agent, std::size_t sample,
                       const Vector& x) {
    check_sample(p, agent, sample);
    const auto& b = p.shards[agent];
    const auto row = static_cast<Eigen::Index>(sample);
    const double ridge = 0.5 * p.beta1 * x.squaredNorm();
    if (p.kind == ProblemKind::synthetic_lasso) {
        const double res = b.features.row(row).dot(x) - b.targets(row);
        return 0.5 * res * res + ridge;
    }
    const Vector s = class_scores(p, b.features.row(row).transpose(), x);
    return log_sum_exp(s) - s(b.labels[sample]) + ridge;
}

Vector component_grad(const ProblemInstance& p, AgentId agent, std::size_t sample,
                      const Vector& x) {
    check_sample(p, agent, sample);
    const auto& b = p.shards[agent];
    const auto row = static_cast<Eigen::Index>(sample);
    if (p.kind == ProblemKind::synthetic_lasso) {
        const double res = b.features.row(row).dot(x) - b.targets(row);
        return res * b.features.row(row).transpose() + p.beta1 * x;
    }
    const Vector s = class_scores(p, b.features.row(row).transpose(), x);
    const double lse = log_sum_exp(s);
    const auto d = static_cast<Eigen::Index>(p.feature_dim());
    Vector grad = p.beta1 * x;
    for (Eigen::Index c = 0; c < s.size(); ++c) {
        const double coef = std::exp(s(c) - lse) - (c == b.labels[sample] ? 1.0 : 0.0);
        grad.segment(c * d, d) += coef * b.features.row(row).transpose();
    }
    return grad;
}

double local_value(const ProblemInstance& p, AgentId agent, const Vector& x) {
    const std::size_t q = p.samples(agent);
    double acc = 0.0;
    for (std::size_t l = 0; l < q; ++l) acc += component_value(p, agent, l, x);
    return acc / static_cast<double>(q);
}

Vector full_grad(const ProblemInstance& p, AgentId agent, const Vector& x) {
    const std::size_t q = p.samples(agent);
    Vector acc = Vector::Zero(x.size());
    for (std::size_t l = 0; l < q; ++l) acc += component_grad(p, agent, l, x);
    return acc / static_cast<double>(q);
}

double g_value(const ProblemInstance& p, const Vector& x) {
    return p.beta2 * x.lpNorm<1>();
}

Vector g_subgradient(const ProblemInstance& p, const Vector& x, const Vector& v) {
    Vector out(x.size());
    for (Eigen::Index e = 0; e < x.size(); ++e) {
        if (x(e) > 0.0) {
            out(e) = p.beta2;
        } else if (x(e) < 0.0) {
            out(e) = -p.beta2;
        } else {
            out(e) = std::clamp(-v(e), -p.beta2, p.beta2);
        }
    }
    return out;
}

Vector prox_g(const ProblemInstance& p, double alpha, const Vector& v) {
    const double thr = alpha * p.beta2;
    if (thr == 0.0) return v;
    Vector out(v.size());
    for (Eigen::Index e = 0; e < v.size(); ++e) {
        const double mag = std::abs(v(e)) - thr;
        out(e) = mag > 0.0 ? std::copysign(mag, v(e)) : 0.0;
    }
    return out;
}

double bregman(const ProblemInstance& p, std::span<const AgentId> reliable,
               std::span<const Vector> x, const Vector& x_star) {
    if (x.size() != reliable.size()) throw Error("bregman: one block per reliable agent");
    double acc = 0.0;
    for (std::size_t k = 0; k < reliable.size(); ++k) {
        const AgentId i = reliable[k];
        acc += local_value(p, i, x[k]) - local_value(p, i, x_star) -
               full_grad(p, i, x_star).dot(x[k] - x_star);
    }
    return acc;
}

namespace {

Vector mean_grad(const ProblemInstance& p, std::span<const AgentId> reliable, const Vector& x) {
    Vector acc = Vector::Zero(x.size());
    for (AgentId i : reliable) acc += full_grad(p, i, x);
    return acc / static_cast<double>(reliable.size());
}

} // namespace

CentralizedSolution solve_centralized(const ProblemInstance& p, std::span<const AgentId> reliable,
                                      double tol, std::size_t max_iter) {
    if (!(p.mu > 0.0)) throw ConfigError("centralized solver requires mu > 0");
    if (reliable.empty()) throw ConfigError("centralized solver needs at least one agent");

    // Same minimizer as (1/|R|) sum_i f_i + g, which is L-smooth.
    const double step = 1.0 / p.L;
    Vector x = Vector::Zero(static_cast<Eigen::Index>(p.n));
    Vector y = x;
    double t = 1.0;
    CentralizedSolution sol;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Vector x_next = prox_g(p, step, y - step * mean_grad(p, reliable, y));
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        Vector y_next = x_next + ((t - 1.0) / t_next) * (x_next - x);
        // Gradient-based adaptive restart.
        if ((y - x_next).dot(x_next - x) > 0.0) {
            y_next = x_next;
            t = 1.0;
        } else {
            t = t_next;
        }
        x = x_next;
        y = y_next;

        if (it % 10 == 9 || it + 1 == max_iter) {
            const Vector mapped = prox_g(p, step, x - step * mean_grad(p, reliable, x));
            sol.residual = (x - mapped).norm();
            if (sol.residual <= tol) {
                sol.x = mapped;
                sol.iterations = it + 1;
                return sol;
            }
        }
    }
    throw Error("centralized solver did not converge in " + std::to_string(max_iter) +
                " iterations; final residual " + std::to_string(sol.residual));
}

double test_accuracy(const ProblemInstance& p, const Vector& x, const SampleBatch& test) {
    if (p.kind != ProblemKind::softmax_regression) {
        throw ConfigError("test accuracy is only defined for softmax regression");
    }
    if (test.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < test.size(); ++r) {
        const Vector s =
            class_scores(p, test.features.row(static_cast<Eigen::Index>(r)).transpose(), x);
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < s.size(); ++c) {
            if (s(c) > s(best)) best = c;
        }
        if (best == test.labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

void compute_constants(ProblemInstance& p) {
    double max_row_sq = 0.0;
    for (const auto& b : p.shards) {
        if (b.size() > 0) max_row_sq = std::max(max_row_sq, b.features.rowwise().squaredNorm().maxCoeff());
    }
    if (p.kind == ProblemKind::softmax_regression) {
        p.mu = p.beta1;
        p.L = p.beta1 + 0.5 * max_row_sq;
        return;
    }
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& b : p.shards) {
        if (b.size() == 0) continue;
        const Matrix gram = b.features.transpose() * b.features / static_cast<double>(b.size());
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, std::max(0.0, es.eigenvalues().minCoeff()));
    }
    if (!std::isfinite(min_eig)) min_eig = 0.0;
    p.mu = p.beta1 + min_eig;
    p.L = p.beta1 + max_row_sq;
}

namespace {

Vector gaussian_vector(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = nd(rng);
    return v;
}

} // namespace

ProblemInstance make_synthetic_lasso(const LassoSpec& spec) {
    if (spec.agents == 0 || spec.dim == 0 || spec.samples_per_agent == 0) {
        throw ConfigError("lasso instance needs agents, dim and samples > 0");
    }
    ProblemInstance p;
    p.kind = ProblemKind::synthetic_lasso;
    p.n = spec.dim;
    p.beta1 = spec.beta1;
    p.beta2 = spec.beta2;
    const auto n = static_cast<Eigen::Index>(spec.dim);

    Rng truth_rng(stream_seed(spec.seed, Stream::data, spec.agents, 0));
    Vector x_true = gaussian_vector(truth_rng, n);
    for (Eigen::Index e = 0; e < n; ++e) {
        if (uniform01(truth_rng) < spec.sparsity) x_true(e) = 0.0;
    }

    std::normal_distribution<double> nd(0.0, 1.0);
    p.shards.resize(spec.agents);
    for (std::size_t i = 0; i < spec.agents; ++i) {
        Rng rng(stream_seed(spec.seed, Stream::data, i, 0));
        const Vector local_truth = x_true + spec.heterogeneity * gaussian_vector(rng, n);
        auto& b = p.shards[i];
        const auto q = static_cast<Eigen::Index>(spec.samples_per_agent);
        b.features.resize(q, n);
        b.targets.resize(q);
        for (Eigen::Index l = 0; l < q; ++l) {
            for (Eigen::Index e = 0; e < n; ++e) b.features(l, e) = nd(rng);
            b.targets(l) = b.features.row(l).dot(local_truth) + spec.noise * nd(rng);
        }
    }
    compute_constants(p);
    return p;
}

SoftmaxData make_synthetic_softmax(const SoftmaxSpec& spec) {
    if (spec.agents == 0 || spec.classes < 2 || spec.feature_dim == 0) {
        throw ConfigError("softmax instance needs agents > 0, classes >= 2, feature_dim > 0");
    }
    const auto d = static_cast<Eigen::Index>(spec.feature_dim);
    Rng mean_rng(stream_seed(spec.seed, Stream::data, spec.agents + 1, 0));
    std::vector<Vector> means;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        means.push_back(spec.separation * gaussian_vector(mean_rng, d));
    }
    auto draw_batch = [&](Rng& rng, std::size_t count) {
        SampleBatch b;
        b.features.resize(static_cast<Eigen::Index>(count), d);
        b.labels.resize(count);
        for (std::size_t r = 0; r < count; ++r) {
            const auto c = static_cast<int>(uniform_index(rng, spec.classes));
            b.labels[r] = c;
            b.features.row(static_cast<Eigen::Index>(r)) =
                (means[static_cast<std::size_t>(c)] + gaussian_vector(rng, d)).transpose();
        }
        return b;
    };

    SoftmaxData out;
    auto& p = out.problem;
    p.kind = ProblemKind::softmax_regression;
    p.classes = spec.classes;
    p.n = spec.classes * spec.feature_dim;
    p.beta1 = spec.beta1;
    p.beta2 = spec.beta2;
    for (std::size_t i = 0; i < spec.agents; ++i) {
        Rng rng(stream_seed(spec.seed, Stream::data, i, 0));
        p.shards.push_back(draw_batch(rng, spec.samples_per_agent));
    }
    Rng test_rng(stream_seed(spec.seed, Stream::data, spec.agents, 0));
    out.test = draw_batch(test_rng, spec.test_samples);
    compute_constants(p);
    return out;
}

ProblemInstance make_softmax_problem(const SampleBatch& train, std::size_t classes,
                                     std::size_t agents, double beta1, double beta2) {
    if (agents == 0) throw ConfigError("softmax problem needs at least one agent");
    const std::size_t per = train.size() / agents;
    if (per == 0) throw ConfigError("fewer training samples than agents");
    ProblemInstance p;
    p.kind = ProblemKind::softmax_regression;
    p.classes = classes;
    p.n = classes * static_cast<std::size_t>(train.features.cols());
    p.beta1 = beta1;
    p.beta2 = beta2;
    for (std::size_t i = 0; i < agents; ++i) {
        SampleBatch b;
        const auto start = static_cast<Eigen::Index>(i * per);
        b.features = train.features.middleRows(start, static_cast<Eigen::Index>(per));
        b.labels.assign(train.labels.begin() + start,
                        train.labels.begin() + start + static_cast<std::ptrdiff_t>(per));
        p.shards.push_back(std::move(b));
    }
    compute_constants(p);
    return p;
}

} // namespace dbro
