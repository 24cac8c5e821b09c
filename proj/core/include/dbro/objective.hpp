#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbro/types.hpp"

namespace dbro {

enum class ProblemKind { softmax_regression, synthetic_lasso };

std::string to_string(ProblemKind k);
ProblemKind parse_problem_kind(const std::string& s);

/// Samples held by one agent (or a test set).
///
/// For softmax regression labels are class ids in [0, classes); for the
/// synthetic lasso problem targets holds the regression responses and labels
/// is empty.
struct SampleBatch {
    Matrix features;           ///< samples x feature dim
    std::vector<int> labels;
    Vector targets;

    std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
};

/// Composite finite-sum problem: agent i minimizes
/// f_i(x) = (1/q_i) sum_l f_i^l(x), every agent shares g(x) = beta2 ||x||_1.
///
/// The ridge term (beta1/2)||x||^2 is folded into every component f_i^l.
struct ProblemInstance {
    ProblemKind kind = ProblemKind::synthetic_lasso;
    std::size_t n = 0;        ///< decision dimension
    std::size_t classes = 0;  ///< softmax only; n = classes * feature dim
    std::vector<SampleBatch> shards;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double mu = 0.0;
    double L = 0.0;

    std::size_t agents() const noexcept { return shards.size(); }
    std::size_t samples(AgentId i) const { return shards.at(i).size(); }
    std::size_t feature_dim() const;
};

double component_value(const ProblemInstance& p, AgentId agent, std::size_t sample,
                       const Vector& x);
Vector component_grad(const ProblemInstance& p, AgentId agent, std::size_t sample,
                      const Vector& x);

/// f_i(x).
double local_value(const ProblemInstance& p, AgentId agent, const Vector& x);
/// grad f_i(x), the mean of all component gradients.
Vector full_grad(const ProblemInstance& p, AgentId agent, const Vector& x);

double g_value(const ProblemInstance& p, const Vector& x);

/// The element of the subdifferential of g at x closest to -v (used to build
/// optimality residuals at a minimizer).
Vector g_subgradient(const ProblemInstance& p, const Vector& x, const Vector& v);

/// prox_{alpha g}(v): coordinate-wise soft threshold at alpha * beta2.
Vector prox_g(const ProblemInstance& p, double alpha, const Vector& v);

/// Sum over reliable agents of f_i(x_i) - f_i(x*) - grad f_i(x*)^T (x_i - x*).
/// x holds one vector per entry of `reliable`.
double bregman(const ProblemInstance& p, std::span<const AgentId> reliable,
               std::span<const Vector> x, const Vector& x_star);

struct CentralizedSolution {
    Vector x;
    double residual = 0.0;  ///< prox-gradient mapping norm at x
    std::size_t iterations = 0;
};

/// Accelerated proximal gradient with adaptive restart on
/// min_x sum_{i in reliable} (f_i(x) + g(x)). Throws Error with the final
/// residual when max_iter is exhausted.
CentralizedSolution solve_centralized(const ProblemInstance& p, std::span<const AgentId> reliable,
                                      double tol = 1e-12, std::size_t max_iter = 200000);

/// Fraction of test samples whose argmax class score equals the label; ties go
/// to the lowest class id.
double test_accuracy(const ProblemInstance& p, const Vector& x, const SampleBatch& test);

/// Strong convexity and smoothness constants.
///
/// softmax: mu = beta1, L = beta1 + max_{i,l} ||c_il||^2 / 2.
/// lasso:   mu = beta1 + min_i lambda_min(A_i^T A_i / q_i),
///          L = beta1 + max_{i,l} ||a_il||^2.
void compute_constants(ProblemInstance& p);

struct LassoSpec {
    std::size_t agents = 1;
    std::size_t dim = 10;
    std::size_t samples_per_agent = 20;
    double beta1 = 0.1;
    double beta2 = 0.05;
    double noise = 0.1;
    double sparsity = 0.5;       ///< fraction of zero entries in the ground truth
    double heterogeneity = 0.0;  ///< per-agent perturbation of the ground truth
    std::uint64_t seed = 1;
};

/// Per-agent rows a ~ N(0, I), y = a^T x_true + noise * N(0, 1).
ProblemInstance make_synthetic_lasso(const LassoSpec& spec);

struct SoftmaxSpec {
    std::size_t agents = 1;
    std::size_t feature_dim = 4;
    std::size_t classes = 3;
    std::size_t samples_per_agent = 20;
    std::size_t test_samples = 200;
    double beta1 = 0.01;
    double beta2 = 0.001;
    double separation = 2.0;  ///< class-mean spread in units of the noise std
    std::uint64_t seed = 1;
};

struct SoftmaxData {
    ProblemInstance problem;
    SampleBatch test;
};

/// Gaussian class blobs; a desk-scale stand-in for the image data.
SoftmaxData make_synthetic_softmax(const SoftmaxSpec& spec);

/// Builds a softmax instance from one training batch split evenly and
/// contiguously over `agents` (remainder samples are dropped).
ProblemInstance make_softmax_problem(const SampleBatch& train, std::size_t classes,
                                     std::size_t agents, double beta1, double beta2);

} // namespace dbro
