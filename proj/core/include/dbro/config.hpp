#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbro/aggregators.hpp"
#include "dbro/attacks.hpp"
#include "dbro/estimators.hpp"
#include "dbro/objective.hpp"

namespace dbro {

enum class ScheduleKind { constant, decaying, auto_constant, auto_decaying };

std::string to_string(ScheduleKind k);
ScheduleKind parse_schedule_kind(const std::string& s);

enum class DataSource { synthetic, mnist };

struct TopologyConfig {
    std::size_t agents = 10;
    double edge_prob = 0.5;
    std::size_t byzantine = 2;
    std::optional<double> byz_fraction;  ///< overrides `byzantine` when set
    std::optional<std::uint64_t> seed;   ///< defaults to run.seed
    std::string file;                    ///< topology file; overrides the generator

    std::size_t byzantine_count() const;
};

struct ProblemConfig {
    ProblemKind kind = ProblemKind::synthetic_lasso;
    DataSource source = DataSource::synthetic;
    std::size_t dim = 10;
    std::size_t samples_per_agent = 20;
    double beta1 = 0.1;
    double beta2 = 0.05;
    double noise = 0.1;
    double sparsity = 0.5;
    double heterogeneity = 0.0;
    std::size_t feature_dim = 4;
    std::size_t classes = 3;
    std::size_t test_samples = 200;
    double separation = 2.0;
    std::size_t train_limit = 0;  ///< mnist: 0 = all
    std::size_t test_limit = 0;
    std::optional<std::uint64_t> seed;  ///< defaults to run.seed
};

struct AlgorithmConfig {
    AggregatorType rule = AggregatorType::penalty;
    EstimatorKind estimator = EstimatorKind::saga;
    std::optional<double> phi;  ///< unset = auto: phi_factor * phi_min
    double phi_factor = 1.01;
    int a_norm = 1;
    std::size_t f = 0;  ///< trim count / assumed Byzantine count for screening rules
    std::optional<double> lsvrg_prob;  ///< unset = per-agent draw from [m/Q/2, m/Q]
};

struct ScheduleConfig {
    ScheduleKind kind = ScheduleKind::auto_constant;
    std::optional<double> alpha;
    std::optional<double> theta;
    std::optional<double> xi;
    double theta_factor = 2.0;  ///< auto_decaying: theta = theta_factor * 4 / gamma
};

struct RunSettings {
    double epochs = 10.0;
    std::size_t iterations = 0;  ///< when positive, replaces the epoch budget
    std::size_t record_every = 0;  ///< 0 = about 100 rows per run
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    bool wall_clock = true;
};

struct RunConfig {
    TopologyConfig topology;
    ProblemConfig problem;
    AlgorithmConfig algorithm;
    AttackSpec attack;
    ScheduleConfig schedule;
    RunSettings run;

    /// Checks ranges and cross-field constraints; throws ConfigError.
    void validate() const;

    /// Fully resolved section.key -> value map (every key present).
    std::map<std::string, std::string> to_kv() const;
    static RunConfig from_kv(const std::map<std::string, std::string>& kv);

    /// Applies one "section.key=value" override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    std::string to_ini() const;
};

/// Every accepted section.key, in canonical order.
const std::vector<std::string>& config_keys();

/// Parses INI text: "[section]" headers, "key = value" lines, '#' or ';'
/// comments. Unknown sections and keys are rejected.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Reads an INI file, or the "config" object of a meta.json document when
/// the path ends in ".json".
RunConfig load_config(const std::filesystem::path& path);

} // namespace dbro
