#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dbro/engine.hpp"

namespace dbro {

inline constexpr const char* kCsvHeader =
    "epoch,iteration,optimal_gap,consensus_error,test_accuracy,wall_time";

/// One header line and one line per row; a missing accuracy is an empty
/// field. Doubles use the shortest round-trip representation.
void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

/// Binary dump: magic "DBROST01", u64 agent count, u64 dimension, then the
/// states row by row as little-endian doubles.
void write_states(const std::filesystem::path& path, std::span<const Vector> states);
std::vector<Vector> read_states(const std::filesystem::path& path);

/// meta.json body: resolved config, seeds, theory constants, warnings,
/// outcome and software version.
std::string meta_json(const PreparedRun& pr, const RunResult* result);

/// Writes metrics.csv, meta.json and final_states.bin into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const PreparedRun& pr,
                       const RunResult& result);

std::string software_version();

} // namespace dbro
