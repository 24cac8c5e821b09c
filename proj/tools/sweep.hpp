#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dbro/config.hpp"

namespace dbro::tools {

/// One grid axis: a config key and the values it takes.
using GridAxis = std::pair<std::string, std::vector<std::string>>;

/// Grid file: one "section.key = v1, v2, ..." line per axis; '#' comments.
std::vector<GridAxis> parse_grid(const std::string& text);

/// Cartesian product in file order, last axis varying fastest.
std::vector<std::vector<std::pair<std::string, std::string>>> grid_cells(
    const std::vector<GridAxis>& axes);

/// Seed for replicate s of a sweep with base seed `base`; replicate 0 keeps
/// the base seed so a one-cell, one-seed sweep reproduces a plain run.
std::uint64_t replicate_seed(std::uint64_t base, std::size_t s);

struct SweepOptions {
    std::size_t seeds = 1;
    std::size_t jobs = 1;
    std::filesystem::path out;
};

/// Runs every (cell, replicate). Returns the number of failed cells.
std::size_t run_sweep(const RunConfig& base, const std::vector<GridAxis>& axes,
                      const SweepOptions& opt);

} // namespace dbro::tools
