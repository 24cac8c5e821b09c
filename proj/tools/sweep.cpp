#include "sweep.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dbro/engine.hpp"
#include "dbro/io.hpp"
#include "dbro/rng.hpp"

namespace dbro::tools {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

} // namespace

std::vector<GridAxis> parse_grid(const std::string& text) {
    std::vector<GridAxis> axes;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("grid line " + std::to_string(lineno) + ": expected key = v1, v2");
        }
        GridAxis axis{trim(line.substr(0, eq)), {}};
        std::stringstream vs(line.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, ',')) {
            v = trim(v);
            if (!v.empty()) axis.second.push_back(v);
        }
        if (axis.second.empty()) {
            throw ConfigError("grid line " + std::to_string(lineno) + ": no values");
        }
        RunConfig probe;
        for (const auto& value : axis.second) probe.set(axis.first, value);  // rejects bad keys early
        axes.push_back(std::move(axis));
    }
    return axes;
}

std::vector<std::vector<std::pair<std::string, std::string>>> grid_cells(
    const std::vector<GridAxis>& axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> cells{{}};
    for (const auto& [key, values] : axes) {
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& c : cells) {
            for (const auto& v : values) {
                auto e = c;
                e.emplace_back(key, v);
                next.push_back(std::move(e));
            }
        }
        cells = std::move(next);
    }
    return cells;
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t s) {
    return s == 0 ? base : stream_seed(base, Stream::sweep_cell, s);
}

std::size_t run_sweep(const RunConfig& base, const std::vector<GridAxis>& axes,
                      const SweepOptions& opt) {
    struct Task {
        std::size_t cell;
        std::size_t replicate;
        std::vector<std::pair<std::string, std::string>> overrides;
    };
    std::vector<Task> tasks;
    const auto cells = grid_cells(axes);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t s = 0; s < opt.seeds; ++s) tasks.push_back({c, s, cells[c]});
    }

    std::vector<nlohmann::json> summary(tasks.size());
    std::atomic<std::size_t> next{0}, failed{0};
    std::mutex log_mu;
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < tasks.size(); k = next.fetch_add(1)) {
            const Task& task = tasks[k];
            char name[64];
            std::snprintf(name, sizeof name, "cell_%04zu_seed_%02zu", task.cell, task.replicate);
            const auto dir = opt.out / name;
            nlohmann::json entry = {{"dir", name}, {"cell", task.cell}, {"replicate", task.replicate}};
            nlohmann::json ov = nlohmann::json::object();
            for (const auto& [key, v] : task.overrides) ov[key] = v;
            entry["overrides"] = ov;
            try {
                RunConfig cfg = base;
                for (const auto& [key, v] : task.overrides) cfg.set(key, v);
                cfg.run.seed = replicate_seed(base.run.seed, task.replicate);
                cfg.run.threads = 1;
                const PreparedRun pr = prepare(cfg);
                const RunResult res = run(pr.experiment, pr.options);
                write_run_outputs(dir, pr, res);
                const bool ok = res.status == RunResult::Status::completed;
                entry["status"] = ok ? "completed" : "diverged";
                if (!res.rows.empty()) entry["final_optimal_gap"] = res.rows.back().optimal_gap;
                if (!ok) failed.fetch_add(1);
            } catch (const std::exception& e) {
                entry["status"] = "error";
                entry["error"] = e.what();
                failed.fetch_add(1);
                std::filesystem::create_directories(dir);
                std::ofstream(dir / "error.txt") << e.what() << '\n';
            }
            {
                std::lock_guard lk(log_mu);
                std::cerr << name << ": " << entry["status"].get<std::string>() << '\n';
            }
            summary[k] = std::move(entry);
        }
    };

    std::filesystem::create_directories(opt.out);
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < std::max<std::size_t>(1, opt.jobs); ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    nlohmann::json doc = {{"cells", cells.size()}, {"seeds", opt.seeds}, {"runs", summary}};
    std::ofstream(opt.out / "sweep.json") << doc.dump(2) << '\n';
    return failed.load();
}

} // namespace dbro::tools
