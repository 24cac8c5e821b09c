// dbro: command-line front end for the simulator.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dbro/config.hpp"
#include "dbro/engine.hpp"
#include "dbro/io.hpp"
#include "dbro/topology.hpp"
#include "sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

dbro::RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
    dbro::RunConfig cfg = dbro::load_config(path);
    for (const auto& s : sets) cfg.set(s);
    return cfg;
}

int cmd_run(const std::string& cfg_path, const std::string& out,
            const std::vector<std::string>& sets) {
    const dbro::PreparedRun pr = dbro::prepare(load_with_overrides(cfg_path, sets));
    for (const auto& w : pr.warnings) std::cerr << "warning: " << w << '\n';
    const dbro::RunResult res = dbro::run(pr.experiment, pr.options);
    dbro::write_run_outputs(out, pr, res);
    if (res.status == dbro::RunResult::Status::diverged) {
        std::cerr << "diverged: " << res.message << '\n';
        return kExitDiverged;
    }
    const auto& last = res.rows.back();
    std::printf("completed %zu iterations, epoch %.4g, optimal_gap %.6g, consensus_error %.6g\n",
                res.iterations, last.epoch, last.optimal_gap, last.consensus_error);
    return kExitOk;
}

int cmd_bounds(const std::string& cfg_path, const std::vector<std::string>& sets) {
    const dbro::PreparedRun pr = dbro::prepare(load_with_overrides(cfg_path, sets));
    const auto& b = pr.bounds;
    const auto radii = dbro::error_radii(b, pr.alpha0);
    auto row = [](const char* name, double v) { std::printf("%-20s %.10g\n", name, v); };
    row("phi_min", pr.optimum.phi_min);
    row("phi", pr.phi);
    row("lambda_min", pr.optimum.incidence.lambda_min);
    row("mu", pr.experiment.problem.mu);
    row("L", pr.experiment.problem.L);
    row("gamma", b.gamma);
    row("kappa_f", b.kappa_f);
    row("kappa_q", b.kappa_q);
    row("P1_c", b.P1_c);
    row("P2", b.P2);
    row("E", b.E);
    row("P1_d", b.P1_d);
    row("alpha_max_linear", b.alpha_max_linear);
    row("theta_min", b.theta_min);
    row("xi(2*theta_min)", dbro::decaying_xi(b, 2.0 * b.theta_min));
    row("alpha_0", pr.alpha0);
    row("linear_radius", radii.linear);
    row("sublinear_radius", radii.sublinear);
    for (const auto& w : pr.warnings) std::cerr << "warning: " << w << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& cfg_path, const std::vector<std::string>& sets) {
    const dbro::PreparedRun pr = dbro::prepare(load_with_overrides(cfg_path, sets));
    for (const auto& w : pr.warnings) std::cerr << "warning: " << w << '\n';
    std::printf("ok: %zu agents (%zu Byzantine), n = %zu\n", pr.experiment.topology.size(),
                pr.experiment.topology.byzantine().size(), pr.experiment.problem.n);
    return kExitOk;
}

int cmd_sweep(const std::string& cfg_path, const std::string& grid_path, std::size_t seeds,
              std::size_t jobs, const std::string& out, const std::vector<std::string>& sets) {
    const dbro::RunConfig base = load_with_overrides(cfg_path, sets);
    base.validate();
    std::ifstream in(grid_path);
    if (!in) throw dbro::ConfigError("cannot open grid file '" + grid_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto axes = dbro::tools::parse_grid(buf.str());
    const std::size_t failed = dbro::tools::run_sweep(base, axes, {seeds, jobs, out});
    std::printf("%zu run(s) failed\n", failed);
    return failed == 0 ? kExitOk : kExitDiverged;
}

int cmd_golden(const std::string& out) {
    const auto t = dbro::gen_connected_erdos_renyi(30, 0.3, 5, 42);
    std::ofstream os(out);
    if (!os) throw dbro::ConfigError("cannot write '" + out + "'");
    dbro::write_topology(os, t);
    std::printf("wrote %s (%zu edges)\n", out.c_str(), t.edges().size());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-resilient decentralized composite optimization simulator"};
    app.set_version_flag("--version", dbro::software_version());
    app.require_subcommand(1);

    std::string cfg, out, grid;
    std::vector<std::string> sets;
    std::size_t seeds = 1, jobs = 1;

    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("config", cfg, "INI config or a previous meta.json")->required();
    run->add_option("--out", out, "output directory")->required();
    run->add_option("--set", sets, "override section.key=value")->take_all();

    auto* bounds = app.add_subcommand("bounds", "print theory constants for a config");
    bounds->add_option("config", cfg)->required();
    bounds->add_option("--set", sets)->take_all();

    auto* validate = app.add_subcommand("validate", "parse and resolve a config without running");
    validate->add_option("config", cfg)->required();
    validate->add_option("--set", sets)->take_all();

    auto* sweep = app.add_subcommand("sweep", "grid x seeds sweep, one directory per cell");
    sweep->add_option("config", cfg)->required();
    sweep->add_option("--grid", grid, "grid file")->required();
    sweep->add_option("--seeds", seeds, "replicates per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out, "output directory")->required();
    sweep->add_option("--set", sets)->take_all();

    auto* golden = app.add_subcommand("golden", "regenerate the golden topology file");
    golden->add_option("--out", out, "destination")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(cfg, out, sets);
        if (*bounds) return cmd_bounds(cfg, sets);
        if (*validate) return cmd_validate(cfg, sets);
        if (*sweep) return cmd_sweep(cfg, grid, seeds, jobs, out, sets);
        if (*golden) return cmd_golden(out);
    } catch (const dbro::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
