#include "dbro/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#ifndef DBRO_VERSION
#define DBRO_VERSION "unknown"
#endif

namespace dbro {

std::string software_version() { return DBRO_VERSION; }

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_num(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) {
        // from_chars does not accept "inf"/"nan" spellings from every writer
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw Error("malformed CSV number '" + s + "'");
    }
    return v;
}

constexpr char kStateMagic[8] = {'D', 'B', 'R', 'O', 'S', 'T', '0', '1'};

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw Error("truncated state file");
    return v;
}

} // namespace

void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << num(r.epoch) << ',' << r.iteration << ',' << num(r.optimal_gap) << ','
           << num(r.consensus_error) << ',' << (r.test_accuracy ? num(*r.test_accuracy) : "")
           << ',' << num(r.wall_time) << '\n';
    }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw Error("unexpected metrics CSV header");
    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 6) throw Error("metrics CSV row must have 6 fields");
        MetricsRow r;
        r.epoch = parse_num(f[0]);
        r.iteration = static_cast<std::size_t>(std::stoull(f[1]));
        r.optimal_gap = parse_num(f[2]);
        r.consensus_error = parse_num(f[3]);
        if (!f[4].empty()) r.test_accuracy = parse_num(f[4]);
        r.wall_time = parse_num(f[5]);
        rows.push_back(r);
    }
    return rows;
}

void write_states(const std::filesystem::path& path, std::span<const Vector> states) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    os.write(kStateMagic, sizeof kStateMagic);
    const std::uint64_t n = states.empty() ? 0 : static_cast<std::uint64_t>(states.front().size());
    put<std::uint64_t>(os, states.size());
    put<std::uint64_t>(os, n);
    for (const auto& s : states) {
        if (static_cast<std::uint64_t>(s.size()) != n) throw Error("ragged state dump");
        os.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
}

std::vector<Vector> read_states(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read '" + path.string() + "'");
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kStateMagic, sizeof magic) != 0) throw Error("bad state file magic");
    const auto m = get<std::uint64_t>(is);
    const auto n = get<std::uint64_t>(is);
    std::vector<Vector> out(m, Vector(static_cast<Eigen::Index>(n)));
    for (auto& s : out) {
        is.read(reinterpret_cast<char*>(s.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!is) throw Error("truncated state file");
    }
    return out;
}

std::string meta_json(const PreparedRun& pr, const RunResult* result) {
    using nlohmann::json;
    json j;
    j["software"] = {{"name", "dbro"}, {"version", software_version()}};
    json cfg = json::object();
    for (const auto& [k, v] : pr.config.to_kv()) cfg[k] = v;
    j["config"] = cfg;

    const auto& t = pr.experiment.topology;
    const auto& p = pr.experiment.problem;
    j["seeds"] = {{"run", pr.config.run.seed},
                  {"topology", pr.config.topology.seed.value_or(pr.config.run.seed)},
                  {"problem", pr.config.problem.seed.value_or(pr.config.run.seed)},
                  {"attack", pr.options.attack.seed}};
    j["topology"] = {{"agents", t.size()},
                     {"byzantine", t.byzantine()},
                     {"edges", t.edges().size()},
                     {"reliable_edges", t.reliable_edges().size()},
                     {"lambda_min", pr.optimum.incidence.lambda_min},
                     {"lambda_max", pr.optimum.incidence.lambda_max}};
    j["problem"] = {{"kind", to_string(p.kind)}, {"n", p.n}, {"mu", p.mu}, {"L", p.L},
                    {"beta1", p.beta1}, {"beta2", p.beta2},
                    {"oracle_residual", pr.optimum.residual}};
    const auto& b = pr.bounds;
    j["theory"] = {{"phi", pr.phi},
                   {"phi_min", pr.optimum.phi_min},
                   {"gamma", b.gamma},
                   {"kappa_f", b.kappa_f},
                   {"kappa_q", b.kappa_q},
                   {"P1_c", b.P1_c},
                   {"P2", b.P2},
                   {"E", b.E},
                   {"P1_d", b.P1_d},
                   {"alpha_max_linear", b.alpha_max_linear},
                   {"theta_min", b.theta_min},
                   {"linear_radius", error_radii(b, pr.alpha0).linear},
                   {"sublinear_radius", error_radii(b, pr.alpha0).sublinear},
                   {"lsvrg_p_min_theory", 1.0 / static_cast<double>(pr.bounds.kappa_q * pr.bounds.q_min)},
                   {"lsvrg_p_max_theory", 1.0 / static_cast<double>(pr.bounds.q_min)}};
    const auto& s = pr.options.schedule;
    j["schedule"] = {{"kind", s.kind == Schedule::Kind::constant ? "constant" : "decaying"},
                     {"alpha", s.alpha},
                     {"theta", s.theta},
                     {"xi", s.xi},
                     {"alpha0", pr.alpha0}};
    j["definitions"] = {
        {"optimal_gap", "mean over reliable agents of f_i(x_i)+g(x_i)-f_i(x*)-g(x*)"},
        {"consensus_error", "mean over reliable agents of ||x_i - mean_R x||^2"},
        {"test_accuracy", "evaluated at the reliable-agent average"},
        {"epoch", "reliable component-gradient evaluations / sum_{i in R} q_i"}};
    j["warnings"] = pr.warnings;
    if (result != nullptr) {
        j["lsvrg_probs"] = result->lsvrg_probs;
        j["outcome"] = {
            {"status", result->status == RunResult::Status::completed ? "completed" : "diverged"},
            {"iterations", result->iterations},
            {"rows", result->rows.size()}};
        if (result->status == RunResult::Status::diverged) {
            j["outcome"]["diverged_at"] = result->diverged_at;
            j["outcome"]["message"] = result->message;
        }
    }
    return j.dump(2) + "\n";
}

void write_run_outputs(const std::filesystem::path& dir, const PreparedRun& pr,
                       const RunResult& result) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "metrics.csv");
        if (!os) throw Error("cannot write metrics.csv in '" + dir.string() + "'");
        write_metrics_csv(os, result.rows);
    }
    {
        std::ofstream os(dir / "meta.json");
        os << meta_json(pr, &result);
    }
    write_states(dir / "final_states.bin", result.states);
}

} // namespace dbro
