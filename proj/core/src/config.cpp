#include "dbro/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace dbro {

std::string to_string(ScheduleKind k) {
    switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::decaying: return "decaying";
    case ScheduleKind::auto_constant: return "auto_constant";
    case ScheduleKind::auto_decaying: return "auto_decaying";
    }
    return "unknown";
}

ScheduleKind parse_schedule_kind(const std::string& s) {
    if (s == "constant") return ScheduleKind::constant;
    if (s == "decaying") return ScheduleKind::decaying;
    if (s == "auto_constant") return ScheduleKind::auto_constant;
    if (s == "auto_decaying") return ScheduleKind::auto_decaying;
    throw ConfigError("unknown schedule kind '" + s + "'");
}

std::size_t TopologyConfig::byzantine_count() const {
    if (byz_fraction) {
        return static_cast<std::size_t>(std::llround(*byz_fraction * static_cast<double>(agents)));
    }
    return byzantine;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

bool is_auto(const std::string& v) { return v == "auto" || v.empty(); }

struct Field {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define DBRO_SIZE(K, M)                                                              \
    Field{K, [](const RunConfig& c) { return std::to_string(c.M); },                 \
          [](RunConfig& c, const std::string& v) { c.M = to_u64(K, v); }}
#define DBRO_DOUBLE(K, M)                                                            \
    Field{K, [](const RunConfig& c) { return fmt_double(c.M); },                     \
          [](RunConfig& c, const std::string& v) { c.M = to_double(K, v); }}
#define DBRO_OPT_DOUBLE(K, M)                                                        \
    Field{K, [](const RunConfig& c) { return c.M ? fmt_double(*c.M) : "auto"; },     \
          [](RunConfig& c, const std::string& v) {                                   \
              if (is_auto(v)) c.M.reset(); else c.M = to_double(K, v);              \
          }}
#define DBRO_OPT_U64(K, M)                                                           \
    Field{K, [](const RunConfig& c) { return c.M ? std::to_string(*c.M) : "auto"; }, \
          [](RunConfig& c, const std::string& v) {                                   \
              if (is_auto(v)) c.M.reset(); else c.M = to_u64(K, v);                  \
          }}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        DBRO_SIZE("topology.agents", topology.agents),
        DBRO_DOUBLE("topology.edge_prob", topology.edge_prob),
        DBRO_SIZE("topology.byzantine", topology.byzantine),
        DBRO_OPT_DOUBLE("topology.byz_fraction", topology.byz_fraction),
        DBRO_OPT_U64("topology.seed", topology.seed),
        Field{"topology.file", [](const RunConfig& c) { return c.topology.file; },
              [](RunConfig& c, const std::string& v) { c.topology.file = v; }},

        Field{"problem.kind", [](const RunConfig& c) { return to_string(c.problem.kind); },
              [](RunConfig& c, const std::string& v) { c.problem.kind = parse_problem_kind(v); }},
        Field{"problem.source",
              [](const RunConfig& c) {
                  return std::string(c.problem.source == DataSource::mnist ? "mnist" : "synthetic");
              },
              [](RunConfig& c, const std::string& v) {
                  if (v == "synthetic") c.problem.source = DataSource::synthetic;
                  else if (v == "mnist") c.problem.source = DataSource::mnist;
                  else throw ConfigError("problem.source: expected synthetic or mnist, got '" + v + "'");
              }},
        DBRO_SIZE("problem.dim", problem.dim),
        DBRO_SIZE("problem.samples_per_agent", problem.samples_per_agent),
        DBRO_DOUBLE("problem.beta1", problem.beta1),
        DBRO_DOUBLE("problem.beta2", problem.beta2),
        DBRO_DOUBLE("problem.noise", problem.noise),
        DBRO_DOUBLE("problem.sparsity", problem.sparsity),
        DBRO_DOUBLE("problem.heterogeneity", problem.heterogeneity),
        DBRO_SIZE("problem.feature_dim", problem.feature_dim),
        DBRO_SIZE("problem.classes", problem.classes),
        DBRO_SIZE("problem.test_samples", problem.test_samples),
        DBRO_DOUBLE("problem.separation", problem.separation),
        DBRO_SIZE("problem.train_limit", problem.train_limit),
        DBRO_SIZE("problem.test_limit", problem.test_limit),
        DBRO_OPT_U64("problem.seed", problem.seed),

        Field{"algorithm.rule", [](const RunConfig& c) { return to_string(c.algorithm.rule); },
              [](RunConfig& c, const std::string& v) { c.algorithm.rule = parse_aggregator_type(v); }},
        Field{"algorithm.estimator",
              [](const RunConfig& c) { return to_string(c.algorithm.estimator); },
              [](RunConfig& c, const std::string& v) {
                  c.algorithm.estimator = parse_estimator_kind(v);
              }},
        DBRO_OPT_DOUBLE("algorithm.phi", algorithm.phi),
        DBRO_DOUBLE("algorithm.phi_factor", algorithm.phi_factor),
        Field{"algorithm.a_norm",
              [](const RunConfig& c) { return std::to_string(c.algorithm.a_norm); },
              [](RunConfig& c, const std::string& v) {
                  c.algorithm.a_norm = static_cast<int>(to_u64("algorithm.a_norm", v));
              }},
        DBRO_SIZE("algorithm.f", algorithm.f),
        DBRO_OPT_DOUBLE("algorithm.lsvrg_prob", algorithm.lsvrg_prob),

        Field{"attack.kind", [](const RunConfig& c) { return to_string(c.attack.kind); },
              [](RunConfig& c, const std::string& v) { c.attack.kind = parse_attack_kind(v); }},
        DBRO_DOUBLE("attack.gaussian_std", attack.gaussian_std),
        DBRO_DOUBLE("attack.same_value_magnitude", attack.same_value_magnitude),
        DBRO_DOUBLE("attack.sign_flip_scale", attack.sign_flip_scale),
        DBRO_SIZE("attack.seed", attack.seed),

        Field{"schedule.kind", [](const RunConfig& c) { return to_string(c.schedule.kind); },
              [](RunConfig& c, const std::string& v) { c.schedule.kind = parse_schedule_kind(v); }},
        DBRO_OPT_DOUBLE("schedule.alpha", schedule.alpha),
        DBRO_OPT_DOUBLE("schedule.theta", schedule.theta),
        DBRO_OPT_DOUBLE("schedule.xi", schedule.xi),
        DBRO_DOUBLE("schedule.theta_factor", schedule.theta_factor),

        DBRO_DOUBLE("run.epochs", run.epochs),
        DBRO_SIZE("run.iterations", run.iterations),
        DBRO_SIZE("run.record_every", run.record_every),
        DBRO_SIZE("run.seed", run.seed),
        DBRO_SIZE("run.threads", run.threads),
        Field{"run.wall_clock",
              [](const RunConfig& c) { return std::string(c.run.wall_clock ? "true" : "false"); },
              [](RunConfig& c, const std::string& v) { c.run.wall_clock = to_bool("run.wall_clock", v); }},
    };
    return f;
}

#undef DBRO_SIZE
#undef DBRO_DOUBLE
#undef DBRO_OPT_DOUBLE
#undef DBRO_OPT_U64

const Field& field(const std::string& key) {
    for (const auto& f : fields()) {
        if (f.key == key) return f;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    field(trim(key)).set(*this, trim(value));
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override must look like section.key=value: '" + assignment + "'");
    }
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::map<std::string, std::string> RunConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    for (const auto& f : fields()) kv[f.key] = f.get(*this);
    return kv;
}

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& kv) {
    RunConfig c;
    for (const auto& [k, v] : kv) c.set(k, v);
    return c;
}

std::string RunConfig::to_ini() const {
    std::ostringstream os;
    std::string section;
    for (const auto& f : fields()) {
        const auto dot = f.key.find('.');
        const std::string s = f.key.substr(0, dot);
        if (s != section) {
            if (!section.empty()) os << '\n';
            os << '[' << s << "]\n";
            section = s;
        }
        os << f.key.substr(dot + 1) << " = " << f.get(*this) << '\n';
    }
    return os.str();
}

void RunConfig::validate() const {
    if (topology.file.empty()) {
        if (topology.agents == 0) throw ConfigError("topology.agents must be positive");
        if (!(topology.edge_prob >= 0.0 && topology.edge_prob <= 1.0)) {
            throw ConfigError("topology.edge_prob must lie in [0, 1]");
        }
        if (topology.byz_fraction && !(*topology.byz_fraction >= 0.0 && *topology.byz_fraction < 1.0)) {
            throw ConfigError("topology.byz_fraction must lie in [0, 1)");
        }
        if (topology.byzantine_count() >= topology.agents) {
            throw ConfigError("byzantine count must be smaller than topology.agents");
        }
    }
    if (problem.source == DataSource::mnist && problem.kind != ProblemKind::softmax_regression) {
        throw ConfigError("problem.source = mnist requires problem.kind = softmax_regression");
    }
    if (problem.samples_per_agent == 0 && problem.source == DataSource::synthetic) {
        throw ConfigError("problem.samples_per_agent must be positive");
    }
    if (problem.beta1 <= 0.0) throw ConfigError("problem.beta1 must be positive (strong convexity)");
    if (problem.beta2 < 0.0) throw ConfigError("problem.beta2 must be non-negative");
    if (problem.kind == ProblemKind::softmax_regression && problem.classes < 2) {
        throw ConfigError("problem.classes must be at least 2");
    }
    if (!(problem.sparsity >= 0.0 && problem.sparsity <= 1.0)) {
        throw ConfigError("problem.sparsity must lie in [0, 1]");
    }
    if (algorithm.phi && !(*algorithm.phi > 0.0)) throw ConfigError("algorithm.phi must be positive");
    if (!(algorithm.phi_factor > 0.0)) throw ConfigError("algorithm.phi_factor must be positive");
    PenaltyConfig{algorithm.phi.value_or(1.0), algorithm.a_norm}.validate();
    if (algorithm.lsvrg_prob && !(*algorithm.lsvrg_prob > 0.0 && *algorithm.lsvrg_prob <= 1.0)) {
        throw ConfigError("algorithm.lsvrg_prob must lie in (0, 1]");
    }
    attack.validate();
    switch (schedule.kind) {
    case ScheduleKind::constant:
        if (!schedule.alpha || !(*schedule.alpha > 0.0)) {
            throw ConfigError("schedule.kind = constant needs schedule.alpha > 0");
        }
        break;
    case ScheduleKind::decaying:
        if (!schedule.theta || !(*schedule.theta > 0.0)) {
            throw ConfigError("schedule.kind = decaying needs schedule.theta > 0");
        }
        if (schedule.xi && !(*schedule.xi > 0.0)) throw ConfigError("schedule.xi must be positive");
        break;
    case ScheduleKind::auto_constant:
        if (schedule.alpha && !(*schedule.alpha > 0.0)) throw ConfigError("schedule.alpha must be positive");
        break;
    case ScheduleKind::auto_decaying:
        if (!(schedule.theta_factor > 1.0)) {
            throw ConfigError("schedule.theta_factor must exceed 1 (theta > 4/gamma)");
        }
        break;
    }
    if (run.iterations == 0 && !(run.epochs > 0.0)) {
        throw ConfigError("run.epochs must be positive when run.iterations is 0");
    }
    if (run.threads == 0) throw ConfigError("run.threads must be at least 1");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig c;
    std::istringstream is(text);
    std::string line, section;
    std::size_t lineno = 0;
    std::map<std::string, std::size_t> seen;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (auto it = seen.find(key); it != seen.end()) {
            throw ConfigError(where + "duplicate key '" + key + "' (first set on line " +
                              std::to_string(it->second) + ")");
        }
        seen[key] = lineno;
        try {
            c.set(key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        if (!j.contains("config") || !j["config"].is_object()) {
            throw ConfigError(path.string() + ": no \"config\" object");
        }
        std::map<std::string, std::string> kv;
        for (const auto& [k, v] : j["config"].items()) {
            if (!v.is_string()) throw ConfigError(path.string() + ": config values must be strings");
            kv[k] = v.get<std::string>();
        }
        return RunConfig::from_kv(kv);
    }
    return parse_config(buf.str(), path.string());
}

} // namespace dbro
