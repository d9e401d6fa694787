#ifndef ADASTAB_SCENARIO_HPP
#define ADASTAB_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "adastab/fileio.hpp"

// Scenario files: flat key-value text, one `key = value` assignment per
// line, `#` comments, dotted keys. Unrecognized keys are errors.

namespace adastab {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ScenarioKind { Classify, System1, System2, ScalarGain, NetworkNode, NetworkEdge };

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Classify: return "classify";
        case ScenarioKind::System1: return "system1";
        case ScenarioKind::System2: return "system2";
        case ScenarioKind::ScalarGain: return "scalar_gain";
        case ScenarioKind::NetworkNode: return "network_node";
        case ScenarioKind::NetworkEdge: return "network_edge";
    }
    return "?";
}

struct Scenario {
    ScenarioKind kind = ScenarioKind::Classify;

    std::string matrix_a_path;  // empty: A = 0 sized from B
    std::string matrix_b_path;

    std::string graph_path;  // alternatively generator spec below
    std::optional<int> graph_n;
    std::optional<double> graph_rho;
    std::optional<std::uint64_t> graph_seed;

    std::vector<double> initial_state;  // explicit, or seeded box below
    std::optional<std::uint64_t> state_seed;
    double state_box = 3.0;

    std::vector<double> initial_gains;  // explicit, or seeded range below
    std::optional<std::uint64_t> gains_seed;
    double gains_range = 1.0;

    std::vector<double> gain_c{1.0};  // broadcast when length 1
    std::vector<double> gain_p{1.0};

    double osc_w = 1.0, osc_a = 1.0, osc_b = 1.0;
    bool osc_sin_drive = true;

    double dt = 1e-3;
    double horizon = 0.0;  // 0: kind-dependent default, resolved at parse
    int output_stride = 10;

    double state_eps = 1e-8;
    double sync_eps = 1e-4;
    double hold_time = 0.0;  // 0: kind-dependent default
    double divergence_cap = 1e12;

    bool frozen_gains = false;
    std::optional<double> delta;

    bool is_network() const {
        return kind == ScenarioKind::NetworkNode || kind == ScenarioKind::NetworkEdge;
    }

    bool operator==(const Scenario&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ParseError("field '" + key + "': not a number: '" + v + "'");
    }
}

inline std::vector<double> parse_vector(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(tok, key));
    if (out.empty()) throw ParseError("field '" + key + "': empty vector");
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("field '" + key + "': expected true/false: '" + v + "'");
}

inline std::uint64_t parse_seed(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const auto s = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return s;
    } catch (...) {
        throw ParseError("field '" + key + "': not a seed: '" + v + "'");
    }
}

inline std::string resolve_path(const std::string& p, const std::string& base_dir) {
    std::filesystem::path fp(p);
    if (fp.is_absolute() || base_dir.empty()) return fp.lexically_normal().string();
    return (std::filesystem::path(base_dir) / fp).lexically_normal().string();
}

}  // namespace detail

/// Applies one `key = value` assignment; used by both the parser and sweep.
inline void scenario_set_key(Scenario& s, const std::string& key, const std::string& value,
                             const std::string& base_dir = "") {
    using namespace detail;
    if (key == "kind") {
        if (value == "classify") s.kind = ScenarioKind::Classify;
        else if (value == "system1") s.kind = ScenarioKind::System1;
        else if (value == "system2") s.kind = ScenarioKind::System2;
        else if (value == "scalar_gain") s.kind = ScenarioKind::ScalarGain;
        else if (value == "network_node") s.kind = ScenarioKind::NetworkNode;
        else if (value == "network_edge") s.kind = ScenarioKind::NetworkEdge;
        else throw ParseError("unknown kind '" + value + "'");
    } else if (key == "matrices.A") {
        s.matrix_a_path = resolve_path(value, base_dir);
    } else if (key == "matrices.B") {
        s.matrix_b_path = resolve_path(value, base_dir);
    } else if (key == "graph.file") {
        s.graph_path = resolve_path(value, base_dir);
    } else if (key == "graph.n") {
        s.graph_n = static_cast<int>(parse_double(value, key));
    } else if (key == "graph.rho") {
        s.graph_rho = parse_double(value, key);
    } else if (key == "graph.seed") {
        s.graph_seed = parse_seed(value, key);
    } else if (key == "initial_state") {
        s.initial_state = parse_vector(value, key);
    } else if (key == "initial_state.seed") {
        s.state_seed = parse_seed(value, key);
    } else if (key == "initial_state.box") {
        s.state_box = parse_double(value, key);
    } else if (key == "initial_gains") {
        s.initial_gains = parse_vector(value, key);
    } else if (key == "initial_gains.seed") {
        s.gains_seed = parse_seed(value, key);
    } else if (key == "initial_gains.range") {
        s.gains_range = parse_double(value, key);
    } else if (key == "gain.c") {
        s.gain_c = parse_vector(value, key);
    } else if (key == "gain.p") {
        s.gain_p = parse_vector(value, key);
    } else if (key == "oscillator.w") {
        s.osc_w = parse_double(value, key);
    } else if (key == "oscillator.a") {
        s.osc_a = parse_double(value, key);
    } else if (key == "oscillator.b") {
        s.osc_b = parse_double(value, key);
    } else if (key == "oscillator.drive") {
        if (value == "sin") s.osc_sin_drive = true;
        else if (value == "none") s.osc_sin_drive = false;
        else throw ParseError("oscillator.drive: expected sin|none, got '" + value + "'");
    } else if (key == "integrator.dt") {
        s.dt = parse_double(value, key);
    } else if (key == "integrator.horizon") {
        s.horizon = parse_double(value, key);
    } else if (key == "integrator.output_stride") {
        s.output_stride = static_cast<int>(parse_double(value, key));
    } else if (key == "stop.state_eps") {
        s.state_eps = parse_double(value, key);
    } else if (key == "stop.sync_eps") {
        s.sync_eps = parse_double(value, key);
    } else if (key == "stop.hold_time") {
        s.hold_time = parse_double(value, key);
    } else if (key == "stop.divergence_cap") {
        s.divergence_cap = parse_double(value, key);
    } else if (key == "frozen_gains") {
        s.frozen_gains = parse_bool(value, key);
    } else if (key == "delta") {
        s.delta = parse_double(value, key);
    } else {
        throw ParseError("unrecognized key '" + key + "'");
    }
}

inline void validate_scenario(const Scenario& s) {
    auto fail = [](const std::string& what) { throw ValidationError(what); };
    if (s.dt <= 0.0) fail("integrator.dt must be > 0");
    if (s.kind != ScenarioKind::Classify) {
        if (s.horizon <= s.dt) fail("integrator.horizon must be > dt");
        if (s.output_stride < 1) fail("integrator.output_stride must be >= 1");
        if (s.hold_time < 0.0) fail("stop.hold_time must be >= 0");
        if (s.divergence_cap <= 0.0) fail("stop.divergence_cap must be > 0");
        for (double c : s.gain_c)
            if (!(c > 0.0)) fail("gain.c entries must be > 0");
        for (double p : s.gain_p)
            if (!(p >= 1.0)) fail("gain.p entries must be >= 1");
        for (double k : s.initial_gains)
            if (!(k > 0.0)) fail("initial_gains entries must be > 0");
        if (s.initial_state.empty() && !s.state_seed)
            fail("initial_state (or initial_state.seed) required");
        if (s.initial_gains.empty() && !s.gains_seed)
            fail("initial_gains (or initial_gains.seed) required");
    }
    if (s.kind == ScenarioKind::System1 || s.kind == ScenarioKind::System2 ||
        s.kind == ScenarioKind::ScalarGain || s.kind == ScenarioKind::Classify) {
        if (s.matrix_b_path.empty()) fail("matrices.B required for kind " + to_string(s.kind));
    }
    if (s.is_network()) {
        const bool generated = s.graph_n && s.graph_rho && s.graph_seed;
        if (s.graph_path.empty() && !generated)
            fail("graph.file or graph.{n,rho,seed} required for network kinds");
        if (generated) {
            if (*s.graph_n < 2) fail("graph.n must be >= 2");
            if (!(*s.graph_rho > 0.0 && *s.graph_rho <= 1.0)) fail("graph.rho must be in (0,1]");
        }
        if (s.sync_eps <= 0.0) fail("stop.sync_eps must be > 0");
    } else if (s.kind != ScenarioKind::Classify) {
        if (s.state_eps <= 0.0) fail("stop.state_eps must be > 0");
    }
    if (s.delta && !(*s.delta > 0.0)) fail("delta must be > 0");
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& base_dir = "") {
    Scenario s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool kind_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            scenario_set_key(s, key, value, base_dir);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (key == "kind") kind_seen = true;
    }
    if (!kind_seen) throw ParseError("missing required key 'kind'");
    // Kind-dependent defaults.
    if (s.horizon == 0.0) s.horizon = s.is_network() ? 50.0 : 30.0;
    if (s.hold_time == 0.0) s.hold_time = s.is_network() ? 2.0 : 1.0;
    validate_scenario(s);
    return s;
}

inline Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(),
                               std::filesystem::path(path).parent_path().string());
}

/// Serializes the resolved scenario; parse(echo(s)) == s.
inline std::string echo_scenario(const Scenario& s) {
    std::ostringstream out;
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
    auto kvd = [&](const std::string& k, double v) { kv(k, format_double(v)); };
    auto kvvec = [&](const std::string& k, const std::vector<double>& v) {
        std::string joined;
        for (std::size_t i = 0; i < v.size(); ++i)
            joined += (i ? " " : "") + format_double(v[i]);
        kv(k, joined);
    };
    kv("kind", to_string(s.kind));
    if (!s.matrix_a_path.empty()) kv("matrices.A", s.matrix_a_path);
    if (!s.matrix_b_path.empty()) kv("matrices.B", s.matrix_b_path);
    if (!s.graph_path.empty()) kv("graph.file", s.graph_path);
    if (s.graph_n) kv("graph.n", std::to_string(*s.graph_n));
    if (s.graph_rho) kvd("graph.rho", *s.graph_rho);
    if (s.graph_seed) kv("graph.seed", std::to_string(*s.graph_seed));
    if (!s.initial_state.empty()) kvvec("initial_state", s.initial_state);
    if (s.state_seed) kv("initial_state.seed", std::to_string(*s.state_seed));
    kvd("initial_state.box", s.state_box);
    if (!s.initial_gains.empty()) kvvec("initial_gains", s.initial_gains);
    if (s.gains_seed) kv("initial_gains.seed", std::to_string(*s.gains_seed));
    kvd("initial_gains.range", s.gains_range);
    kvvec("gain.c", s.gain_c);
    kvvec("gain.p", s.gain_p);
    if (s.is_network()) {
        kvd("oscillator.w", s.osc_w);
        kvd("oscillator.a", s.osc_a);
        kvd("oscillator.b", s.osc_b);
        kv("oscillator.drive", s.osc_sin_drive ? "sin" : "none");
    }
    kvd("integrator.dt", s.dt);
    kvd("integrator.horizon", s.horizon);
    kv("integrator.output_stride", std::to_string(s.output_stride));
    kvd("stop.state_eps", s.state_eps);
    kvd("stop.sync_eps", s.sync_eps);
    kvd("stop.hold_time", s.hold_time);
    kvd("stop.divergence_cap", s.divergence_cap);
    kv("frozen_gains", s.frozen_gains ? "true" : "false");
    if (s.delta) kvd("delta", *s.delta);
    return out.str();
}

}  // namespace adastab

#endif  // ADASTAB_SCENARIO_HPP
