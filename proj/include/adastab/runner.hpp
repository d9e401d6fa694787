#ifndef ADASTAB_RUNNER_HPP
#define ADASTAB_RUNNER_HPP

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "adastab/fileio.hpp"
#include "adastab/graphnet.hpp"
#include "adastab/matana.hpp"
#include "adastab/odesim.hpp"
#include "adastab/scenario.hpp"

namespace adastab {

// CLI exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitHypothesisFailure = 3;
inline constexpr int kExitIoOrParse = 4;

struct HypothesisFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunArtifacts {
    std::string trajectory_path;
    std::string report_path;
    std::string scenario_path;
    int exit_code = kExitOk;
    nlohmann::json report;
};

namespace detail {

inline std::vector<double> broadcast(const std::vector<double>& v, Eigen::Index n,
                                     const std::string& what) {
    if (v.size() == static_cast<std::size_t>(n)) return v;
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    throw ValidationError(what + ": expected length 1 or " + std::to_string(n) +
                          ", got " + std::to_string(v.size()));
}

inline Vector to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector seeded_uniform(std::uint64_t seed, Eigen::Index n, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = unif(rng);
    return v;
}

/// Uniform in (0, range]; weights must be strictly positive.
inline Vector seeded_positive(std::uint64_t seed, Eigen::Index n, double range) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = range * (1.0 - unif(rng));
    return v;
}

inline nlohmann::json vec_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail

inline nlohmann::json classification_json(const Classification& c) {
    nlohmann::json j;
    j["n"] = c.n;
    j["is_m_matrix"] = c.is_m_matrix;
    j["is_h_matrix"] = c.is_h_matrix;
    j["has_positive_diagonal"] = c.has_positive_diagonal;
    j["row_scaling"] = c.row_scaling ? detail::vec_json(*c.row_scaling) : nlohmann::json();
    j["column_scaling"] =
        c.column_scaling ? detail::vec_json(*c.column_scaling) : nlohmann::json();
    auto evs = nlohmann::json::array();
    for (const auto& ev : c.eigenvalues_of_comparison)
        evs.push_back({ev.real(), ev.imag()});
    j["eigenvalues_of_comparison"] = evs;
    return j;
}

/// Classification report for the scenario's B matrix.
inline nlohmann::json classify_scenario(const Scenario& s) {
    const Matrix B = read_matrix_file(s.matrix_b_path);
    return classification_json(classify(B));
}

namespace detail {

inline SimResult run_system_scenario(const Scenario& s, nlohmann::json& report) {
    const Matrix B = read_matrix_file(s.matrix_b_path);
    const auto n = B.rows();
    const Matrix A = s.matrix_a_path.empty() ? Matrix::Zero(n, n).eval()
                                             : read_matrix_file(s.matrix_a_path);
    if (A.rows() != n) throw ValidationError("matrices A and B must have equal dimension");

    Vector x0 = s.initial_state.empty()
                    ? seeded_uniform(*s.state_seed, n, -s.state_box, s.state_box)
                    : to_eigen(s.initial_state);
    if (x0.size() != n) throw ValidationError("initial_state length mismatch");

    const bool scalar = s.kind == ScenarioKind::ScalarGain;
    const Eigen::Index nk = scalar ? 1 : n;
    GainState g;
    g.k = s.initial_gains.empty() ? seeded_positive(*s.gains_seed, nk, s.gains_range)
                                  : to_eigen(s.initial_gains);
    if (g.k.size() != nk) throw ValidationError("initial_gains length mismatch");
    g.k0 = g.k;
    g.c = to_eigen(broadcast(s.gain_c, nk, "gain.c"));
    g.p = to_eigen(broadcast(s.gain_p, nk, "gain.p"));
    g.frozen = s.frozen_gains;

    const SystemKind kind = scalar ? SystemKind::ScalarGain
                            : s.kind == ScenarioKind::System1 ? SystemKind::SystemI
                                                              : SystemKind::SystemII;
    SimOptions opt;
    opt.dt = s.dt;
    opt.horizon = s.horizon;
    opt.output_stride = s.output_stride;
    opt.state_eps = s.state_eps;
    opt.hold_time = s.hold_time;
    opt.divergence_cap = s.divergence_cap;

    if (s.delta) {
        const auto side = kind == SystemKind::SystemII ? ScalingSide::Column : ScalingSide::Row;
        const auto kbar = estimate_threshold_gains(A, B, *s.delta, side);
        if (!kbar)
            throw HypothesisFailure("threshold estimation requires B to be an H-matrix "
                                    "with positive diagonal");
        report["threshold_gains"] = vec_json(*kbar);
    }

    auto res = simulate_system(kind, A, B, x0, g, opt);
    const auto& rep = res.report;
    report["kind"] = to_string(s.kind);
    report["converged"] = rep.converged;
    report["settle_time"] = rep.settle_time ? nlohmann::json(*rep.settle_time) : nlohmann::json();
    report["final_gains"] = vec_json(rep.final_gains);
    report["max_state_norm"] = rep.max_state_norm;
    report["gain_tail_growth"] = rep.gain_tail_growth;
    report["diverged"] = rep.diverged;
    return res;
}

inline NetworkSimResult run_network_scenario(Scenario& s, nlohmann::json& report) {
    Graph g;
    if (!s.graph_path.empty()) {
        g = read_graph_file(s.graph_path);
    } else {
        auto er = erdos_renyi(*s.graph_n, *s.graph_rho, *s.graph_seed);
        g = std::move(er.graph);
        s.graph_seed = er.seed_used;  // materialized seed for the echo
    }
    const int n = g.n_nodes;

    Vector states = s.initial_state.empty()
                        ? seeded_uniform(s.state_seed.value_or(1), 2 * n, -s.state_box, s.state_box)
                        : to_eigen(s.initial_state);
    if (states.size() != 2 * n)
        throw ValidationError("initial_state must have length 2*n_nodes");

    CouplingState cs;
    cs.mode = s.kind == ScenarioKind::NetworkNode ? CouplingMode::Node : CouplingMode::Edge;
    const Eigen::Index nw = cs.mode == CouplingMode::Node ? n : g.m_edges();
    cs.weights = s.initial_gains.empty()
                     ? seeded_positive(s.gains_seed.value_or(2), nw, s.gains_range)
                     : to_eigen(s.initial_gains);
    if (cs.weights.size() != nw) throw ValidationError("initial_gains length mismatch");
    cs.c = to_eigen(broadcast(s.gain_c, nw, "gain.c"));
    cs.p = to_eigen(broadcast(s.gain_p, nw, "gain.p"));
    cs.frozen = s.frozen_gains;

    OscillatorParams params;
    params.w = s.osc_w;
    params.a = s.osc_a;
    params.b = s.osc_b;
    params.sin_drive = s.osc_sin_drive;

    NetworkSimOptions opt;
    opt.dt = s.dt;
    opt.horizon = s.horizon;
    opt.output_stride = s.output_stride;
    opt.sync_eps = s.sync_eps;
    opt.hold_time = s.hold_time;
    opt.divergence_cap = s.divergence_cap;

    auto res = simulate_network(g, params, states, cs, opt);
    const auto& rep = res.report;
    report["kind"] = to_string(s.kind);
    report["n_nodes"] = n;
    report["m_edges"] = g.m_edges();
    report["synchronized"] = rep.synchronized;
    report["settle_time"] = rep.settle_time ? nlohmann::json(*rep.settle_time) : nlohmann::json();
    report["final_weights"] = vec_json(rep.final_weights);
    report["final_sync_error"] =
        rep.sync_error_history.empty() ? 0.0 : rep.sync_error_history.back();
    report["diverged"] = rep.diverged;
    return res;
}

}  // namespace detail

/// Runs one scenario, writing trajectory CSV, report JSON, and the resolved
/// scenario echo into out_dir.
inline RunArtifacts run_scenario(const Scenario& scenario, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunArtifacts art;
    art.trajectory_path = (fs::path(out_dir) / "trajectory.csv").string();
    art.report_path = (fs::path(out_dir) / "report.json").string();
    art.scenario_path = (fs::path(out_dir) / "scenario.scn").string();

    Scenario s = scenario;
    nlohmann::json report;
    bool diverged = false;
    try {
        if (s.kind == ScenarioKind::Classify) {
            report = classify_scenario(s);
            art.trajectory_path.clear();
        } else if (s.is_network()) {
            auto res = detail::run_network_scenario(s, report);
            write_network_csv(art.trajectory_path, res.trajectory, res.report);
            diverged = res.report.diverged;
        } else {
            auto res = detail::run_system_scenario(s, report);
            write_trajectory_csv(art.trajectory_path, res.trajectory);
            diverged = res.report.diverged;
        }
    } catch (const HypothesisFailure& e) {
        report["error"] = e.what();
        art.exit_code = kExitHypothesisFailure;
    }

    std::ofstream rf(art.report_path);
    rf << report.dump(2) << "\n";
    std::ofstream sf(art.scenario_path);
    sf << echo_scenario(s);
    art.report = report;
    if (art.exit_code == kExitOk && diverged) art.exit_code = kExitDivergence;
    return art;
}

inline int default_worker_count() {
    if (const char* env = std::getenv("ADASTAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

struct SweepResult {
    std::vector<RunArtifacts> runs;
    std::string summary_path;
};

/// One run per value of the swept parameter; per-run failures are recorded
/// in the summary and the sweep continues.
inline SweepResult sweep_scenario(const Scenario& base, const std::string& parameter,
                                  const std::vector<std::string>& values,
                                  const std::string& out_dir, int workers = 0) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    if (workers <= 0) workers = default_worker_count();

    SweepResult result;
    result.runs.resize(values.size());
    result.summary_path = (fs::path(out_dir) / "summary.csv").string();
    std::vector<std::string> errors(values.size());

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
            char name[32];
            std::snprintf(name, sizeof(name), "run_%03zu", i);
            try {
                Scenario s = base;
                scenario_set_key(s, parameter, values[i]);
                validate_scenario(s);
                result.runs[i] = run_scenario(s, (fs::path(out_dir) / name).string());
            } catch (const std::exception& e) {
                errors[i] = e.what();
                result.runs[i].exit_code = kExitIoOrParse;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(values.size())); ++w)
        pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::ofstream out(result.summary_path);
    out << "value,settle_time,final_gain_max,ok\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& r = result.runs[i];
        out << values[i] << ",";
        if (!errors[i].empty()) {
            out << ",,error\n";
            continue;
        }
        const auto& rep = r.report;
        if (rep.contains("settle_time") && !rep["settle_time"].is_null())
            out << format_double(rep["settle_time"].get<double>());
        out << ",";
        double kmax = 0.0;
        const char* gains_key = rep.contains("final_weights") ? "final_weights" : "final_gains";
        if (rep.contains(gains_key))
            for (double k : rep[gains_key]) kmax = std::max(kmax, k);
        out << format_double(kmax) << ",";
        const bool ok = r.exit_code == kExitOk &&
                        ((rep.contains("converged") && rep["converged"].get<bool>()) ||
                         (rep.contains("synchronized") && rep["synchronized"].get<bool>()));
        out << (ok ? "true" : "false") << "\n";
    }
    return result;
}

}  // namespace adastab

#endif  // ADASTAB_RUNNER_HPP
