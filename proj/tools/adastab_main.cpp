// Scenario-driven front end: matrix classification, System I/II and network
// simulations, parameter sweeps, and the built-in invariant self-test.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adastab/graphnet.hpp"
#include "adastab/matana.hpp"
#include "adastab/odesim.hpp"
#include "adastab/runner.hpp"
#include "adastab/scenario.hpp"

namespace {

using namespace adastab;

int cmd_classify(const std::string& scenario_path) {
    const Scenario s = parse_scenario(scenario_path);
    std::cout << classify_scenario(s).dump(2) << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
    const Scenario s = parse_scenario(scenario_path);
    const RunArtifacts art = run_scenario(s, out_dir);
    std::cout << art.report.dump(2) << "\n";
    return art.exit_code;
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::string& values_csv, const std::string& out_dir, int workers) {
    const Scenario base = parse_scenario(scenario_path);
    const auto values = split_csv(values_csv);
    const auto res = sweep_scenario(base, param, values, out_dir, workers);
    std::cout << "summary: " << res.summary_path << "\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        std::cout << "  " << param << " = " << values[i]
                  << " -> exit " << res.runs[i].exit_code << "\n";
    return kExitOk;
}

// Quick invariant suites; the full versions live in the test suite.
int cmd_selftest() {
    int failures = 0;
    auto check = [&](bool ok, const std::string& name) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        if (!ok) ++failures;
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // H-matrix equivalence on constructed instances.
    bool equiv_ok = true;
    for (int trial = 0; trial < 40 && equiv_ok; ++trial) {
        const int n = 2 + static_cast<int>(unif(rng) * 5);
        Matrix N(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) N(i, j) = i == j ? 0.0 : unif(rng);
        double rho_max = 0.0;
        for (const auto& ev : eigenvalues(N)) rho_max = std::max(rho_max, std::abs(ev));
        const bool make_h = trial % 2 == 0;
        Matrix A = (make_h ? rho_max + 0.5 : std::max(0.1, rho_max - 0.4)) *
                       Matrix::Identity(n, n) - N;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && unif(rng) < 0.5) A(i, j) = -A(i, j);
        const bool h = is_h_matrix(A);
        const auto dr = find_row_scaling(A);
        const auto dc = find_column_scaling(A);
        if (h != make_h || dr.has_value() != h || dc.has_value() != h) equiv_ok = false;
        if (dr && !is_generalized_row_dominant(A, *dr)) equiv_ok = false;
    }
    check(equiv_ok, "H-matrix equivalence suite");

    // Laplacian decomposition L = H^T H on a random connected graph.
    auto er = erdos_renyi(12, 0.3, 5);
    const Matrix H = incidence_matrix(er.graph);
    check((laplacian(er.graph) - H.transpose() * H).cwiseAbs().maxCoeff() == 0.0,
          "Laplacian L = H^T H");

    // Gain monotonicity on a short adaptive run.
    Matrix B(2, 2);
    B << 3, 1, -1, 2;
    GainState g;
    g.k = Vector::Constant(2, 1.0);
    g.k0 = g.k;
    g.c = Vector::Constant(2, 1.0);
    g.p = Vector::Constant(2, 1.5);
    SimOptions opt;
    opt.horizon = 10.0;  // settles near t = 6
    auto sim = simulate_system(SystemKind::SystemI, Matrix::Zero(2, 2), B,
                               Vector::Constant(2, 1.0), g, opt);
    bool mono = true;
    for (std::size_t i = 1; i < sim.trajectory.gains.size(); ++i)
        if (((sim.trajectory.gains[i] - sim.trajectory.gains[i - 1]).array() < 0.0).any())
            mono = false;
    check(mono, "adaptive gain monotonicity");
    check(sim.report.converged, "small H-matrix scenario converges");

    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adastab: H-matrix analysis and distributed adaptive stabilization runs"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", param, values_csv;
    int workers = 0;

    auto* classify = app.add_subcommand("classify", "Classify the scenario's B matrix");
    classify->add_option("scenario", scenario_path, "Scenario file")->required();

    auto* simulate = app.add_subcommand("simulate", "Run one scenario");
    simulate->add_option("scenario", scenario_path, "Scenario file")->required();
    simulate->add_option("--out", out_dir, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter");
    sweep->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep->add_option("--param", param, "Dotted field name")->required();
    sweep->add_option("--values", values_csv, "Comma-separated values")->required();
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--workers", workers, "Parallel workers (default: ADASTAB_WORKERS or 1)");

    auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify->parsed()) return cmd_classify(scenario_path);
        if (simulate->parsed()) return cmd_simulate(scenario_path, out_dir);
        if (sweep->parsed()) return cmd_sweep(scenario_path, param, values_csv, out_dir, workers);
        if (selftest->parsed()) return cmd_selftest();
    } catch (const adastab::HypothesisFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return adastab::kExitHypothesisFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return adastab::kExitIoOrParse;
    }
    return 0;
}
