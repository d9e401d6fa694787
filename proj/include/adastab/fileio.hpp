#ifndef ADASTAB_FILEIO_HPP
#define ADASTAB_FILEIO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "adastab/common.hpp"
#include "adastab/graphnet.hpp"
#include "adastab/odesim.hpp"

namespace adastab {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full double precision for CSV emission (round-trips exactly).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Matrix file: first line n, then n lines of n space-separated decimals.

inline Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    int n = 0;
    if (!(in >> n) || n < 1) throw IoError("bad matrix header in " + path);
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(in >> A(i, j))) throw IoError("truncated matrix in " + path);
    if (!all_finite(A)) throw IoError("non-finite entries in " + path);
    return A;
}

inline void write_matrix_file(const std::string& path, const Matrix& A) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write matrix file: " + path);
    out << A.rows() << "\n";
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out << (j ? " " : "") << format_double(A(i, j));
        out << "\n";
    }
}

// Graph file: first line "n m", then m lines "i j".

inline Graph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph file: " + path);
    Graph g;
    int m = 0;
    if (!(in >> g.n_nodes >> m) || g.n_nodes < 1 || m < 0)
        throw IoError("bad graph header in " + path);
    for (int e = 0; e < m; ++e) {
        int i, j;
        if (!(in >> i >> j)) throw IoError("truncated edge list in " + path);
        if (i < 0 || j < 0 || i >= g.n_nodes || j >= g.n_nodes || i == j)
            throw IoError("invalid edge in " + path);
        g.edges.emplace_back(i, j);
    }
    g.normalize();
    if (static_cast<int>(g.edges.size()) != m)
        throw IoError("duplicate edges in " + path);
    return g;
}

inline void write_graph_file(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write graph file: " + path);
    out << g.n_nodes << " " << g.m_edges() << "\n";
    for (const auto& [i, j] : g.edges) out << i << " " << j << "\n";
}

/// System trajectory CSV: header t,x1..xn,k1..kn.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trajectory file: " + path);
    const auto n = traj.states.empty() ? 0 : traj.states.front().size();
    const auto nk = traj.gains.empty() ? 0 : traj.gains.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
    for (Eigen::Index i = 1; i <= nk; ++i) out << ",k" << i;
    out << "\n";
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << format_double(traj.times[r]);
        for (Eigen::Index i = 0; i < n; ++i) out << "," << format_double(traj.states[r](i));
        for (Eigen::Index i = 0; i < nk; ++i) out << "," << format_double(traj.gains[r](i));
        out << "\n";
    }
}

/// Network trajectory CSV: t,e_sync,x_1,y_1,...,x_n,y_n,k_1,...
inline void write_network_csv(const std::string& path, const Trajectory& traj,
                              const SyncReport& rep) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trajectory file: " + path);
    const auto n2 = traj.states.empty() ? 0 : traj.states.front().size();
    const auto nk = traj.gains.empty() ? 0 : traj.gains.front().size();
    out << "t,e_sync";
    for (Eigen::Index i = 1; i <= n2 / 2; ++i) out << ",x_" << i << ",y_" << i;
    for (Eigen::Index i = 1; i <= nk; ++i) out << ",k_" << i;
    out << "\n";
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << format_double(traj.times[r]) << "," << format_double(rep.sync_error_history[r]);
        for (Eigen::Index i = 0; i < n2; ++i) out << "," << format_double(traj.states[r](i));
        for (Eigen::Index i = 0; i < nk; ++i) out << "," << format_double(traj.gains[r](i));
        out << "\n";
    }
}

}  // namespace adastab

#endif  // ADASTAB_FILEIO_HPP
