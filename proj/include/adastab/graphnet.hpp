#ifndef ADASTAB_GRAPHNET_HPP
#define ADASTAB_GRAPHNET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "adastab/common.hpp"
#include "adastab/odesim.hpp"

// Graph construction (incidence / Laplacian / node-weighted edge Laplacian),
// Erdos-Renyi generation, and the coupled Van der Pol oscillator network
// with node-based and edge-based adaptive coupling weights.

namespace adastab {

struct Graph {
    int n_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // (i, j) with i < j, sorted, duplicate-free

    int m_edges() const { return static_cast<int>(edges.size()); }

    void normalize() {
        for (auto& e : edges)
            if (e.first > e.second) std::swap(e.first, e.second);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
};

/// Incidence matrix H (m x n): row e = (i, j) has -1 at i, +1 at j.
/// Orientation is fixed low-index to high-index for determinism.
inline Matrix incidence_matrix(const Graph& g) {
    Matrix H = Matrix::Zero(g.m_edges(), g.n_nodes);
    for (int e = 0; e < g.m_edges(); ++e) {
        H(e, g.edges[e].first) = -1.0;
        H(e, g.edges[e].second) = 1.0;
    }
    return H;
}

/// Graph Laplacian L = H^T H (degree minus adjacency).
inline Matrix laplacian(const Graph& g) {
    const Matrix H = incidence_matrix(g);
    return H.transpose() * H;
}

/// Node-weighted edge Laplacian H K H^T (m x m, symmetric PSD).
inline Matrix edge_laplacian(const Graph& g, const Vector& node_weights) {
    if (node_weights.size() != g.n_nodes)
        throw DimensionMismatch("edge_laplacian: weight length != node count");
    const Matrix H = incidence_matrix(g);
    return H * node_weights.asDiagonal() * H.transpose();
}

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

inline bool is_connected(const Graph& g) {
    if (g.n_nodes <= 1) return true;
    UnionFind uf(g.n_nodes);
    int components = g.n_nodes;
    for (const auto& [i, j] : g.edges)
        if (uf.unite(i, j)) --components;
    return components == 1;
}

}  // namespace detail

struct ErdosRenyiResult {
    Graph graph;
    std::uint64_t seed_used = 0;
};

/// G(n, rho) sampling; retries with seed+1, seed+2, ... until connected.
inline ErdosRenyiResult erdos_renyi(int n, double rho, std::uint64_t seed) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(s);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Graph g;
        g.n_nodes = n;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (unif(rng) < rho) g.edges.emplace_back(i, j);
        if (detail::is_connected(g)) return {std::move(g), s};
    }
    throw GenerationExhausted("erdos_renyi: no connected instance in 1000 attempts");
}

enum class CouplingMode { Node, Edge };

struct CouplingState {
    CouplingMode mode = CouplingMode::Node;
    Vector weights;  // length n_nodes (node mode) or m_edges (edge mode)
    Vector c;
    Vector p;
    bool frozen = false;
};

struct OscillatorParams {
    double w = 1.0;
    double a = 1.0;
    double b = 1.0;
    bool sin_drive = true;  // mu(t) = sin(t); otherwise mu(t) = 0

    double drive(double t) const { return sin_drive ? std::sin(t) : 0.0; }
};

namespace detail {

// states layout: [x_0, y_0, x_1, y_1, ...], length 2n.
inline void network_deriv(const Graph& g, const OscillatorParams& params,
                          CouplingMode mode, const Vector& c, const Vector& p,
                          bool frozen, double t, const Vector& states,
                          const Vector& weights, Vector& dstates, Vector& dweights) {
    const int n = g.n_nodes;
    const int m = g.m_edges();
    Vector sx = Vector::Zero(n), sy = Vector::Zero(n);  // coupling accumulators
    Vector diff_x = Vector::Zero(n), diff_y = Vector::Zero(n);  // raw diffusive sums

    for (int e = 0; e < m; ++e) {
        const auto [i, j] = g.edges[e];
        const double dx = states(2 * j) - states(2 * i);
        const double dy = states(2 * j + 1) - states(2 * i + 1);
        diff_x(i) += dx;
        diff_y(i) += dy;
        diff_x(j) -= dx;
        diff_y(j) -= dy;
        if (mode == CouplingMode::Edge) {
            sx(i) += weights(e) * dx;
            sy(i) += weights(e) * dy;
            sx(j) -= weights(e) * dx;
            sy(j) -= weights(e) * dy;
        }
    }
    if (mode == CouplingMode::Node) {
        sx = weights.cwiseProduct(diff_x);
        sy = weights.cwiseProduct(diff_y);
    }

    dstates.resize(2 * n);
    const double mu_over_w = params.drive(t) / params.w;
    for (int i = 0; i < n; ++i) {
        const double xi = states(2 * i);
        const double yi = states(2 * i + 1);
        dstates(2 * i) = params.w * yi - (params.a / 3.0) * xi * xi * xi - params.b * xi + sx(i);
        dstates(2 * i + 1) = -params.w * xi + mu_over_w + sy(i);
    }

    if (frozen) {
        dweights.setZero(weights.size());
    } else if (mode == CouplingMode::Node) {
        dweights.resize(n);
        for (int i = 0; i < n; ++i)
            dweights(i) = c(i) * pow_abs(std::hypot(diff_x(i), diff_y(i)), p(i));
    } else {
        dweights.resize(m);
        for (int e = 0; e < m; ++e) {
            const auto [i, j] = g.edges[e];
            const double dx = states(2 * j) - states(2 * i);
            const double dy = states(2 * j + 1) - states(2 * i + 1);
            dweights(e) = c(e) * pow_abs(std::hypot(dx, dy), p(e));
        }
    }
}

}  // namespace detail

/// One RK4 step of the coupled oscillator network; weights are rebuilt at
/// every stage evaluation.
inline std::pair<Vector, CouplingState> step_network(const Graph& g,
                                                     const OscillatorParams& params,
                                                     const Vector& states,
                                                     const CouplingState& cs,
                                                     double t, double dt) {
    Vector ds1, dw1, ds2, dw2, ds3, dw3, ds4, dw4;
    auto f = [&](double tt, const Vector& s, const Vector& w, Vector& ds, Vector& dw) {
        detail::network_deriv(g, params, cs.mode, cs.c, cs.p, cs.frozen, tt, s, w, ds, dw);
    };
    f(t, states, cs.weights, ds1, dw1);
    f(t + 0.5 * dt, states + 0.5 * dt * ds1, cs.weights + 0.5 * dt * dw1, ds2, dw2);
    f(t + 0.5 * dt, states + 0.5 * dt * ds2, cs.weights + 0.5 * dt * dw2, ds3, dw3);
    f(t + dt, states + dt * ds3, cs.weights + dt * dw3, ds4, dw4);

    Vector sn = states + (dt / 6.0) * (ds1 + 2.0 * ds2 + 2.0 * ds3 + ds4);
    CouplingState cn = cs;
    cn.weights = cs.weights + (dt / 6.0) * (dw1 + 2.0 * dw2 + 2.0 * dw3 + dw4);
    if (!all_finite(sn) || !all_finite(cn.weights))
        throw NonFiniteError("step_network: non-finite state or weight");
    return {std::move(sn), std::move(cn)};
}

struct SyncReport {
    std::vector<double> sync_error_history;  // one entry per recorded sample
    Vector final_weights;
    bool synchronized = false;
    std::optional<double> settle_time;
    bool diverged = false;
};

struct NetworkSimOptions {
    double dt = 1e-3;
    double horizon = 50.0;
    int output_stride = 10;
    double sync_eps = 1e-4;
    double hold_time = 2.0;
    double divergence_cap = 1e12;
};

/// Max deviation of any node state from the node average.
inline double sync_error(const Vector& states) {
    const auto n = states.size() / 2;
    double mx = 0.0, my = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        mx += states(2 * i);
        my += states(2 * i + 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        worst = std::max(worst, std::hypot(states(2 * i) - mx, states(2 * i + 1) - my));
    return worst;
}

struct NetworkSimResult {
    Trajectory trajectory;  // states interleaved [x_i, y_i], gains = coupling weights
    SyncReport report;
};

inline NetworkSimResult simulate_network(const Graph& g, const OscillatorParams& params,
                                         Vector states, CouplingState cs,
                                         const NetworkSimOptions& opt) {
    NetworkSimResult res;
    Trajectory& traj = res.trajectory;
    SyncReport& rep = res.report;
    traj.dt = opt.dt * opt.output_stride;

    const long n_steps = static_cast<long>(std::llround(opt.horizon / opt.dt));
    double below_since = -1.0;
    double t = 0.0;

    auto record = [&](double tt) {
        traj.times.push_back(tt);
        traj.states.push_back(states);
        traj.gains.push_back(cs.weights);
        rep.sync_error_history.push_back(sync_error(states));
    };
    record(0.0);

    for (long s = 1; s <= n_steps; ++s) {
        try {
            std::tie(states, cs) = step_network(g, params, states, cs, t, opt.dt);
        } catch (const NonFiniteError&) {
            traj.diverged = true;
            break;
        }
        t = s * opt.dt;
        if (s % opt.output_stride == 0) record(t);
        if (states.lpNorm<Eigen::Infinity>() > opt.divergence_cap) {
            traj.diverged = true;
            break;
        }
        const double err = sync_error(states);
        if (err < opt.sync_eps) {
            if (below_since < 0.0) below_since = t;
            if (t - below_since >= opt.hold_time) {
                rep.synchronized = true;
                rep.settle_time = below_since;
                break;
            }
        } else {
            below_since = -1.0;
        }
    }

    rep.diverged = traj.diverged;
    rep.final_weights = cs.weights;
    return res;
}

struct QuadCheckResult {
    bool holds = true;
    double worst_margin = std::numeric_limits<double>::infinity();
};

/// Samples the QUAD(Delta, epsilon) inequality
///   (u-v)'[f(u)-f(v)] - (u-v)' Delta (u-v) <= -epsilon (u-v)'(u-v)
/// for an arbitrary planar drift on random pairs in [-box, box]^2 squared.
/// Evidence only, not a proof.
template <typename Drift>
QuadCheckResult quad_check_sampled_drift(Drift&& drift, const Eigen::Vector2d& delta_diag,
                                         double epsilon, int n_samples, double box,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-box, box);
    QuadCheckResult res;
    for (int s = 0; s < n_samples; ++s) {
        const Eigen::Vector2d u(unif(rng), unif(rng));
        const Eigen::Vector2d v(unif(rng), unif(rng));
        const Eigen::Vector2d d = u - v;
        const Eigen::Vector2d df = drift(u) - drift(v);
        const double lhs = d.dot(df) - d.dot(delta_diag.cwiseProduct(d));
        const double margin = -epsilon * d.squaredNorm() - lhs;
        res.worst_margin = std::min(res.worst_margin, margin);
        if (margin < 0.0) res.holds = false;
    }
    return res;
}

/// QUAD sampling for the Van der Pol drift at t = 0.
inline QuadCheckResult quad_check_sampled(const OscillatorParams& params,
                                          const Eigen::Vector2d& delta_diag,
                                          double epsilon, int n_samples, double box,
                                          std::uint64_t seed) {
    auto drift = [&](const Eigen::Vector2d& s) {
        return Eigen::Vector2d(
            params.w * s(1) - (params.a / 3.0) * s(0) * s(0) * s(0) - params.b * s(0),
            -params.w * s(0) + params.drive(0.0) / params.w);
    };
    return quad_check_sampled_drift(drift, delta_diag, epsilon, n_samples, box, seed);
}

}  // namespace adastab

#endif  // ADASTAB_GRAPHNET_HPP
