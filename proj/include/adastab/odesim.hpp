#ifndef ADASTAB_ODESIM_HPP
#define ADASTAB_ODESIM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "adastab/common.hpp"
#include "adastab/matana.hpp"

// Simulation of the adaptively stabilized time-varying systems
//   System I:  dx/dt = (A - K(t) B) x,   System II:  dx/dt = (A - B K(t)) x,
// with the per-channel gain law dk_i/dt = c_i |x_i|^{p_i}, plus the
// scalar-gain baseline dk/dt = c ||x||_2^p.

namespace adastab {

enum class SystemKind { SystemI, SystemII, ScalarGain };

struct GainState {
    Vector k;   // current gains (length n, or 1 for ScalarGain)
    Vector c;   // update rates, c_i > 0
    Vector p;   // update exponents, p_i >= 1
    Vector k0;  // initial gains, k_i(0) > 0
    bool frozen = false;  // freeze mode: gains held constant (dk = 0)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> gains;
    double dt = 0.0;  // spacing of the recorded samples
    bool diverged = false;
};

struct ConvergenceReport {
    bool converged = false;
    std::optional<double> settle_time;
    Vector final_gains;
    double max_state_norm = 0.0;
    double gain_tail_growth = 0.0;  // total gain increase over the last 10% of the run
    bool diverged = false;
};

struct SimOptions {
    double dt = 1e-3;
    double horizon = 30.0;
    int output_stride = 10;
    double state_eps = 1e-8;
    double hold_time = 1.0;
    double divergence_cap = 1e12;
};

namespace detail {

inline void system_deriv(SystemKind kind, const Matrix& A, const Matrix& B,
                         const GainState& g, const Vector& x, const Vector& k,
                         Vector& dx, Vector& dk) {
    switch (kind) {
        case SystemKind::SystemI:
            dx = A * x - k.cwiseProduct(B * x);
            break;
        case SystemKind::SystemII:
            dx = A * x - B * k.cwiseProduct(x);
            break;
        case SystemKind::ScalarGain:
            dx = A * x - k(0) * (B * x);
            break;
    }
    if (g.frozen) {
        dk.setZero(k.size());
    } else if (kind == SystemKind::ScalarGain) {
        dk.resize(1);
        dk(0) = g.c(0) * pow_abs(x.norm(), g.p(0));
    } else {
        dk.resize(k.size());
        for (Eigen::Index i = 0; i < k.size(); ++i)
            dk(i) = g.c(i) * pow_abs(x(i), g.p(i));
    }
}

}  // namespace detail

/// One classical RK4 step of the coupled state/gain ODE. The gain matrix is
/// rebuilt from the stage gain values at every derivative evaluation.
inline std::pair<Vector, GainState> step_system(SystemKind kind, const Matrix& A,
                                                const Matrix& B, const Vector& x,
                                                const GainState& g, double dt) {
    Vector dx1, dk1, dx2, dk2, dx3, dk3, dx4, dk4;
    detail::system_deriv(kind, A, B, g, x, g.k, dx1, dk1);
    detail::system_deriv(kind, A, B, g, x + 0.5 * dt * dx1, g.k + 0.5 * dt * dk1, dx2, dk2);
    detail::system_deriv(kind, A, B, g, x + 0.5 * dt * dx2, g.k + 0.5 * dt * dk2, dx3, dk3);
    detail::system_deriv(kind, A, B, g, x + dt * dx3, g.k + dt * dk3, dx4, dk4);

    Vector xn = x + (dt / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
    GainState gn = g;
    gn.k = g.k + (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);
    if (!all_finite(xn) || !all_finite(gn.k))
        throw NonFiniteError("step_system: non-finite state or gain");
    return {std::move(xn), std::move(gn)};
}

struct SimResult {
    Trajectory trajectory;
    ConvergenceReport report;
};

/// Fixed-step RK4 run, recording every output_stride-th step. Terminates
/// early on a sustained small state norm or on divergence.
inline SimResult simulate_system(SystemKind kind, const Matrix& A, const Matrix& B,
                                 Vector x, GainState g, const SimOptions& opt) {
    SimResult res;
    Trajectory& traj = res.trajectory;
    ConvergenceReport& rep = res.report;
    traj.dt = opt.dt * opt.output_stride;

    const long n_steps = static_cast<long>(std::llround(opt.horizon / opt.dt));
    double below_since = -1.0;
    double t = 0.0;

    auto record = [&](double tt) {
        traj.times.push_back(tt);
        traj.states.push_back(x);
        traj.gains.push_back(g.k);
    };
    record(0.0);
    rep.max_state_norm = x.lpNorm<Eigen::Infinity>();

    for (long s = 1; s <= n_steps; ++s) {
        try {
            std::tie(x, g) = step_system(kind, A, B, x, g, opt.dt);
        } catch (const NonFiniteError&) {
            traj.diverged = true;
            break;
        }
        t = s * opt.dt;
        const double nrm = x.lpNorm<Eigen::Infinity>();
        rep.max_state_norm = std::max(rep.max_state_norm, nrm);
        if (s % opt.output_stride == 0) record(t);
        if (nrm > opt.divergence_cap) {
            traj.diverged = true;
            break;
        }
        if (nrm < opt.state_eps) {
            if (below_since < 0.0) below_since = t;
            if (t - below_since >= opt.hold_time) {
                rep.converged = true;
                rep.settle_time = below_since;
                break;
            }
        } else {
            below_since = -1.0;
        }
    }

    rep.diverged = traj.diverged;
    rep.final_gains = g.k;
    // Tail growth is measured over the recorded samples.
    if (traj.gains.size() >= 2) {
        const std::size_t i90 = (traj.gains.size() - 1) * 9 / 10;
        rep.gain_tail_growth = (traj.gains.back() - traj.gains[i90]).sum();
    }
    return res;
}

enum class ScalingSide { Row, Column };

/// Threshold gains above which freezing stabilizes the system with decay
/// rate at least delta. Requires B to be an H-matrix with positive diagonal.
inline std::optional<Vector> estimate_threshold_gains(const Matrix& A, const Matrix& B,
                                                      double delta, ScalingSide side,
                                                      double tol = kDefaultTol) {
    const auto n = B.rows();
    if (!has_positive_diagonal(B, tol)) return std::nullopt;
    const auto d = (side == ScalingSide::Row) ? find_row_scaling(B, tol)
                                              : find_column_scaling(B, tol);
    if (!d) return std::nullopt;
    const Matrix D = d->asDiagonal();
    const Matrix Dinv = d->cwiseInverse().asDiagonal();
    Matrix As, Bs;
    if (side == ScalingSide::Row) {
        As = Dinv * A * D;
        Bs = Dinv * B * D;
    } else {
        As = D * A * Dinv;
        Bs = D * B * Dinv;
    }
    Vector kbar(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double a_off = 0.0, b_off = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            if (side == ScalingSide::Row) {
                a_off += std::abs(As(i, j));
                b_off += std::abs(Bs(i, j));
            } else {
                a_off += std::abs(As(j, i));
                b_off += std::abs(Bs(j, i));
            }
        }
        const double denom = Bs(i, i) - b_off;  // > 0 by the scaling construction
        kbar(i) = std::max(0.0, (a_off + As(i, i) + delta) / denom);
    }
    return kbar;
}

enum class MeasureNorm { One, Inf };

inline double vector_norm(const Vector& v, MeasureNorm norm) {
    return norm == MeasureNorm::One ? v.lpNorm<1>() : v.lpNorm<Eigen::Infinity>();
}

inline double matrix_measure(const Matrix& A, MeasureNorm norm) {
    return norm == MeasureNorm::One ? measure_one_norm(A) : measure_inf_norm(A);
}

/// Checks the Coppel sandwich
///   ||x(t0)||' e^{-int mu(-A)} <= ||x(t)||' <= ||x(t0)||' e^{int mu(A)}
/// along the recorded trajectory, with trapezoid-rule integrals and
/// relative slack tol on both sides.
inline bool verify_coppel(const Trajectory& traj,
                          const std::function<Matrix(double)>& matrix_of_t,
                          MeasureNorm norm, double tol) {
    if (traj.times.empty()) throw InsufficientData("verify_coppel: empty trajectory");
    const auto n = traj.states.front().size();
    Matrix A0 = matrix_of_t(traj.times.front());
    if (A0.rows() != n || A0.cols() != n)
        throw DimensionMismatch("verify_coppel: matrix/state dimension mismatch");

    const double norm0 = vector_norm(traj.states.front(), norm);
    double int_mu = 0.0, int_mu_neg = 0.0;
    double mu_prev = matrix_measure(A0, norm);
    double mu_neg_prev = matrix_measure(-A0, norm);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const Matrix At = matrix_of_t(traj.times[i]);
        const double mu = matrix_measure(At, norm);
        const double mu_neg = matrix_measure(-At, norm);
        const double h = traj.times[i] - traj.times[i - 1];
        int_mu += 0.5 * h * (mu_prev + mu);
        int_mu_neg += 0.5 * h * (mu_neg_prev + mu_neg);
        mu_prev = mu;
        mu_neg_prev = mu_neg;

        const double upper = norm0 * std::exp(int_mu);
        const double lower = norm0 * std::exp(-int_mu_neg);
        const double nrm = vector_norm(traj.states[i], norm);
        if (nrm > upper * (1.0 + tol)) return false;
        if (nrm < lower * (1.0 - tol)) return false;
    }
    return true;
}

/// Least-squares slope of log ||x(t)||_inf over [t_start, end].
inline double exponential_rate_fit(const Trajectory& traj, double t_start) {
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] < t_start) continue;
        const double nrm = traj.states[i].lpNorm<Eigen::Infinity>();
        if (nrm <= 0.0) continue;
        ts.push_back(traj.times[i]);
        ys.push_back(std::log(nrm));
    }
    if (ts.size() < 10)
        throw InsufficientData("exponential_rate_fit: fewer than 10 usable samples");
    const double n = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace adastab

#endif  // ADASTAB_ODESIM_HPP
