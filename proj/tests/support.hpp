#ifndef ADASTAB_TESTS_SUPPORT_HPP
#define ADASTAB_TESTS_SUPPORT_HPP

// Shared fixtures for the test suites: the benchmark matrices and an
// independent reference RK4 integrator kept deliberately separate from the
// library's stepping code.

#include <functional>
#include <vector>

#include "adastab/common.hpp"

namespace testsupport {

using adastab::Matrix;
using adastab::Vector;

inline Matrix mat3x3_a() {
    Matrix A(3, 3);
    A << 1, 4, 2,
         5, -2, 1,
         6, 3, -4;
    return A;
}

inline Matrix mat3x3_b() {
    Matrix B(3, 3);
    B << 7, 4, -2,
         -4, 6, 3,
         2, -2, 5;
    return B;
}

inline Matrix mat2x2_b() {
    Matrix B(2, 2);
    B << 2, 3,
         -1, -1;
    return B;
}

inline Matrix mat5x5_a() {
    Matrix A(5, 5);
    A << 1.9790, 0.5275, 1.7078, 0.8509, 0.5712,
         1.2670, 1.8672, 1.3512, 1.2259, 1.2712,
         1.4203, 1.9343, 1.2113, 0.7842, 0.3338,
         0.7864, 1.8849, 0.2922, 1.1515, 0.5984,
         0.2575, 1.9451, 0.2046, 1.7284, 0.9200;
    return A;
}

inline Matrix mat5x5_b() {
    Matrix B(5, 5);
    B << 1.1837, 0.1407, 0.2400, -0.4138, 0.2894,
         -0.3679, 1.3288, -0.2652, -0.1336, -0.1323,
         0.2227, 0.1538, 0.7350, -0.1308, -0.2940,
         -0.3896, 0.2491, 0.4706, 1.1850, -0.4133,
         -0.3825, 0.0832, 0.3669, 0.0979, 1.1719;
    return B;
}

/// Plain reference RK4 step on a generic y' = f(t, y); the independent
/// oracle for the library's stage arithmetic.
inline Vector reference_rk4_step(const std::function<Vector(double, const Vector&)>& f,
                                 double t, const Vector& y, double dt) {
    const Vector k1 = f(t, y);
    const Vector k2 = f(t + dt / 2, y + (dt / 2) * k1);
    const Vector k3 = f(t + dt / 2, y + (dt / 2) * k2);
    const Vector k4 = f(t + dt, y + dt * k3);
    return y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

inline Vector reference_rk4_integrate(const std::function<Vector(double, const Vector&)>& f,
                                      double t0, Vector y, double t1, double dt) {
    double t = t0;
    while (t < t1 - dt / 2) {
        y = reference_rk4_step(f, t, y, dt);
        t += dt;
    }
    return y;
}

}  // namespace testsupport

#endif
