#ifndef ADASTAB_COMMON_HPP
#define ADASTAB_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace adastab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) {
    return v.allFinite();
}

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

/// |x|^p with the x = 0 branch returning 0 (p need not be an integer).
inline double pow_abs(double x, double p) {
    if (x == 0.0) return 0.0;
    return std::pow(std::abs(x), p);
}

}  // namespace adastab

#endif  // ADASTAB_COMMON_HPP
