/**
 * @file gauss.hpp
 * @brief Quadratic Gauss sums, the chirp phase sum, the Fresnel integral and
 *        the contour integrals used to evaluate them.
 */
#pragma once

#include "qexp/core.hpp"
#include "qexp/special.hpp"

namespace qexp {

struct GaussSumResult {
    int N = 0;
    cplx direct;    ///< sum_{p<N} e^{i pi p^2 / N}
    cplx closed;    ///< sqrt(N) e^{i pi / 4}
    double residual = 0.0;
};

/// DomainError unless N is even and >= 2.
GaussSumResult gauss_sum(int N);

struct ChirpSumResult {
    cplx direct;  ///< sum_{p<N} e^{(2 pi i / N) p (alpha - p/2)}
    cplx closed;  ///< sqrt(N) e^{i pi alpha^2 / N} e^{-i pi / 4}
    double residual = 0.0;
};

ChirpSumResult phase_chirp_sum(long long alpha, int N);

struct FresnelResult {
    cplx value;           ///< int e^{-i y^2} dy along the tilted contour y = e^{-i pi/4} s
    cplx damped;          ///< Gaussian damping e^{-eps y^2}, polynomial extrapolation eps -> 0
    cplx damped_doubled;  ///< same with twice the number of damping nodes
    cplx quoted_target;    ///< (sqrt(pi) / (2 sqrt(2) i)) (i + 1)
    cplx exact;           ///< sqrt(pi) e^{-i pi / 4}
    double residual = 0.0;        ///< |value - quoted_target|
    double residual_exact = 0.0;  ///< |value - exact|
    double node_doubling_change = 0.0;
};

/// Evaluates the Fresnel integral two independent ways. Throws ConvergenceError
/// if the damped extrapolation does not stabilise.
FresnelResult fresnel_check(const QuadratureSpec& quad = {}, int damping_nodes = 6);

struct ContourResult {
    int N = 0;
    double R = 0.0;
    cplx I1, I2, I3, I4;
    cplx residue_total;          ///< S_N
    double identity_residual = 0.0;  ///< |S_N - (I1 + I2 + I3 + I4)|
    double quoted_bound = 0.0;        ///< N e^{-pi R} / (2 pi R)
    double I2_bound_ratio = 0.0;     ///< |I2| / quoted_bound
    double I4_bound_ratio = 0.0;     ///< |I4| / quoted_bound
    double I2_exact_bound = 0.0;     ///< the same estimate carried out without simplification
    double I4_exact_bound = 0.0;
};

/// Integrates f(z) = e^{i pi z^2/N} / (e^{2 pi i z} - 1) around the rectangle with
/// vertical sides Re z in {-1/2, N - 1/2} and horizontal sides Im z = +-R.
/// The vertical pair is combined through f(z + N) - f(z) = e^{i pi z^2 / N}.
ContourResult contour_side_integrals(int N, double R);

}  // namespace qexp
