/**
 * @file special.hpp
 * @brief The building block f_o and the quantum exponential function F_N.
 *
 * f_o(z) = exp{(1/(pi i)) int_0^inf log(1 + a^{-N/2}) da / (a + 1/z)} is evaluated
 * after the substitution a = e^u with adaptive Gauss-Kronrod quadrature on a
 * window whose analytic tail bound is below the absolute tolerance.
 */
#pragma once

#include <vector>

#include "qexp/core.hpp"

namespace qexp {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_levels = 20;

    void validate() const;
};

/// The exponent (1/(pi i)) * integral for z = exp(logmod + i theta), theta in (-pi, pi).
/// Working in (theta, logmod) keeps huge and tiny |z| free of overflow.
cplx f_o_exponent(double theta, double logmod, const GroupParams& p, const QuadratureSpec& quad);

/// f_o on the cut plane; DomainError on the closed negative half-line and at 0.
cplx f_o(cplx z, const GroupParams& p, const QuadratureSpec& quad = {});

/// F_N on the closure of Gamma. F_N(0) = 1 exactly.
cplx F_N(const GammaPoint& z, const GroupParams& p, const QuadratureSpec& quad = {});

/// F_N(gamma * z); identically 1 when gamma is zero.
cplx F_N_scaled(const GammaPoint& gamma, const GammaPoint& z, const GroupParams& p,
                const QuadratureSpec& quad = {});

/// F_N at many points, evaluated in parallel; output order matches input.
std::vector<cplx> F_N_many(const std::vector<GammaPoint>& z, const GroupParams& p,
                           const QuadratureSpec& quad = {});

/// Closed form of d/dr F_N(q^k r) at r = 0: (q^{k+1} + q^{-k-1}) / (2 i sin hbar).
cplx derivative_at_zero(int k, const GroupParams& p);

/// One-sided slope (F_N(q^k eps) - 1) / eps.
cplx derivative_forward(int k, double eps, const GroupParams& p, const QuadratureSpec& quad = {});

/// Central slope along the line through 0: (F_N(q^k eps) - F_N(q^{k+N/2} eps)) / (2 eps).
cplx derivative_central(int k, double eps, const GroupParams& p, const QuadratureSpec& quad = {});

struct ExpansionRemainder {
    double lambda = 0.0;
    GammaPoint t;
    cplx value;
};

/// r(lambda t) = (F_N(lambda t) - 1 - lambda (q t + conj(q t)) / (2 i sin hbar)) / (lambda |t|).
ExpansionRemainder expansion_remainder(double lambda, const GammaPoint& t, const GroupParams& p,
                                       const QuadratureSpec& quad = {});

/// Rebuilds F_N(lambda t) from a remainder value; inverse of the rearrangement above.
cplx expansion_reconstruct(const ExpansionRemainder& r, const GroupParams& p);

struct RemainderBound {
    double max_abs = 0.0;  ///< max |r| over the lambda grid
    double M_hat = 0.0;    ///< 1.5 * max_abs
    std::vector<double> lambdas;
    std::vector<double> abs_values;
};

/// Empirical bound on |r(lambda t)| over a log-spaced lambda grid.
RemainderBound remainder_bound(const GammaPoint& t, const GroupParams& p, double lambda_min = 1e-6,
                               double lambda_max = 1e3, int points = 37,
                               const QuadratureSpec& quad = {});

/// |conj F_N(q^m t) - c e^{-i pi (m+1)^2/N} e^{i log^2 t / (2 hbar)} F_N(q^{-m-2}/t)|
/// with c = e^{i (pi/6)(2/N + N/2)}.
double conj_identity_residual(int m, double t, const GroupParams& p, const QuadratureSpec& quad = {});

}  // namespace qexp
