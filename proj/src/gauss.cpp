#include "qexp/gauss.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

namespace qexp {

namespace {

void require_even(int N) {
    if (N < 2 || N % 2 != 0) throw DomainError("Gauss sums need even N >= 2, got " + std::to_string(N));
}

// e^{i pi n / N} with n reduced mod 2N so the phase is exact up to one rounding.
cplx unit_phase(long long n, int N) {
    long long m = n % (2LL * N);
    if (m < 0) m += 2LL * N;
    return std::polar(1.0, kPi * static_cast<double>(m) / N);
}

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

template <class F>
cplx integrate(F f, double a, double b, double tol = 1e-13) {
    double err = 0;
    return GK::integrate(f, a, b, 15, tol, &err);
}

cplx contour_f(cplx z, int N) {
    cplx num_exp = kI * kPi * z * z / static_cast<double>(N);
    if (z.imag() < 0) {
        // e^{2 pi i z} is large: divide through by it.
        return std::exp(num_exp - 2.0 * kPi * kI * z) / (1.0 - std::exp(-2.0 * kPi * kI * z));
    }
    return std::exp(num_exp) / (std::exp(2.0 * kPi * kI * z) - 1.0);
}

// Neville extrapolation of samples (h_i, v_i) to h = 0.
cplx extrapolate_zero(const std::vector<double>& h, std::vector<cplx> v) {
    const std::size_t n = h.size();
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            v[i] = (h[i + m] * v[i] - h[i] * v[i + 1]) / (h[i + m] - h[i]);
        }
    }
    return v[0];
}

cplx damped_fresnel(int nodes, const QuadratureSpec& quad) {
    // Nodes fill the same damping interval regardless of their number, so
    // doubling them raises the extrapolation order without shrinking eps.
    const double e_hi = 0.1, e_lo = 0.01;
    std::vector<double> eps;
    std::vector<cplx> vals;
    for (int j = 0; j < nodes; ++j) {
        double c = std::cos(kPi * (j + 0.5) / nodes);
        double e = 0.5 * (e_hi + e_lo) + 0.5 * (e_hi - e_lo) * c;
        // Even integrand on [0, Y] with e^{-e Y^2} below 1e-18, split at
        // y = sqrt(k pi) so each panel holds half an oscillation.
        double Y = std::sqrt(42.0 / e);
        auto g = [e](double y) { return std::exp(cplx(-e, -1.0) * y * y); };
        cplx v = 0.0;
        double lo = 0.0;
        for (long k = 1;; ++k) {
            double hi = std::min(Y, std::sqrt(k * kPi));
            double err = 0;
            v += GK::integrate(g, lo, hi, static_cast<unsigned>(std::min(quad.max_levels, 6)), 1e-10, &err);
            lo = hi;
            if (hi >= Y) break;
        }
        eps.push_back(e);
        vals.push_back(2.0 * v);
    }
    return extrapolate_zero(eps, vals);
}

}  // namespace

GaussSumResult gauss_sum(int N) {
    require_even(N);
    GaussSumResult r;
    r.N = N;
    r.direct = 0.0;
    for (long long p = 0; p < N; ++p) r.direct += unit_phase(p * p, N);
    r.closed = std::sqrt(static_cast<double>(N)) * std::polar(1.0, kPi / 4);
    r.residual = std::abs(r.direct - r.closed);
    return r;
}

ChirpSumResult phase_chirp_sum(long long alpha, int N) {
    require_even(N);
    ChirpSumResult r;
    r.direct = 0.0;
    // (2 pi i / N) p (alpha - p/2) = (i pi / N)(2 p alpha - p^2)
    for (long long p = 0; p < N; ++p) r.direct += unit_phase(2 * p * alpha - p * p, N);
    r.closed = std::sqrt(static_cast<double>(N)) * unit_phase(alpha * alpha, N) * std::polar(1.0, -kPi / 4);
    r.residual = std::abs(r.direct - r.closed);
    return r;
}

FresnelResult fresnel_check(const QuadratureSpec& quad, int damping_nodes) {
    quad.validate();
    FresnelResult r;
    // Tilted contour y = e^{-i pi/4} s turns e^{-i y^2} into e^{-s^2}.
    double s_max = std::sqrt(-std::log(quad.abs_tol * 1e-4));
    cplx gauss = integrate([](double s) { return cplx(std::exp(-s * s), 0.0); }, -s_max, s_max);
    r.value = std::polar(1.0, -kPi / 4) * gauss;
    r.damped = damped_fresnel(damping_nodes, quad);
    r.damped_doubled = damped_fresnel(2 * damping_nodes, quad);
    r.node_doubling_change = std::abs(r.damped - r.damped_doubled);
    if (!(r.node_doubling_change <= 1e-6)) {
        throw ConvergenceError("fresnel_check: damped extrapolation did not stabilise");
    }
    r.quoted_target = std::sqrt(kPi) / (2.0 * std::sqrt(2.0) * kI) * (kI + 1.0);
    r.exact = std::sqrt(kPi) * std::polar(1.0, -kPi / 4);
    r.residual = std::abs(r.value - r.quoted_target);
    r.residual_exact = std::abs(r.value - r.exact);
    return r;
}

ContourResult contour_side_integrals(int N, double R) {
    require_even(N);
    if (!(R > 0)) throw DomainError("contour_side_integrals: R must be > 0");
    ContourResult c;
    c.N = N;
    c.R = R;
    const double a = -0.5, b = N - 0.5;
    c.I1 = -integrate([&](double y) { return contour_f(cplx(a, y), N) * kI; }, -R, R);
    c.I3 = integrate([&](double y) { return contour_f(cplx(b, y), N) * kI; }, -R, R);
    c.I2 = integrate([&](double x) { return contour_f(cplx(x, -R), N); }, a, b);
    c.I4 = -integrate([&](double x) { return contour_f(cplx(x, R), N); }, a, b);
    // The vertical pair combined analytically: no poles, no cancellation.
    cplx vertical = integrate(
        [&](double y) {
            cplx z(a, y);
            return kI * std::exp(kI * kPi * z * z / static_cast<double>(N));
        },
        -R, R);
    c.residue_total = gauss_sum(N).direct;
    c.identity_residual = std::abs(c.residue_total - (vertical + c.I2 + c.I4));
    c.quoted_bound = N * std::exp(-kPi * R) / (2.0 * kPi * R);
    c.I2_bound_ratio = std::abs(c.I2) / c.quoted_bound;
    c.I4_bound_ratio = std::abs(c.I4) / c.quoted_bound;
    const double k = 2.0 * kPi * R / N;
    c.I2_exact_bound = (std::exp(k * b - 2.0 * kPi * R) - std::exp(k * a - 2.0 * kPi * R)) / k /
                       (1.0 - std::exp(-2.0 * kPi * R));
    c.I4_exact_bound = (std::exp(-k * a) - std::exp(-k * b)) / k / (1.0 - std::exp(-2.0 * kPi * R));
    return c;
}

}  // namespace qexp
