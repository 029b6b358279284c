#include "qexp/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>

#include "qexp/parallel.hpp"

namespace qexp {

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0) || max_levels < 1) {
        throw DomainError("quadrature: rel_tol, abs_tol must be > 0 and max_levels >= 1");
    }
}

namespace {

// log(1 + e^{-N u / 2}) without overflow on either side.
double log_weight(double u, int N) {
    double t = 0.5 * N * u;
    return t >= 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// log(1 + e^x) for real x.
double log1p_exp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// (1 + a r) / (1 + conj(a) r) with r = e^x, stable for large r.
cplx ratio_factor(cplx a, double x) {
    if (x > 0) {
        double ir = std::exp(-x);
        return (ir + a) / (ir + std::conj(a));
    }
    double r = std::exp(x);
    return (1.0 + a * r) / (1.0 + std::conj(a) * r);
}

}  // namespace

cplx f_o_exponent(double theta, double logmod, const GroupParams& p, const QuadratureSpec& quad) {
    quad.validate();
    if (!(std::abs(theta) < kPi)) throw DomainError("f_o: argument on the negative real half-line");
    const int N = p.N();
    const cplx e_itheta = std::polar(1.0, theta);
    const cplx e_mitheta = std::conj(e_itheta);
    // Kernel 1/(1 + w e^{-u}) with w = 1/z; s = u + log|z| is the transition variable.
    auto integrand = [&](double u) -> cplx {
        double s = u + logmod;
        cplx K = s < 0 ? std::exp(s) * e_itheta / (1.0 + std::exp(s) * e_itheta)
                       : 1.0 / (1.0 + std::exp(-s) * e_mitheta);
        return log_weight(u, N) * K;
    };

    const double tail_tol = quad.abs_tol / 10.0;
    // Left tail: |integrand| <= (N|u|/2 + log 2) * 2 e^{u + logmod}.
    double a = std::min(0.0, -logmod) - 5.0;
    auto left_bound = [&](double a0) {
        return 2.0 * std::exp(a0 + logmod) * (0.5 * N * (std::abs(a0) + 1.0) + std::log(2.0));
    };
    while (left_bound(a) > tail_tol) a -= 1.0;
    // Right tail: log weight <= e^{-N u/2}, kernel modulus <= kmax.
    double kmax = std::cos(theta) >= 0 ? 1.0 : 1.0 / std::abs(std::sin(theta));
    double b = std::max(1.0, (2.0 / N) * std::log(2.0 * kmax / (N * tail_tol)));

    // Breakpoints at the weight's kink (u = 0) and the kernel transition
    // (u = -log|z|). Cuts closer than 1e-2 are merged: Gauss-Kronrod on a
    // sliver interval returns a non-finite error estimate.
    std::vector<double> cuts{a, b};
    for (double c : {0.0, -logmod}) {
        bool apart = std::all_of(cuts.begin(), cuts.end(), [c](double d) { return std::abs(c - d) > 1e-2; });
        if (c > a && c < b && apart) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());

    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    cplx total = 0.0;
    double err_total = 0.0, l1_total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 0) continue;
        double err = 0.0, l1 = 0.0;
        total += GK::integrate(integrand, cuts[i], cuts[i + 1], static_cast<unsigned>(quad.max_levels),
                               quad.rel_tol * 1e-2, &err, &l1);
        err_total += err;
        l1_total += l1;
    }
    if (!std::isfinite(total.real()) || !std::isfinite(total.imag()) ||
        err_total > std::max(quad.abs_tol, quad.rel_tol * l1_total)) {
        throw ConvergenceError("f_o: quadrature did not converge (error estimate " +
                               std::to_string(err_total) + ")");
    }
    return total / (kPi * kI);
}

cplx f_o(cplx z, const GroupParams& p, const QuadratureSpec& quad) {
    if (z.imag() == 0.0 && z.real() <= 0.0) {
        throw DomainError("f_o: z must lie off the closed negative real half-line");
    }
    return std::exp(f_o_exponent(std::arg(z), std::log(std::abs(z)), p, quad));
}

cplx F_N(const GammaPoint& z, const GroupParams& p, const QuadratureSpec& quad) {
    if (z.is_zero) return {1.0, 0.0};
    const int N = p.N();
    const int k = p.mod(z.k);
    const double x = z.x;
    cplx prod = 1.0;
    if (k % 2 == 0) {
        for (int s = 1; s <= k / 2; ++s) {
            if (2 * s == N / 2) continue;  // (1 - r)/(1 - r): removable, replaced by 1
            prod *= ratio_factor(p.qpow(2 * s), x);
        }
        return prod * std::exp(f_o_exponent(p.hbar(), x, p, quad) - log1p_exp(x));
    }
    for (int s = 0; s <= (k - 1) / 2; ++s) {
        if (2 * s + 1 == N / 2) continue;
        prod *= ratio_factor(p.qpow(2 * s + 1), x);
    }
    return prod * std::exp(f_o_exponent(0.0, x, p, quad));
}

cplx F_N_scaled(const GammaPoint& gamma, const GammaPoint& z, const GroupParams& p,
                const QuadratureSpec& quad) {
    if (gamma.is_zero) return {1.0, 0.0};
    return F_N(gamma_mul(gamma, z, p), p, quad);
}

std::vector<cplx> F_N_many(const std::vector<GammaPoint>& z, const GroupParams& p,
                           const QuadratureSpec& quad) {
    std::vector<cplx> out(z.size());
    parallel_for(z.size(), [&](std::size_t i) { out[i] = F_N(z[i], p, quad); });
    return out;
}

cplx derivative_at_zero(int k, const GroupParams& p) {
    return (p.qpow(k + 1) + p.qpow(-k - 1)) / (2.0 * kI * std::sin(p.hbar()));
}

cplx derivative_forward(int k, double eps, const GroupParams& p, const QuadratureSpec& quad) {
    return (F_N(GammaPoint::make(p, k, std::log(eps)), p, quad) - 1.0) / eps;
}

cplx derivative_central(int k, double eps, const GroupParams& p, const QuadratureSpec& quad) {
    cplx fp = F_N(GammaPoint::make(p, k, std::log(eps)), p, quad);
    cplx fm = F_N(GammaPoint::make(p, static_cast<long long>(k) + p.N() / 2, std::log(eps)), p, quad);
    return (fp - fm) / (2.0 * eps);
}

namespace {
cplx linear_term(double lambda, const GammaPoint& t, const GroupParams& p) {
    cplx tc = to_complex(t, p);
    cplx qt = p.q() * tc;
    return lambda * (qt + std::conj(qt)) / (2.0 * kI * std::sin(p.hbar()));
}
}  // namespace

ExpansionRemainder expansion_remainder(double lambda, const GammaPoint& t, const GroupParams& p,
                                       const QuadratureSpec& quad) {
    if (!(lambda > 0)) throw DomainError("expansion_remainder: lambda must be > 0");
    if (t.is_zero) throw DomainError("expansion_remainder: t must be non-zero");
    GammaPoint lt = GammaPoint::make(p, t.k, t.x + std::log(lambda));
    cplx f = F_N(lt, p, quad);
    cplx r = (f - 1.0 - linear_term(lambda, t, p)) / (lambda * std::exp(t.x));
    return {lambda, t, r};
}

cplx expansion_reconstruct(const ExpansionRemainder& r, const GroupParams& p) {
    return 1.0 + linear_term(r.lambda, r.t, p) + r.lambda * std::exp(r.t.x) * r.value;
}

RemainderBound remainder_bound(const GammaPoint& t, const GroupParams& p, double lambda_min,
                               double lambda_max, int points, const QuadratureSpec& quad) {
    RemainderBound out;
    double l0 = std::log(lambda_min), l1 = std::log(lambda_max);
    for (int i = 0; i < points; ++i) {
        double lam = std::exp(l0 + (l1 - l0) * i / std::max(1, points - 1));
        double v = std::abs(expansion_remainder(lam, t, p, quad).value);
        out.lambdas.push_back(lam);
        out.abs_values.push_back(v);
        out.max_abs = std::max(out.max_abs, v);
    }
    out.M_hat = 1.5 * out.max_abs;
    return out;
}

double conj_identity_residual(int m, double t, const GroupParams& p, const QuadratureSpec& quad) {
    if (!(t > 0)) throw DomainError("conj_identity_residual: t must be > 0");
    const double N = p.N();
    double lt = std::log(t);
    cplx lhs = std::conj(F_N(GammaPoint::make(p, m, lt), p, quad));
    cplx c = std::exp(kI * (kPi / 6.0) * (2.0 / N + N / 2.0));
    double m1 = m + 1.0;
    cplx phase = c * std::exp(-kI * kPi * m1 * m1 / N) * std::exp(kI * lt * lt / (2.0 * p.hbar()));
    cplx rhs = phase * F_N(GammaPoint::make(p, -static_cast<long long>(m) - 2, -lt), p, quad);
    return std::abs(lhs - rhs);
}

}  // namespace qexp
