#include "qexp/core.hpp"

#include <cmath>
#include <sstream>

namespace qexp {

GroupParams::GroupParams(int N, int min_N) : N_(N) {
    if (N < min_N || N % 2 != 0) {
        throw DomainError("N must be even and >= " + std::to_string(min_N) + ", got " +
                          std::to_string(N));
    }
    hbar_ = 2.0 * kPi / N;
    q_ = std::polar(1.0, hbar_);
}

int GroupParams::mod(long long j) const {
    long long r = j % N_;
    return static_cast<int>(r < 0 ? r + N_ : r);
}

cplx GroupParams::qpow(long long j) const { return std::polar(1.0, hbar_ * mod(j)); }

cplx GroupParams::qhalf(long long j) const {
    long long r = j % (2LL * N_);
    if (r < 0) r += 2LL * N_;
    return std::polar(1.0, kPi * static_cast<double>(r) / N_);
}

GammaPoint GammaPoint::make(const GroupParams& p, long long k, double x) {
    return {false, p.mod(k), x};
}

GammaPoint gamma_mul(const GammaPoint& a, const GammaPoint& b, const GroupParams& p) {
    if (a.is_zero || b.is_zero) return GammaPoint::zero();
    return GammaPoint::make(p, static_cast<long long>(a.k) + b.k, a.x + b.x);
}

GammaPoint gamma_inv(const GammaPoint& a, const GroupParams& p) {
    if (a.is_zero) throw DomainError("gamma_inv: zero has no inverse");
    return GammaPoint::make(p, -static_cast<long long>(a.k), -a.x);
}

GammaPoint gamma_conj(const GammaPoint& a, const GroupParams& p) {
    if (a.is_zero) return a;
    return GammaPoint::make(p, -static_cast<long long>(a.k), a.x);
}

cplx to_complex(const GammaPoint& a, const GroupParams& p) {
    if (a.is_zero) return {0.0, 0.0};
    return p.qpow(a.k) * std::exp(a.x);
}

Classification classify_complex(cplx z, const GroupParams& p, double tol) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return {Region::Off, 0};
    if (z == cplx(0.0, 0.0)) return {Region::Zero, 0};
    double a = std::arg(z);
    if (a < 0) a += 2.0 * kPi;
    double t = a / p.hbar();
    long long nearest = std::llround(t);
    if (std::abs(a - nearest * p.hbar()) <= tol) return {Region::Ray, p.mod(nearest)};
    return {Region::Sector, p.mod(static_cast<long long>(std::floor(t)))};
}

GammaPoint from_complex(cplx z, const GroupParams& p, double tol) {
    auto c = classify_complex(z, p, tol);
    if (c.region == Region::Zero) return GammaPoint::zero();
    if (c.region != Region::Ray) throw DomainError("point is not on Gamma");
    return GammaPoint::make(p, c.index, std::log(std::abs(z)));
}

std::string to_string(const GammaPoint& a) {
    if (a.is_zero) return "0";
    std::ostringstream os;
    os.precision(17);
    os << "(k=" << a.k << ",x=" << a.x << ")";
    return os.str();
}

}  // namespace qexp
