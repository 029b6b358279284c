/**
 * @file core.hpp
 * @brief Root-of-unity parameters and exact arithmetic on the ray group Gamma.
 *
 * Points of Gamma are kept as (k mod N, x = log r) so that phase arithmetic is
 * exact and the parity branch of F_N never depends on a rounded arg().
 */
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qexp {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Precondition violated (odd N, zero inverse, point on a branch cut, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A numerical procedure did not reach its tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Root-of-unity data: q = exp(2 pi i / N), hbar = 2 pi / N.
class GroupParams {
public:
    GroupParams() : GroupParams(6) {}
    /// Throws DomainError unless N is even and N >= min_N.
    explicit GroupParams(int N, int min_N = 6);

    int N() const { return N_; }
    double hbar() const { return hbar_; }
    cplx q() const { return q_; }
    /// q^j for any integer j, computed from the reduced exponent.
    cplx qpow(long long j) const;
    /// q^(j/2) with the principal choice q^(1/2) = exp(i pi / N).
    cplx qhalf(long long j) const;
    /// Reduces j into [0, N).
    int mod(long long j) const;

private:
    int N_;
    double hbar_;
    cplx q_;
};

/// z = q^k e^x, or the distinguished point 0 of the closure of Gamma.
struct GammaPoint {
    bool is_zero = false;
    int k = 0;
    double x = 0.0;

    static GammaPoint zero() { return {true, 0, 0.0}; }
    static GammaPoint identity() { return {false, 0, 0.0}; }
    static GammaPoint make(const GroupParams& p, long long k, double x);

    bool operator==(const GammaPoint&) const = default;
};

GammaPoint gamma_mul(const GammaPoint& a, const GammaPoint& b, const GroupParams& p);
GammaPoint gamma_inv(const GammaPoint& a, const GroupParams& p);
GammaPoint gamma_conj(const GammaPoint& a, const GroupParams& p);
cplx to_complex(const GammaPoint& a, const GroupParams& p);

enum class Region { Ray, Sector, Zero, Off };

struct Classification {
    Region region = Region::Off;
    int index = 0;  ///< ray index k for Ray, sector index for Sector
};

/// Tags z as on ray Gamma_k (angular distance <= tol), inside open sector
/// Lambda_k, or zero. Off is returned only for non-finite input.
Classification classify_complex(cplx z, const GroupParams& p, double tol = 1e-12);

/// Converts a point classified on a ray to (k, log|z|); DomainError otherwise.
GammaPoint from_complex(cplx z, const GroupParams& p, double tol = 1e-12);

std::string to_string(const GammaPoint& a);

}  // namespace qexp
