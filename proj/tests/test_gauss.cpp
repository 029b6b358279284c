#include "doctest.h"
#include "qexp/gauss.hpp"

#include <cmath>

using namespace qexp;

namespace oracle {
// Side integrals of e^{i pi z^2/N} / (e^{2 pi i z} - 1) from 30-digit quadrature.
const cplx I2_N6_R5{0.013267288972220220932, -0.0034975601473767739869};
const cplx I4_N6_R5{2.3498980136468714684, -1.1483141595422786067};
const cplx I2_N6_R8{-0.00055960424025459169276, -0.0017132698764600506183};
const cplx I4_N6_R8{-3.3525101519890917902, -7.1161214050330812962};
const cplx I2_N4_R10{-0.000023882166549268529109, -6.1643966648094775671e-6};
const cplx fresnel{1.2533141373155002512, -1.2533141373155002512};
}  // namespace oracle

TEST_CASE("Gauss sums match the closed form for every even N up to 64") {
    for (int N = 2; N <= 64; N += 2) {
        auto g = gauss_sum(N);
        CHECK(g.residual <= 1e-12 * std::sqrt(static_cast<double>(N)));
        CHECK(std::abs(g.closed - std::sqrt(static_cast<double>(N)) * std::polar(1.0, kPi / 4)) < 1e-14);
    }
}

TEST_CASE("S_2 = 1 + i") {
    auto g = gauss_sum(2);
    CHECK(std::abs(g.direct - cplx(1, 1)) <= 1e-15);
    CHECK(g.residual <= 1e-15);
}

TEST_CASE("Gauss sum rejects odd or small N") {
    CHECK_THROWS_AS(gauss_sum(7), DomainError);
    CHECK_THROWS_AS(gauss_sum(0), DomainError);
    CHECK_THROWS_AS(gauss_sum(-2), DomainError);
}

TEST_CASE("Gauss sum for large even N stays accurate") {
    auto g = gauss_sum(4096);
    CHECK(g.residual <= 1e-12 * 64.0);
}

TEST_CASE("chirp phase sum closed form") {
    for (int N : {2, 6, 8, 12}) {
        for (long long alpha = -2 * N; alpha <= 2 * N; ++alpha) {
            auto c = phase_chirp_sum(alpha, N);
            CHECK(c.residual <= 1e-12 * std::sqrt(static_cast<double>(N)));
        }
    }
}

TEST_CASE("chirp phase sum is periodic in alpha with period N") {
    for (int N : {6, 8}) {
        for (long long alpha = 0; alpha < N; ++alpha) {
            CHECK(std::abs(phase_chirp_sum(alpha, N).direct - phase_chirp_sum(alpha + N, N).direct) < 1e-12);
        }
    }
}

TEST_CASE("Fresnel integral: two independent evaluations agree with the oracle") {
    auto f = fresnel_check();
    CHECK(std::abs(f.value - oracle::fresnel) < 1e-12);
    CHECK(std::abs(f.exact - oracle::fresnel) < 1e-15);
    CHECK(std::abs(f.damped - oracle::fresnel) < 1e-7);
    CHECK(f.node_doubling_change < 1e-6);
    CHECK(f.residual_exact < 1e-12);
}

TEST_CASE("Fresnel quoted target is half of the true value") {
    auto f = fresnel_check();
    CHECK(std::abs(2.0 * f.quoted_target - f.exact) < 1e-15);
    // The faithful residual against the printed value is not small.
    CHECK(f.residual > 0.8);
}

TEST_CASE("contour side integrals against the quadrature oracle") {
    auto c5 = contour_side_integrals(6, 5.0);
    CHECK(std::abs(c5.I2 - oracle::I2_N6_R5) < 1e-12);
    CHECK(std::abs(c5.I4 - oracle::I4_N6_R5) < 1e-11);
    auto c8 = contour_side_integrals(6, 8.0);
    CHECK(std::abs(c8.I2 - oracle::I2_N6_R8) < 1e-12);
    CHECK(std::abs(c8.I4 - oracle::I4_N6_R8) < 1e-10);
    auto c10 = contour_side_integrals(4, 10.0);
    CHECK(std::abs(c10.I2 - oracle::I2_N4_R10) < 1e-13);
}

TEST_CASE("contour identity S_N = sum of side integrals") {
    for (int N : {2, 4, 6, 8}) {
        for (double R : {5.0, 8.0, 10.0}) {
            auto c = contour_side_integrals(N, R);
            CHECK(c.identity_residual <= 1e-8);
        }
    }
}

TEST_CASE("bottom side integral decays with R and respects the carried-through bound") {
    double prev = 1e300;
    for (double R : {5.0, 8.0, 10.0}) {
        auto c = contour_side_integrals(6, R);
        CHECK(std::abs(c.I2) < prev);
        prev = std::abs(c.I2);
        CHECK(std::abs(c.I2) <= c.I2_exact_bound);
        CHECK(std::abs(c.I4) <= c.I4_exact_bound);
        // The printed bound e^{-pi R} is far too optimistic.
        CHECK(c.I2_bound_ratio > 1e3);
    }
}

TEST_CASE("contour rejects bad arguments") {
    CHECK_THROWS_AS(contour_side_integrals(5, 8.0), DomainError);
    CHECK_THROWS_AS(contour_side_integrals(6, 0.0), DomainError);
}
