#include "doctest.h"
#include "qexp/core.hpp"

#include <cmath>
#include <random>

using namespace qexp;

TEST_CASE("group params derive q and hbar from N") {
    GroupParams p(6);
    CHECK(p.hbar() == doctest::Approx(kPi / 3).epsilon(1e-15));
    CHECK(std::abs(p.q() - std::polar(1.0, kPi / 3)) < 1e-15);
    cplx qn = 1.0;
    for (int i = 0; i < p.N(); ++i) qn *= p.q();
    CHECK(std::abs(qn - 1.0) < 1e-14);
    CHECK_THROWS_AS(GroupParams(5), DomainError);
    CHECK_THROWS_AS(GroupParams(4), DomainError);
    CHECK_NOTHROW(GroupParams(2, 2));
}

TEST_CASE("gamma_mul group law") {
    GroupParams p(6);
    auto a = GammaPoint::make(p, 1, 0.0), b = GammaPoint::make(p, 5, 0.0);
    CHECK(gamma_mul(a, b, p) == GammaPoint::identity());
    auto c = gamma_mul(GammaPoint::make(p, 2, 0.5), GammaPoint::make(p, 3, 1.0), p);
    CHECK(c.k == 5);
    CHECK(c.x == doctest::Approx(1.5));
    CHECK(gamma_mul(GammaPoint::zero(), GammaPoint::make(p, 3, 1.0), p).is_zero);
}

TEST_CASE("gamma_inv") {
    GroupParams p(6);
    auto a = gamma_inv(GammaPoint::make(p, 1, 2.0), p);
    CHECK(a.k == 5);
    CHECK(a.x == -2.0);
    CHECK(gamma_inv(GammaPoint::identity(), p) == GammaPoint::identity());
    CHECK_THROWS_AS(gamma_inv(GammaPoint::zero(), p), DomainError);
}

TEST_CASE("to_complex") {
    GroupParams p(6);
    CHECK(std::abs(to_complex(GammaPoint::make(p, 3, 0.0), p) - cplx(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(to_complex(GammaPoint::make(p, 1, std::log(2.0)), p) - 2.0 * std::polar(1.0, kPi / 3)) <
          1e-15);
    CHECK(to_complex(GammaPoint::zero(), p) == cplx(0.0, 0.0));
}

TEST_CASE("classify_complex") {
    GroupParams p(6);
    auto r = classify_complex(2.0 * std::polar(1.0, kPi / 3), p);
    CHECK(r.region == Region::Ray);
    CHECK(r.index == 1);
    auto s = classify_complex(std::polar(1.0, kPi / 6), p);
    CHECK(s.region == Region::Sector);
    CHECK(s.index == 0);
    CHECK(classify_complex(0.0, p).region == Region::Zero);
    CHECK(classify_complex(cplx(NAN, 0.0), p).region == Region::Off);
}

TEST_CASE("group properties on random samples") {
    GroupParams p(8);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> kd(0, 7);
    std::uniform_real_distribution<double> xd(-3, 3);
    for (int i = 0; i < 200; ++i) {
        auto a = GammaPoint::make(p, kd(rng), xd(rng));
        auto b = GammaPoint::make(p, kd(rng), xd(rng));
        auto c = GammaPoint::make(p, kd(rng), xd(rng));
        auto ab_c = gamma_mul(gamma_mul(a, b, p), c, p);
        auto a_bc = gamma_mul(a, gamma_mul(b, c, p), p);
        CHECK(ab_c.k == a_bc.k);
        CHECK(ab_c.x == doctest::Approx(a_bc.x).epsilon(1e-14));
        CHECK(gamma_mul(a, b, p).k == gamma_mul(b, a, p).k);
        cplx lhs = to_complex(gamma_mul(a, b, p), p);
        cplx rhs = to_complex(a, p) * to_complex(b, p);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(rhs));
        auto cl = classify_complex(to_complex(a, p), p);
        CHECK(cl.region == Region::Ray);
        CHECK(cl.index == a.k);
        auto back = from_complex(to_complex(a, p), p);
        CHECK(back.k == a.k);
    }
}
