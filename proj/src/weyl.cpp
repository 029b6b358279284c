#include "qexp/weyl.hpp"

#include <algorithm>
#include <cmath>

#include "qexp/gauss.hpp"

namespace qexp {

namespace {
double max_abs(const PhaseMatrix& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

PhaseMatrix phase_R(const GroupParams& p) {
    PhaseMatrix m = PhaseMatrix::Zero(p.N(), p.N());
    for (int k = 0; k < p.N(); ++k) m(k, k) = p.qpow(k);
    return m;
}

PhaseMatrix phase_S(int N) {
    if (N < 1) throw DomainError("phase_S: N must be >= 1");
    PhaseMatrix m = PhaseMatrix::Zero(N, N);
    for (int k = 0; k < N; ++k) m(k, (k + 1) % N) = 1.0;
    return m;
}

PhaseMatrix phase_T(const GroupParams& p) {
    return p.qhalf(-1) * phase_S(p).adjoint() * phase_R(p);
}

PhaseBases basis_vectors(const GroupParams& p) {
    const int N = p.N();
    const double s = 1.0 / std::sqrt(static_cast<double>(N));
    PhaseBases b{PhaseMatrix::Identity(N, N), PhaseMatrix(N, N), PhaseMatrix(N, N)};
    for (int j = 0; j < N; ++j) {
        for (int l = 0; l < N; ++l) {
            b.f(j, l) = s * p.qpow(static_cast<long long>(j) * l);
            b.g(j, l) = s * p.qhalf(static_cast<long long>(j) * j - 2LL * j * (l + 1));
        }
    }
    return b;
}

cplx phase_S_eigenvalue(int l, const GroupParams& p) { return p.qpow(l); }
cplx phase_T_eigenvalue(int m, const GroupParams& p) { return p.qpow(m); }

ResidualReport overlap_identities_report(const GroupParams& p) {
    const int N = p.N();
    const double s = 1.0 / std::sqrt(static_cast<double>(N));
    const auto b = basis_vectors(p);
    const PhaseMatrix R = phase_R(p), S = phase_S(p), T = phase_T(p);
    const PhaseMatrix I = PhaseMatrix::Identity(N, N);
    ResidualReport rep;
    rep.meta["N"] = N;

    double ef = 0, eg = 0, chirp = 0, chirp_closed = 0, fg_mod = 0, s_eig = 0, t_eig = 0;
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < N; ++l) {
            cplx v = b.e.col(k).dot(b.f.col(l));
            ef = std::max(ef, std::abs(v - s * p.qpow(static_cast<long long>(k) * l)));
            cplx w = b.e.col(k).dot(b.g.col(l));
            eg = std::max(eg, std::abs(w - s * p.qhalf(static_cast<long long>(k) * k - 2LL * k * (l + 1))));
        }
    }
    for (int m = 0; m < N; ++m) {
        for (int n = 0; n < N; ++n) {
            // N <g_m | f_n> = sum_p q^{p(m+n+1-p/2)}
            cplx direct = static_cast<double>(N) * b.g.col(m).dot(b.f.col(n));
            long long alpha = m + n + 1;
            cplx closed = std::sqrt(static_cast<double>(N)) * std::polar(1.0, -kPi / 4) *
                          p.qhalf(alpha * alpha);
            chirp = std::max(chirp, std::abs(direct - closed));
            fg_mod = std::max(fg_mod, std::abs(std::abs(b.f.col(n).dot(b.g.col(m))) - s));
            auto cs = phase_chirp_sum(alpha, N);
            chirp_closed = std::max(chirp_closed, cs.residual);
        }
    }
    for (int l = 0; l < N; ++l) {
        s_eig = std::max(s_eig, max_abs(S * b.f.col(l) - phase_S_eigenvalue(l, p) * b.f.col(l)));
        t_eig = std::max(t_eig, max_abs(T * b.g.col(l) - phase_T_eigenvalue(l, p) * b.g.col(l)));
    }
    PhaseMatrix RN = I, SN = I;
    for (int i = 0; i < N; ++i) {
        RN = RN * R;
        SN = SN * S;
    }
    rep.set("overlap_ef", ef);
    rep.set("overlap_eg", eg);
    rep.set("overlap_gf_chirp", chirp);
    rep.set("chirp_sum_closed_form", chirp_closed);
    rep.set("overlap_fg_modulus", fg_mod);
    rep.set("gram_e", max_abs(b.e.adjoint() * b.e - I));
    rep.set("gram_f", max_abs(b.f.adjoint() * b.f - I));
    rep.set("gram_g", max_abs(b.g.adjoint() * b.g - I));
    rep.set("change_of_basis_fg_unitary", max_abs((b.f.adjoint() * b.g).adjoint() * (b.f.adjoint() * b.g) - I));
    rep.set("eigen_S_f", s_eig);
    rep.set("eigen_T_g", t_eig);
    rep.set("weyl_relation", max_abs(S * R - p.q() * R * S));
    rep.set("unitary_R", max_abs(R.adjoint() * R - I));
    rep.set("unitary_S", max_abs(S.adjoint() * S - I));
    rep.set("unitary_T", max_abs(T.adjoint() * T - I));
    rep.set("power_N_R", max_abs(RN - I));
    rep.set("power_N_S", max_abs(SN - I));
    return rep;
}

}  // namespace qexp
