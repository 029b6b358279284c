/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance run: one PASS/FAIL line per criterion with the
 *        measured quantity, its tolerance and the wall time.
 */
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qexp/gauss.hpp"
#include "qexp/special.hpp"
#include "qexp/verify.hpp"
#include "qexp/weyl.hpp"

using namespace qexp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string sweep_text(const RefinementSweep& sw) {
    std::string s = "[";
    for (std::size_t i = 0; i < sw.residuals.size(); ++i) {
        s += fmt(i ? ", %.2e" : "%.2e", sw.residuals[i]);
    }
    return s + "]";
}

LatticeSpec default_spec(int N) { return LatticeSpec::make(GroupParams(N), 256, 8); }

Outcome gauss_sums() {
    double worst = 0;
    for (int N = 2; N <= 64; N += 2) {
        auto g = gauss_sum(N);
        worst = std::max(worst, g.residual / std::sqrt(static_cast<double>(N)));
    }
    double n2 = std::abs(gauss_sum(2).direct - cplx(1.0, 1.0));
    return {worst <= 1e-12 && n2 <= 1e-15,
            fmt("max residual/sqrt(N) %.2e (tol 1e-12), |S_2 - (1+i)| %.1e (tol 1e-15)", worst, n2)};
}

Outcome chirp_sums() {
    double worst = 0;
    for (int N : {2, 6, 8, 12}) {
        for (long long a = -2 * N; a <= 2 * N; ++a) {
            worst = std::max(worst, phase_chirp_sum(a, N).residual / std::sqrt(static_cast<double>(N)));
        }
    }
    return {worst <= 1e-12, fmt("max residual/sqrt(N) %.2e (tol 1e-12)", worst)};
}

Outcome unimodularity() {
    double worst = 0, near_zero = 0;
    for (int N : {6, 8}) {
        GroupParams p(N);
        std::mt19937_64 rng(2024 + N);
        std::uniform_int_distribution<int> kd(0, N - 1);
        std::uniform_real_distribution<double> xd(-10, 10);
        std::vector<GammaPoint> pts;
        for (int i = 0; i < 1000; ++i) pts.push_back(GammaPoint::make(p, kd(rng), xd(rng)));
        for (cplx v : F_N_many(pts, p)) worst = std::max(worst, std::abs(std::abs(v) - 1.0));
        for (int k = 0; k < N; ++k) {
            near_zero = std::max(near_zero, std::abs(F_N(GammaPoint::make(p, k, std::log(1e-6)), p) - 1.0));
        }
    }
    return {worst <= 1e-7 && near_zero < 1e-4,
            fmt("max ||F_N|-1| %.2e (tol 1e-7), max |F_N(q^k 1e-6)-1| %.2e (tol 1e-4)", worst, near_zero)};
}

Outcome derivative() {
    // Relative error is measured against max(|closed form|, 1/sin hbar) so the
    // rays where the closed form vanishes do not divide by zero.
    double worst = 0;
    for (int N : {6, 8}) {
        GroupParams p(N);
        double floor = 1.0 / std::sin(p.hbar());
        for (int k = 0; k < N; ++k) {
            cplx c = derivative_at_zero(k, p);
            double scale = std::max(std::abs(c), floor);
            worst = std::max(worst, std::abs(derivative_central(k, 1e-5, p) - c) / scale);
            worst = std::max(worst, std::abs(derivative_forward(k, 1e-5, p) - c) / scale);
        }
    }
    return {worst <= 1e-4, fmt("max relative error %.2e (tol 1e-4, step 1e-5)", worst)};
}

Outcome conjugation() {
    double worst = 0;
    for (int N : {6, 8}) {
        GroupParams p(N);
        for (int m = 0; m < 10; ++m) {
            for (int i = 0; i < 10; ++i) {
                worst = std::max(worst, conj_identity_residual(m, std::exp(-2.0 + 4.0 * i / 9.0), p));
            }
        }
    }
    return {worst <= 1e-7, fmt("max residual %.2e over 100 (m,t) points, N in {6,8} (tol 1e-7)", worst)};
}

Outcome weyl() {
    double weyl_rel = 0, others = 0;
    for (int N : {6, 8, 12}) {
        auto rep = overlap_identities_report(GroupParams(N));
        weyl_rel = std::max(weyl_rel, rep.residuals.at("weyl_relation"));
        for (const auto& [name, v] : rep.residuals) others = std::max(others, v);
    }
    return {weyl_rel <= 1e-14 && others <= 1e-12,
            fmt("Weyl relation %.2e (tol 1e-14), overlap identities max %.2e (tol 1e-12)", weyl_rel, others)};
}

Outcome exp_equation() {
    auto spec = default_spec(6);
    auto sw = refinement_sweep(spec, 3, [](const LatticeSpec& s, const StateVector& v) {
        return exp_identity_residual(s, v);
    });
    bool ok = sw.residuals[0] <= 1e-3 && sw.refinement_law() && sw.residuals.back() <= sw.floor;
    return {ok, "residuals h,h/2,h/4 " + sweep_text(sw) + fmt(" (tol 1e-3 at h, halving law to %.0e)", sw.floor) +
                    (sw.refinement_law() ? ", law holds" : ", law violated")};
}

Outcome closure_forms() {
    auto spec = default_spec(6);
    auto psi = default_packet(spec);
    double plain = closure_form_residual(spec, ClosureForm::RPlain, psi);
    double starred = closure_form_residual(spec, ClosureForm::RStarred, psi);
    auto sw = refinement_sweep(spec, 3, [](const LatticeSpec& s, const StateVector& v) {
        return closure_form_residual(s, kConsistentRForm, v);
    });
    bool ok = sw.refinement_law() && sw.residuals[0] <= 1e-3;
    return {ok, "convention F_N(q^-2 R^-1 S) R F_N(q^-2 R^-1 S)^*: " + sweep_text(sw) +
                    (sw.refinement_law() ? " law holds" : " law violated") +
                    fmt("; unshifted forms %.2f (plain), %.2f (starred)", plain, starred)};
}

Outcome weak_limit() {
    auto spec = default_spec(6);
    auto run = [](const LatticeSpec& s) {
        return weak_limit_check(s, default_packet(s, 2, 0.0, 0.5), default_packet(s));
    };
    auto w = run(spec);
    auto w2 = run(LatticeSpec::make(spec.p, 2 * spec.M, spec.kappa));
    double change = std::abs(w.extrapolated - w2.extrapolated);
    return {w.distance <= 1e-5 && change <= 1e-6,
            fmt("extrapolated distance %.2e (tol 1e-5), M-doubling change %.2e (tol 1e-6)", w.distance, change)};
}

Outcome fitter() {
    GroupParams p(6);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> kd(0, 5);
    std::uniform_real_distribution<double> xd(-1.0, 1.0);
    double worst_dx = 0;
    bool k_exact = true;
    for (int i = 0; i < 20; ++i) {
        auto g = GammaPoint::make(p, kd(rng), xd(rng));
        auto r = fit_gamma(standard_samples([&](const GammaPoint& z) { return F_N_scaled(g, z, p); }, p), p);
        k_exact = k_exact && !r.gamma.is_zero && r.gamma.k == g.k;
        worst_dx = std::max(worst_dx, r.gamma.is_zero ? INFINITY : std::abs(r.gamma.x - g.x));
    }
    auto one = fit_gamma(standard_samples([](const GammaPoint&) { return cplx(1.0); }, p), p);
    auto sq = fit_gamma(standard_samples([&](const GammaPoint& z) {
                            cplx f = F_N(z, p);
                            return f * f;
                        }, p), p);
    bool ok = k_exact && worst_dx <= 1e-6 && one.gamma.is_zero && !sq.in_family;
    return {ok, fmt("20 random gamma: max |dx| %.2e (tol 1e-6), ", worst_dx) +
                    (k_exact ? "phase index exact" : "phase index WRONG") +
                    "; constant -> " + (one.gamma.is_zero ? "gamma = 0" : "NOT zero") +
                    "; F_N^2 -> " + (sq.in_family ? "ACCEPTED" : "rejected")};
}

Outcome matrix_solutions() {
    auto spec = default_spec(6);
    const auto& p = spec.p;
    double comm = 0;
    bool law = true;
    std::string sweeps;
    std::vector<Eigen::MatrixXcd> family;
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
    D(0, 0) = p.q();
    D(1, 1) = std::exp(0.4) * p.qpow(3);
    family.push_back(D);
    D(0, 0) = std::exp(-0.3) * p.qpow(2);
    D(1, 1) = std::exp(0.2);
    family.push_back(D);
    MatrixSolutionOptions opts;
    opts.refinement_levels = 3;
    for (const auto& M : family) {
        auto rep = matrix_solution_check(M, spec, {}, opts);
        comm = std::max(comm, rep.residuals.at("commutativity"));
        law = law && rep.meta.at("tensor_refinement_law") == 1.0;
        sweeps += fmt(" [%.2e, ", rep.residuals.at("tensor_sweep/level_0"));
        sweeps += fmt("%.2e, %.2e]", rep.residuals.at("tensor_sweep/level_1"), rep.residuals.at("tensor_sweep/level_2"));
    }
    return {comm <= 1e-10 && law, fmt("commutativity %.2e (tol 1e-10); tensor sweeps", comm) + sweeps +
                                      (law ? " law holds" : " law violated")};
}

Outcome normality() {
    bool ok = true;
    std::string detail;
    for (int N : {6, 8}) {
        auto probe = normality_probe(default_spec(N));
        double on_max = 0, off_min = INFINITY;
        for (const auto& r : probe.on_gamma) on_max = std::max(on_max, r.defect);
        for (const auto& r : probe.off_gamma) off_min = std::min(off_min, r.defect);
        ok = ok && probe.ordering_holds();
        detail += "N=" + std::to_string(N) + fmt(": on-Gamma max %.2e, mid-sector min %.2e", on_max, off_min) +
                  fmt(", mu=0 %.1e; ", probe.at_zero.defect);
    }
    return {ok, detail + "matched-modulus ratio >= 5 required"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // 0 when the criterion states no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "Gauss sums", 1.0, gauss_sums},
        {2, "chirp phase sums", 1.0, chirp_sums},
        {3, "unimodularity and continuity of F_N", 30.0, unimodularity},
        {4, "derivative at zero", 0.0, derivative},
        {5, "conjugation identity", 0.0, conjugation},
        {6, "finite Weyl identities", 0.0, weyl},
        {7, "exponential equation", 120.0, exp_equation},
        {8, "closure-sum form agreement", 0.0, closure_forms},
        {9, "weak-limit formula", 0.0, weak_limit},
        {10, "scalar-solution fitter", 0.0, fitter},
        {11, "matrix-solution check", 0.0, matrix_solutions},
        {12, "normality probe", 0.0, normality},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = c.budget_s <= 0 || secs < c.budget_s;
        bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::string timing = fmt("%.2f s", secs);
        if (c.budget_s > 0) timing += fmt(" (budget %.0f s)", c.budget_s);
        std::printf("%s %2d %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
