#include "qexp/verify.hpp"

#include <boost/math/tools/minima.hpp>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace qexp {

// ---------------------------------------------------------------------------
// Closure sums.

std::string to_string(ClosureForm form) {
    switch (form) {
        case ClosureForm::S: return "S-form";
        case ClosureForm::RPlain: return "R-form-plain";
        case ClosureForm::RStarred: return "R-form-starred";
        case ClosureForm::RShifted: return "R-form-shifted";
    }
    return "unknown";
}

ClosureForm closure_form_from_string(const std::string& name) {
    for (auto f : {ClosureForm::S, ClosureForm::RPlain, ClosureForm::RStarred, ClosureForm::RShifted}) {
        if (to_string(f) == name) return f;
    }
    throw DomainError("unknown closure form '" + name + "'");
}

StructuredOperator closure_sum(const LatticeSpec& spec, ClosureForm form, const QuadratureSpec& quad) {
    const GroupParams p = spec.p;
    ScalarFn fn = [p, quad](const GammaPoint& z) { return F_N(z, p, quad); };
    ScalarFn fn_conj = [p, quad](const GammaPoint& z) { return std::conj(F_N(z, p, quad)); };
    const GammaPoint shift = GammaPoint::make(p, -2, 0.0);
    ScalarFn fn_shift = [p, quad, shift](const GammaPoint& z) { return F_N_scaled(shift, z, p, quad); };
    ScalarFn fn_shift_conj = [p, quad, shift](const GammaPoint& z) {
        return std::conj(F_N_scaled(shift, z, p, quad));
    };

    StructuredOperator op;
    if (form == ClosureForm::S) {
        op = build_S(spec);
        op.conjugator = std::make_shared<StructuredOperator>(build_T(spec));
        op.right_fn = fn;
        op.left_fn = fn_conj;
    } else {
        op = build_R(spec);
        op.conjugator = std::make_shared<StructuredOperator>(build_T_inverse(spec));
        switch (form) {
            case ClosureForm::RPlain:
                op.right_fn = fn;
                op.left_fn = fn;
                break;
            case ClosureForm::RStarred:
                op.right_fn = fn;
                op.left_fn = fn_conj;
                break;
            default:
                op.right_fn = fn_shift_conj;
                op.left_fn = fn_shift;
                break;
        }
    }
    op.kind = OperatorKind::ConjugatedDiagonal;
    op.name = "R+S/" + to_string(form);
    return op;
}

StateVector default_packet(const LatticeSpec& spec, std::uint64_t seed, double width, double center) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<cplx> w(spec.N());
    for (auto& c : w) {
        double re = normal(rng);
        double im = normal(rng);
        c = cplx(re, im);
    }
    return make_wavepacket(spec, w, center, width > 0 ? width : spec.p.hbar());
}

namespace {

void require_band_limited(const StateVector& psi) {
    if (!psi.band_limited) throw DomainError("state is not band limited");
}

double rel_diff(const StateVector& a, const StateVector& b, double scale) { return (a - b).norm() / scale; }

}  // namespace

double scalar_solution_residual(const LatticeSpec& spec, const GammaPoint& gamma, const StateVector& psi,
                                const QuadratureSpec& quad) {
    require_band_limited(psi);
    if (gamma.is_zero) return 0.0;
    const GroupParams p = spec.p;
    ScalarFn f = [p, gamma, quad](const GammaPoint& z) { return F_N_scaled(gamma, z, p, quad); };
    StateVector lhs = apply_function(build_R(spec), f, apply_function(build_S(spec), f, psi));
    StateVector rhs = apply_function(closure_sum(spec, ClosureForm::S, quad), f, psi);
    return rel_diff(lhs, rhs, psi.norm());
}

double exp_identity_residual(const LatticeSpec& spec, const StateVector& psi, const QuadratureSpec& quad) {
    return scalar_solution_residual(spec, GammaPoint::identity(), psi, quad);
}

double exp_identity_control_residual(const LatticeSpec& spec, const StateVector& psi, const QuadratureSpec& quad) {
    require_band_limited(psi);
    ScalarFn f = fn_F_N(spec.p);
    StateVector lhs = apply_function(build_R(spec), f, psi);
    StateVector rhs = apply_function(closure_sum(spec, ClosureForm::S, quad), f, psi);
    return rel_diff(lhs, rhs, psi.norm());
}

double closure_form_residual(const LatticeSpec& spec, ClosureForm form, const StateVector& psi,
                             const QuadratureSpec& quad) {
    require_band_limited(psi);
    const GroupParams p = spec.p;
    ScalarFn f = [p, quad](const GammaPoint& z) { return F_N(z, p, quad); };
    StateVector a = apply_function(closure_sum(spec, ClosureForm::S, quad), f, psi);
    StateVector b = apply_function(closure_sum(spec, form, quad), f, psi);
    return rel_diff(a, b, psi.norm());
}

// ---------------------------------------------------------------------------
// Refinement.

bool RefinementSweep::refinement_law() const {
    for (std::size_t i = 1; i < residuals.size(); ++i) {
        double a = residuals[i - 1], b = residuals[i];
        bool halved = b <= 0.5 * a;
        bool floored = b <= floor && (a <= floor || b < a);
        if (!halved && !floored) return false;
    }
    return !residuals.empty();
}

bool RefinementSweep::monotone() const {
    for (std::size_t i = 1; i < residuals.size(); ++i) {
        if (residuals[i] > residuals[i - 1]) return false;
    }
    return true;
}

RefinementSweep refinement_sweep(const LatticeSpec& base, int levels, const ResidualAtGrid& residual,
                                 std::uint64_t seed, double width, double center) {
    if (levels < 1) throw DomainError("refinement: need at least one level");
    RefinementSweep sw;
    for (int i = 0; i < levels; ++i) {
        double kappa = base.kappa * std::ldexp(1.0, i);
        int M = base.M << (2 * i);
        LatticeSpec spec = LatticeSpec::make(base.p, M, kappa);
        StateVector psi = default_packet(spec, seed, width > 0 ? width : base.p.hbar(), center);
        sw.h.push_back(spec.h);
        sw.M.push_back(M);
        sw.residuals.push_back(residual(spec, psi));
    }
    return sw;
}

// ---------------------------------------------------------------------------
// Weak limit.

namespace {

// Neville evaluation at 0 of the interpolating polynomial through (x_i, y_i).
cplx neville_at_zero(std::vector<double> x, std::vector<cplx> y) {
    const std::size_t n = x.size();
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            y[i] = (x[i + m] * y[i] - x[i] * y[i + 1]) / (x[i + m] - x[i]);
        }
    }
    return y[0];
}

}  // namespace

WeakLimitResult weak_limit_check(const LatticeSpec& spec, const StateVector& u, const StateVector& v,
                                 const QuadratureSpec& quad) {
    require_band_limited(u);
    require_band_limited(v);
    const GroupParams& p = spec.p;
    auto T = build_T(spec);
    Grid uh = to_diagonal_basis(T, u.data), vh = to_diagonal_basis(T, v.data);
    // Parseval: h sum conj(u) (X v) = (h / M) sum conj(uh) X vh for X diagonal in this basis.
    const double w = spec.h / spec.M;
    const double scale = u.norm() * v.norm();
    Grid pair = uh.conjugate().cwiseProduct(vh);

    WeakLimitResult res;
    const cplx denom = 2.0 * kI * std::sin(p.hbar());
    Grid sym = symbol_values(T, [&](const GammaPoint& z) {
        cplx qs = p.q() * to_complex(z, p);
        return (qs + std::conj(qs)) / denom;
    });
    res.rhs = w * pair.cwiseProduct(sym).sum() / scale;

    res.lambdas = {1e-2, 1e-3, 1e-4};
    for (double lam : res.lambdas) {
        const double ll = std::log(lam);
        Grid vals = symbol_values(T, [&](const GammaPoint& z) {
            GammaPoint s = GammaPoint::make(p, z.k, z.x + ll);
            return (F_N(s, p, quad) - 1.0) / lam;
        });
        cplx b = w * pair.cwiseProduct(vals).sum() / scale;
        res.brackets.push_back(b);
        res.distances.push_back(std::abs(b - res.rhs));
    }
    res.extrapolated = neville_at_zero(res.lambdas, res.brackets);
    res.distance = std::abs(res.extrapolated - res.rhs);
    res.decreasing = true;
    for (std::size_t i = 1; i < res.distances.size(); ++i) {
        if (!(res.distances[i] < res.distances[i - 1])) res.decreasing = false;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Scalar solution fitter.

std::vector<Sample> standard_samples(const std::function<cplx(const GammaPoint&)>& f, const GroupParams& p,
                                     const FitOptions& opts) {
    std::vector<Sample> out;
    for (int k = 0; k < p.N(); ++k) {
        GammaPoint z = GammaPoint::make(p, k, std::log(opts.slope_eps));
        out.push_back({z, f(z)});
        for (int i = 0; i <= 8; ++i) {
            GammaPoint r = GammaPoint::make(p, k, -2.0 + 0.5 * i);
            out.push_back({r, f(r)});
        }
    }
    return out;
}

FitResult fit_gamma(const std::vector<Sample>& samples, const GroupParams& p, const QuadratureSpec& quad,
                    const FitOptions& opts) {
    FitResult res;
    if (samples.empty()) throw DomainError("fit: no samples");
    for (const auto& s : samples) {
        if (s.z.is_zero) throw DomainError("fit: samples must lie on Gamma");
        if (!(std::abs(std::abs(s.value) - 1.0) <= opts.unimodular_tol)) {
            res.rejected = true;
            res.residual = std::abs(std::abs(s.value) - 1.0);
            res.verdict = "rejected: samples are not unimodular";
            return res;
        }
    }
    auto rms = [&](const std::function<cplx(const GammaPoint&)>& g) {
        double acc = 0;
        for (const auto& s : samples) acc += std::norm(s.value - g(s.z));
        return std::sqrt(acc / samples.size());
    };

    // Degenerate member gamma = 0 (f identically 1).
    double dev_one = rms([](const GammaPoint&) { return cplx(1.0); });
    if (dev_one <= opts.threshold) {
        res.gamma = GammaPoint::zero();
        res.residual = dev_one;
        res.in_family = true;
        res.verdict = "in family (gamma = 0)";
        return res;
    }

    // Stage 1: smallest-radius sample on each ray gives the slope (f - 1) / r.
    const int N = p.N();
    std::vector<cplx> slope(N);
    std::vector<double> rmin(N, 1e300);
    for (const auto& s : samples) {
        double r = std::exp(s.z.x);
        if (r < rmin[s.z.k]) {
            rmin[s.z.k] = r;
            slope[s.z.k] = (s.value - 1.0) / r;
        }
    }
    for (int k = 0; k < N; ++k) {
        if (!(rmin[k] <= 1e-3)) throw DomainError("fit: need a sample with |z| <= 1e-3 on every ray");
    }
    const double sh = std::sin(p.hbar());
    int best_a = -1;
    double best_amp = 0, best_err = 1e300;
    for (int a = 0; a < N; ++a) {
        double num = 0, den = 0, err = 0;
        std::vector<cplx> D(N);
        for (int k = 0; k < N; ++k) {
            D[k] = cplx(0.0, -std::cos((a + k + 1) * p.hbar()) / sh);
            num += std::real(std::conj(D[k]) * slope[k]);
            den += std::norm(D[k]);
        }
        double amp = num / den;
        if (!(amp > 0)) continue;
        for (int k = 0; k < N; ++k) err += std::norm(slope[k] - amp * D[k]);
        if (err < best_err) {
            best_err = err;
            best_a = a;
            best_amp = amp;
        }
    }
    if (best_a < 0) {
        res.residual = dev_one;
        res.verdict = "not in the F_N(gamma .) family: no consistent slope pattern";
        return res;
    }

    // Stage 2: refine log|gamma| with the phase index fixed.
    const double seed_x = std::log(best_amp);
    auto objective = [&](double x) {
        GammaPoint g = GammaPoint::make(p, best_a, x);
        double acc = 0;
        for (const auto& s : samples) acc += std::norm(s.value - F_N_scaled(g, s.z, p, quad));
        return acc;
    };
    std::uintmax_t iters = 200;
    auto best = boost::math::tools::brent_find_minima(objective, seed_x - 1.0, seed_x + 1.0,
                                                      std::numeric_limits<double>::digits / 2, iters);
    res.gamma = GammaPoint::make(p, best_a, best.first);
    res.residual = std::sqrt(best.second / samples.size());
    res.in_family = res.residual <= opts.threshold;
    res.verdict = res.in_family ? "in family" : "not in the F_N(gamma .) family";
    return res;
}

// ---------------------------------------------------------------------------
// Matrix solutions.

ResidualReport matrix_solution_check(const Eigen::MatrixXcd& M, const LatticeSpec& spec, const QuadratureSpec& quad,
                                     const MatrixSolutionOptions& opts) {
    const GroupParams& p = spec.p;
    if (M.rows() == 0 || M.rows() != M.cols()) throw DomainError("matrix solution: M must be square");
    const double scale = std::max(1.0, M.squaredNorm());
    double normal_defect = (M.adjoint() * M - M * M.adjoint()).cwiseAbs().maxCoeff();
    if (normal_defect > 1e-12 * scale) throw DomainError("matrix solution: M is not normal");
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(M);
    const Eigen::MatrixXcd Q = schur.matrixU();
    const Eigen::Index n = M.rows();
    std::vector<GammaPoint> eig;
    for (Eigen::Index i = 0; i < n; ++i) {
        cplx l = schur.matrixT()(i, i);
        if (std::abs(l) == 0.0) throw DomainError("matrix solution: M is singular");
        eig.push_back(from_complex(l, p, 1e-9));
    }

    auto f_of = [&](const GammaPoint& z) {
        Eigen::VectorXcd d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = F_N_scaled(eig[i], z, p, quad);
        return Eigen::MatrixXcd(Q * d.asDiagonal() * Q.adjoint());
    };

    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<int> kdist(0, p.N() - 1);
    std::uniform_real_distribution<double> xdist(-2.0, 2.0);
    std::vector<Eigen::MatrixXcd> fs;
    for (int s = 0; s < opts.samples; ++s) {
        int k = kdist(rng);
        double x = xdist(rng);
        fs.push_back(f_of(GammaPoint::make(p, k, x)));
    }
    double comm = 0, unit = 0;
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    for (std::size_t a = 0; a < fs.size(); ++a) {
        unit = std::max(unit, (fs[a] * fs[a].adjoint() - I).cwiseAbs().maxCoeff());
        for (std::size_t b = a + 1; b < fs.size(); ++b) {
            comm = std::max(comm, (fs[a] * fs[b] - fs[b] * fs[a]).cwiseAbs().maxCoeff());
        }
    }

    ResidualReport rep;
    rep.meta["N"] = p.N();
    rep.meta["M"] = spec.M;
    rep.meta["h"] = spec.h;
    rep.meta["kappa"] = spec.kappa;
    rep.meta["dim"] = static_cast<double>(n);
    rep.seed = static_cast<long long>(opts.seed);
    rep.set("normality", normal_defect);
    rep.set("commutativity", comm);
    rep.set("unitarity", unit);

    // On the eigen-block Q e_i (x) L^2 the pair (M (x) R, M (x) S) acts as
    // (lambda_i R, lambda_i S), so the tensor residual for the state
    // n^{-1/2} sum_i Q e_i (x) psi is the RMS of the scaled residuals.
    auto tensor_residual = [&](const LatticeSpec& s, const StateVector& psi) {
        double acc = 0;
        for (const auto& g : eig) acc += std::pow(scalar_solution_residual(s, g, psi, quad), 2);
        return std::sqrt(acc / static_cast<double>(n));
    };
    StateVector psi = default_packet(spec);
    rep.set("tensor_identity", tensor_residual(spec, psi));
    if (opts.refinement_levels > 0) {
        auto sw = refinement_sweep(spec, opts.refinement_levels, tensor_residual);
        for (std::size_t i = 0; i < sw.residuals.size(); ++i) {
            rep.set("tensor_sweep/level_" + std::to_string(i), sw.residuals[i]);
        }
        rep.meta["tensor_refinement_law"] = sw.refinement_law() ? 1.0 : 0.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Normality probe.

NormalityProbeResult normality_defect(cplx mu, const LatticeSpec& spec) {
    const GroupParams& p = spec.p;
    const int N = p.N();
    NormalityProbeResult res;
    res.mu = mu;
    const double mod = std::abs(mu);
    res.on_gamma = mod == 0.0 || classify_complex(mu, p, 1e-9).region == Region::Ray;

    // Sectors whose resolvent pole sits on the real x line are excluded.
    std::vector<bool> keep(N, true);
    if (mod > 0) {
        const double two_pi = 2.0 * kPi;
        for (int k = 0; k < N; ++k) {
            double y = std::fmod(std::arg(-std::conj(mu)) + p.hbar() * k, two_pi);
            if (y < 0) y += two_pi;
            for (double b : {0.0, p.hbar(), two_pi}) {
                if (std::abs(y - b) < 1e-9) keep[k] = false;
            }
            if (!keep[k]) ++res.excluded_sectors;
        }
    }

    auto S = build_S(spec);
    auto Sa = adjoint(S);
    const double c = mod > 0 ? std::log(mod) : 0.0;
    for (double xc : {c - 0.5, c, c + 0.5}) {
        StateVector g = StateVector::zeros(spec);
        StateVector psi = StateVector::zeros(spec);
        for (int k = 0; k < N; ++k) {
            if (!keep[k]) continue;
            for (int j = 0; j < spec.M; ++j) {
                double d = spec.x(j) - xc;
                cplx den = std::conj(mu) + std::conj(p.qpow(k) * std::exp(spec.x(j)));
                g.data(k, j) = (1.0 + 0.3 * k) * std::exp(-0.5 * d * d);
                psi.data(k, j) = g.data(k, j) / den;
            }
        }
        double n = psi.norm();
        psi.data /= n;
        g.data /= n;
        StateVector Qpsi = apply_operator(S, psi, true);
        for (int k = 0; k < N; ++k) {
            for (int j = 0; j < spec.M; ++j) Qpsi.data(k, j) *= mu + p.qpow(k) * std::exp(spec.x(j));
        }
        StateVector Qstar = apply_operator(Sa, g, true);
        double a = Qpsi.norm(), b = Qstar.norm();
        res.defect = std::max(res.defect, std::abs(a * a - b * b) / (b * b));
    }
    return res;
}

bool NormalityProbe::ordering_holds() const {
    if (on_gamma.empty() || off_gamma.empty()) return false;
    for (const auto& on : on_gamma) {
        for (const auto& off : off_gamma) {
            if (std::abs(std::abs(on.mu) - std::abs(off.mu)) > 1e-12 * std::abs(on.mu)) continue;
            if (!(separation * on.defect < off.defect)) return false;
        }
    }
    return true;
}

NormalityProbe normality_probe(const LatticeSpec& spec, const std::vector<double>& moduli) {
    NormalityProbe probe;
    const GroupParams& p = spec.p;
    for (double m : moduli) {
        if (!(m > 0)) throw DomainError("normality probe: moduli must be positive");
        for (int j = 0; j < p.N(); ++j) {
            probe.on_gamma.push_back(normality_defect(m * p.qpow(j), spec));
            probe.off_gamma.push_back(normality_defect(m * p.qhalf(2 * j + 1), spec));
        }
    }
    probe.at_zero = normality_defect(0.0, spec);
    return probe;
}

}  // namespace qexp
