#include "qexp/lattice.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <istream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "qexp/parallel.hpp"
#include "qexp/special.hpp"

namespace qexp {

// ---------------------------------------------------------------------------
// FFT along rows of a row-major N x M grid.

namespace {

std::mutex plan_mutex;

fftw_plan row_plan(int rows, int M, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(rows, M, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(rows) * M);
    int n[] = {M};
    fftw_plan plan = fftw_plan_many_dft(1, n, rows, buf, nullptr, 1, M, buf, nullptr, 1, M, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache.emplace(key, plan);
    return plan;
}

void fft_rows(Grid& g, bool inverse) {
    const int rows = static_cast<int>(g.rows()), M = static_cast<int>(g.cols());
    auto* ptr = reinterpret_cast<fftw_complex*>(g.data());
    fftw_execute_dft(row_plan(rows, M, inverse ? FFTW_BACKWARD : FFTW_FORWARD), ptr, ptr);
    if (inverse) g /= static_cast<double>(M);
}

std::vector<cplx> chirp(const LatticeSpec& spec, double sign) {
    std::vector<cplx> c(spec.M);
    for (int j = 0; j < spec.M; ++j) {
        double x = spec.x(j);
        c[j] = std::polar(1.0, sign * x * x / (2.0 * spec.p.hbar()));
    }
    return c;
}

void scale_columns(Grid& g, const std::vector<cplx>& c, bool conjugate) {
    for (Eigen::Index k = 0; k < g.rows(); ++k) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(k, j) *= conjugate ? std::conj(c[j]) : c[j];
    }
}

bool is_identity(const PhaseMatrix& m) {
    return m.rows() == m.cols() && (m - PhaseMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid and states.

LatticeSpec LatticeSpec::make(const GroupParams& p, int M, double kappa) {
    double h = p.hbar() / kappa;
    return make(p, M, kappa, -0.5 * M * h);
}

LatticeSpec LatticeSpec::make(const GroupParams& p, int M, double kappa, double x0) {
    LatticeSpec s;
    s.p = p;
    s.M = M;
    s.kappa = kappa;
    s.h = p.hbar() / kappa;
    s.x0 = x0;
    s.validate();
    return s;
}

void LatticeSpec::validate() const {
    if (M < 2 || (M & (M - 1)) != 0) throw DomainError("lattice: M must be a power of two >= 2");
    if (!(h > 0) || !std::isfinite(h)) throw DomainError("lattice: h must be positive");
    if (!std::isfinite(x0)) throw DomainError("lattice: x0 must be finite");
}

double LatticeSpec::momentum(int j) const {
    int m = j < M / 2 ? j : j - M;
    return 2.0 * kPi * m / L();
}

double LatticeSpec::band_cutoff() const { return std::min(0.5 * p_max(), 8.0 * std::log(10.0) / p.hbar()); }

StateVector StateVector::zeros(const LatticeSpec& spec) {
    StateVector s;
    s.spec = spec;
    s.data = Grid::Zero(spec.N(), spec.M);
    return s;
}

double StateVector::norm() const { return std::sqrt(spec.h * data.squaredNorm()); }

void StateVector::normalize() {
    double n = norm();
    if (!(n > 0)) throw DomainError("cannot normalise a zero state");
    data /= n;
}

cplx inner(const StateVector& u, const StateVector& v) {
    return u.spec.h * (u.data.conjugate().cwiseProduct(v.data)).sum();
}

StateVector operator+(const StateVector& a, const StateVector& b) {
    StateVector r = a;
    r.data += b.data;
    r.band_limited = a.band_limited && b.band_limited;
    return r;
}

StateVector operator-(const StateVector& a, const StateVector& b) {
    StateVector r = a;
    r.data -= b.data;
    r.band_limited = a.band_limited && b.band_limited;
    return r;
}

StateVector operator*(cplx s, const StateVector& a) {
    StateVector r = a;
    r.data *= s;
    return r;
}

double momentum_tail(const StateVector& psi) {
    Grid g = psi.data;
    fft_rows(g, false);
    const auto& s = psi.spec;
    double out = 0, all = 0;
    for (int k = 0; k < g.rows(); ++k) {
        for (int j = 0; j < s.M; ++j) {
            double w = std::norm(g(k, j));
            all += w;
            if (std::abs(s.momentum(j)) > 0.5 * s.p_max()) out += w;
        }
    }
    return all > 0 ? std::sqrt(out / all) : 0.0;
}

StateVector make_wavepacket(const LatticeSpec& spec, const std::vector<cplx>& k_weights, double x_center,
                            double width) {
    if (static_cast<int>(k_weights.size()) != spec.N()) throw DomainError("wavepacket: need N phase weights");
    double lo = spec.x0 + 0.25 * spec.L(), hi = spec.x0 + 0.75 * spec.L();
    if (x_center < lo || x_center > hi) throw DomainError("wavepacket: centre outside the central half");
    if (!(width > 0)) throw DomainError("wavepacket: width must be positive");
    StateVector s = StateVector::zeros(spec);
    for (int k = 0; k < spec.N(); ++k) {
        for (int j = 0; j < spec.M; ++j) {
            double d = spec.x(j) - x_center;
            s.data(k, j) = k_weights[k] * std::exp(-d * d / (2.0 * width * width));
        }
    }
    s.normalize();
    double tail = std::exp(-0.5 * std::pow(width * spec.p_max() / 2.0, 2));
    s.band_limited = width >= 4.0 * spec.h && tail < 1e-12;
    return s;
}

// ---------------------------------------------------------------------------
// Structured operators.

GammaPoint StructuredOperator::symbol(int l, int j) const {
    return GammaPoint::make(spec.p, phase_index[l], log_modulus[j]);
}

StructuredOperator build_R(const LatticeSpec& spec) {
    StructuredOperator op;
    op.kind = OperatorKind::PositionDiagonal;
    op.name = "R";
    op.spec = spec;
    op.phase_basis = PhaseMatrix::Identity(spec.N(), spec.N());
    for (int k = 0; k < spec.N(); ++k) op.phase_index.push_back(k);
    op.radial = RadialBasis::Position;
    for (int j = 0; j < spec.M; ++j) op.log_modulus.push_back(spec.x(j));
    return op;
}

StructuredOperator build_S(const LatticeSpec& spec) {
    StructuredOperator op;
    op.kind = OperatorKind::PhaseFourierMomentumDiagonal;
    op.name = "S";
    op.spec = spec;
    op.phase_basis = basis_vectors(spec.p).f;
    for (int l = 0; l < spec.N(); ++l) op.phase_index.push_back(l);
    op.radial = RadialBasis::Fourier;
    // |S| = e^{-hbar p}: |S|^{it} translates by hbar t, so |S|^{it}|R||S|^{-it} = e^{-hbar t}|R|.
    for (int j = 0; j < spec.M; ++j) op.log_modulus.push_back(-spec.p.hbar() * spec.momentum(j));
    return op;
}

StructuredOperator build_T(const LatticeSpec& spec) {
    StructuredOperator op;
    op.kind = OperatorKind::ConjugatedDiagonal;
    op.name = "T";
    op.spec = spec;
    op.phase_basis = basis_vectors(spec.p).g;
    for (int m = 0; m < spec.N(); ++m) op.phase_index.push_back(m);
    op.radial = RadialBasis::ChirpFourier;
    op.chirp_sign = 1.0;
    for (int j = 0; j < spec.M; ++j) op.log_modulus.push_back(spec.p.hbar() * spec.momentum(j));
    return op;
}

StructuredOperator build_T_inverse(const LatticeSpec& spec) {
    StructuredOperator op = build_T(spec);
    op.name = "T^-1";
    for (auto& m : op.phase_index) m = spec.p.mod(-m);
    for (auto& v : op.log_modulus) v = -v;
    return op;
}

StructuredOperator adjoint(const StructuredOperator& op) {
    if (op.kind == OperatorKind::DenseNormal) {
        StructuredOperator r = op;
        r.dense = op.dense.adjoint();
        r.name = op.name + "*";
        return r;
    }
    if (op.conjugator) throw DomainError("adjoint: conjugated closures are not supported");
    StructuredOperator r = op;
    r.name = op.name + "*";
    for (auto& m : r.phase_index) m = op.spec.p.mod(-m);
    return r;
}

Grid to_diagonal_basis(const StructuredOperator& op, const Grid& psi) {
    Grid c = is_identity(op.phase_basis) ? psi : Grid(op.phase_basis.adjoint() * psi);
    switch (op.radial) {
        case RadialBasis::Position:
            break;
        case RadialBasis::Fourier:
            fft_rows(c, false);
            break;
        case RadialBasis::ChirpFourier:
            scale_columns(c, chirp(op.spec, op.chirp_sign), false);
            fft_rows(c, false);
            break;
    }
    return c;
}

Grid from_diagonal_basis(const StructuredOperator& op, const Grid& coeffs) {
    Grid c = coeffs;
    switch (op.radial) {
        case RadialBasis::Position:
            break;
        case RadialBasis::Fourier:
            fft_rows(c, true);
            break;
        case RadialBasis::ChirpFourier:
            fft_rows(c, true);
            scale_columns(c, chirp(op.spec, op.chirp_sign), true);
            break;
    }
    if (!is_identity(op.phase_basis)) c = op.phase_basis * c;
    return c;
}

Grid symbol_values(const StructuredOperator& op, const ScalarFn& fn) {
    if (op.kind == OperatorKind::DenseNormal) throw DomainError("symbol_values: dense operators have no grid symbol");
    const int N = op.spec.N(), M = op.spec.M;
    Grid v(N, M);
    parallel_for(static_cast<std::size_t>(N) * M, [&](std::size_t i) {
        int l = static_cast<int>(i / M), j = static_cast<int>(i % M);
        v(l, j) = fn(op.symbol(l, j));
    });
    return v;
}

namespace {

StateVector apply_dense(const StructuredOperator& op, const ScalarFn& fn, const StateVector& psi) {
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(op.dense);
    const Eigen::MatrixXcd& U = schur.matrixU();
    Eigen::VectorXcd d(op.dense.rows());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        d(i) = fn(from_complex(schur.matrixT()(i, i), op.spec.p, 1e-8));
    }
    Eigen::Map<const Eigen::VectorXcd> v(psi.data.data(), psi.data.size());
    Eigen::VectorXcd w = U * d.asDiagonal() * (U.adjoint() * v);
    StateVector out = psi;
    out.data = Eigen::Map<Grid>(w.data(), psi.data.rows(), psi.data.cols());
    return out;
}

}  // namespace

StateVector apply_values(const StructuredOperator& op, const Grid& values, const StateVector& psi) {
    StateVector cur = psi;
    if (op.conjugator) cur = apply_function(*op.conjugator, op.right_fn, cur);
    Grid c = to_diagonal_basis(op, cur.data);
    c = c.cwiseProduct(values);
    cur.data = from_diagonal_basis(op, c);
    if (op.conjugator) cur = apply_function(*op.conjugator, op.left_fn, cur);
    return cur;
}

StateVector apply_function(const StructuredOperator& op, const ScalarFn& fn, const StateVector& psi) {
    if (op.kind == OperatorKind::DenseNormal) return apply_dense(op, fn, psi);
    return apply_values(op, symbol_values(op, fn), psi);
}

StateVector apply_operator(const StructuredOperator& op, const StateVector& psi, bool band_limit) {
    if (op.kind == OperatorKind::DenseNormal) {
        StateVector out = psi;
        Eigen::Map<const Eigen::VectorXcd> v(psi.data.data(), psi.data.size());
        Eigen::VectorXcd w = op.dense * v;
        out.data = Eigen::Map<Grid>(w.data(), psi.data.rows(), psi.data.cols());
        return out;
    }
    const auto& p = op.spec.p;
    Grid values = symbol_values(op, [&](const GammaPoint& z) { return to_complex(z, p); });
    if (band_limit && op.radial != RadialBasis::Position) {
        for (int j = 0; j < op.spec.M; ++j) {
            if (std::abs(op.spec.momentum(j)) > op.spec.band_cutoff()) values.col(j).setZero();
        }
    }
    return apply_values(op, values, psi);
}

Eigen::MatrixXcd dense_matrix(const StructuredOperator& op, const ScalarFn& fn) {
    const int N = op.spec.N(), M = op.spec.M;
    const int D = N * M;
    if (D > 1024) throw DomainError("dense_matrix: only for N*M <= 1024");
    Eigen::MatrixXcd out(D, D);
    Grid values = op.kind == OperatorKind::DenseNormal ? Grid() : symbol_values(op, fn);
    for (int c = 0; c < D; ++c) {
        StateVector e = StateVector::zeros(op.spec);
        e.data(c / M, c % M) = 1.0;
        StateVector r = op.kind == OperatorKind::DenseNormal ? apply_dense(op, fn, e) : apply_values(op, values, e);
        out.col(c) = Eigen::Map<const Eigen::VectorXcd>(r.data.data(), D);
    }
    return out;
}

StructuredOperator make_dense(const LatticeSpec& spec, const Eigen::MatrixXcd& m, const std::string& name) {
    if (spec.N() * spec.M > 1024) throw DomainError("make_dense: only for N*M <= 1024");
    StructuredOperator op;
    op.kind = OperatorKind::DenseNormal;
    op.name = name;
    op.spec = spec;
    op.dense = m;
    return op;
}

ScalarFn fn_identity_value(const GroupParams&) {
    return [](const GammaPoint&) { return cplx(1.0, 0.0); };
}

ScalarFn fn_F_N(const GroupParams& p) {
    return [p](const GammaPoint& z) { return F_N(z, p); };
}

ScalarFn fn_F_N_scaled(const GroupParams& p, const GammaPoint& gamma) {
    return [p, gamma](const GammaPoint& z) { return F_N_scaled(gamma, z, p); };
}

namespace {

// Norm over the central half of the box, where e^{x} stays moderate.
double window_norm(const LatticeSpec& spec, const Grid& g) {
    double acc = 0;
    for (int j = spec.M / 4; j < 3 * spec.M / 4; ++j) acc += g.col(j).squaredNorm();
    return std::sqrt(spec.h * acc);
}

}  // namespace

double t_composition_residual(const LatticeSpec& spec, const StateVector& psi) {
    const auto& p = spec.p;
    auto S = build_S(spec);
    Grid inv = symbol_values(S, [&](const GammaPoint& z) { return to_complex(gamma_inv(z, p), p); });
    for (int j = 0; j < spec.M; ++j) {
        if (std::abs(spec.momentum(j)) > spec.band_cutoff()) inv.col(j).setZero();
    }
    StateVector composed = apply_values(S, inv, apply_operator(build_R(spec), psi));
    StateVector direct = apply_operator(build_T(spec), psi, true);
    return window_norm(spec, composed.data - direct.data) / window_norm(spec, direct.data);
}

// ---------------------------------------------------------------------------
// Pair relations.

namespace {

// Polar data of an operator A = Phase(A) (x) |A| where |A| is e^{scale} e^{sigma x}
// (position type) or e^{scale} C_c^* e^{sigma hbar p} C_c (momentum type).
struct Polar {
    PhaseMatrix phase;
    bool momentum = false;
    double sigma = 1.0;
    double chirp = 0.0;
    double scale = 0.0;
};

// |A|^s psi for complex s.
Grid modulus_power(const Polar& a, cplx s, const LatticeSpec& spec, const Grid& psi) {
    Grid g = psi;
    const double hb = spec.p.hbar();
    if (!a.momentum) {
        for (int j = 0; j < spec.M; ++j) g.col(j) *= std::exp(s * (a.scale + a.sigma * spec.x(j)));
        return g;
    }
    auto c = chirp(spec, a.chirp);
    scale_columns(g, c, false);
    fft_rows(g, false);
    for (int j = 0; j < spec.M; ++j) {
        // Real powers are unbounded on high momenta and are cut at band_cutoff().
        bool cut = s.real() != 0.0 && std::abs(spec.momentum(j)) > spec.band_cutoff();
        g.col(j) *= cut ? cplx(0.0) : std::exp(s * (a.scale + a.sigma * hb * spec.momentum(j)));
    }
    fft_rows(g, true);
    scale_columns(g, c, true);
    return g;
}


}  // namespace

ResidualReport pair_transform_check(const LatticeSpec& spec) {
    const auto& p = spec.p;
    const PhaseMatrix R = phase_R(p), S = phase_S(p), T = phase_T(p);
    std::vector<cplx> w(p.N());
    for (int k = 0; k < p.N(); ++k) w[k] = std::polar(1.0 + 0.1 * k, 0.7 * k);
    StateVector psi = make_wavepacket(spec, w, spec.x0 + 0.5 * spec.L(), 8.0 * spec.h);

    struct Pair {
        std::string name;
        Polar a, b;
    };
    const cplx g1 = p.qpow(1), g2 = p.qpow(2);
    std::vector<Pair> pairs = {
        {"R_S", {R, false, 1.0}, {S, true, -1.0}},
        {"Rstar_Sstar", {R.adjoint(), false, 1.0}, {S.adjoint(), true, -1.0}},
        {"Sinv_R", {S.adjoint(), true, 1.0}, {R, false, 1.0}},
        {"S_Rinv", {S, true, -1.0}, {R.adjoint(), false, -1.0}},
        {"R_SR", {R, false, 1.0}, {p.qhalf(1) * S * R, true, -1.0, -1.0}},
        {"T_R", {T, true, 1.0, 1.0}, {R, false, 1.0}},
        {"scaled_R_S", {g1 * R, false, 1.0, 0.0, 0.4}, {g2 * S, true, -1.0, 0.0, -0.3}},
    };

    ResidualReport rep;
    rep.meta["N"] = p.N();
    rep.meta["M"] = spec.M;
    rep.meta["h"] = spec.h;
    rep.meta["kappa"] = spec.kappa;
    rep.meta["packet_width"] = 8.0 * spec.h;
    for (const auto& pr : pairs) {
        double weyl = (pr.b.phase * pr.a.phase * pr.b.phase.adjoint() - p.q() * pr.a.phase).cwiseAbs().maxCoeff();
        rep.set(pr.name + "/weyl", weyl);
        double worst = 0;
        for (int n : {1, 2, -3}) {
            double t = n * spec.h / p.hbar();
            Grid absA = modulus_power(pr.a, 1.0, spec, psi.data);
            Grid lhs = modulus_power(pr.b, cplx(0, -t), spec, psi.data);
            lhs = modulus_power(pr.a, 1.0, spec, lhs);
            lhs = modulus_power(pr.b, cplx(0, t), spec, lhs);
            Grid rhs = std::exp(-p.hbar() * t) * absA;
            worst = std::max(worst, window_norm(spec, lhs - rhs) / window_norm(spec, rhs));
        }
        rep.set(pr.name + "/dilation", worst);
    }

    // Derived relations SR = q^2 RS and S R^* = R^* S on the packet. S is band
    // limited and the comparison is restricted to the central half of the box:
    // R amplifies the round-off floor left by |S| by up to e^{x} at the edges.
    auto Rop = build_R(spec), Sop = build_S(spec), Rs = adjoint(Rop);
    auto window = [&](const Grid& g) { return window_norm(spec, g); };
    auto SR = apply_operator(Sop, apply_operator(Rop, psi), true);
    auto RS = apply_operator(Rop, apply_operator(Sop, psi, true));
    rep.set("derived/SR_q2RS", window(SR.data - p.qpow(2) * RS.data) / window(RS.data));
    auto SRs = apply_operator(Sop, apply_operator(Rs, psi), true);
    auto RsS = apply_operator(Rs, apply_operator(Sop, psi, true));
    rep.set("derived/SRstar_RstarS", window(SRs.data - RsS.data) / window(RsS.data));
    return rep;
}

// ---------------------------------------------------------------------------
// CSV I/O.

void write_state_csv(std::ostream& os, const StateVector& psi) {
    const auto& s = psi.spec;
    os << std::setprecision(17);
    os << "N,M,h,x0\n" << s.N() << ',' << s.M << ',' << s.h << ',' << s.x0 << '\n';
    os << "k,j,re,im\n";
    for (int k = 0; k < s.N(); ++k) {
        for (int j = 0; j < s.M; ++j) {
            os << k << ',' << j << ',' << psi.data(k, j).real() << ',' << psi.data(k, j).imag() << '\n';
        }
    }
}

StateVector read_state_csv(std::istream& is) {
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(is, line)) throw DomainError(std::string("state csv: missing ") + what);
    };
    next("header");
    if (line.rfind("N,M,h,x0", 0) != 0) throw DomainError("state csv: bad header");
    next("grid values");
    int N = 0, M = 0;
    double h = 0, x0 = 0;
    char c1, c2, c3;
    std::istringstream hs(line);
    if (!(hs >> N >> c1 >> M >> c2 >> h >> c3 >> x0)) throw DomainError("state csv: bad grid values");
    GroupParams p(N);
    LatticeSpec spec = LatticeSpec::make(p, M, p.hbar() / h, x0);
    spec.h = h;
    next("column header");
    StateVector s = StateVector::zeros(spec);
    long count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int k, j;
        double re, im;
        if (!(ls >> k >> c1 >> j >> c2 >> re >> c3 >> im) || k < 0 || k >= N || j < 0 || j >= M) {
            throw DomainError("state csv: bad row '" + line + "'");
        }
        s.data(k, j) = cplx(re, im);
        ++count;
    }
    if (count != static_cast<long>(N) * M) throw DomainError("state csv: wrong number of rows");
    return s;
}

}  // namespace qexp
