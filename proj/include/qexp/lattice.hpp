/**
 * @file lattice.hpp
 * @brief Phase x log-radial discretisation of the Schroedinger pair (R, S) and an
 *        exact functional calculus for operators given in a known diagonal basis.
 *
 * A state is an N x M array psi(k, j) over phases q^k and radii e^{x_j},
 * x_j = x0 + j h, with Haar norm ||psi||^2 = h sum |psi|^2. The radial direction
 * is periodic with period L = M h; momenta are p_m = 2 pi m~ / L.
 *
 *   R = Phase R (x) e^{x}                         diagonal in (e_k, position)
 *   S = Phase S (x) F^{-1} e^{-hbar p} F          diagonal in (f_l, momentum)
 *   T = S^{-1} R = Phase T (x) C^* F^{-1} e^{hbar p} F C,  C = e^{i x^2 / (2 hbar)}
 *                                                 diagonal in (g_m, chirp momentum)
 */
#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qexp/core.hpp"
#include "qexp/report.hpp"
#include "qexp/weyl.hpp"

namespace qexp {

struct LatticeSpec {
    GroupParams p;
    int M = 256;
    double h = 0.0;
    double x0 = 0.0;
    double kappa = 0.0;  ///< hbar / h, recorded for reports

    /// h = hbar / kappa and, unless given, x0 = -M h / 2. M must be a power of two.
    static LatticeSpec make(const GroupParams& p, int M, double kappa);
    static LatticeSpec make(const GroupParams& p, int M, double kappa, double x0);

    int N() const { return p.N(); }
    double L() const { return M * h; }
    double x(int j) const { return x0 + j * h; }
    /// Momentum of FFT bin j (numpy fftfreq ordering).
    double momentum(int j) const;
    double p_max() const { return kPi / h; }
    /// Momentum cutoff for unbounded symbols e^{+-hbar p}: the central half
    /// p_max / 2, capped so that e^{hbar p} stays below 1e8 on refined grids.
    double band_cutoff() const;
    void validate() const;
};

using Grid = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct StateVector {
    LatticeSpec spec;
    Grid data;  ///< N x M, row k = phase index
    bool band_limited = false;

    static StateVector zeros(const LatticeSpec& spec);
    double norm() const;
    void normalize();
};

/// h * sum conj(u) v.
cplx inner(const StateVector& u, const StateVector& v);
StateVector operator+(const StateVector& a, const StateVector& b);
StateVector operator-(const StateVector& a, const StateVector& b);
StateVector operator*(cplx s, const StateVector& a);

/// Fraction of the norm carried by momenta outside the central half |p| <= p_max / 2.
double momentum_tail(const StateVector& psi);

/// psi(k, j) = w_k exp(-(x_j - c)^2 / (2 width^2)), normalised. DomainError if c is
/// outside the central half of the box; width < 4h leaves band_limited false.
StateVector make_wavepacket(const LatticeSpec& spec, const std::vector<cplx>& k_weights, double x_center,
                            double width);

using ScalarFn = std::function<cplx(const GammaPoint&)>;

enum class OperatorKind { PositionDiagonal, PhaseFourierMomentumDiagonal, ConjugatedDiagonal, DenseNormal };
enum class RadialBasis { Position, Fourier, ChirpFourier };

/// A normal operator in one of a few structured forms. For the diagonal kinds
/// the operator is B (phase_basis (x) radial) diag(symbol) (B (x) radial)^{-1}
/// with symbol(l, j) = q^{phase_index[l]} e^{log_modulus[j]}. A ConjugatedDiagonal
/// with a conjugator is left_fn(U_op) D right_fn(U_op).
struct StructuredOperator {
    OperatorKind kind = OperatorKind::PositionDiagonal;
    std::string name;
    LatticeSpec spec;
    PhaseMatrix phase_basis;
    std::vector<int> phase_index;
    RadialBasis radial = RadialBasis::Position;
    std::vector<double> log_modulus;
    double chirp_sign = 0.0;  ///< C = e^{i chirp_sign x^2 / (2 hbar)} for ChirpFourier

    std::shared_ptr<const StructuredOperator> conjugator;
    ScalarFn left_fn, right_fn;

    Eigen::MatrixXcd dense;  ///< DenseNormal only

    GammaPoint symbol(int l, int j) const;
};

StructuredOperator build_R(const LatticeSpec& spec);
StructuredOperator build_S(const LatticeSpec& spec);
/// T = S^{-1} R in its chirp-diagonal form.
StructuredOperator build_T(const LatticeSpec& spec);
/// T^{-1} = R^{-1} S, sharing the chirp-diagonal basis of T.
StructuredOperator build_T_inverse(const LatticeSpec& spec);
/// Adjoint of a diagonal-kind operator (conjugate symbol, same basis).
StructuredOperator adjoint(const StructuredOperator& op);
/// Dense matrix of a structured operator's function (N M x N M); oracle use only,
/// limited to N M <= 1024.
Eigen::MatrixXcd dense_matrix(const StructuredOperator& op, const ScalarFn& fn);
/// DenseNormal descriptor from an explicit normal matrix (N M <= 1024).
StructuredOperator make_dense(const LatticeSpec& spec, const Eigen::MatrixXcd& m, const std::string& name);

/// Values fn(symbol(l, j)) on the whole diagonal grid, evaluated in parallel.
Grid symbol_values(const StructuredOperator& op, const ScalarFn& fn);

/// Transforms into and out of the operator's own diagonal basis.
Grid to_diagonal_basis(const StructuredOperator& op, const Grid& psi);
Grid from_diagonal_basis(const StructuredOperator& op, const Grid& coeffs);

/// fn(op) psi. Unimodular fn gives a unitary map.
StateVector apply_function(const StructuredOperator& op, const ScalarFn& fn, const StateVector& psi);
/// Same with precomputed diagonal values (reuse across calls).
StateVector apply_values(const StructuredOperator& op, const Grid& values, const StateVector& psi);
/// op psi itself (symbol as the function). If band_limit is set, the symbol is
/// zeroed for momenta beyond band_cutoff() before multiplying.
StateVector apply_operator(const StructuredOperator& op, const StateVector& psi, bool band_limit = false);

/// Identity and F_N as ScalarFn helpers.
ScalarFn fn_identity_value(const GroupParams& p);
ScalarFn fn_F_N(const GroupParams& p);
ScalarFn fn_F_N_scaled(const GroupParams& p, const GammaPoint& gamma);

/// ||S^{-1}(R psi) - T psi|| / ||T psi||: the composed form of T against its
/// chirp-diagonal form. S^{-1} is applied with the band limit of band_cutoff().
double t_composition_residual(const LatticeSpec& spec, const StateVector& psi);

/// Pair relations of (R, S) and its transforms on band-limited packets:
/// exact phase Weyl relation and modulus dilation at lattice-exact t.
ResidualReport pair_transform_check(const LatticeSpec& spec);

/// Columnar CSV: "N,M,h,x0" header row and values, then "k,j,re,im" rows.
void write_state_csv(std::ostream& os, const StateVector& psi);
StateVector read_state_csv(std::istream& is);

}  // namespace qexp
