/**
 * @file verify.hpp
 * @brief Residual suites for the operator identities satisfied by F_N on the
 *        lattice pair (R, S): closure sums, the exponential equation, the weak
 *        limit, scalar and matrix solution families and the normality probe.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qexp/lattice.hpp"
#include "qexp/report.hpp"
#include "qexp/special.hpp"

namespace qexp {

/// Forms of the closure R +. S as a unitary conjugation of a diagonal operator.
///   S         F_N(T)^* S F_N(T),                 T = S^{-1} R
///   RPlain    F_N(T') R F_N(T'),                 T' = R^{-1} S (star-free form)
///   RStarred  F_N(T')^* R F_N(T')
///   RShifted  F_N(q^{-2} T') R F_N(q^{-2} T')^*
enum class ClosureForm { S, RPlain, RStarred, RShifted };

std::string to_string(ClosureForm form);
ClosureForm closure_form_from_string(const std::string& name);

/// The closure as a ConjugatedDiagonal descriptor; apply_function(op, fn, psi)
/// evaluates fn(R +. S) psi through the descriptor's diagonal basis.
StructuredOperator closure_sum(const LatticeSpec& spec, ClosureForm form, const QuadratureSpec& quad = {});

/// The R-form used for form agreement checks.
inline constexpr ClosureForm kConsistentRForm = ClosureForm::RShifted;

/// Test packet used throughout the harness: unit-normal complex phase weights
/// drawn from `seed`, Gaussian radial profile of the given width around `center`.
StateVector default_packet(const LatticeSpec& spec, std::uint64_t seed = 1, double width = 0.0,
                           double center = 0.0);

/// ||F_N(R) F_N(S) psi - F_N(R +. S) psi|| / ||psi|| with the S-form closure.
/// DomainError unless psi is band limited.
double exp_identity_residual(const LatticeSpec& spec, const StateVector& psi, const QuadratureSpec& quad = {});

/// Same with F_N replaced by the constant function 1 on the left-hand side only:
/// ||S-side mismatch|| used as a negative control.
double exp_identity_control_residual(const LatticeSpec& spec, const StateVector& psi,
                                     const QuadratureSpec& quad = {});

/// Same identity for f = F_N(gamma .). Exactly 0 for gamma = 0.
double scalar_solution_residual(const LatticeSpec& spec, const GammaPoint& gamma, const StateVector& psi,
                                const QuadratureSpec& quad = {});

/// ||F_N(S-form) psi - F_N(`form`) psi|| / ||psi||.
double closure_form_residual(const LatticeSpec& spec, ClosureForm form, const StateVector& psi,
                             const QuadratureSpec& quad = {});

/// Refinement sweep: level i uses h / 2^i and 4^i M (the box doubles each level)
/// with the packet held fixed in x. The packet width defaults to hbar.
struct RefinementSweep {
    std::vector<double> h;
    std::vector<int> M;
    std::vector<double> residuals;
    double floor = 1e-7;
    /// Every step shrinks by >= 2 or both ends are already at or below the floor.
    bool refinement_law() const;
    /// Residuals never increase.
    bool monotone() const;
};

using ResidualAtGrid = std::function<double(const LatticeSpec&, const StateVector&)>;
RefinementSweep refinement_sweep(const LatticeSpec& base, int levels, const ResidualAtGrid& residual,
                                 std::uint64_t seed = 1, double width = 0.0, double center = 0.0);

struct WeakLimitResult {
    std::vector<double> lambdas;
    std::vector<cplx> brackets;
    std::vector<double> distances;  ///< |bracket(lambda) - rhs| for each lambda
    cplx extrapolated;
    cplx rhs;
    double distance = 0.0;  ///< |extrapolated - rhs|
    bool decreasing = false;
};

/// <u|(F_N(lambda T) - I)/lambda|v> at lambda in {1e-2, 1e-3, 1e-4}, extrapolated to
/// lambda -> 0 and compared to <u|(q T + conj(q) T^*)|v> / (2 i sin hbar). Both
/// states must be band limited; the brackets are evaluated in the T-diagonal basis.
WeakLimitResult weak_limit_check(const LatticeSpec& spec, const StateVector& u, const StateVector& v,
                                 const QuadratureSpec& quad = {});

struct Sample {
    GammaPoint z;
    cplx value;
};

struct FitResult {
    GammaPoint gamma;
    double residual = 0.0;   ///< RMS of f(z_i) - F_N(gamma z_i)
    bool rejected = false;   ///< samples not unimodular
    bool in_family = false;  ///< residual <= threshold
    std::string verdict;
};

struct FitOptions {
    double unimodular_tol = 1e-8;
    double threshold = 1e-7;
    double slope_eps = 1e-6;
};

/// Recovers gamma from samples of a unimodular function on Gamma. Stage 1 seeds
/// the phase index and modulus from the small-argument slopes along every ray,
/// stage 2 refines log|gamma| by a bracketed 1-D least-squares minimisation.
FitResult fit_gamma(const std::vector<Sample>& samples, const GroupParams& p, const QuadratureSpec& quad = {},
                    const FitOptions& opts = {});

/// The sample set used for functions given as callables: slopes at slope_eps on
/// every ray plus radii e^{-2}, ..., e^{2} on every ray.
std::vector<Sample> standard_samples(const std::function<cplx(const GammaPoint&)>& f, const GroupParams& p,
                                     const FitOptions& opts = {});

struct MatrixSolutionOptions {
    int samples = 8;
    std::uint64_t seed = 7;
    int refinement_levels = 0;  ///< > 0 adds a tensor refinement sweep
};

/// f(z) = F_N(M z) for a small normal M with spectrum in Gamma. Reports the
/// commutativity residual of f over sampled points and the tensor exponential
/// identity for (M (x) R, M (x) S), computed per eigen-block.
ResidualReport matrix_solution_check(const Eigen::MatrixXcd& M, const LatticeSpec& spec,
                                     const QuadratureSpec& quad = {}, const MatrixSolutionOptions& opts = {});

struct NormalityProbeResult {
    cplx mu;
    double defect = 0.0;
    bool on_gamma = false;
    int excluded_sectors = 0;
};

/// Weak-form defect |<Q psi, Q psi> - <Q^* psi, Q^* psi>| / ||Q^* psi||^2 with
/// Q = mu S + R S, maximised over the resolvent family psi = g / (conj(mu) + R^*)
/// with g a unit-width Gaussian at log|mu| + {-1/2, 0, 1/2}. S is applied with the
/// band limit of band_cutoff().
NormalityProbeResult normality_defect(cplx mu, const LatticeSpec& spec);

struct NormalityProbe {
    std::vector<NormalityProbeResult> on_gamma;
    std::vector<NormalityProbeResult> off_gamma;
    NormalityProbeResult at_zero;
    double separation = 5.0;
    /// For every modulus, separation * max(on) < min(off).
    bool ordering_holds() const;
};

/// mu on every ray and at every mid-sector angle for each modulus, plus mu = 0.
NormalityProbe normality_probe(const LatticeSpec& spec, const std::vector<double>& moduli = {0.5, 1.0, 2.0});

}  // namespace qexp
