/**
 * @file weyl.hpp
 * @brief The N-dimensional phase algebra: clock, shift and their product, with
 *        the eigenbases e_k, f_l, g_m and their overlap identities.
 */
#pragma once

#include <Eigen/Dense>

#include "qexp/core.hpp"
#include "qexp/report.hpp"

namespace qexp {

using PhaseMatrix = Eigen::MatrixXcd;

/// diag(1, q, ..., q^{N-1}).
PhaseMatrix phase_R(const GroupParams& p);
/// Cyclic shift (S v)_k = v_{k+1 mod N}: superdiagonal ones and a one in the
/// lower-left corner. Only the dimension matters, so any N >= 1 is accepted.
PhaseMatrix phase_S(int N);
inline PhaseMatrix phase_S(const GroupParams& p) { return phase_S(p.N()); }
/// q^{-1/2} (Phase S)^* (Phase R) with q^{1/2} = e^{i pi / N}.
PhaseMatrix phase_T(const GroupParams& p);

struct PhaseBases {
    PhaseMatrix e;  ///< columns e_k: standard basis
    PhaseMatrix f;  ///< columns f_l: (f_l)_j = q^{jl} / sqrt(N)
    PhaseMatrix g;  ///< columns g_m: (g_m)_p = q^{(p^2 - 2p(m+1))/2} / sqrt(N)
};

PhaseBases basis_vectors(const GroupParams& p);

/// Eigenvalue of Phase S on f_l: q^l.
cplx phase_S_eigenvalue(int l, const GroupParams& p);
/// Eigenvalue of Phase T on g_m: q^m.
cplx phase_T_eigenvalue(int m, const GroupParams& p);

/// Entrywise checks of the overlap identities, the chirp-sum closed form, Gram
/// matrices, eigen-relations and the Weyl relation. Residual names are stable.
ResidualReport overlap_identities_report(const GroupParams& p);

}  // namespace qexp
