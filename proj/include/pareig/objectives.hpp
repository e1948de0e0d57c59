#pragma once

#include "pareig/eigensolver.hpp"
#include "pareig/grid.hpp"
#include "pareig/pde_ops.hpp"

#include <optional>

namespace pareig {

struct ObjectiveEval {
  double value = 0.0;
  /// Unweighted sum of U^{2k} (Talenti only).
  double raw_sum = 0.0;
  std::optional<TimeProfile> grad_profile;
  std::optional<ScalarField> grad_field;
  /// Direct/adjoint or eigen residual.
  double residual = 0.0;
  int iterations = 0;
};

/// J_k(c) = dt dx sum U^{2k}, where U solves the direct problem with source
/// c(t) (V(x) - mean V). grad_profile_j = dJ/dc_j = P_j . (V - mean V) with P
/// the adjoint solution for j'(U) = dt dx 2k U^{2k-1}.
ObjectiveEval eval_talenti(const TimeProfile& c, const SpaceProfile& v, int k,
                           const BlockParabolicOperator& op);

/// lambda(m) and dlambda/dm_ij = -U_ij V_ij / <V, U>.
ObjectiveEval eval_eigenvalue(const ScalarField& m,
                              const BlockParabolicOperator& op,
                              const EigenOptions& opts = {});

/// sum_i grad(i, j) V_i: the gradient in c of a functional of m = c V.
TimeProfile reduce_to_profile(const ScalarField& grad, const SpaceProfile& v);

/// Closed-form slope (2k-1)(2k-2)/2^{2k-1}.
double certificate_anchor(int k);

/// Relative asymmetry max_j |Psi_j - Psi_{N-j}| / max |Psi| of the reduced
/// Talenti gradient at c = cos(pi + t), V = cos x. The grid must be
/// [0, 2 pi] x [-pi, pi].
double symmetry_certificate(int k, const SpaceTimeGrid& grid);

/// F'(pi) recovered from the discrete Psi: F = (-Psi'' + Psi) / a_k by
/// centered differences, a_k = 2k pi C(2k, k) / 2^{2k-1}. Tends to
/// certificate_anchor(k) as dt -> 0. Same grid requirement; N even.
double certificate_slope(int k, const SpaceTimeGrid& grid);

/// Cyclic shift putting peak_index at N/2.
TimeProfile align_peak(const TimeProfile& c);
/// Cyclic shifts putting the peak at (M/2, N/2).
ScalarField align_peak(const ScalarField& m);

/// After peak alignment, max_j |c_j - c_reflected(j)|, the reflection being
/// about the peak node or about the face next to it, whichever is smaller.
double asymmetry(const TimeProfile& c);
/// max of the time and space reflection defects, same convention per axis.
double asymmetry(const ScalarField& m);

/// min over cyclic shifts s of the L2(0, T) norm of c(. + s) - ref.
double shift_aligned_distance(const TimeProfile& c, const TimeProfile& ref);

}  // namespace pareig
