#pragma once

#include "pareig/grid.hpp"
#include "pareig/pde_ops.hpp"

#include <cstdint>

namespace pareig {

struct EigenOptions {
  double tol = 1e-10;
  int max_iters = 500;
  /// Seed of the single random restart.
  std::uint64_t seed = 20240611;
};

/// Principal eigenpair of (calA - w diag(m)) U = w lambda U.
/// right has unit 2-norm; left is scaled so that <left, right> = 1.
struct EigenPair {
  double lambda = 0.0;
  ScalarField right;
  ScalarField left;
  /// max of the right and left residuals ||K U - w lambda U||_inf / ||U||_inf
  double residual = 0.0;
  double lambda_left = 0.0;
  int iterations = 0;
  int restarts = 0;
  /// Smallest entry of either vector relative to its max; > 0 means Perron
  /// positivity held numerically.
  double min_ratio = 0.0;
};

/// Shifted inverse iteration. m is shifted by delta = -max(m) - kappa so the
/// shifted matrix has an entrywise nonnegative inverse; the shift is undone
/// on return. Throws SolverError on non-convergence (after one random
/// restart), on loss of positivity, or when w * osc(m) >= 1 (the explicit
/// potential term would break the discrete maximum principle).
EigenPair principal_eigenpair(const BlockParabolicOperator& op,
                              const ScalarField& m,
                              const EigenOptions& opts = {});

inline EigenPair principal_eigenpair(const BlockParabolicOperator& op,
                                     const ScalarField& m, double tol) {
  EigenOptions o;
  o.tol = tol;
  return principal_eigenpair(op, m, o);
}

/// Smallest eigenvalue of the periodic second-difference discretization of
/// -a y'' + f y on the time grid of f.
double periodic_ode_principal_eigenvalue(const TimeProfile& f, double a,
                                         double tol = 1e-12);

}  // namespace pareig
