#pragma once

#include "pareig/grid.hpp"

#include <filesystem>
#include <vector>

namespace pareig {

/// T-periodic solution of xi'/2 + xi^2 = (mu/2) c(t) for piecewise-constant
/// c (c_j on [t_j, t_{j+1})). xi holds the node values xi(t_j).
struct RiccatiSolution {
  TimeProfile xi;
  double mu = 0.0;
  double mean_xi = 0.0;
  /// max over cells of |xi(t_{j+1}) - xi(t_j) - int (mu c - 2 xi^2)| / (2 dt)
  double residual = 0.0;
  /// int over cell j of xi (exact)
  Eigen::VectorXd cell_integrals;
  /// u'/u at t_0 for the Floquet solution; xi(t_0) = ratio0 / 2
  double ratio0 = 0.0;
};

/// Positive branch. With xi = u'/(2u) the equation becomes u'' = 2 mu c u;
/// u is the Floquet solution with multiplier rho > 1, so mean xi = ln rho / (2T).
/// Cells are propagated with exact transfer matrices.
RiccatiSolution solve_riccati_periodic(const TimeProfile& c, double mu,
                                       double tol = 1e-8);

/// Negative branch: the multiplier 1/rho, propagated backward in time.
RiccatiSolution solve_riccati_negative(const TimeProfile& c, double mu,
                                       double tol = 1e-8);

/// xi on [t_j, t_j + s] inside cell j, from the node value.
double riccati_in_cell(double xi_node, double mu_c, double s);

struct GaussianEigen {
  double lambda_bar = 0.0;
  std::vector<double> mu;
  std::vector<RiccatiSolution> xi_profiles;
  /// beta(t_j) = int_0^{t_j} (lambda_bar - sum_i xi_i)
  TimeProfile beta;
};

GaussianEigen gaussian_eigenvalue(const TimeProfile& c,
                                  const std::vector<double>& a_eigenvalues);

/// w0(t_j, y) = exp(beta(t_j) - 1/2 sum_i xi_i(t_j) y_i^2), y in the
/// eigenbasis of A.
double gaussian_eigenfunction(const GaussianEigen& g, int j,
                              const Eigen::VectorXd& y);

/// CSV (t, y, w) on the time nodes and `points` samples of [y_lo, y_hi];
/// one-dimensional case only.
std::string gaussian_eigenfunction_csv(const GaussianEigen& g, double y_lo,
                                       double y_hi, int points);

}  // namespace pareig
