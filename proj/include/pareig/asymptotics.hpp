#pragma once

#include "pareig/eigensolver.hpp"
#include "pareig/grid.hpp"
#include "pareig/io.hpp"
#include "pareig/pde_ops.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pareig {

/// Zero-mean solution of the direct problem driven by m - mean(m).
ScalarField centered_response(const ScalarField& m, const BlockParabolicOperator& op);

/// Lambda(m): mean over all nodes of the squared centered space difference
/// of the centered response.
double capital_lambda(const ScalarField& m, const BlockParabolicOperator& op);

/// mean((m - mean m) * phi) for the same response phi. Agrees with
/// capital_lambda up to the discretization error and is the coefficient
/// that the discrete eigenvalue expansion actually sees.
double capital_lambda_discrete(const ScalarField& m, const BlockParabolicOperator& op);

struct SweepRow {
  double parameter = 0.0;
  double lambda = 0.0;
  double defect = 0.0;
  double rescaled = 0.0;
  /// "ok", or why the point was skipped
  std::string status = "ok";
  double residual = 0.0;
  int iterations = 0;
};

struct SweepTable {
  std::string parameter_name;
  std::vector<SweepRow> rows;
  /// Least-squares slope of log(defect) against log(parameter) over ok rows.
  double slope = 0.0;
  json summary;

  std::string to_csv() const;
  json to_json() const;
};

/// Slope of the least-squares line through (log x, log y); pairs with
/// nonpositive or non-finite entries are dropped. NaN if fewer than two remain.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Maps an index range onto up to `threads` workers (threads <= 1 runs inline).
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct SweepOptions {
  int threads = 1;
  EigenOptions eigen{};
};

/// For each mu, lambda of mu d_t - mu Laplacian - m on the grid of m, the
/// defect |lambda + mean m + Lambda_h / mu| and rescaled = mu (lambda + mean m).
/// Lambda (centered differences) and Lambda_h are both put in the summary.
SweepTable mu_sweep(const ScalarField& m, const std::vector<double>& mus,
                    const SweepOptions& opts = {});

/// Index of the unique discrete max of V and -V'' there (second difference).
/// Throws std::invalid_argument if the max is not unique or not strict.
struct PeakInfo {
  int index = 0;
  double value = 0.0;
  double curvature = 0.0;
};
PeakInfo nondegenerate_peak(const SpaceProfile& v);

/// For each epsilon, lambda of eps d_t - eps^2 Laplacian - c V on the shared
/// grid, rescaled = (lambda + mean(c) max V) / eps and
/// defect = |rescaled - lambda_bar(c)| with the Gaussian reference at
/// A = -V''(x*). Points with dx^2 > eps/10, or too coarse in time for the
/// eigensolver (dt/eps * osc(cV) >= 1), are reported and skipped.
SweepTable epsilon_sweep(const TimeProfile& c, const SpaceProfile& v,
                         const std::vector<double>& epsilons,
                         const SweepOptions& opts = {});

}  // namespace pareig
