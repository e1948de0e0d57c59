#pragma once

#include "pareig/grid.hpp"
#include "pareig/rearrangement.hpp"

#include <stdexcept>

namespace pareig {

class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoxMeanOptions {
  double tol = 1e-12;
  int max_iters = 200;
};

/// The tau with mean(clamp(c + tau, lo, hi)) = target. Bisection on
/// [min(lo - c), max(hi - c)], then Newton steps on the free set (the map is
/// piecewise linear). Returns 0 when c is already feasible.
/// The mean tolerance is relative to max(1e-300, max|hi - lo|).
double box_mean_shift(const Eigen::VectorXd& c, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi, double target,
                      const BoxMeanOptions& opts = {});

Eigen::VectorXd project_box_mean(const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, double target,
                                 const BoxMeanOptions& opts = {});

TimeProfile project_box_mean(const TimeProfile& c, const TimeProfile& lo,
                             const TimeProfile& hi, double target_mean,
                             const BoxMeanOptions& opts = {});
TimeProfile project_box_mean(const TimeProfile& c, double lo, double hi,
                             double target_mean, const BoxMeanOptions& opts = {});

/// Sequential slice scheme: slice 0 inside [0, cap] with mass q[0], slice i
/// inside [0, F_{i-1}] with mass q[i]. A feasibility operator; it is not the
/// metric projection onto the intersection.
RearrangementBody1D project_rearrangement_1d(const RearrangementBody1D& b,
                                             const Eigen::VectorXd& q);
RearrangementBody2D project_rearrangement_2d(const RearrangementBody2D& b,
                                             const Eigen::VectorXd& q);

}  // namespace pareig
