#pragma once

#include "pareig/eigensolver.hpp"
#include "pareig/optimizer.hpp"
#include "pareig/projections.hpp"
#include "pareig/rearrangement.hpp"

namespace pareig {

// Objectives over a profile c (length N); the potential is c V.
ObjectiveFn talenti_objective(const SpaceProfile& v, int k,
                              const BlockParabolicOperator& op);
ObjectiveFn eigenvalue_profile_objective(const SpaceProfile& v,
                                         const BlockParabolicOperator& op,
                                         const EigenOptions& opts = {});
// Objective over a full field m (length N*M, time-slice blocks).
ObjectiveFn eigenvalue_field_objective(const BlockParabolicOperator& op,
                                       const EigenOptions& opts = {});

ProjectionFn box_mean_projection(double lo, double hi, double mean);

// F-body controls. The layout body fixes grid, K and value range; the control
// vector is F in column-major order (1D) or the K slices concatenated (2D).
Eigen::VectorXd flatten(const RearrangementBody1D& b);
RearrangementBody1D unflatten(const RearrangementBody1D& layout,
                              const Eigen::VectorXd& x);
Eigen::VectorXd flatten(const RearrangementBody2D& b);
RearrangementBody2D unflatten(const RearrangementBody2D& layout,
                              const Eigen::VectorXd& x);

/// Composes a profile objective with reconstruct_profile; dJ/dF_ij = dJ/dc_j / dt.
ObjectiveFn through_body(const ObjectiveFn& profile_objective,
                         const RearrangementBody1D& layout);
/// Composes a field objective with reconstruct_field; dJ/dF_kij = dJ/dm_ij / (dt dx).
ObjectiveFn through_body(const ObjectiveFn& field_objective,
                         const RearrangementBody2D& layout);

ProjectionFn body_projection(const RearrangementBody1D& layout,
                             const Eigen::VectorXd& q);
ProjectionFn body_projection(const RearrangementBody2D& layout,
                             const Eigen::VectorXd& q);

}  // namespace pareig
