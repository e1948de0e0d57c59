#pragma once

#include "pareig/grid.hpp"
#include "pareig/io.hpp"

#include <vector>

namespace pareig {

/// Values sorted in decreasing order (stable in the original index) and laid
/// out around index floor(N/2): the largest there, then one step left, one
/// step right, two steps left, and so on. Exactly a permutation of c.
TimeProfile symmetric_decreasing_rearrangement(const TimeProfile& c);

/// Values in increasing order.
TimeProfile increasing_rearrangement(const TimeProfile& c);

/// Discrete Hardy-Littlewood order c1 <= c2: the r largest samples of c1 sum
/// to at most those of c2 for every r, with equal totals.
bool dominates(const TimeProfile& c1, const TimeProfile& c2, double tol = 1e-12);
/// max over r of the excess of the r-term partial sums of c1 over c2, or the
/// total mismatch if larger. dominates(c1, c2, tol) iff this is <= tol.
double domination_excess(const TimeProfile& c1, const TimeProfile& c2);

/// Index of the maximum used for peak alignment. On ties, the middle of the
/// longest cyclic run of maximal values.
int peak_index(const Eigen::VectorXd& values);

/// Subgraph of a time profile cut into K horizontal slices.
/// F(i, j) is the area of {(t, z): t in cell j, v_i <= z < v_{i+1}, z < c(t)}
/// for piecewise-constant c.
struct RearrangementBody1D {
  SpaceTimeGrid grid;
  int slices = 0;
  double c_min = 0.0;
  double c_max = 0.0;
  Eigen::MatrixXd F;   // K x N
  Eigen::VectorXd q;   // row sums

  double dc() const { return (c_max - c_min) / slices; }
  double capacity() const { return grid.dt() * dc(); }
  double level(int i) const { return c_min + i * dc(); }
};

/// Same construction for a space-time field; F[k] is M x N.
struct RearrangementBody2D {
  SpaceTimeGrid grid;
  int slices = 0;
  double m_min = 0.0;
  double m_max = 0.0;
  std::vector<Eigen::MatrixXd> F;
  Eigen::VectorXd q;

  double dh() const { return (m_max - m_min) / slices; }
  double capacity() const { return grid.dt() * grid.dx() * dh(); }
  double level(int k) const { return m_min + k * dh(); }
};

/// Largest violations of the body constraints (all zero for a valid body).
struct BodyCheck {
  double capacity = 0.0;  // max over cells of dist(F, [0, cap])
  double monotone = 0.0;  // max of F_{i+1} - F_i
  double mass = 0.0;      // max |row sum - q|
  double mass_order = 0.0;  // max of q_{i+1} - q_i
  bool ok(double tol) const {
    return capacity <= tol && monotone <= tol && mass <= tol && mass_order <= tol;
  }
};

RearrangementBody1D body_from_profile(const TimeProfile& c, int K);
RearrangementBody1D body_from_profile(const TimeProfile& c, int K,
                                      double c_min, double c_max);
TimeProfile reconstruct_profile(const RearrangementBody1D& b);
BodyCheck check_body(const RearrangementBody1D& b);
/// max over r of S_r - (r c_min + sum_i min(q_i, r cap) / dt), S_r the sum of
/// the r largest reconstructed values. Every feasible body gives <= 0 up to
/// rounding; the sampled reference itself may sit strictly below the bound.
double relaxed_domination_excess(const RearrangementBody1D& b);
/// Slice masses of the subgraph of c; equals body_from_profile(...).q.
Eigen::VectorXd slice_masses(const RearrangementBody1D& b);

RearrangementBody2D body_from_field(const ScalarField& m, int K);
RearrangementBody2D body_from_field(const ScalarField& m, int K, double m_min,
                                    double m_max);
ScalarField reconstruct_field(const RearrangementBody2D& b);
BodyCheck check_body(const RearrangementBody2D& b);
Eigen::VectorXd slice_masses(const RearrangementBody2D& b);

/// Slice volumes pi (1 - h_k)^2 dh, h_k = k/K, of a unit cone over [0, 1].
Eigen::VectorXd cone_slice_masses(int K);

/// Body with all cells empty and the given target masses.
RearrangementBody1D empty_body(const SpaceTimeGrid& grid, int K, double c_min,
                               double c_max, Eigen::VectorXd q);
RearrangementBody2D empty_body_2d(const SpaceTimeGrid& grid, int K,
                                  double m_min, double m_max, Eigen::VectorXd q);

json body_to_json(const RearrangementBody1D& b);
RearrangementBody1D body1d_from_json(const json& j);
json body_to_json(const RearrangementBody2D& b);
RearrangementBody2D body2d_from_json(const json& j);

}  // namespace pareig
