#include "pareig/projections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pareig {

namespace {

double clamped_mean(const Eigen::VectorXd& c, const Eigen::VectorXd& lo,
                    const Eigen::VectorXd& hi, double tau) {
  return (c.array() + tau).max(lo.array()).min(hi.array()).mean();
}

}  // namespace

double box_mean_shift(const Eigen::VectorXd& c, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi, double target,
                      const BoxMeanOptions& opts) {
  if (c.size() == 0 || lo.size() != c.size() || hi.size() != c.size())
    throw std::invalid_argument("box_mean_shift: size mismatch");
  if ((hi - lo).minCoeff() < 0.0)
    throw std::invalid_argument("box_mean_shift: lo > hi somewhere");
  const double scale = std::max(1e-300, (hi - lo).cwiseAbs().maxCoeff());
  const double tol = opts.tol * std::max(scale, std::abs(target));
  const double mlo = lo.mean(), mhi = hi.mean();
  if (target < mlo - tol || target > mhi + tol) {
    std::ostringstream os;
    os << "box_mean_shift: target mean " << target << " outside [" << mlo
       << ", " << mhi << "]";
    throw ProjectionError(os.str());
  }
  const bool inside = (c - lo).minCoeff() >= 0.0 && (hi - c).minCoeff() >= 0.0;
  if (inside && std::abs(c.mean() - target) <= tol) return 0.0;

  double a = (lo - c).minCoeff();
  double b = (hi - c).maxCoeff();
  if (target >= mhi - tol) return b;
  if (target <= mlo + tol) return a;
  double tau = 0.5 * (a + b);
  for (int it = 0; it < opts.max_iters; ++it) {
    tau = 0.5 * (a + b);
    const double d = clamped_mean(c, lo, hi, tau) - target;
    if (std::abs(d) <= tol) break;
    (d < 0 ? a : b) = tau;
    if (b - a <= 0.0) break;
  }
  // Newton polish on the free set.
  for (int it = 0; it < 4; ++it) {
    const Eigen::ArrayXd s = c.array() + tau;
    const int free = ((s > lo.array()) && (s < hi.array())).count();
    const double d = clamped_mean(c, lo, hi, tau) - target;
    if (free == 0 || d == 0.0) break;
    const double next = tau - d * c.size() / free;
    if (std::abs(clamped_mean(c, lo, hi, next) - target) >= std::abs(d)) break;
    tau = next;
  }
  const double defect = std::abs(clamped_mean(c, lo, hi, tau) - target);
  // free entries are c + tau, rounded at the scale of c
  const double rounding =
      8 * std::numeric_limits<double>::epsilon() * (c.cwiseAbs().maxCoeff() + std::abs(tau));
  if (defect > std::max(tol, rounding)) {
    std::ostringstream os;
    os << "box_mean_shift: bisection did not reach the mean (defect " << defect
       << ")";
    throw ProjectionError(os.str());
  }
  return tau;
}

Eigen::VectorXd project_box_mean(const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, double target,
                                 const BoxMeanOptions& opts) {
  const double tau = box_mean_shift(c, lo, hi, target, opts);
  if (tau == 0.0) return c.cwiseMax(lo).cwiseMin(hi);
  Eigen::VectorXd p = (c.array() + tau).max(lo.array()).min(hi.array()).matrix();
  // Renormalize on the free set; c + tau carries rounding at the scale of c.
  for (int pass = 0; pass < 2; ++pass) {
    const double missing = target * p.size() - p.sum();
    const auto free = (p.array() > lo.array()) && (p.array() < hi.array());
    const Eigen::Index nfree = free.count();
    if (nfree == 0 || missing == 0.0) break;
    p = free.select(p.array() + missing / nfree, p.array()).max(lo.array()).min(hi.array());
  }
  return p;
}

TimeProfile project_box_mean(const TimeProfile& c, const TimeProfile& lo,
                             const TimeProfile& hi, double target_mean,
                             const BoxMeanOptions& opts) {
  require_same_grid(c.grid(), lo.grid(), "project_box_mean");
  require_same_grid(c.grid(), hi.grid(), "project_box_mean");
  return {c.grid(), project_box_mean(c.values(), lo.values(), hi.values(),
                                     target_mean, opts)};
}

TimeProfile project_box_mean(const TimeProfile& c, double lo, double hi,
                             double target_mean, const BoxMeanOptions& opts) {
  const Eigen::Index n = c.size();
  return {c.grid(), project_box_mean(c.values(), Eigen::VectorXd::Constant(n, lo),
                                     Eigen::VectorXd::Constant(n, hi),
                                     target_mean, opts)};
}

namespace {

void check_masses(const Eigen::VectorXd& q, int K, const char* what) {
  if (q.size() != K) throw std::invalid_argument(std::string(what) + ": q must have K entries");
  if (q.minCoeff() < 0.0)
    throw ProjectionError(std::string(what) + ": negative slice mass");
}

// Projects one flattened slice; upper is the cap (slice 0) or the previous
// slice. Zero-mass slices are emptied.
Eigen::VectorXd project_slice(const Eigen::VectorXd& x, const Eigen::VectorXd& upper,
                              double mass, int index, const char* what) {
  if (mass == 0.0) return Eigen::VectorXd::Zero(x.size());
  const double room = upper.sum();
  if (mass > room * (1 + 1e-12) + 1e-300) {
    std::ostringstream os;
    os << what << ": slice " << index << " mass " << mass
       << " exceeds its upper bound " << room;
    throw ProjectionError(os.str());
  }
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(x.size());
  return project_box_mean(x, lo, upper, std::min(mass, room) / x.size());
}

}  // namespace

RearrangementBody1D project_rearrangement_1d(const RearrangementBody1D& b,
                                             const Eigen::VectorXd& q) {
  check_masses(q, b.slices, "project_rearrangement_1d");
  RearrangementBody1D out = b;
  out.q = q;
  const int n = static_cast<int>(b.F.cols());
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, b.capacity());
  for (int i = 0; i < b.slices; ++i) {
    const Eigen::VectorXd row = b.F.row(i).transpose();
    const Eigen::VectorXd p = project_slice(row, upper, q[i], i, "project_rearrangement_1d");
    out.F.row(i) = p.transpose();
    upper = p;
  }
  return out;
}

RearrangementBody2D project_rearrangement_2d(const RearrangementBody2D& b,
                                             const Eigen::VectorXd& q) {
  check_masses(q, b.slices, "project_rearrangement_2d");
  RearrangementBody2D out = b;
  out.q = q;
  const Eigen::Index rows = b.grid.space_steps(), cols = b.grid.time_steps();
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(rows * cols, b.capacity());
  for (int k = 0; k < b.slices; ++k) {
    const Eigen::VectorXd flat =
        Eigen::Map<const Eigen::VectorXd>(b.F[k].data(), rows * cols);
    const Eigen::VectorXd p = project_slice(flat, upper, q[k], k, "project_rearrangement_2d");
    out.F[k] = Eigen::Map<const Eigen::MatrixXd>(p.data(), rows, cols);
    upper = p;
  }
  return out;
}

}  // namespace pareig
