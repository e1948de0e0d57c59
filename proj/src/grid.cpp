#include "pareig/grid.hpp"

#include <cmath>
#include <sstream>

namespace pareig {

SpaceTimeGrid::SpaceTimeGrid(double horizon, double space_lo, double space_hi,
                             int time_steps, int space_steps)
    : horizon_(horizon),
      space_lo_(space_lo),
      space_hi_(space_hi),
      n_(time_steps),
      m_(space_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("grid: time horizon must be positive");
  if (!(space_hi > space_lo) || !std::isfinite(space_hi - space_lo))
    throw std::invalid_argument("grid: empty space interval");
  if (time_steps < 2 || space_steps < 2)
    throw std::invalid_argument("grid: need N >= 2 and M >= 2");
}

bool SpaceTimeGrid::compatible(const SpaceTimeGrid& other) const {
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  return n_ == other.n_ && m_ == other.m_ && close(horizon_, other.horizon_) &&
         close(space_lo_, other.space_lo_) && close(space_hi_, other.space_hi_);
}

void require_same_grid(const SpaceTimeGrid& a, const SpaceTimeGrid& b,
                       const char* what) {
  if (!a.compatible(b)) {
    std::ostringstream os;
    os << what << ": grid mismatch (" << a.space_steps() << "x"
       << a.time_steps() << " vs " << b.space_steps() << "x" << b.time_steps()
       << ")";
    throw GridMismatch(os.str());
  }
}

TimeProfile::TimeProfile(SpaceTimeGrid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.time_steps())
    throw GridMismatch("TimeProfile: length must equal N");
}

TimeProfile TimeProfile::constant(const SpaceTimeGrid& grid, double value) {
  return {grid, Eigen::VectorXd::Constant(grid.time_steps(), value)};
}

SpaceProfile::SpaceProfile(SpaceTimeGrid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.space_steps())
    throw GridMismatch("SpaceProfile: length must equal M");
}

ScalarField::ScalarField(SpaceTimeGrid grid, Eigen::MatrixXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.space_steps() ||
      values_.cols() != grid_.time_steps())
    throw GridMismatch("ScalarField: shape must be M x N");
}

ScalarField ScalarField::zeros(const SpaceTimeGrid& grid) {
  return constant(grid, 0.0);
}

ScalarField ScalarField::constant(const SpaceTimeGrid& grid, double value) {
  return {grid, Eigen::MatrixXd::Constant(grid.space_steps(),
                                          grid.time_steps(), value)};
}

ScalarField ScalarField::from_flat(const SpaceTimeGrid& grid,
                                   const Eigen::VectorXd& flat) {
  if (flat.size() != grid.size())
    throw GridMismatch("ScalarField::from_flat: length must equal N*M");
  return {grid, Eigen::Map<const Eigen::MatrixXd>(
                    flat.data(), grid.space_steps(), grid.time_steps())};
}

Eigen::VectorXd ScalarField::flat() const {
  return Eigen::Map<const Eigen::VectorXd>(values_.data(), values_.size());
}

ScalarField outer_product(const TimeProfile& c, const SpaceProfile& v) {
  require_same_grid(c.grid(), v.grid(), "outer_product");
  return {c.grid(), v.values() * c.values().transpose()};
}

double field_mean(const ScalarField& f) { return f.values().mean(); }

}  // namespace pareig
