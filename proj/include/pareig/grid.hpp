#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pareig {

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic discretization of [0,T] x [space_lo, space_hi].
///
/// Nodes are t_j = j*dt for j = 0..N-1 and x_i = space_lo + i*dx for
/// i = 0..M-1; node N (resp. M) is identified with node 0.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(double horizon, double space_lo, double space_hi,
                int time_steps, int space_steps);

  double horizon() const { return horizon_; }
  double space_lo() const { return space_lo_; }
  double space_hi() const { return space_hi_; }
  double space_length() const { return space_hi_ - space_lo_; }
  int time_steps() const { return n_; }
  int space_steps() const { return m_; }
  double dt() const { return horizon_ / n_; }
  double dx() const { return (space_hi_ - space_lo_) / m_; }
  int size() const { return n_ * m_; }

  double time(int j) const { return dt() * wrap_time(j); }
  double space(int i) const { return space_lo_ + dx() * wrap_space(i); }

  int wrap_time(int j) const { return ((j % n_) + n_) % n_; }
  int wrap_space(int i) const { return ((i % m_) + m_) % m_; }

  /// Same node layout (within a relative tolerance on the extents).
  bool compatible(const SpaceTimeGrid& other) const;

 private:
  double horizon_;
  double space_lo_;
  double space_hi_;
  int n_;
  int m_;
};

void require_same_grid(const SpaceTimeGrid& a, const SpaceTimeGrid& b,
                       const char* what);

/// Length-N periodic samples c(t_j).
class TimeProfile {
 public:
  TimeProfile(SpaceTimeGrid grid, Eigen::VectorXd values);
  static TimeProfile constant(const SpaceTimeGrid& grid, double value);
  template <class F>
  static TimeProfile sample(const SpaceTimeGrid& grid, F&& f) {
    Eigen::VectorXd v(grid.time_steps());
    for (int j = 0; j < grid.time_steps(); ++j) v[j] = f(grid.time(j));
    return {grid, std::move(v)};
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int j) const { return values_[grid_.wrap_time(j)]; }
  double mean() const { return values_.mean(); }

 private:
  SpaceTimeGrid grid_;
  Eigen::VectorXd values_;
};

/// Length-M periodic samples V(x_i).
class SpaceProfile {
 public:
  SpaceProfile(SpaceTimeGrid grid, Eigen::VectorXd values);
  template <class F>
  static SpaceProfile sample(const SpaceTimeGrid& grid, F&& f) {
    Eigen::VectorXd v(grid.space_steps());
    for (int i = 0; i < grid.space_steps(); ++i) v[i] = f(grid.space(i));
    return {grid, std::move(v)};
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[grid_.wrap_space(i)]; }
  double mean() const { return values_.mean(); }

 private:
  SpaceTimeGrid grid_;
  Eigen::VectorXd values_;
};

/// M x N node values; column j is the time slice U_j (contiguous, since
/// Eigen matrices are column-major).
class ScalarField {
 public:
  ScalarField(SpaceTimeGrid grid, Eigen::MatrixXd values);
  static ScalarField zeros(const SpaceTimeGrid& grid);
  static ScalarField constant(const SpaceTimeGrid& grid, double value);
  template <class F>
  static ScalarField sample(const SpaceTimeGrid& grid, F&& f) {
    Eigen::MatrixXd v(grid.space_steps(), grid.time_steps());
    for (int j = 0; j < grid.time_steps(); ++j)
      for (int i = 0; i < grid.space_steps(); ++i)
        v(i, j) = f(grid.time(j), grid.space(i));
    return {grid, std::move(v)};
  }
  /// Inverse of flat(): block j of the vector is the time slice U_j.
  static ScalarField from_flat(const SpaceTimeGrid& grid,
                               const Eigen::VectorXd& flat);

  const SpaceTimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }
  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }

  /// Periodic access: (i, j) = (space index, time index).
  double operator()(int i, int j) const {
    return values_(grid_.wrap_space(i), grid_.wrap_time(j));
  }

  /// Concatenation (U_0, ..., U_{N-1}).
  Eigen::VectorXd flat() const;

 private:
  SpaceTimeGrid grid_;
  Eigen::MatrixXd values_;
};

/// result(i, j) = c_j * V_i.
ScalarField outer_product(const TimeProfile& c, const SpaceProfile& v);

/// Arithmetic mean of all node values (the normalized space-time integral).
double field_mean(const ScalarField& f);

}  // namespace pareig
