#include "pareig/pde_ops.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace pareig {

LaplacianMatrix assemble_laplacian(const SpaceTimeGrid& grid) {
  const int m = grid.space_steps();
  if (m < 3)
    throw std::invalid_argument(
        "assemble_laplacian: need M >= 3 (the periodic stencil overlaps)");
  const double h2 = 1.0 / (grid.dx() * grid.dx());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * m);
  for (int i = 0; i < m; ++i) {
    trips.emplace_back(i, i, 2.0 * h2);
    trips.emplace_back(i, grid.wrap_space(i + 1), -h2);
    trips.emplace_back(i, grid.wrap_space(i - 1), -h2);
  }
  LaplacianMatrix out;
  out.matrix.resize(m, m);
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.dx = grid.dx();
  return out;
}

BlockParabolicOperator::BlockParabolicOperator(SpaceTimeGrid grid,
                                               double alpha, double beta)
    : grid_(grid), alpha_(alpha), beta_(beta), cache_(std::make_shared<Cache>()) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument(
        "BlockParabolicOperator: alpha and beta must be positive");
  auto step = std::make_shared<StepData>();
  step->a = assemble_laplacian(grid_).matrix;
  Eigen::SparseMatrix<double> id(grid_.space_steps(), grid_.space_steps());
  id.setIdentity();
  step->b = id + diffusion_step() * step->a;
  step->b_ldlt.compute(step->b);
  if (step->b_ldlt.info() != Eigen::Success)
    throw SolverError("BlockParabolicOperator: factorization of B failed");
  step_ = std::move(step);
}

Eigen::VectorXd BlockParabolicOperator::apply(const Eigen::VectorXd& u) const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  Eigen::VectorXd out(u.size());
  for (int j = 0; j < n; ++j) {
    const int next = grid_.wrap_time(j + 1);
    out.segment(j * m, m) =
        step_->b * u.segment(next * m, m) - u.segment(j * m, m);
  }
  return out;
}

Eigen::VectorXd BlockParabolicOperator::apply_transpose(
    const Eigen::VectorXd& p) const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  Eigen::VectorXd out(p.size());
  for (int j = 0; j < n; ++j) {
    const int prev = grid_.wrap_time(j - 1);
    out.segment(j * m, m) =
        step_->b * p.segment(prev * m, m) - p.segment(j * m, m);
  }
  return out;
}

Eigen::SparseMatrix<double> BlockParabolicOperator::assemble() const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * (m + step_->b.nonZeros()));
  for (int j = 0; j < n; ++j) {
    const int next = grid_.wrap_time(j + 1);
    for (int i = 0; i < m; ++i) trips.emplace_back(j * m + i, j * m + i, -1.0);
    for (int k = 0; k < step_->b.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(step_->b, k); it; ++it)
        trips.emplace_back(j * m + static_cast<int>(it.row()),
                           next * m + static_cast<int>(it.col()), it.value());
  }
  Eigen::SparseMatrix<double> out(n * m, n * m);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

const PeriodicFactorization& BlockParabolicOperator::direct_factorization()
    const {
  std::call_once(cache_->direct_once, [this] {
    cache_->direct = std::make_unique<PeriodicFactorization>(*this);
  });
  return *cache_->direct;
}

PeriodicFactorization::PeriodicFactorization(const BlockParabolicOperator& op,
                                             const Eigen::VectorXd& potential,
                                             double shift)
    : grid_(op.grid()),
      weight_(op.time_weight()),
      step_(op.step_data()),
      shift_(shift) {
  if (potential.size() != 0 && potential.size() != grid_.size())
    throw GridMismatch("PeriodicFactorization: potential length must be N*M");
  build(potential);
}

PeriodicFactorization::PeriodicFactorization(const BlockParabolicOperator& op)
    : PeriodicFactorization(op, Eigen::VectorXd(), 0.0) {}

void PeriodicFactorization::build(const Eigen::VectorXd& potential) {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  diag_ = Eigen::MatrixXd::Constant(m, n, 1.0 + shift_);
  if (potential.size() != 0)
    diag_ += weight_ * Eigen::Map<const Eigen::MatrixXd>(potential.data(), m, n);
  singular_ = shift_ == 0.0 &&
              (potential.size() == 0 || potential.cwiseAbs().maxCoeff() == 0.0);

  const auto& ldlt = step_->b_ldlt;
  Eigen::MatrixXd forward = Eigen::MatrixXd::Identity(m, m);
  for (int j = 0; j < n; ++j)
    forward = ldlt.solve(Eigen::MatrixXd(diag_.col(j).asDiagonal() * forward)).eval();
  Eigen::MatrixXd backward = Eigen::MatrixXd::Identity(m, m);
  for (int k = 0; k < n; ++k) {
    const int j = grid_.wrap_time(n - k);
    backward = ldlt.solve(Eigen::MatrixXd(diag_.col(j).asDiagonal() * backward)).eval();
  }

  auto system = [&](const Eigen::MatrixXd& mono) {
    if (!singular_) return Eigen::MatrixXd(Eigen::MatrixXd::Identity(m, m) - mono);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m + 1, m + 1);
    s.topLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m) - mono;
    s.col(m).head(m).setOnes();
    s.row(m).head(m).setOnes();
    return s;
  };
  forward_lu_.compute(system(forward));
  backward_lu_.compute(system(backward));
  const double piv = forward_lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(piv > 0.0) || !std::isfinite(piv))
    throw SolverError("PeriodicFactorization: singular monodromy system");
}

Eigen::VectorXd PeriodicFactorization::sweep_forward(const Eigen::VectorXd& rhs,
                                                     const Eigen::VectorXd& x0,
                                                     Eigen::VectorXd* out) const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  Eigen::VectorXd x = x0;
  for (int j = 0; j < n; ++j) {
    if (out) out->segment(j * m, m) = x;
    const Eigen::VectorXd src =
        rhs.segment(j * m, m) + diag_.col(j).cwiseProduct(x);
    x = step_->b_ldlt.solve(src);
  }
  return x;
}

Eigen::VectorXd PeriodicFactorization::sweep_backward(const Eigen::VectorXd& rhs,
                                                      const Eigen::VectorXd& y0,
                                                      Eigen::VectorXd* out) const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  Eigen::VectorXd y = y0;
  if (out) out->segment(0, m) = y;
  for (int k = 0; k < n; ++k) {
    const int j = grid_.wrap_time(n - k);
    const Eigen::VectorXd src =
        rhs.segment(j * m, m) + diag_.col(j).cwiseProduct(y);
    y = step_->b_ldlt.solve(src);
    const int dest = n - k - 1;
    if (out && dest > 0) out->segment(dest * m, m) = y;
  }
  return y;
}

namespace {

Eigen::VectorXd monodromy_solve(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                                const Eigen::VectorXd& z, bool singular) {
  if (!singular) return lu.solve(z);
  Eigen::VectorXd ext(z.size() + 1);
  ext.head(z.size()) = z;
  ext[z.size()] = 0.0;
  return lu.solve(ext).head(z.size());
}

}  // namespace

Eigen::VectorXd PeriodicFactorization::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != grid_.size())
    throw GridMismatch("PeriodicFactorization::solve: wrong rhs length");
  const int m = grid_.space_steps();
  Eigen::VectorXd y = rhs;
  if (singular_) y.array() -= y.mean();
  const Eigen::VectorXd z = sweep_forward(y, Eigen::VectorXd::Zero(m), nullptr);
  const Eigen::VectorXd x0 = monodromy_solve(forward_lu_, z, singular_);
  Eigen::VectorXd out(rhs.size());
  sweep_forward(y, x0, &out);
  if (singular_) out.array() -= out.mean();
  return out;
}

Eigen::VectorXd PeriodicFactorization::solve_transpose(
    const Eigen::VectorXd& rhs) const {
  if (rhs.size() != grid_.size())
    throw GridMismatch("PeriodicFactorization::solve_transpose: wrong length");
  const int m = grid_.space_steps();
  Eigen::VectorXd r = rhs;
  if (singular_) r.array() -= r.mean();
  const Eigen::VectorXd z =
      sweep_backward(r, Eigen::VectorXd::Zero(m), nullptr);
  const Eigen::VectorXd y0 = monodromy_solve(backward_lu_, z, singular_);
  Eigen::VectorXd out(rhs.size());
  sweep_backward(r, y0, &out);
  if (singular_) out.array() -= out.mean();
  return out;
}

Eigen::VectorXd PeriodicFactorization::apply(const Eigen::VectorXd& x) const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  Eigen::VectorXd out(x.size());
  for (int j = 0; j < n; ++j) {
    const int next = grid_.wrap_time(j + 1);
    out.segment(j * m, m) = step_->b * x.segment(next * m, m) -
                            diag_.col(j).cwiseProduct(x.segment(j * m, m));
  }
  return out;
}

Eigen::VectorXd PeriodicFactorization::apply_transpose(
    const Eigen::VectorXd& x) const {
  const int n = grid_.time_steps();
  const int m = grid_.space_steps();
  Eigen::VectorXd out(x.size());
  for (int j = 0; j < n; ++j) {
    const int prev = grid_.wrap_time(j - 1);
    out.segment(j * m, m) = step_->b * x.segment(prev * m, m) -
                            diag_.col(j).cwiseProduct(x.segment(j * m, m));
  }
  return out;
}

double PeriodicFactorization::norm_inf() const {
  const auto& b = step_->b;
  Eigen::VectorXd row_b = Eigen::VectorXd::Zero(b.rows());
  for (int k = 0; k < b.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, k); it; ++it)
      row_b[it.row()] += std::abs(it.value());
  return (diag_.cwiseAbs().colwise() + row_b).maxCoeff();
}

double compatibility_tolerance(const ScalarField& rhs) {
  return 1e-10 * std::max(1.0, rhs.values().cwiseAbs().maxCoeff());
}

namespace {

void check_mean(const ScalarField& rhs, const char* what) {
  const double defect = std::abs(field_mean(rhs));
  if (defect > compatibility_tolerance(rhs)) {
    std::ostringstream os;
    os << what << ": incompatible right-hand side (mean " << defect
       << " exceeds tolerance " << compatibility_tolerance(rhs) << ")";
    throw SolverError(os.str());
  }
}

}  // namespace

ScalarField solve_direct(const BlockParabolicOperator& op,
                         const ScalarField& rhs) {
  require_same_grid(op.grid(), rhs.grid(), "solve_direct");
  check_mean(rhs, "solve_direct");
  const Eigen::VectorXd u =
      op.direct_factorization().solve(op.time_weight() * rhs.flat());
  if (!u.allFinite()) throw SolverError("solve_direct: non-finite solution");
  return ScalarField::from_flat(op.grid(), u);
}

ScalarField solve_adjoint(const BlockParabolicOperator& op,
                          const ScalarField& rhs) {
  require_same_grid(op.grid(), rhs.grid(), "solve_adjoint");
  check_mean(rhs, "solve_adjoint");
  const Eigen::VectorXd p =
      op.direct_factorization().solve_transpose(op.time_weight() * rhs.flat());
  if (!p.allFinite()) throw SolverError("solve_adjoint: non-finite solution");
  return ScalarField::from_flat(op.grid(), p);
}

}  // namespace pareig
