#pragma once

#include "pareig/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <mutex>
#include <stdexcept>

namespace pareig {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Periodic second-difference approximation of -d^2/dx^2:
/// 2/dx^2 on the diagonal, -1/dx^2 on both off-diagonals and the corners.
struct LaplacianMatrix {
  Eigen::SparseMatrix<double> matrix;
  double dx = 0.0;
};

LaplacianMatrix assemble_laplacian(const SpaceTimeGrid& grid);

class PeriodicFactorization;

/// Discrete periodic heat operator for alpha*d_t - beta*Laplacian.
///
/// The implicit-in-diffusion Euler step of
///   (u_{n+1} - u_n)/dt + (beta/alpha) A u_{n+1} = f_n / alpha
/// rearranges to  -U_n + B U_{n+1} = w f_n  with
///   B = I + dt_eff A,   dt_eff = dt*beta/alpha,   w = dt/alpha.
/// Stacking the N time slices gives the block-circulant matrix with -I on
/// the diagonal and B on the (cyclic) superdiagonal; for alpha = beta = 1
/// this is exactly the matrix of the direct problem and w = dt.
/// Potentials enter explicitly: the eigenproblem reads
///   (calA - w diag(m)) U = w lambda U.
class BlockParabolicOperator {
 public:
  explicit BlockParabolicOperator(SpaceTimeGrid grid, double alpha = 1.0,
                                  double beta = 1.0);

  const SpaceTimeGrid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  /// w = dt/alpha, the weight of mass and source terms.
  double time_weight() const { return grid_.dt() / alpha_; }
  /// dt_eff = dt*beta/alpha, the diffusion weight inside B.
  double diffusion_step() const { return grid_.dt() * beta_ / alpha_; }

  struct StepData {
    Eigen::SparseMatrix<double> a;
    Eigen::SparseMatrix<double> b;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> b_ldlt;
  };

  const Eigen::SparseMatrix<double>& laplacian() const { return step_->a; }
  const Eigen::SparseMatrix<double>& step_matrix() const { return step_->b; }
  const std::shared_ptr<const StepData>& step_data() const { return step_; }

  /// calA * u for u laid out as (U_0, ..., U_{N-1}).
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& p) const;

  /// Explicit sparse assembly of calA (tests and small dense oracles).
  Eigen::SparseMatrix<double> assemble() const;

  /// Cached factorization of calA itself (singular on constants).
  const PeriodicFactorization& direct_factorization() const;

 private:
  struct Cache {
    std::once_flag direct_once;
    std::unique_ptr<PeriodicFactorization> direct;
  };

  SpaceTimeGrid grid_;
  double alpha_;
  double beta_;
  std::shared_ptr<const StepData> step_;
  std::shared_ptr<Cache> cache_;
};

/// Factorization of K = calA - w diag(d) - shift*I exploiting the
/// block-cyclic structure.
///
/// Block row n reads -S_n x_n + B x_{n+1} = y_n with the diagonal
/// S_n = (1 + shift) I + w diag(d_n). Sweeping forward from x_0 gives
/// x_N = Phi x_0 + z, Phi = prod_n B^{-1} S_n, so the periodic solve reduces
/// to one dense M x M system (I - Phi) x_0 = z. The transpose runs the same
/// recursion backward in time. When d = 0 and shift = 0 the operator is
/// singular on constants; the monodromy system is then bordered with the
/// constant vector and solutions are returned with zero space-time mean.
class PeriodicFactorization {
 public:
  PeriodicFactorization(const BlockParabolicOperator& op,
                        const Eigen::VectorXd& potential, double shift = 0.0);
  /// Unshifted, potential-free calA.
  explicit PeriodicFactorization(const BlockParabolicOperator& op);

  bool singular() const { return singular_; }
  double shift() const { return shift_; }

  /// Solves K x = rhs. In the singular case rhs must have (near) zero sum;
  /// the returned x has zero mean.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const;

  /// K x, for residual checks.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;

  /// Max absolute row sum of K.
  double norm_inf() const;

 private:
  void build(const Eigen::VectorXd& potential);
  Eigen::VectorXd sweep_forward(const Eigen::VectorXd& rhs,
                                const Eigen::VectorXd& x0,
                                Eigen::VectorXd* out) const;
  Eigen::VectorXd sweep_backward(const Eigen::VectorXd& rhs,
                                 const Eigen::VectorXd& y0,
                                 Eigen::VectorXd* out) const;

  SpaceTimeGrid grid_;
  double weight_;
  std::shared_ptr<const BlockParabolicOperator::StepData> step_;
  double shift_;
  bool singular_ = false;
  Eigen::MatrixXd diag_;  // M x N entries of S_n
  Eigen::PartialPivLU<Eigen::MatrixXd> forward_lu_;
  Eigen::PartialPivLU<Eigen::MatrixXd> backward_lu_;
};

/// Solves calA U = w * rhs on the complement of constants (mean(U) = 0).
/// Throws SolverError when |mean(rhs)| exceeds the compatibility tolerance.
ScalarField solve_direct(const BlockParabolicOperator& op,
                         const ScalarField& rhs);

/// Solves calA^T P = w * rhs on the complement of constants.
ScalarField solve_adjoint(const BlockParabolicOperator& op,
                          const ScalarField& rhs);

/// Mean-defect tolerance used by solve_direct/solve_adjoint.
double compatibility_tolerance(const ScalarField& rhs);

}  // namespace pareig
