#include "pareig/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace pareig {

namespace {

struct PowerState {
  Eigen::VectorXd u;
  double nu = 0.0;  // eigenvalue of the shifted matrix
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Collatz-Wielandt lower bound min x_i / y_i for y = K^{-1} x, x > 0.
double cw_lower(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double lo = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) return 0.0;
    lo = std::min(lo, x[i] / y[i]);
  }
  return lo;
}

// Inverse iteration on a nonnegative-inverse matrix with safeguarded shifts.
// factor(sigma) rebuilds the factorization; the current one is kept in fact.
class ShiftedIteration {
 public:
  ShiftedIteration(const BlockParabolicOperator& op, Eigen::VectorXd potential,
                   bool transpose)
      : op_(op), potential_(std::move(potential)), transpose_(transpose) {}

  void factor(double sigma) {
    sigma_ = sigma;
    fact_ = std::make_unique<PeriodicFactorization>(op_, potential_, sigma);
  }
  double sigma() const { return sigma_; }
  const PeriodicFactorization& fact() const { return *fact_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& x) const {
    return transpose_ ? fact_->solve_transpose(x) : fact_->solve(x);
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return transpose_ ? fact_->apply_transpose(x) : fact_->apply(x);
  }

  PowerState run(Eigen::VectorXd x, double tol, int max_iters,
                 int max_shift_updates) {
    PowerState st;
    x /= x.norm();
    int updates = 0;
    int since_factor = 0;
    for (int it = 1; it <= max_iters; ++it) {
      Eigen::VectorXd y = solve(x);
      if (!y.allFinite()) break;
      const double lower = cw_lower(x, y);
      const double ny = y.norm();
      if (!(ny > 0.0)) break;
      y /= ny;
      if (y.sum() < 0.0) y = -y;
      const Eigen::VectorXd ky = apply(y);
      st.nu = y.dot(ky);
      st.residual = (ky - st.nu * y).cwiseAbs().maxCoeff() / y.cwiseAbs().maxCoeff();
      st.u = y;
      st.iterations = it;
      x = y;
      if (st.residual <= tol) {
        st.converged = true;
        return st;
      }
      ++since_factor;
      if (updates < max_shift_updates && since_factor >= 2 && lower > 0.0) {
        factor(sigma_ + 0.9 * lower);
        ++updates;
        since_factor = 0;
      }
    }
    return st;
  }

 private:
  const BlockParabolicOperator& op_;
  Eigen::VectorXd potential_;
  bool transpose_;
  double sigma_ = 0.0;
  std::unique_ptr<PeriodicFactorization> fact_;
};

}  // namespace

EigenPair principal_eigenpair(const BlockParabolicOperator& op,
                              const ScalarField& m, const EigenOptions& opts) {
  require_same_grid(op.grid(), m.grid(), "principal_eigenpair");
  if (!(opts.tol > 0.0))
    throw std::invalid_argument("principal_eigenpair: tol must be positive");
  if (!m.values().allFinite())
    throw std::invalid_argument("principal_eigenpair: potential not finite");

  const double w = op.time_weight();
  const double mmax = m.values().maxCoeff();
  const double osc = mmax - m.values().minCoeff();
  if (!(w * osc < 1.0)) {
    std::ostringstream os;
    os << "principal_eigenpair: time step too large for the potential "
          "(dt/alpha * osc(m) = "
       << w * osc << ", need < 1)";
    throw SolverError(os.str());
  }
  const double kappa = std::min(1.0, (1.0 / w - osc) / 2.0);
  const double delta = -mmax - kappa;
  Eigen::VectorXd shifted = m.flat();
  shifted.array() += delta;

  const int size = op.grid().size();
  // Stop in eigenvalue units as well as in K units.
  double tol = opts.tol * std::min(1.0, w);

  ShiftedIteration right(op, shifted, false);
  right.factor(0.0);
  tol = std::max(tol, 100 * std::numeric_limits<double>::epsilon() *
                          right.fact().norm_inf());
  EigenPair out{0.0, ScalarField::zeros(op.grid()), ScalarField::zeros(op.grid())};

  PowerState rs = right.run(Eigen::VectorXd::Ones(size), tol, opts.max_iters, 3);
  out.iterations = rs.iterations;
  if (!rs.converged) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    Eigen::VectorXd x0(size);
    for (auto& v : x0) v = u(rng);
    ++out.restarts;
    rs = right.run(x0, tol, opts.max_iters, 3);
    out.iterations += rs.iterations;
  }
  if (!rs.converged) {
    std::ostringstream os;
    os << "principal_eigenpair: no convergence after " << out.iterations
       << " iterations (residual " << rs.residual << ")";
    throw SolverError(os.str());
  }

  ShiftedIteration left(op, shifted, true);
  left.factor(right.sigma());
  PowerState ls = left.run(Eigen::VectorXd::Ones(size), tol, opts.max_iters, 3);
  out.iterations += ls.iterations;
  if (!ls.converged)
    throw SolverError("principal_eigenpair: left eigenvector did not converge");

  const double mu_right = right.sigma() + rs.nu;
  const double mu_left = left.sigma() + ls.nu;
  out.lambda = mu_right / w + delta;
  out.lambda_left = mu_left / w + delta;

  Eigen::VectorXd u = rs.u / rs.u.norm();
  Eigen::VectorXd v = ls.u;
  const double uv = v.dot(u);
  if (!(uv > 0.0))
    throw SolverError("principal_eigenpair: left and right vectors orthogonal");
  v /= uv;

  const double ratio = std::min(u.minCoeff() / u.maxCoeff(), v.minCoeff() / v.maxCoeff());
  out.min_ratio = ratio;
  if (ratio < -1e-8)
    throw SolverError("principal_eigenpair: eigenvector changed sign");

  const double r_right =
      (right.fact().apply(u) - (mu_right - right.sigma()) * u).cwiseAbs().maxCoeff() /
      u.cwiseAbs().maxCoeff();
  const double r_left =
      (left.fact().apply_transpose(v) - (mu_left - left.sigma()) * v).cwiseAbs().maxCoeff() /
      v.cwiseAbs().maxCoeff();
  out.residual = std::max(r_right, r_left);
  out.right = ScalarField::from_flat(op.grid(), u);
  out.left = ScalarField::from_flat(op.grid(), v);
  return out;
}

double periodic_ode_principal_eigenvalue(const TimeProfile& f, double a,
                                         double tol) {
  if (!(a > 0.0))
    throw std::invalid_argument("periodic_ode_principal_eigenvalue: need a > 0");
  const int n = f.size();
  if (n < 3)
    throw std::invalid_argument("periodic_ode_principal_eigenvalue: need N >= 3");
  const double h2 = a / (f.grid().dt() * f.grid().dt());
  const double base = f.values().minCoeff() - 1.0;

  auto build = [&](double shift) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int j = 0; j < n; ++j) {
      trips.emplace_back(j, j, 2 * h2 + f.values()[j] - shift);
      trips.emplace_back(j, (j + 1) % n, -h2);
      trips.emplace_back(j, (j + n - 1) % n, -h2);
    }
    Eigen::SparseMatrix<double> h(n, n);
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
  };
  const Eigen::SparseMatrix<double> h0 = build(0.0);

  double shift = base;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(build(shift));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  int since = 0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = ldlt.solve(x);
    const double lower = cw_lower(x, y);
    y /= y.norm();
    const Eigen::VectorXd hy = h0 * y;
    const double theta = y.dot(hy);
    const double res = (hy - theta * y).cwiseAbs().maxCoeff() / y.cwiseAbs().maxCoeff();
    x = y;
    if (res <= tol * std::max(1.0, std::abs(theta) + 2 * h2)) return theta;
    if (++since >= 2 && lower > 0.0) {
      shift += 0.9 * lower;
      ldlt.compute(build(shift));
      since = 0;
    }
  }
  throw SolverError("periodic_ode_principal_eigenvalue: no convergence");
}

}  // namespace pareig
