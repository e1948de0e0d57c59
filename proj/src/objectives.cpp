#include "pareig/objectives.hpp"

#include "pareig/rearrangement.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pareig {

ObjectiveEval eval_talenti(const TimeProfile& c, const SpaceProfile& v, int k,
                           const BlockParabolicOperator& op) {
  if (k < 1) throw std::invalid_argument("eval_talenti: need k >= 1");
  require_same_grid(op.grid(), c.grid(), "eval_talenti");
  require_same_grid(op.grid(), v.grid(), "eval_talenti");
  const SpaceTimeGrid& g = op.grid();
  const SpaceProfile vhat(g, v.values().array() - v.mean());
  ScalarField rhs = outer_product(c, vhat);
  // exact zero mean per column up to rounding; remove the rounding
  rhs.values().array() -= field_mean(rhs);
  const ScalarField u = solve_direct(op, rhs);

  const double cell = g.dt() * g.dx();
  const Eigen::ArrayXXd pow_odd = u.values().array().pow(2 * k - 1);
  ObjectiveEval out;
  out.raw_sum = (pow_odd * u.values().array()).sum();
  out.value = cell * out.raw_sum;

  ScalarField jprime(g, (cell * 2.0 * k) * pow_odd.matrix());
  jprime.values().array() -= field_mean(jprime);
  const ScalarField p = solve_adjoint(op, jprime);
  out.grad_profile = TimeProfile(g, p.values().transpose() * vhat.values());

  const double w = op.time_weight();
  out.residual = std::max(
      (op.apply(u.flat()) - w * rhs.flat()).cwiseAbs().maxCoeff(),
      (op.apply_transpose(p.flat()) - w * jprime.flat()).cwiseAbs().maxCoeff());
  return out;
}

ObjectiveEval eval_eigenvalue(const ScalarField& m,
                              const BlockParabolicOperator& op,
                              const EigenOptions& opts) {
  const EigenPair e = principal_eigenpair(op, m, opts);
  ObjectiveEval out;
  out.value = e.lambda;
  const double uv = e.left.flat().dot(e.right.flat());
  out.grad_field = ScalarField(
      m.grid(), -(e.right.values().array() * e.left.values().array()).matrix() / uv);
  out.residual = e.residual;
  out.iterations = e.iterations;
  return out;
}

TimeProfile reduce_to_profile(const ScalarField& grad, const SpaceProfile& v) {
  require_same_grid(grad.grid(), v.grid(), "reduce_to_profile");
  return {grad.grid(), grad.values().transpose() * v.values()};
}

double certificate_anchor(int k) {
  if (k < 1) throw std::invalid_argument("certificate_anchor: need k >= 1");
  return (2.0 * k - 1) * (2.0 * k - 2) / std::pow(2.0, 2 * k - 1);
}

namespace {

// Psi_j = dJ/dc_j / dt at c = cos(pi + t), V = cos x.
Eigen::VectorXd certificate_psi(int k, const SpaceTimeGrid& grid, const char* what) {
  constexpr double pi = std::numbers::pi;
  const double tol = 1e-9;
  if (std::abs(grid.horizon() - 2 * pi) > tol || std::abs(grid.space_lo() + pi) > tol ||
      std::abs(grid.space_hi() - pi) > tol)
    throw std::invalid_argument(std::string(what) + ": needs T = 2 pi and space [-pi, pi]");
  BlockParabolicOperator op(grid);
  const auto c = TimeProfile::sample(grid, [](double t) { return std::cos(pi + t); });
  const auto v = SpaceProfile::sample(grid, [](double x) { return std::cos(x); });
  return eval_talenti(c, v, k, op).grad_profile->values() / grid.dt();
}

}  // namespace

double symmetry_certificate(int k, const SpaceTimeGrid& grid) {
  const Eigen::VectorXd psi = certificate_psi(k, grid, "symmetry_certificate");
  const int n = grid.time_steps();
  double defect = 0.0;
  for (int j = 0; j < n; ++j)
    defect = std::max(defect, std::abs(psi[j] - psi[(n - j) % n]));
  return defect / psi.cwiseAbs().maxCoeff();
}

double certificate_slope(int k, const SpaceTimeGrid& grid) {
  const Eigen::VectorXd psi = certificate_psi(k, grid, "certificate_slope");
  const int n = grid.time_steps();
  if (n % 2 != 0 || n < 8) throw std::invalid_argument("certificate_slope: need even N >= 8");
  // -Psi' + Psi = a_k omega^{2k-1}, a_k = 2k times the integral of cos^{2k} over a period
  double binom = 1.0;
  for (int i = 1; i <= k; ++i) binom = binom * (k + i) / i;
  const double a_k = 2.0 * k * std::numbers::pi * binom / std::pow(2.0, 2 * k - 1);
  const double dt = grid.dt();
  auto f = [&](int j) {
    const auto at = [&](int i) { return psi[((i % n) + n) % n]; };
    return (-(at(j + 1) - 2 * at(j) + at(j - 1)) / (dt * dt) + at(j)) / a_k;
  };
  return (f(n / 2 + 1) - f(n / 2 - 1)) / (2 * dt);
}

namespace {

Eigen::VectorXd rotate(const Eigen::VectorXd& v, int shift) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) out[j] = v[((j - shift) % n + n) % n];
  return out;
}

// Reflection defect of v about index c (node) or c + 1/2 (face); smaller one.
double reflection_defect(const Eigen::VectorXd& v, int c) {
  const int n = static_cast<int>(v.size());
  double node = 0.0, face = 0.0;
  for (int j = 0; j < n; ++j) {
    node = std::max(node, std::abs(v[j] - v[((2 * c - j) % n + n) % n]));
    face = std::max(face, std::abs(v[j] - v[((2 * c + 1 - j) % n + n) % n]));
  }
  return std::min(node, face);
}

}  // namespace

TimeProfile align_peak(const TimeProfile& c) {
  const int n = c.size();
  return {c.grid(), rotate(c.values(), n / 2 - peak_index(c.values()))};
}

ScalarField align_peak(const ScalarField& m) {
  const int rows = m.rows(), cols = m.cols();
  const int pt = peak_index(m.values().colwise().maxCoeff().transpose());
  const int px = peak_index(m.values().rowwise().maxCoeff());
  Eigen::MatrixXd out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = m(i + px - rows / 2, j + pt - cols / 2);
  return {m.grid(), std::move(out)};
}

double asymmetry(const TimeProfile& c) {
  const TimeProfile a = align_peak(c);
  return reflection_defect(a.values(), c.size() / 2);
}

double asymmetry(const ScalarField& m) {
  const ScalarField a = align_peak(m);
  const int rows = a.rows(), cols = a.cols();
  // one reflection center per axis for the whole field
  auto axis = [](const Eigen::MatrixXd& mat, int c) {
    const int n = static_cast<int>(mat.cols());
    double node = 0.0, face = 0.0;
    for (int j = 0; j < n; ++j) {
      const int rn = ((2 * c - j) % n + n) % n, rf = ((2 * c + 1 - j) % n + n) % n;
      node = std::max(node, (mat.col(j) - mat.col(rn)).cwiseAbs().maxCoeff());
      face = std::max(face, (mat.col(j) - mat.col(rf)).cwiseAbs().maxCoeff());
    }
    return std::min(node, face);
  };
  return std::max(axis(a.values(), cols / 2),
                  axis(a.values().transpose(), rows / 2));
}

double shift_aligned_distance(const TimeProfile& c, const TimeProfile& ref) {
  require_same_grid(c.grid(), ref.grid(), "shift_aligned_distance");
  const int n = c.size();
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n; ++s)
    best = std::min(best, (rotate(c.values(), s) - ref.values()).squaredNorm());
  return std::sqrt(c.grid().dt() * best);
}

}  // namespace pareig
