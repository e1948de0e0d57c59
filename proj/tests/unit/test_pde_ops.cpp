#include "pareig/pde_ops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pareig;
constexpr double pi = std::numbers::pi;

namespace {

Eigen::MatrixXd dense(const Eigen::SparseMatrix<double>& s) { return Eigen::MatrixXd(s); }

Eigen::VectorXd random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Least-squares solve of the consistent singular system with a zero-mean row
// appended; exact in the complement of constants.
Eigen::VectorXd dense_mean_zero_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd ext(n + 1, n);
  ext.topRows(n) = a;
  ext.row(n).setOnes();
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = b;
  rhs[n] = 0;
  return ext.colPivHouseholderQr().solve(rhs);
}

double omega(double t) { return (std::cos(t + pi) + std::sin(t + pi)) / 2; }

double closed_form_error(int n, int m) {
  SpaceTimeGrid g(2 * pi, -pi, pi, n, m);
  BlockParabolicOperator op(g);
  auto c = TimeProfile::sample(g, [](double t) { return std::cos(pi + t); });
  auto v = SpaceProfile::sample(g, [](double x) { return std::cos(x); });
  auto u = solve_direct(op, outer_product(c, v));
  auto exact = ScalarField::sample(g, [](double t, double x) { return omega(t) * std::cos(x); });
  return (u.values() - exact.values()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("laplacian stencil") {
  SpaceTimeGrid g(1, 0, 3, 2, 3);
  Eigen::MatrixXd a = dense(assemble_laplacian(g).matrix);
  Eigen::Matrix3d expect;
  expect << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  CHECK((a - expect).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(assemble_laplacian(SpaceTimeGrid(1, 0, 1, 2, 2)), std::invalid_argument);
}

TEST_CASE("laplacian spectrum matches circulant formula") {
  SpaceTimeGrid g(1, -pi, pi, 2, 100);
  Eigen::MatrixXd a = dense(assemble_laplacian(g).matrix);
  CHECK((a * Eigen::VectorXd::Ones(100)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> formula;
  for (int k = 0; k < 100; ++k)
    formula.push_back(4 * std::pow(std::sin(pi * k / 100), 2) / (g.dx() * g.dx()));
  std::sort(formula.begin(), formula.end());
  for (int k = 0; k < 100; ++k)
    CHECK(es.eigenvalues()[k] == doctest::Approx(formula[k]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("block operator structure") {
  std::mt19937 rng(1);
  SpaceTimeGrid g(1.3, 0, 1, 7, 5);
  BlockParabolicOperator op(g, 0.7, 2.5);
  Eigen::SparseMatrix<double> s = op.assemble();
  CHECK(op.apply(Eigen::VectorXd::Ones(g.size())).cwiseAbs().maxCoeff() == 0.0);
  auto x = random_vector(g.size(), rng);
  CHECK((op.apply(x) - s * x).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SparseMatrix<double> st = s.transpose();
  CHECK((op.apply_transpose(x) - st * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(op.time_weight() == doctest::Approx(g.dt() / 0.7));
  CHECK(op.diffusion_step() == doctest::Approx(g.dt() * 2.5 / 0.7));
  CHECK_THROWS(BlockParabolicOperator(g, 0.0, 1.0));
}

TEST_CASE("direct solve: closed form and first order in time") {
  const double e200 = closed_form_error(200, 100);
  CHECK(e200 < 0.02);
  const double e400 = closed_form_error(400, 100);
  const double e800 = closed_form_error(800, 100);
  // dx^2 part is ~1e-4 here, so time halving dominates
  CHECK(std::log2(e200 / e400) >= 0.9);
  CHECK(std::log2(e400 / e800) >= 0.9);
}

TEST_CASE("direct solve: zero and random rhs against dense oracle") {
  std::mt19937 rng(7);
  SpaceTimeGrid g(1, 0, 1, 16, 16);
  BlockParabolicOperator op(g);
  auto z = solve_direct(op, ScalarField::zeros(g));
  CHECK(z.values().cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd r = random_vector(g.size(), rng);
  r.array() -= r.mean();
  auto rhs = ScalarField::from_flat(g, r);
  auto u = solve_direct(op, rhs);
  Eigen::VectorXd res = op.apply(u.flat()) - g.dt() * r;
  CHECK(res.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(field_mean(u)) < 1e-14);
  Eigen::VectorXd oracle = dense_mean_zero_solve(dense(op.assemble()), g.dt() * r);
  CHECK((oracle - u.flat()).cwiseAbs().maxCoeff() < 1e-9);

  auto p = solve_adjoint(op, rhs);
  Eigen::MatrixXd at = dense(op.assemble()).transpose();
  CHECK((at * p.flat() - g.dt() * r).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((dense_mean_zero_solve(at, g.dt() * r) - p.flat()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("incompatible rhs is rejected") {
  SpaceTimeGrid g(1, 0, 1, 8, 8);
  BlockParabolicOperator op(g);
  CHECK_THROWS_AS(solve_direct(op, ScalarField::constant(g, 1e-3)), SolverError);
  CHECK_THROWS_AS(solve_adjoint(op, ScalarField::constant(g, 1e-3)), SolverError);
  CHECK_THROWS_AS(solve_direct(op, ScalarField::zeros(SpaceTimeGrid(1, 0, 1, 8, 9))), GridMismatch);
}

TEST_CASE("adjoint identity") {
  std::mt19937 rng(3);
  SpaceTimeGrid g(1, 0, 1, 8, 8);
  BlockParabolicOperator op(g);
  auto u = random_vector(g.size(), rng);
  auto p = random_vector(g.size(), rng);
  CHECK(op.apply(u).dot(p) == doctest::Approx(u.dot(op.apply_transpose(p))).epsilon(1e-13));
}

TEST_CASE("scaled operator: time-independent source gives A u = f / beta") {
  SpaceTimeGrid g(1, -pi, pi, 6, 40);
  const double alpha = 0.3, beta = 2.0;
  BlockParabolicOperator op(g, alpha, beta);
  auto f = ScalarField::sample(g, [](double, double x) { return std::cos(x); });
  auto u = solve_direct(op, f);
  const double symbol = (2 - 2 * std::cos(g.dx())) / (g.dx() * g.dx());
  auto expect = ScalarField::sample(g, [&](double, double x) { return std::cos(x) / (beta * symbol); });
  CHECK((u.values() - expect.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adjoint matches the closed-form reduced gradient") {
  // With j'(U) = 2U and U = omega(t) cos x, the continuum adjoint gives
  // int psi cos x dx = -pi cos t.
  SpaceTimeGrid g(2 * pi, -pi, pi, 400, 100);
  BlockParabolicOperator op(g);
  auto c = TimeProfile::sample(g, [](double t) { return std::cos(pi + t); });
  auto v = SpaceProfile::sample(g, [](double x) { return std::cos(x); });
  auto u = solve_direct(op, outer_product(c, v));
  ScalarField rhs(g, 2.0 * u.values());
  rhs.values().array() -= field_mean(rhs);
  auto p = solve_adjoint(op, rhs);
  double err = 0;
  for (int j = 0; j < g.time_steps(); ++j) {
    const double psi = g.dx() * p.values().col(j).dot(v.values());
    err = std::max(err, std::abs(psi + pi * std::cos(g.time(j))));
  }
  MESSAGE("adjoint closed-form error " << err);
  CHECK(err < 0.05);
}

TEST_CASE("shifted factorization against sparse oracle") {
  std::mt19937 rng(11);
  SpaceTimeGrid g(0.8, 0, 1, 9, 6);
  BlockParabolicOperator op(g, 1.5, 0.5);
  auto d = random_vector(g.size(), rng);
  PeriodicFactorization f(op, d, -0.4);
  CHECK_FALSE(f.singular());
  Eigen::MatrixXd k = dense(op.assemble());
  k.diagonal() -= op.time_weight() * d + Eigen::VectorXd::Constant(g.size(), -0.4);
  auto y = random_vector(g.size(), rng);
  CHECK((f.apply(y) - k * y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((f.apply_transpose(y) - k.transpose() * y).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd x = k.partialPivLu().solve(y);
  CHECK((f.solve(y) - x).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::VectorXd xt = k.transpose().partialPivLu().solve(y);
  CHECK((f.solve_transpose(y) - xt).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(f.norm_inf() == doctest::Approx(k.cwiseAbs().rowwise().sum().maxCoeff()));
}
