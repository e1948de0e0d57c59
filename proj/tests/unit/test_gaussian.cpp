#include "pareig/gaussian.hpp"
#include "pareig/rearrangement.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pareig;
constexpr double pi = std::numbers::pi;

namespace {

// Forward RK4 on xi' = mu c - 2 xi^2 with c held constant on each cell. The
// positive branch attracts forward in time, so after enough periods the
// trajectory is periodic. Returns node values over the last period and the
// mean of xi by composite Simpson on the substeps.
struct Rk4Result {
  Eigen::VectorXd nodes;
  double mean;
};

Rk4Result rk4_oracle(const TimeProfile& c, double mu, int periods = 60, int sub = 64) {
  const int n = c.size();
  const double h = c.grid().dt() / sub;
  double xi = std::sqrt(0.5 * mu * c.values().maxCoeff());
  Rk4Result out{Eigen::VectorXd(n), 0.0};
  for (int p = 0; p < periods; ++p) {
    const bool last = p == periods - 1;
    double integral = 0.0;
    for (int j = 0; j < n; ++j) {
      if (last) out.nodes[j] = xi;
      const double q = mu * c.values()[j];
      auto f = [q](double x) { return q - 2 * x * x; };
      for (int s = 0; s < sub; ++s) {
        const double k1 = f(xi), k2 = f(xi + 0.5 * h * k1);
        const double k3 = f(xi + 0.5 * h * k2), k4 = f(xi + h * k3);
        const double next = xi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        // Simpson with the RK midpoint estimate
        integral += h / 6 * (xi + 4 * (xi + 0.5 * h * k2) + next);
        xi = next;
      }
    }
    if (last) out.mean = integral / c.grid().horizon();
  }
  return out;
}

SpaceTimeGrid tgrid(int n, double horizon = 2 * pi) { return {horizon, -pi, pi, n, 4}; }

}  // namespace

TEST_CASE("Riccati periodic solution matches forward RK4") {
  for (int n : {64, 400}) {
    auto c = TimeProfile::sample(tgrid(n), [](double t) { return 1 + 0.5 * std::cos(t); });
    const auto sol = solve_riccati_periodic(c, 2.0);
    const auto ref = rk4_oracle(c, 2.0);
    CHECK((sol.xi.values() - ref.nodes).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sol.mean_xi == doctest::Approx(ref.mean).epsilon(1e-8));
    CHECK(sol.mean_xi == doctest::Approx(sol.cell_integrals.sum() / (2 * pi)).epsilon(1e-12));
    CHECK(sol.residual < 1e-6);
  }
}

TEST_CASE("Riccati piecewise-constant limit approaches the smooth problem") {
  // continuous-coefficient value from a fine RK4 run
  auto fine = TimeProfile::sample(tgrid(4000), [](double t) { return 1 + 0.5 * std::cos(t); });
  const double smooth = rk4_oracle(fine, 2.0, 40, 4).mean;
  auto c = TimeProfile::sample(tgrid(400), [](double t) { return 1 + 0.5 * std::cos(t); });
  CHECK(std::abs(solve_riccati_periodic(c, 2.0).mean_xi - smooth) < 5e-3);
}

TEST_CASE("Riccati constant coefficient") {
  for (double c0 : {0.3, 1.0, 4.0})
    for (double mu : {0.5, 2.0}) {
      const auto sol = solve_riccati_periodic(TimeProfile::constant(tgrid(50), c0), mu);
      const double exact = std::sqrt(mu * c0 / 2);
      CHECK(sol.mean_xi == doctest::Approx(exact).epsilon(1e-12));
      CHECK((sol.xi.values().array() - exact).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("Gaussian eigenvalue sums over the spectrum of A") {
  const auto c = TimeProfile::constant(tgrid(32), 1.0);
  const auto g = gaussian_eigenvalue(c, {1.0, 4.0});
  CHECK(g.lambda_bar == doctest::Approx(std::sqrt(0.5) + std::sqrt(2.0)).epsilon(1e-12));
  // beta is periodic: it returns to zero after one period
  CHECK(std::abs(g.beta[0]) < 1e-14);
  CHECK(g.beta.values().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Gaussian eigenfunction is periodic and solves the heat equation in time") {
  auto c = TimeProfile::sample(tgrid(200), [](double t) { return 1 + 0.5 * std::sin(t); });
  const auto g = gaussian_eigenvalue(c, {1.5});
  // beta(T) = 0: sum of cell contributions vanishes
  const double total = g.lambda_bar * 2 * pi - g.xi_profiles[0].cell_integrals.sum();
  CHECK(std::abs(total) < 1e-10);
  // at y = 0, log w0 = beta and d beta/dt = lambda - xi on average over a cell
  const auto& xi = g.xi_profiles[0];
  for (int j = 0; j < 200; j += 37) {
    const double d = g.beta[j + 1] - g.beta[j];
    const double expected = g.lambda_bar * c.grid().dt() - xi.cell_integrals[j];
    CHECK(std::abs(d - expected) < 1e-12);
  }
  const double w = gaussian_eigenfunction(g, 3, Eigen::VectorXd::Constant(1, 0.7));
  CHECK(w == doctest::Approx(std::exp(g.beta[3] - 0.5 * xi.xi[3] * 0.49)).epsilon(1e-14));
}

TEST_CASE("Negative branch is the time reversal of the positive branch") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const int n = 96;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  TimeProfile c(tgrid(n), v);
  TimeProfile rev(tgrid(n), v.reverse());
  const auto neg = solve_riccati_negative(c, 1.3);
  const auto pos = solve_riccati_periodic(rev, 1.3);
  for (int j = 0; j < n; ++j) CHECK(neg.xi[j] == doctest::Approx(-pos.xi[(n - j) % n]).epsilon(1e-9));
  CHECK(neg.mean_xi == doctest::Approx(-pos.mean_xi).epsilon(1e-12));
  CHECK(neg.residual < 1e-6);
}

TEST_CASE("Gaussian eigenvalue decreases under symmetric rearrangement") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(128);
    for (auto& x : v) x = u(rng);
    TimeProfile c(tgrid(128), v);
    const auto cs = symmetric_decreasing_rearrangement(c);
    const double a = gaussian_eigenvalue(c, {1.0}).lambda_bar;
    const double b = gaussian_eigenvalue(cs, {1.0}).lambda_bar;
    CHECK(b <= a + 1e-12);
  }
}

TEST_CASE("Riccati rejects bad input") {
  const auto g = tgrid(16);
  CHECK_THROWS_AS(solve_riccati_periodic(TimeProfile::constant(g, 0.0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_riccati_periodic(TimeProfile::constant(g, 1.0), 0.0), std::invalid_argument);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(16);
  v[3] = -0.1;
  CHECK_THROWS_AS(solve_riccati_periodic(TimeProfile(g, v), 1.0), std::invalid_argument);
}

TEST_CASE("Riccati handles cells where c vanishes") {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(64);
  v.head(16).setConstant(3.0);
  TimeProfile c(tgrid(64), v);
  const auto sol = solve_riccati_periodic(c, 1.0);
  const auto ref = rk4_oracle(c, 1.0, 200);
  CHECK(sol.mean_xi == doctest::Approx(ref.mean).epsilon(1e-8));
  CHECK(sol.residual < 1e-8);
}
