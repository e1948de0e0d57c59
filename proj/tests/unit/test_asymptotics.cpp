#include "pareig/asymptotics.hpp"
#include "pareig/rearrangement.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pareig;
constexpr double pi = std::numbers::pi;

namespace {

ScalarField section5_field(const SpaceTimeGrid& g) {
  return ScalarField::sample(g, [](double t, double x) { return std::cos(pi + t) * std::cos(x); });
}

// Mode-by-mode oracle for m = c(t) V(x), V a trigonometric polynomial given
// by (k, cos coefficient, sin coefficient). Each space mode of the response
// obeys the scalar periodic recurrence (1 + dt l_k) a_{j+1} - a_j = dt c_j;
// its centered difference carries the factor sin(k dx)/dx.
double fourier_lambda(const TimeProfile& c, const std::vector<std::array<double, 3>>& modes) {
  const auto& g = c.grid();
  const int n = g.time_steps();
  const double dt = g.dt(), dx = g.dx();
  double total = 0.0;
  for (const auto& [k, a, b] : modes) {
    const double lk = (2 - 2 * std::cos(k * dx)) / (dx * dx);
    const double r = 1 / (1 + dt * lk);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z = r * (z + dt * c.values()[j]);
    double alpha = z / (1 - std::pow(r, n));
    double mean_sq = 0.0;
    for (int j = 0; j < n; ++j) {
      mean_sq += alpha * alpha;
      alpha = r * (alpha + dt * c.values()[j]);
    }
    mean_sq /= n;
    const double grad = std::sin(k * dx) / dx;
    total += 0.5 * (a * a + b * b) * grad * grad * mean_sq;
  }
  return total;
}

}  // namespace

TEST_CASE("Lambda of a constant potential vanishes") {
  SpaceTimeGrid g(1.0, 0, 1, 16, 12);
  BlockParabolicOperator op(g);
  CHECK(capital_lambda(ScalarField::constant(g, 0.7), op) < 1e-24);
  CHECK(std::abs(capital_lambda_discrete(ScalarField::constant(g, 0.7), op)) < 1e-24);
}

TEST_CASE("Lambda of the separable example approaches 1/8") {
  double prev = 1.0;
  for (int n : {100, 200, 400}) {
    SpaceTimeGrid g(2 * pi, -pi, pi, n, 100);
    BlockParabolicOperator op(g);
    const double err = std::abs(capital_lambda(section5_field(g), op) - 0.125);
    CHECK(err < 0.04 * 0.125);
    CHECK(err < 0.6 * prev);  // first order in dt
    prev = err;
  }
}

TEST_CASE("Lambda matches the Fourier-mode oracle") {
  SpaceTimeGrid g(2 * pi, -pi, pi, 96, 48);
  BlockParabolicOperator op(g);
  auto c = TimeProfile::sample(g, [](double t) { return 1 + 0.5 * std::cos(t) + 0.2 * std::sin(3 * t); });
  const std::vector<std::array<double, 3>> modes{{1, 1.0, 0.0}, {2, 0.0, 0.3}, {3, 0.2, 0.0}};
  auto v = SpaceProfile::sample(g, [](double x) {
    return std::cos(x) + 0.3 * std::sin(2 * x) + 0.2 * std::cos(3 * x);
  });
  const double direct = capital_lambda(outer_product(c, v), op);
  CHECK(direct == doctest::Approx(fourier_lambda(c, modes)).epsilon(1e-9));
}

TEST_CASE("Lambda ignores pure-time perturbations") {
  SpaceTimeGrid g(2 * pi, -pi, pi, 64, 32);
  BlockParabolicOperator op(g);
  const ScalarField m = section5_field(g);
  Eigen::MatrixXd shifted = m.values();
  for (int j = 0; j < g.time_steps(); ++j) shifted.col(j).array() += std::sin(3 * g.time(j)) + 0.4;
  CHECK(std::abs(capital_lambda(ScalarField(g, shifted), op) - capital_lambda(m, op)) < 1e-8);
}

TEST_CASE("Lambda is nonnegative and larger at the rearranged profile") {
  SpaceTimeGrid g(2 * pi, -pi, pi, 64, 32);
  BlockParabolicOperator op(g);
  auto v = SpaceProfile::sample(g, [](double x) { return std::cos(x); });
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(64);
    for (auto& e : x) e = u(rng);
    TimeProfile c(g, x);
    const double plain = capital_lambda(outer_product(c, v), op);
    const double sym = capital_lambda(outer_product(symmetric_decreasing_rearrangement(c), v), op);
    CHECK(plain >= 0);
    CHECK(sym >= plain - 1e-12);
  }
}

TEST_CASE("mu sweep: constant potential has zero defect") {
  SpaceTimeGrid g(1.0, 0, 1, 16, 16);
  const auto t = mu_sweep(ScalarField::constant(g, 0.3), {1, 10, 100});
  for (const auto& r : t.rows) {
    CHECK(r.lambda == doctest::Approx(-0.3).epsilon(1e-10));
    CHECK(r.defect < 1e-10);
  }
}

TEST_CASE("mu sweep: defect decays faster than 1/mu") {
  SpaceTimeGrid g(2 * pi, -pi, pi, 48, 24);
  SweepOptions o;
  o.threads = 3;
  const auto t = mu_sweep(section5_field(g), {10, 30, 100, 300, 1000}, o);
  CHECK(t.slope <= -1.4);
  for (size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].defect < t.rows[i - 1].defect);
    CHECK(std::abs(t.rows[i].lambda) < std::abs(t.rows[i - 1].lambda));
  }
  CHECK(t.rows.back().lambda <= 0);
  // single-threaded run gives the identical table
  const auto serial = mu_sweep(section5_field(g), {10, 30, 100, 300, 1000});
  CHECK(serial.to_csv() == t.to_csv());
  CHECK_THROWS_AS(mu_sweep(section5_field(g), {30, 10}), std::invalid_argument);
}

TEST_CASE("epsilon sweep preconditions and resolution gate") {
  SpaceTimeGrid g(2 * pi, -pi, pi, 320, 64);
  const auto c = TimeProfile::constant(g, 1.0);
  CHECK_THROWS_AS(epsilon_sweep(c, SpaceProfile::sample(g, [](double) { return 2.0; }), {0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(epsilon_sweep(c, SpaceProfile::sample(g, [](double x) { return std::cos(2 * x); }), {0.1}),
                  std::invalid_argument);
  const auto v = SpaceProfile::sample(g, [](double x) { return std::cos(x); });
  const auto t = epsilon_sweep(c, v, {0.2, 0.1, 0.01});
  CHECK(t.rows[0].status == "ok");
  CHECK(t.rows[1].status == "ok");
  CHECK(t.rows[2].status.starts_with("unresolved"));
  CHECK(std::isnan(t.rows[2].lambda));
  CHECK(t.summary["lambda_bar"].get<double>() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
  // rescaled values move up toward the Gaussian value
  CHECK(t.rows[1].rescaled > t.rows[0].rescaled);
  CHECK(t.rows[1].defect < 0.05);
}

TEST_CASE("log-log slope of an exact power law") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double e : x) y.push_back(3 * std::pow(e, -1.5));
  CHECK(loglog_slope(x, y) == doctest::Approx(-1.5));
  CHECK(std::isnan(loglog_slope({1.0}, {1.0})));
}
