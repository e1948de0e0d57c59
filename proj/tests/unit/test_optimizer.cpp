#include "pareig/objectives.hpp"
#include "pareig/optimizer.hpp"
#include "pareig/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pareig;
constexpr double pi = std::numbers::pi;

namespace {

// f(x) = -|x - a|^2 (maximized), whose constrained optimum is the box-mean
// projection of a.
ObjectiveFn quadratic(const Eigen::VectorXd& a) {
  return [a](const Eigen::VectorXd& x) {
    return Evaluation{-(x - a).squaredNorm(), -2 * (x - a)};
  };
}

}  // namespace

TEST_CASE("Projected gradient solves the box-mean quadratic") {
  const Eigen::VectorXd a = random_uniform(40, -1, 2, 7);
  const auto proj = box_mean_projection(0, 1, 0.4);
  OptimizerConfig cfg;
  cfg.initial_step = 0.1;
  const auto res = run(quadratic(a), Eigen::VectorXd::Constant(40, 0.4), proj, cfg);
  const Eigen::VectorXd exact = project_box_mean(a, Eigen::VectorXd::Zero(40),
                                                 Eigen::VectorXd::Ones(40), 0.4);
  CHECK((res.control - exact).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(res.trace.stop_reason != "max_iters");
}

TEST_CASE("Trace is monotone and iterates stay feasible") {
  const Eigen::VectorXd a = random_uniform(30, -2, 2, 1);
  OptimizerConfig cfg;
  cfg.direction = Direction::minimize;
  cfg.max_iters = 200;
  // minimizing |x - a|^2 via the negated objective
  auto f = [a](const Eigen::VectorXd& x) { return Evaluation{(x - a).squaredNorm(), 2 * (x - a)}; };
  const auto res = run(f, Eigen::VectorXd::Constant(30, 0.2), box_mean_projection(-0.5, 0.5, 0.2), cfg);
  const auto& obj = res.trace.objective;
  for (size_t i = 1; i < obj.size(); ++i) CHECK(obj[i] <= obj[i - 1]);
  const auto proj = box_mean_projection(-0.5, 0.5, 0.2);
  CHECK((proj(res.control) - res.control).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(res.control.minCoeff() >= -0.5);
  CHECK(res.control.maxCoeff() <= 0.5);
  CHECK(res.control.mean() == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("Runs are deterministic") {
  SpaceTimeGrid g(2 * pi, -pi, pi, 40, 20);
  BlockParabolicOperator op(g);
  auto v = SpaceProfile::sample(g, [](double x) { return std::cos(x); });
  OptimizerConfig cfg;
  cfg.max_iters = 60;
  const Eigen::VectorXd x0 = random_uniform(40, 0, 1, 99);
  const auto proj = box_mean_projection(0, 1, 0.5);
  const auto r1 = run(talenti_objective(v, 2, op), proj(x0), proj, cfg);
  const auto r2 = run(talenti_objective(v, 2, op), proj(x0), proj, cfg);
  CHECK(r1.trace.to_csv() == r2.trace.to_csv());
  CHECK(r1.control == r2.control);
  CHECK(r1.trace.to_csv(true).find("wall_time") != std::string::npos);
}

TEST_CASE("Stop reasons") {
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(5, 0.5);
  OptimizerConfig cfg;
  cfg.max_iters = 3;
  CHECK(run(quadratic(a), Eigen::VectorXd::Zero(5), [](const Eigen::VectorXd& x) { return x; }, cfg)
            .trace.stop_reason == "max_iters");
  cfg.max_iters = 1000;
  // already optimal: every trial fails to improve until the step underflows
  CHECK(run(quadratic(a), a, [](const Eigen::VectorXd& x) { return x; }, cfg).trace.stop_reason ==
        "step_underflow");
  OptimizerConfig bad;
  bad.step_down = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run(quadratic(a), a, [](const Eigen::VectorXd& x) { return x; }, bad),
                  std::invalid_argument);
}

TEST_CASE("Box-mean Talenti maximizer is bang-bang on one interval") {
  const int n = 100;
  SpaceTimeGrid g(2 * pi, -pi, pi, n, 50);
  BlockParabolicOperator op(g);
  auto v = SpaceProfile::sample(g, [](double x) { return std::cos(x); });
  const auto proj = box_mean_projection(0, 1, 0.5);
  OptimizerConfig cfg;
  cfg.max_iters = 400;
  cfg.initial_step = 1e3;
  const auto res = run(talenti_objective(v, 5, op), proj(random_uniform(n, 0, 1, 2)), proj, cfg);
  const Eigen::VectorXd& c = res.control;
  int transition = 0, rises = 0;
  for (int j = 0; j < n; ++j) {
    if (c[j] > 1e-6 && c[j] < 1 - 1e-6) ++transition;
    rises += c[j] <= 0.5 && c[(j + 1) % n] > 0.5;
  }
  CHECK(transition <= 2);
  CHECK(rises == 1);
}
