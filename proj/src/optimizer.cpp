#include "pareig/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pareig {

void OptimizerConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("optimizer: max_iters < 0");
  if (!(initial_step > 0)) throw std::invalid_argument("optimizer: initial_step must be > 0");
  if (!(step_down > 0 && step_down < 1))
    throw std::invalid_argument("optimizer: need 0 < step_down < 1");
  if (!(step_up > 1)) throw std::invalid_argument("optimizer: need step_up > 1");
  if (!(min_step > 0)) throw std::invalid_argument("optimizer: min_step must be > 0");
  if (!(objective_tol >= 0)) throw std::invalid_argument("optimizer: objective_tol < 0");
  if (stagnation_window < 1) throw std::invalid_argument("optimizer: stagnation_window < 1");
}

json config_to_json(const OptimizerConfig& c) {
  return {{"max_iters", c.max_iters},
          {"initial_step", c.initial_step},
          {"step_up", c.step_up},
          {"step_down", c.step_down},
          {"min_step", c.min_step},
          {"objective_tol", c.objective_tol},
          {"stagnation_window", c.stagnation_window},
          {"direction", c.direction == Direction::minimize ? "minimize" : "maximize"},
          {"seed", c.seed}};
}

std::string OptimizerTrace::to_csv(bool with_wall_time) const {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < objective.size(); ++i) {
    rows.push_back({double(i), objective[i], trial[i], step[i], double(accepted[i]),
                    projection_defect[i]});
    if (with_wall_time) rows.back().push_back(wall_time[i]);
  }
  std::vector<std::string> header{"iter", "objective", "trial", "step", "accepted",
                                  "projection_defect"};
  if (with_wall_time) header.push_back("wall_time");
  return table_to_csv(header, rows);
}

json OptimizerTrace::to_json() const {
  return {{"objective", objective},     {"trial", trial},
          {"step", step},               {"accepted", accepted},
          {"projection_defect", projection_defect},
          {"wall_time", wall_time},     {"evaluations", evaluations},
          {"stop_reason", stop_reason}};
}

namespace {

Evaluation evaluate(const ObjectiveFn& f, const Eigen::VectorXd& x, int iter) {
  try {
    Evaluation e = f(x);
    if (!std::isfinite(e.value) || e.grad.size() != x.size() || !e.grad.allFinite())
      throw std::runtime_error("non-finite value or gradient of wrong size");
    return e;
  } catch (const std::exception& ex) {
    std::ostringstream os;
    os << "optimizer iteration " << iter << ": " << ex.what();
    throw std::runtime_error(os.str());
  }
}

}  // namespace

OptimizerResult run(const ObjectiveFn& objective, const Eigen::VectorXd& control0,
                    const ProjectionFn& projection, const OptimizerConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const double sign = cfg.direction == Direction::maximize ? 1.0 : -1.0;

  OptimizerResult res;
  res.control = projection(control0);
  Evaluation cur = evaluate(objective, res.control, 0);
  res.trace.evaluations = 1;
  double step = cfg.initial_step;
  std::deque<double> recent{cur.value};
  res.trace.stop_reason = "max_iters";

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Eigen::VectorXd target = res.control + sign * step * cur.grad;
    Eigen::VectorXd trial = projection(target);
    const double defect = (trial - target).cwiseAbs().maxCoeff();
    Evaluation next = evaluate(objective, trial, it);
    ++res.trace.evaluations;
    const bool better = sign * (next.value - cur.value) > 0.0;
    res.trace.trial.push_back(next.value);
    res.trace.step.push_back(step);
    res.trace.accepted.push_back(better ? 1 : 0);
    res.trace.projection_defect.push_back(defect);
    if (better) {
      res.control = std::move(trial);
      cur = std::move(next);
      step *= cfg.step_up;
      recent.push_back(cur.value);
      if (static_cast<int>(recent.size()) > cfg.stagnation_window + 1) recent.pop_front();
    } else {
      step *= cfg.step_down;
    }
    res.trace.objective.push_back(cur.value);
    res.trace.wall_time.push_back(elapsed());

    if (step < cfg.min_step) {
      res.trace.stop_reason = "step_underflow";
      break;
    }
    if (better && static_cast<int>(recent.size()) == cfg.stagnation_window + 1) {
      const double change = std::abs(recent.back() - recent.front());
      if (change <= cfg.objective_tol * std::abs(cur.value)) {
        res.trace.stop_reason = "stagnation";
        break;
      }
    }
  }
  res.value = cur.value;
  return res;
}

Eigen::VectorXd random_uniform(Eigen::Index n, double lo, double hi,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace pareig
