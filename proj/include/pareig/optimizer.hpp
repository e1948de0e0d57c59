#pragma once

#include "pareig/io.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pareig {

enum class Direction { minimize, maximize };

struct OptimizerConfig {
  int max_iters = 1000;
  double initial_step = 1.0;
  double step_up = 1.2;
  double step_down = 0.5;
  double min_step = 1e-12;
  /// Relative objective change over stagnation_window accepted steps.
  double objective_tol = 1e-10;
  int stagnation_window = 20;
  Direction direction = Direction::maximize;
  std::uint64_t seed = 0;

  void validate() const;
};

json config_to_json(const OptimizerConfig& cfg);

/// One row per iteration (accepted or not). objective is the value of the
/// current iterate after the iteration, so it is monotone.
struct OptimizerTrace {
  std::vector<double> objective;
  std::vector<double> trial;
  std::vector<double> step;
  std::vector<int> accepted;
  std::vector<double> projection_defect;
  std::vector<double> wall_time;
  int evaluations = 0;
  std::string stop_reason;

  /// wall_time is left out by default so reruns give identical bytes.
  std::string to_csv(bool with_wall_time = false) const;
  json to_json() const;
};

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd grad;
};

using ObjectiveFn = std::function<Evaluation(const Eigen::VectorXd&)>;
using ProjectionFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct OptimizerResult {
  Eigen::VectorXd control;
  double value = 0.0;
  OptimizerTrace trace;
};

/// Projected gradient with the adaptive rule: a trial
/// x+ = P(x +/- step * grad) is accepted only if it strictly improves the
/// objective, then step *= step_up; otherwise step *= step_down and the
/// iteration is retried from x. Stops on max_iters, step < min_step or
/// stagnation.
OptimizerResult run(const ObjectiveFn& objective, const Eigen::VectorXd& control0,
                    const ProjectionFn& projection, const OptimizerConfig& cfg);

/// Uniform samples in [lo, hi] from a seeded generator.
Eigen::VectorXd random_uniform(Eigen::Index n, double lo, double hi,
                               std::uint64_t seed);

}  // namespace pareig
