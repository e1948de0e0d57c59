#include "pareig/problems.hpp"

#include "pareig/objectives.hpp"

namespace pareig {

ObjectiveFn talenti_objective(const SpaceProfile& v, int k,
                              const BlockParabolicOperator& op) {
  return [v, k, &op](const Eigen::VectorXd& c) {
    const ObjectiveEval e = eval_talenti(TimeProfile(op.grid(), c), v, k, op);
    return Evaluation{e.value, e.grad_profile->values()};
  };
}

ObjectiveFn eigenvalue_profile_objective(const SpaceProfile& v,
                                         const BlockParabolicOperator& op,
                                         const EigenOptions& opts) {
  return [v, &op, opts](const Eigen::VectorXd& c) {
    const ObjectiveEval e =
        eval_eigenvalue(outer_product(TimeProfile(op.grid(), c), v), op, opts);
    return Evaluation{e.value, reduce_to_profile(*e.grad_field, v).values()};
  };
}

ObjectiveFn eigenvalue_field_objective(const BlockParabolicOperator& op,
                                       const EigenOptions& opts) {
  return [&op, opts](const Eigen::VectorXd& m) {
    const ObjectiveEval e = eval_eigenvalue(ScalarField::from_flat(op.grid(), m), op, opts);
    return Evaluation{e.value, e.grad_field->flat()};
  };
}

ProjectionFn box_mean_projection(double lo, double hi, double mean) {
  return [lo, hi, mean](const Eigen::VectorXd& c) {
    const Eigen::Index n = c.size();
    return project_box_mean(c, Eigen::VectorXd::Constant(n, lo),
                            Eigen::VectorXd::Constant(n, hi), mean);
  };
}

Eigen::VectorXd flatten(const RearrangementBody1D& b) {
  return Eigen::Map<const Eigen::VectorXd>(b.F.data(), b.F.size());
}

RearrangementBody1D unflatten(const RearrangementBody1D& layout,
                              const Eigen::VectorXd& x) {
  if (x.size() != layout.F.size())
    throw std::invalid_argument("unflatten: wrong control length");
  RearrangementBody1D b = layout;
  b.F = Eigen::Map<const Eigen::MatrixXd>(x.data(), layout.F.rows(), layout.F.cols());
  return b;
}

Eigen::VectorXd flatten(const RearrangementBody2D& b) {
  const Eigen::Index cells = b.grid.size();
  Eigen::VectorXd x(cells * b.slices);
  for (int k = 0; k < b.slices; ++k)
    x.segment(k * cells, cells) = Eigen::Map<const Eigen::VectorXd>(b.F[k].data(), cells);
  return x;
}

RearrangementBody2D unflatten(const RearrangementBody2D& layout,
                              const Eigen::VectorXd& x) {
  const Eigen::Index cells = layout.grid.size();
  if (x.size() != cells * layout.slices)
    throw std::invalid_argument("unflatten: wrong control length");
  RearrangementBody2D b = layout;
  for (int k = 0; k < layout.slices; ++k)
    b.F[k] = Eigen::Map<const Eigen::MatrixXd>(x.data() + k * cells,
                                               layout.grid.space_steps(),
                                               layout.grid.time_steps());
  return b;
}

ObjectiveFn through_body(const ObjectiveFn& profile_objective,
                         const RearrangementBody1D& layout) {
  return [profile_objective, layout](const Eigen::VectorXd& x) {
    const TimeProfile c = reconstruct_profile(unflatten(layout, x));
    const Evaluation e = profile_objective(c.values());
    Eigen::MatrixXd g(layout.slices, c.size());
    g.rowwise() = e.grad.transpose() / layout.grid.dt();
    return Evaluation{e.value, Eigen::Map<const Eigen::VectorXd>(g.data(), g.size())};
  };
}

ObjectiveFn through_body(const ObjectiveFn& field_objective,
                         const RearrangementBody2D& layout) {
  return [field_objective, layout](const Eigen::VectorXd& x) {
    const ScalarField m = reconstruct_field(unflatten(layout, x));
    const Evaluation e = field_objective(m.flat());
    const Eigen::Index cells = layout.grid.size();
    Eigen::VectorXd g(cells * layout.slices);
    const Eigen::VectorXd scaled = e.grad / (layout.grid.dt() * layout.grid.dx());
    for (int k = 0; k < layout.slices; ++k) g.segment(k * cells, cells) = scaled;
    return Evaluation{e.value, std::move(g)};
  };
}

ProjectionFn body_projection(const RearrangementBody1D& layout,
                             const Eigen::VectorXd& q) {
  return [layout, q](const Eigen::VectorXd& x) {
    return flatten(project_rearrangement_1d(unflatten(layout, x), q));
  };
}

ProjectionFn body_projection(const RearrangementBody2D& layout,
                             const Eigen::VectorXd& q) {
  return [layout, q](const Eigen::VectorXd& x) {
    return flatten(project_rearrangement_2d(unflatten(layout, x), q));
  };
}

}  // namespace pareig
