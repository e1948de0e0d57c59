#include "pareig/asymptotics.hpp"

#include "pareig/gaussian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace pareig {

ScalarField centered_response(const ScalarField& m, const BlockParabolicOperator& op) {
  require_same_grid(m.grid(), op.grid(), "centered_response");
  Eigen::MatrixXd centered = m.values().array() - m.values().mean();
  return solve_direct(op, ScalarField(m.grid(), std::move(centered)));
}

double capital_lambda(const ScalarField& m, const BlockParabolicOperator& op) {
  const ScalarField phi = centered_response(m, op);
  const auto& g = phi.grid();
  const int rows = g.space_steps();
  const Eigen::MatrixXd& p = phi.values();
  double acc = 0.0;
  for (int i = 0; i < rows; ++i) {
    const int up = g.wrap_space(i + 1), down = g.wrap_space(i - 1);
    acc += (p.row(up) - p.row(down)).squaredNorm();
  }
  return acc / (4 * g.dx() * g.dx()) / g.size();
}

double capital_lambda_discrete(const ScalarField& m, const BlockParabolicOperator& op) {
  const ScalarField phi = centered_response(m, op);
  const Eigen::ArrayXXd centered = m.values().array() - m.values().mean();
  return (centered * phi.values().array()).mean();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i]))
      pts.emplace_back(std::log(x[i]), std::log(y[i]));
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (auto [a, b] : pts) mx += a, my += b;
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (auto [a, b] : pts) sxy += (a - mx) * (b - my), sxx += (a - mx) * (a - mx);
  return sxy / sxx;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os << parameter_name << ",lambda,defect,rescaled,status\n";
  for (const auto& r : rows)
    os << format_number(r.parameter) << ',' << format_number(r.lambda) << ','
       << format_number(r.defect) << ',' << format_number(r.rescaled) << ','
       << r.status << '\n';
  return os.str();
}

json SweepTable::to_json() const {
  json out = summary;
  out["parameter"] = parameter_name;
  out["slope"] = slope;
  json rs = json::array();
  for (const auto& r : rows)
    rs.push_back({{"parameter", r.parameter}, {"lambda", r.lambda},
                  {"defect", r.defect}, {"rescaled", r.rescaled},
                  {"status", r.status}, {"residual", r.residual},
                  {"iterations", r.iterations}});
  out["rows"] = rs;
  return out;
}

SweepTable mu_sweep(const ScalarField& m, const std::vector<double>& mus,
                    const SweepOptions& opts) {
  if (mus.empty()) throw std::invalid_argument("mu_sweep: no mu values");
  for (size_t i = 0; i < mus.size(); ++i) {
    if (!(mus[i] > 0)) throw std::invalid_argument("mu_sweep: mu must be positive");
    if (i > 0 && !(mus[i] > mus[i - 1]))
      throw std::invalid_argument("mu_sweep: mu values must be increasing");
  }
  const BlockParabolicOperator unit(m.grid());
  const double big_lambda = capital_lambda(m, unit);
  const double big_lambda_h = capital_lambda_discrete(m, unit);
  const double mean_m = m.values().mean();

  SweepTable table;
  table.parameter_name = "mu";
  table.rows.resize(mus.size());
  parallel_for(static_cast<int>(mus.size()), opts.threads, [&](int i) {
    const double mu = mus[i];
    const BlockParabolicOperator op(m.grid(), mu, mu);
    const EigenPair ep = principal_eigenpair(op, m, opts.eigen);
    SweepRow& r = table.rows[i];
    r.parameter = mu;
    r.lambda = ep.lambda;
    r.defect = std::abs(ep.lambda + mean_m + big_lambda_h / mu);
    r.rescaled = mu * (ep.lambda + mean_m);
    r.residual = ep.residual;
    r.iterations = ep.iterations;
  });
  std::vector<double> xs, ys;
  for (const auto& r : table.rows) xs.push_back(r.parameter), ys.push_back(r.defect);
  table.slope = loglog_slope(xs, ys);
  table.summary = {{"capital_lambda", big_lambda},
                   {"capital_lambda_discrete", big_lambda_h},
                   {"mean_m", mean_m}};
  return table;
}

PeakInfo nondegenerate_peak(const SpaceProfile& v) {
  const Eigen::VectorXd& x = v.values();
  Eigen::Index arg;
  const double top = x.maxCoeff(&arg);
  const double span = x.maxCoeff() - x.minCoeff();
  if (!(span > 0)) throw std::invalid_argument("epsilon_sweep: V is constant");
  int hits = 0;
  for (double e : x) hits += e >= top - 1e-12 * span;
  if (hits != 1) throw std::invalid_argument("epsilon_sweep: max of V is not unique");
  const int i = static_cast<int>(arg);
  const double dx = v.grid().dx();
  const double second = (v[i + 1] - 2 * top + v[i - 1]) / (dx * dx);
  if (!(second < 0)) throw std::invalid_argument("epsilon_sweep: max of V is degenerate");
  return {i, top, -second};
}

SweepTable epsilon_sweep(const TimeProfile& c, const SpaceProfile& v,
                         const std::vector<double>& epsilons,
                         const SweepOptions& opts) {
  require_same_grid(c.grid(), v.grid(), "epsilon_sweep");
  if (epsilons.empty()) throw std::invalid_argument("epsilon_sweep: no epsilon values");
  const PeakInfo peak = nondegenerate_peak(v);
  const GaussianEigen ref = gaussian_eigenvalue(c, {peak.curvature});
  const auto& g = c.grid();
  const ScalarField m = outer_product(c, v);
  const double osc = m.values().maxCoeff() - m.values().minCoeff();
  const double mean_c = c.mean();

  SweepTable table;
  table.parameter_name = "epsilon";
  table.rows.resize(epsilons.size());
  parallel_for(static_cast<int>(epsilons.size()), opts.threads, [&](int i) {
    const double eps = epsilons[i];
    SweepRow& r = table.rows[i];
    r.parameter = eps;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(eps > 0)) throw std::invalid_argument("epsilon_sweep: epsilon must be positive");
    if (g.dx() * g.dx() > eps / 10) {
      r.lambda = r.defect = r.rescaled = nan;
      r.status = "unresolved: dx^2 > eps/10";
      return;
    }
    if (g.dt() / eps * osc >= 1) {
      r.lambda = r.defect = r.rescaled = nan;
      r.status = "unresolved: dt/eps * osc >= 1";
      return;
    }
    const BlockParabolicOperator op(g, eps, eps * eps);
    const EigenPair ep = principal_eigenpair(op, m, opts.eigen);
    r.lambda = ep.lambda;
    r.rescaled = (ep.lambda + mean_c * peak.value) / eps;
    r.defect = std::abs(r.rescaled - ref.lambda_bar);
    r.residual = ep.residual;
    r.iterations = ep.iterations;
  });
  std::vector<double> xs, ys;
  for (const auto& r : table.rows)
    if (r.status == "ok") xs.push_back(r.parameter), ys.push_back(r.defect);
  table.slope = loglog_slope(xs, ys);
  table.summary = {{"lambda_bar", ref.lambda_bar},
                   {"curvature", peak.curvature},
                   {"v_max", peak.value},
                   {"mean_c", mean_c}};
  return table;
}

}  // namespace pareig
