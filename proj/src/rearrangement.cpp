#include "pareig/rearrangement.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pareig {

namespace {

std::vector<int> decreasing_order(const Eigen::VectorXd& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

void check_range(double lo, double hi, int K, const char* what) {
  if (K < 1) throw std::invalid_argument(std::string(what) + ": need K >= 1");
  if (!(hi > lo)) throw std::invalid_argument(std::string(what) + ": need max > min");
}

double range_tol(double lo, double hi) {
  return 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
}

}  // namespace

TimeProfile symmetric_decreasing_rearrangement(const TimeProfile& c) {
  const int n = c.size();
  const auto order = decreasing_order(c.values());
  const int center = n / 2;
  Eigen::VectorXd out(n);
  for (int r = 0; r < n; ++r) {
    // r = 0 -> center, 1 -> center-1, 2 -> center+1, 3 -> center-2, ...
    const int step = (r + 1) / 2;
    const int pos = (r % 2 == 1) ? center - step : center + step;
    out[c.grid().wrap_time(pos)] = c.values()[order[r]];
  }
  return {c.grid(), std::move(out)};
}

TimeProfile increasing_rearrangement(const TimeProfile& c) {
  Eigen::VectorXd v = c.values();
  std::sort(v.begin(), v.end());
  return {c.grid(), std::move(v)};
}

double domination_excess(const TimeProfile& c1, const TimeProfile& c2) {
  require_same_grid(c1.grid(), c2.grid(), "domination_excess");
  Eigen::VectorXd a = c1.values(), b = c2.values();
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  double sa = 0, sb = 0, worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < a.size(); ++r) {
    sa += a[r];
    sb += b[r];
    worst = std::max(worst, sa - sb);
  }
  return std::max(worst, std::abs(sa - sb));
}

bool dominates(const TimeProfile& c1, const TimeProfile& c2, double tol) {
  return domination_excess(c1, c2) <= tol;
}

int peak_index(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  const double top = v.maxCoeff();
  const double tol = 1e-12 * std::max(1.0, std::abs(top));
  auto at_top = [&](int i) { return v[((i % n) + n) % n] >= top - tol; };
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x >= top - tol; }))
    return n / 2;
  int best_start = 0, best_len = 0;
  for (int s = 0; s < n; ++s) {
    if (!at_top(s) || at_top(s - 1)) continue;
    int len = 0;
    while (at_top(s + len)) ++len;
    if (len > best_len) {
      best_len = len;
      best_start = s;
    }
  }
  return (best_start + (best_len - 1) / 2) % n;
}

RearrangementBody1D body_from_profile(const TimeProfile& c, int K) {
  const double lo = c.values().minCoeff();
  double hi = c.values().maxCoeff();
  if (!(hi > lo)) hi = lo + 1.0;
  return body_from_profile(c, K, lo, hi);
}

RearrangementBody1D body_from_profile(const TimeProfile& c, int K,
                                      double c_min, double c_max) {
  check_range(c_min, c_max, K, "body_from_profile");
  const double tol = range_tol(c_min, c_max);
  if (c.values().minCoeff() < c_min - tol || c.values().maxCoeff() > c_max + tol)
    throw std::invalid_argument("body_from_profile: profile outside [c_min, c_max]");
  RearrangementBody1D b{c.grid(), K, c_min, c_max, Eigen::MatrixXd(K, c.size()), {}};
  const double dc = b.dc(), dt = c.grid().dt();
  for (int j = 0; j < c.size(); ++j)
    for (int i = 0; i < K; ++i)
      b.F(i, j) = dt * std::clamp(c.values()[j] - b.level(i), 0.0, dc);
  b.q = b.F.rowwise().sum();
  return b;
}

TimeProfile reconstruct_profile(const RearrangementBody1D& b) {
  Eigen::VectorXd c = Eigen::VectorXd::Constant(b.F.cols(), b.c_min) +
                      b.F.colwise().sum().transpose() / b.grid.dt();
  return {b.grid, c.cwiseMax(b.c_min).cwiseMin(b.c_max)};
}

double relaxed_domination_excess(const RearrangementBody1D& b) {
  Eigen::VectorXd c = reconstruct_profile(b).values();
  std::sort(c.begin(), c.end(), std::greater<>());
  const double cap = b.capacity(), dt = b.grid.dt();
  double sum = 0, worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 1; r <= c.size(); ++r) {
    sum += c[r - 1];
    double bound = r * b.c_min;
    for (int i = 0; i < b.slices; ++i) bound += std::min(b.q[i], r * cap) / dt;
    worst = std::max(worst, sum - bound);
  }
  return worst;
}

Eigen::VectorXd slice_masses(const RearrangementBody1D& b) {
  return b.F.rowwise().sum();
}

BodyCheck check_body(const RearrangementBody1D& b) {
  BodyCheck r;
  const double cap = b.capacity();
  r.capacity = std::max((-b.F.array()).maxCoeff(), (b.F.array() - cap).maxCoeff());
  r.capacity = std::max(r.capacity, 0.0);
  for (int i = 0; i + 1 < b.slices; ++i) {
    r.monotone = std::max(r.monotone, (b.F.row(i + 1) - b.F.row(i)).maxCoeff());
    r.mass_order = std::max(r.mass_order, b.q[i + 1] - b.q[i]);
  }
  r.mass = (slice_masses(b) - b.q).cwiseAbs().maxCoeff();
  return r;
}

RearrangementBody2D body_from_field(const ScalarField& m, int K) {
  const double lo = m.values().minCoeff();
  double hi = m.values().maxCoeff();
  if (!(hi > lo)) hi = lo + 1.0;
  return body_from_field(m, K, lo, hi);
}

RearrangementBody2D body_from_field(const ScalarField& m, int K, double m_min,
                                    double m_max) {
  check_range(m_min, m_max, K, "body_from_field");
  const double tol = range_tol(m_min, m_max);
  if (m.values().minCoeff() < m_min - tol || m.values().maxCoeff() > m_max + tol)
    throw std::invalid_argument("body_from_field: field outside [m_min, m_max]");
  RearrangementBody2D b{m.grid(), K, m_min, m_max, {}, Eigen::VectorXd(K)};
  const double scale = m.grid().dt() * m.grid().dx();
  const double dh = b.dh();
  b.F.reserve(K);
  for (int k = 0; k < K; ++k) {
    b.F.push_back(scale * (m.values().array() - b.level(k)).max(0.0).min(dh).matrix());
    b.q[k] = b.F.back().sum();
  }
  return b;
}

ScalarField reconstruct_field(const RearrangementBody2D& b) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(b.grid.space_steps(), b.grid.time_steps());
  for (const auto& f : b.F) acc += f;
  acc /= b.grid.dt() * b.grid.dx();
  acc.array() += b.m_min;
  return {b.grid, acc.cwiseMax(b.m_min).cwiseMin(b.m_max)};
}

Eigen::VectorXd slice_masses(const RearrangementBody2D& b) {
  Eigen::VectorXd q(b.slices);
  for (int k = 0; k < b.slices; ++k) q[k] = b.F[k].sum();
  return q;
}

BodyCheck check_body(const RearrangementBody2D& b) {
  BodyCheck r;
  const double cap = b.capacity();
  for (int k = 0; k < b.slices; ++k) {
    r.capacity = std::max({r.capacity, (-b.F[k].array()).maxCoeff(),
                           (b.F[k].array() - cap).maxCoeff()});
    if (k + 1 < b.slices) {
      r.monotone = std::max(r.monotone, (b.F[k + 1] - b.F[k]).maxCoeff());
      r.mass_order = std::max(r.mass_order, b.q[k + 1] - b.q[k]);
    }
  }
  r.mass = (slice_masses(b) - b.q).cwiseAbs().maxCoeff();
  return r;
}

Eigen::VectorXd cone_slice_masses(int K) {
  if (K < 1) throw std::invalid_argument("cone_slice_masses: need K >= 1");
  Eigen::VectorXd q(K);
  const double dh = 1.0 / K;
  for (int k = 0; k < K; ++k) q[k] = std::numbers::pi * std::pow(1.0 - k * dh, 2) * dh;
  return q;
}

RearrangementBody1D empty_body(const SpaceTimeGrid& grid, int K, double c_min,
                               double c_max, Eigen::VectorXd q) {
  check_range(c_min, c_max, K, "empty_body");
  if (q.size() != K) throw std::invalid_argument("empty_body: q must have K entries");
  return {grid, K, c_min, c_max, Eigen::MatrixXd::Zero(K, grid.time_steps()), std::move(q)};
}

RearrangementBody2D empty_body_2d(const SpaceTimeGrid& grid, int K,
                                  double m_min, double m_max, Eigen::VectorXd q) {
  check_range(m_min, m_max, K, "empty_body_2d");
  if (q.size() != K) throw std::invalid_argument("empty_body_2d: q must have K entries");
  return {grid, K, m_min, m_max,
          std::vector<Eigen::MatrixXd>(
              K, Eigen::MatrixXd::Zero(grid.space_steps(), grid.time_steps())),
          std::move(q)};
}

namespace {

json matrix_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows)
    throw std::invalid_argument("body json: wrong row count");
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw std::invalid_argument("body json: wrong column count");
    for (Eigen::Index k = 0; k < cols; ++k) a(i, k) = j[i][k].get<double>();
  }
  return a;
}

Eigen::VectorXd vector_from(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

json body_to_json(const RearrangementBody1D& b) {
  return {{"grid", grid_to_json(b.grid)}, {"K", b.slices},
          {"c_min", b.c_min},             {"c_max", b.c_max},
          {"F", matrix_json(b.F)},
          {"q", std::vector<double>(b.q.begin(), b.q.end())}};
}

RearrangementBody1D body1d_from_json(const json& j) {
  const SpaceTimeGrid g = grid_from_json(j.at("grid"));
  const int K = j.at("K").get<int>();
  auto b = empty_body(g, K, j.at("c_min").get<double>(), j.at("c_max").get<double>(),
                      vector_from(j.at("q")));
  b.F = matrix_from(j.at("F"), K, g.time_steps());
  return b;
}

json body_to_json(const RearrangementBody2D& b) {
  json slices = json::array();
  for (const auto& f : b.F) slices.push_back(matrix_json(f));
  return {{"grid", grid_to_json(b.grid)}, {"K", b.slices},
          {"m_min", b.m_min},             {"m_max", b.m_max},
          {"F", std::move(slices)},
          {"q", std::vector<double>(b.q.begin(), b.q.end())}};
}

RearrangementBody2D body2d_from_json(const json& j) {
  const SpaceTimeGrid g = grid_from_json(j.at("grid"));
  const int K = j.at("K").get<int>();
  auto b = empty_body_2d(g, K, j.at("m_min").get<double>(), j.at("m_max").get<double>(),
                         vector_from(j.at("q")));
  if (static_cast<int>(j.at("F").size()) != K)
    throw std::invalid_argument("body json: wrong slice count");
  for (int k = 0; k < K; ++k)
    b.F[k] = matrix_from(j.at("F")[k], g.space_steps(), g.time_steps());
  return b;
}

}  // namespace pareig
