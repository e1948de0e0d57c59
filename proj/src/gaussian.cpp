#include "pareig/gaussian.hpp"

#include "pareig/io.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pareig {

namespace {

using Mat2 = Eigen::Matrix2d;

// Transfer matrix of u'' = q u over a cell of length h acting on (u, u').
Mat2 transfer(double q, double h) {
  Mat2 p;
  if (q == 0.0) {
    p << 1, h, 0, 1;
    return p;
  }
  const double k = std::sqrt(q), kh = k * h;
  p << std::cosh(kh), std::sinh(kh) / k, k * std::sinh(kh), std::cosh(kh);
  return p;
}

// r -> (p21 + p22 r) / (p11 + p12 r): the slope u'/u carried through p.
double mobius(const Mat2& p, double r) {
  return (p(1, 0) + p(1, 1) * r) / (p(0, 0) + p(0, 1) * r);
}

// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
constexpr std::array<double, 8> gl_x{-0.9602898564975362, -0.7966664774136267,
                                     -0.525532409916329,  -0.18343464249564978,
                                     0.18343464249564978, 0.525532409916329,
                                     0.7966664774136267,  0.9602898564975362};
constexpr std::array<double, 8> gl_w{0.10122853629037669, 0.22238103445337434,
                                     0.31370664587788705, 0.36268378337836177,
                                     0.36268378337836177, 0.31370664587788705,
                                     0.22238103445337434, 0.10122853629037669};

void check_input(const TimeProfile& c, double mu, const char* what) {
  if (!(mu > 0.0)) throw std::invalid_argument(std::string(what) + ": need mu > 0");
  if (!c.values().allFinite() || c.values().minCoeff() < 0.0)
    throw std::invalid_argument(std::string(what) + ": c must be nonnegative");
  if (!(c.values().maxCoeff() > 0.0))
    throw std::invalid_argument(std::string(what) + ": c is identically zero");
}

// Monodromy product, rescaled each step; returns the scaled matrix and the
// log of the scale factor.
std::pair<Mat2, double> monodromy(const TimeProfile& c, double mu) {
  const double h = c.grid().dt();
  Mat2 phi = Mat2::Identity();
  double log_scale = 0.0;
  for (int j = 0; j < c.size(); ++j) {
    phi = (transfer(2 * mu * c.values()[j], h) * phi).eval();
    const double s = phi.cwiseAbs().maxCoeff();
    phi /= s;
    log_scale += std::log(s);
  }
  return {phi, log_scale};
}

// Eigenvector slope v2/v1 of phi for eigenvalue ev (phi and ev equally scaled).
double eigen_slope(const Mat2& phi, double ev) {
  const double a = ev - phi(0, 0), b = phi(0, 1);
  const double c = phi(1, 0), d = ev - phi(1, 1);
  // (phi - ev) v = 0: rows (-a, b) and (c, -d)
  if (std::abs(b) >= std::abs(d)) return a / b;
  return c / d;
}

double cell_residual(double xi0, double xi1, double mu_c, double h) {
  double integral = 0.0;
  for (int q = 0; q < 8; ++q) {
    const double s = 0.5 * h * (gl_x[q] + 1.0);
    const double x = riccati_in_cell(xi0, mu_c, s);
    integral += 0.5 * h * gl_w[q] * (mu_c - 2 * x * x);
  }
  return std::abs(xi1 - xi0 - integral) / (2 * h);
}

// int_0^h xi = 1/2 ln(u(h)/u(0)).
double cell_integral(double xi0, double mu_c, double h) {
  const double r0 = 2 * xi0;
  const double q = 2 * mu_c;
  if (q == 0.0) return 0.5 * std::log1p(r0 * h);
  const double k = std::sqrt(q);
  return 0.5 * std::log(std::cosh(k * h) + r0 * std::sinh(k * h) / k);
}

RiccatiSolution finish(const TimeProfile& c, double mu, Eigen::VectorXd xi,
                       double ratio0, double tol, bool positive) {
  const double h = c.grid().dt();
  const int n = c.size();
  RiccatiSolution out{TimeProfile(c.grid(), xi), mu, 0.0, 0.0, Eigen::VectorXd(n), ratio0};
  for (int j = 0; j < n; ++j) {
    const double mu_c = mu * c.values()[j];
    out.residual = std::max(out.residual, cell_residual(xi[j], xi[(j + 1) % n], mu_c, h));
    out.cell_integrals[j] = cell_integral(xi[j], mu_c, h);
  }
  out.mean_xi = out.cell_integrals.sum() / c.grid().horizon();
  if (!(out.residual <= tol * std::max(1.0, xi.cwiseAbs().maxCoeff()))) {
    std::ostringstream os;
    os << "solve_riccati: residual " << out.residual << " above tolerance";
    throw std::runtime_error(os.str());
  }
  if (positive ? !(xi.minCoeff() > 0.0) : !(xi.maxCoeff() < 0.0))
    throw std::runtime_error("solve_riccati: solution changed sign");
  return out;
}

}  // namespace

double riccati_in_cell(double xi_node, double mu_c, double s) {
  const double r0 = 2 * xi_node;
  const double q = 2 * mu_c;
  if (q == 0.0) return 0.5 * r0 / (1 + r0 * s);
  const double k = std::sqrt(q);
  const double ch = std::cosh(k * s), sh = std::sinh(k * s);
  return 0.5 * k * (k * sh + r0 * ch) / (k * ch + r0 * sh);
}

RiccatiSolution solve_riccati_periodic(const TimeProfile& c, double mu, double tol) {
  check_input(c, mu, "solve_riccati_periodic");
  const auto [phi, log_scale] = monodromy(c, mu);
  const double half_tr = 0.5 * phi.trace();
  // det(phi) = exp(-2 log_scale); the larger root of ev^2 - tr ev + det
  const double det = std::exp(-2 * log_scale);
  const double ev = half_tr + std::sqrt(std::max(half_tr * half_tr - det, 0.0));
  const double log_rho = std::log(ev) + log_scale;
  if (!(log_rho > 0.0))
    throw std::runtime_error("solve_riccati_periodic: Floquet multiplier not above 1");

  const double h = c.grid().dt();
  const int n = c.size();
  Eigen::VectorXd xi(n);
  // The branch attracts forward, so one extra period cleans up the
  // eigenvector slope taken from the (rescaled) monodromy.
  double r = eigen_slope(phi, ev);
  for (int pass = 0; pass < 2; ++pass)
    for (int j = 0; j < n; ++j) {
      xi[j] = 0.5 * r;
      r = mobius(transfer(2 * mu * c.values()[j], h), r);
    }
  const double ratio0 = 2 * xi[0];
  RiccatiSolution out = finish(c, mu, std::move(xi), ratio0, tol, true);
  out.mean_xi = log_rho / (2 * c.grid().horizon());
  return out;
}

RiccatiSolution solve_riccati_negative(const TimeProfile& c, double mu, double tol) {
  check_input(c, mu, "solve_riccati_negative");
  const auto [phi, log_scale] = monodromy(c, mu);
  const double half_tr = 0.5 * phi.trace();
  const double det = std::exp(-2 * log_scale);
  const double big = half_tr + std::sqrt(std::max(half_tr * half_tr - det, 0.0));
  const double small = det / big;
  const double log_rho = std::log(big) + log_scale;

  const double h = c.grid().dt();
  const int n = c.size();
  Eigen::VectorXd xi(n);
  double r = eigen_slope(phi, small);
  for (int pass = 0; pass < 2; ++pass)
    for (int j = n - 1; j >= 0; --j) {
      r = mobius(transfer(2 * mu * c.values()[j], h).inverse(), r);
      xi[j] = 0.5 * r;
    }
  const double ratio0 = 2 * xi[0];
  RiccatiSolution out = finish(c, mu, std::move(xi), ratio0, tol, false);
  out.mean_xi = -log_rho / (2 * c.grid().horizon());
  return out;
}

GaussianEigen gaussian_eigenvalue(const TimeProfile& c,
                                  const std::vector<double>& a_eigenvalues) {
  if (a_eigenvalues.empty())
    throw std::invalid_argument("gaussian_eigenvalue: empty spectrum");
  GaussianEigen out{0.0, a_eigenvalues, {}, TimeProfile::constant(c.grid(), 0.0)};
  const int n = c.size();
  Eigen::VectorXd trace_int = Eigen::VectorXd::Zero(n);
  for (double mu : a_eigenvalues) {
    out.xi_profiles.push_back(solve_riccati_periodic(c, mu));
    out.lambda_bar += out.xi_profiles.back().mean_xi;
    trace_int += out.xi_profiles.back().cell_integrals;
  }
  const double h = c.grid().dt();
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    out.beta.values()[j] = acc;
    acc += out.lambda_bar * h - trace_int[j];
  }
  return out;
}

double gaussian_eigenfunction(const GaussianEigen& g, int j, const Eigen::VectorXd& y) {
  if (y.size() != static_cast<Eigen::Index>(g.mu.size()))
    throw std::invalid_argument("gaussian_eigenfunction: dimension mismatch");
  double quad = 0.0;
  for (size_t i = 0; i < g.mu.size(); ++i)
    quad += g.xi_profiles[i].xi[j] * y[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)];
  return std::exp(g.beta[j] - 0.5 * quad);
}

std::string gaussian_eigenfunction_csv(const GaussianEigen& g, double y_lo,
                                       double y_hi, int points) {
  if (g.mu.size() != 1)
    throw std::invalid_argument("gaussian_eigenfunction_csv: one dimension only");
  if (points < 2 || !(y_hi > y_lo))
    throw std::invalid_argument("gaussian_eigenfunction_csv: bad sampling box");
  std::vector<std::vector<double>> rows;
  const auto& grid = g.beta.grid();
  for (int j = 0; j < grid.time_steps(); ++j)
    for (int p = 0; p < points; ++p) {
      const double y = y_lo + (y_hi - y_lo) * p / (points - 1);
      rows.push_back({grid.time(j), y, gaussian_eigenfunction(g, j, Eigen::VectorXd::Constant(1, y))});
    }
  return table_to_csv({"t", "y", "w"}, rows);
}

}  // namespace pareig
