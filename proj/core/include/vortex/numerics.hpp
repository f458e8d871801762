#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace vortex {

enum class Interp {
  Cubic,     // 4-point Lagrange; fourth order on smooth data
  Monotone,  // cubic Hermite with monotonicity-limited slopes
};

/// Interpolate tabulated data (xs ascending) at x. Queries outside the table
/// are clamped to the end values.
double interp_eval(Interp scheme, std::span<const double> xs, std::span<const double> ys, double x);

/// Interpolate a uniformly spaced time series at time t (cubic, clamped).
double series_eval(std::span<const double> ys, double t0, double dt, double t);

/// Derivative of tabulated data at node i, second order on a nonuniform grid.
double node_derivative(std::span<const double> xs, std::span<const double> ys, std::size_t i);

/// Second derivative at interior node i (three-point, nonuniform).
double node_second_derivative(std::span<const double> xs, std::span<const double> ys, std::size_t i);

/// Composite Gauss-Legendre quadrature of f over [a, b] with n panels.
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels, int order = 4);

/// Cumulative trapezoid of samples ys on nodes xs; out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> xs, std::span<const double> ys);

/// Trapezoid quadrature over the full table.
double trapezoid(std::span<const double> xs, std::span<const double> ys);

/// Solve tridiagonal system (in place): lower a, diagonal b, upper c, rhs d.
/// a[0] and c[n-1] are ignored. Returns the solution in d.
void solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, std::span<double> d);

/// Find the root of a monotone continuous f in [lo, hi] by bracketing bisection
/// with secant acceleration; |interval| tolerance tol.
double solve_monotone(const std::function<double(double)>& f, double lo, double hi,
                      double tol = 1e-12);

/// C-infinity step: 0 for s <= 0, 1 for s >= 1, strictly monotone between.
double smooth_step(double s);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;   // in log space
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  double ci_half_width = 0.0;  // 95% confidence half width for the slope
};

/// Least-squares fit of log(y) = slope*log(x) + intercept.
PowerFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

/// FNV-1a hash of a byte string; stable across platforms and runs.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace vortex
