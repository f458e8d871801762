#include "vortex/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "vortex/types.hpp"

namespace vortex {

TwoSidedGrid make_two_sided_grid(double left, double interface, double right,
                                 std::size_t n_minus, std::size_t n_plus) {
  if (!(left < interface && interface < right))
    throw ConfigError("two-sided grid requires left < interface < right");
  if (n_minus < 2 || n_plus < 2)
    throw ConfigError("two-sided grid needs at least 2 cells per side");
  TwoSidedGrid g;
  g.minus.resize(n_minus + 1);
  g.plus.resize(n_plus + 1);
  for (std::size_t i = 0; i <= n_minus; ++i)
    g.minus[i] = left + (interface - left) * double(i) / double(n_minus);
  for (std::size_t i = 0; i <= n_plus; ++i)
    g.plus[i] = interface + (right - interface) * double(i) / double(n_plus);
  g.minus.back() = interface;
  g.plus.front() = interface;
  return g;
}

namespace {

std::size_t locate(std::span<const double> xs, double x) {
  // Index of the left node of the containing cell, clamped to valid cells.
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = (it == xs.begin()) ? 0 : std::size_t(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

double cubic_lagrange(std::span<const double> xs, std::span<const double> ys, double x) {
  const std::size_t n = xs.size();
  std::size_t i = locate(xs, x);
  // Four-point stencil centered on the containing cell, clamped at the ends.
  std::size_t s = (i == 0) ? 0 : i - 1;
  if (s + 3 >= n) s = n - 4;
  double num = 0.0;
  for (std::size_t j = s; j < s + 4; ++j) {
    double lj = 1.0;
    for (std::size_t k = s; k < s + 4; ++k) {
      if (k == j) continue;
      lj *= (x - xs[k]) / (xs[j] - xs[k]);
    }
    num += lj * ys[j];
  }
  return num;
}

double limited_slope(double sl, double sr, double hl, double hr) {
  // Harmonic-mean slope; zero at local extrema of the data.
  if (sl * sr <= 0.0) return 0.0;
  const double wl = 2.0 * hr + hl;
  const double wr = hr + 2.0 * hl;
  return (wl + wr) / (wl / sl + wr / sr);
}

double monotone_hermite(std::span<const double> xs, std::span<const double> ys, double x) {
  const std::size_t n = xs.size();
  std::size_t i = locate(xs, x);
  const double h = xs[i + 1] - xs[i];
  const double sec = (ys[i + 1] - ys[i]) / h;

  double d0, d1;
  if (i == 0) {
    d0 = sec;
  } else {
    const double hl = xs[i] - xs[i - 1];
    d0 = limited_slope((ys[i] - ys[i - 1]) / hl, sec, hl, h);
  }
  if (i + 2 >= n) {
    d1 = sec;
  } else {
    const double hr = xs[i + 2] - xs[i + 1];
    d1 = limited_slope(sec, (ys[i + 2] - ys[i + 1]) / hr, h, hr);
  }

  const double t = (x - xs[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * ys[i] + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * ys[i + 1] + (t3 - t2) * h * d1;
}

}  // namespace

double interp_eval(Interp scheme, std::span<const double> xs, std::span<const double> ys,
                   double x) {
  assert(xs.size() == ys.size());
  const std::size_t n = xs.size();
  if (n == 0) throw DataError("interp_eval: empty table");
  if (n == 1) return ys[0];
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  if (scheme == Interp::Monotone) return monotone_hermite(xs, ys, x);
  if (n < 4) {
    std::size_t i = locate(xs, x);
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - t) * ys[i] + t * ys[i + 1];
  }
  return cubic_lagrange(xs, ys, x);
}

double series_eval(std::span<const double> ys, double t0, double dt, double t) {
  const std::size_t n = ys.size();
  if (n == 0) throw DataError("series_eval: empty series");
  if (n == 1) return ys[0];
  double s = (t - t0) / dt;
  if (s <= 0.0) return ys.front();
  if (s >= double(n - 1)) return ys.back();
  const std::size_t i = std::min(std::size_t(s), n - 2);
  if (n < 4) {
    const double f = s - double(i);
    return (1.0 - f) * ys[i] + f * ys[i + 1];
  }
  std::size_t s0 = (i == 0) ? 0 : i - 1;
  if (s0 + 3 >= n) s0 = n - 4;
  // Uniform 4-point Lagrange in the step index.
  const double u = s - double(s0);
  const double c0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
  const double c1 = u * (u - 2) * (u - 3) / 2.0;
  const double c2 = -u * (u - 1) * (u - 3) / 2.0;
  const double c3 = u * (u - 1) * (u - 2) / 6.0;
  return c0 * ys[s0] + c1 * ys[s0 + 1] + c2 * ys[s0 + 2] + c3 * ys[s0 + 3];
}

double node_derivative(std::span<const double> xs, std::span<const double> ys, std::size_t i) {
  const std::size_t n = xs.size();
  if (n < 3) {
    if (n < 2) throw DataError("node_derivative: need at least 2 nodes");
    return (ys[1] - ys[0]) / (xs[1] - xs[0]);
  }
  if (i == 0) {
    const double h0 = xs[1] - xs[0], h1 = xs[2] - xs[1];
    return -(2 * h0 + h1) / (h0 * (h0 + h1)) * ys[0] + (h0 + h1) / (h0 * h1) * ys[1] -
           h0 / (h1 * (h0 + h1)) * ys[2];
  }
  if (i == n - 1) {
    const double h1 = xs[n - 1] - xs[n - 2], h0 = xs[n - 2] - xs[n - 3];
    return h1 / (h0 * (h0 + h1)) * ys[n - 3] - (h0 + h1) / (h0 * h1) * ys[n - 2] +
           (2 * h1 + h0) / (h1 * (h0 + h1)) * ys[n - 1];
  }
  const double hl = xs[i] - xs[i - 1], hr = xs[i + 1] - xs[i];
  return -hr / (hl * (hl + hr)) * ys[i - 1] + (hr - hl) / (hl * hr) * ys[i] +
         hl / (hr * (hl + hr)) * ys[i + 1];
}

double node_second_derivative(std::span<const double> xs, std::span<const double> ys,
                              std::size_t i) {
  const std::size_t n = xs.size();
  if (n < 3) throw DataError("node_second_derivative: need at least 3 nodes");
  if (i == 0) i = 1;
  if (i == n - 1) i = n - 2;
  const double hl = xs[i] - xs[i - 1], hr = xs[i + 1] - xs[i];
  return 2.0 * (ys[i - 1] / (hl * (hl + hr)) - ys[i] / (hl * hr) + ys[i + 1] / (hr * (hl + hr)));
}

namespace {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

GaussRule gauss_rule(int order) {
  switch (order) {
    case 1: return {{0.0}, {2.0}};
    case 2: {
      const double x = 1.0 / std::sqrt(3.0);
      return {{-x, x}, {1.0, 1.0}};
    }
    case 3: {
      const double x = std::sqrt(3.0 / 5.0);
      return {{-x, 0.0, x}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      return {{-b, -a, a, b}, {wb, wa, wa, wb}};
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      return {{-b, -a, 0.0, a, b}, {wb, wa, 128.0 / 225.0, wa, wb}};
    }
    default:
      throw ConfigError("gauss_legendre: unsupported order " + std::to_string(order));
  }
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels,
                      int order) {
  if (panels < 1) throw ConfigError("gauss_legendre: panels must be positive");
  if (a == b) return 0.0;
  const GaussRule rule = gauss_rule(order);
  const double h = (b - a) / double(panels);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + h * double(p);
    const double mid = lo + 0.5 * h;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      acc += rule.weights[q] * f(mid + 0.5 * h * rule.nodes[q]);
    total += 0.5 * h * acc;
  }
  return total;
}

std::vector<double> cumulative_trapezoid(std::span<const double> xs, std::span<const double> ys) {
  assert(xs.size() == ys.size());
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
  return out;
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double acc = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
  return acc;
}

void solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, std::span<double> d) {
  const std::size_t n = b.size();
  assert(a.size() == n && c.size() == n && d.size() == n);
  static thread_local std::vector<double> cp, dp;
  cp.assign(n, 0.0);
  dp.assign(n, 0.0);
  cp[0] = c[0] / b[0];
  dp[0] = d[0] / b[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = b[i] - a[i] * cp[i - 1];
    cp[i] = c[i] / m;
    dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
  }
  d[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = dp[i] - cp[i] * d[i + 1];
}

double solve_monotone(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw DataError("solve_monotone: root not bracketed");
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    // Secant candidate, guarded by bisection.
    double mid = 0.5 * (lo + hi);
    const double denom = fhi - flo;
    if (denom != 0.0) {
      const double sec = lo - flo * (hi - lo) / denom;
      if (sec > lo + 0.1 * tol && sec < hi - 0.1 * tol) mid = sec;
    }
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double e0 = std::exp(-1.0 / s);
  const double e1 = std::exp(-1.0 / (1.0 - s));
  return e0 / (e0 + e1);
}

PowerFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw DataError("fit_loglog: need at least two samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] <= 0.0 || ys[i] <= 0.0) throw DataError("fit_loglog: samples must be positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = double(n) * sxx - sx * sx;
  PowerFit fit;
  fit.slope = (double(n) * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / double(n);
  double ss_res = 0.0, ss_tot = 0.0;
  const double my = sy / double(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.slope * lx[i] + fit.intercept;
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - my) * (ly[i] - my);
  }
  fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    const double var = ss_res / double(n - 2);
    fit.slope_stderr = std::sqrt(var * double(n) / denom);
    // Two-sided 95% t quantiles for small sample counts.
    static const double tq[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306};
    const std::size_t dof = n - 2;
    const double t = (dof <= 8) ? tq[dof - 1] : 2.0;
    fit.ci_half_width = t * fit.slope_stderr;
  }
  return fit;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace vortex
