#include "vortex/euler_front.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vortex/numerics.hpp"

namespace vortex {

namespace {

// ---------------------------------------------------------------------------
// Shared time-window sampling
//
// Every time series produced by the front solver is interpolated through the
// same 4-level cubic window. Sharing one code path matters more than it looks:
// the front derivative series IS the interface-node u series, so evaluating
// both through identical arithmetic makes the contact speed at the interface
// cancel to exactly zero, which pins the sheet to its grid station.
// ---------------------------------------------------------------------------

struct Window {
  std::size_t lo;
  std::size_t cnt;
};

Window time_window(std::size_t n, double pos) {
  if (n <= 1) return {0, n};
  const double si = std::clamp(pos, 0.0, double(n - 1));
  const std::size_t i = std::min(std::size_t(si), n - 2);
  std::size_t lo = (i == 0) ? 0 : i - 1;
  const std::size_t cnt = std::min<std::size_t>(4, n);
  if (lo + cnt > n) lo = n - cnt;
  return {lo, cnt};
}

double sample_series(const std::vector<double>& times, std::span<const double> ys, double t) {
  if (times.size() <= 1) return ys.empty() ? 0.0 : ys[0];
  const double dt = times[1] - times[0];
  const Window w = time_window(times.size(), (t - times.front()) / dt);
  return series_eval(ys.subspan(w.lo, w.cnt), times[w.lo], dt, t);
}

template <class Table>
double sample_tx(const std::vector<double>& times, std::span<const double> xs, Table&& tab,
                 double t, double x) {
  if (times.size() <= 1) return interp_eval(Interp::Cubic, xs, tab(std::size_t(0)), x);
  const double dt = times[1] - times[0];
  const Window w = time_window(times.size(), (t - times.front()) / dt);
  std::array<double, 4> win{};
  for (std::size_t m = 0; m < w.cnt; ++m)
    win[m] = interp_eval(Interp::Cubic, xs, tab(w.lo + m), x);
  return series_eval(std::span<const double>(win.data(), w.cnt), times[w.lo], dt, t);
}

/// Second-order time derivative of a level table, one-sided at the ends.
std::vector<double> time_derivative_series(const std::vector<double>& ys, double dt) {
  const std::size_t n = ys.size();
  std::vector<double> out(n, 0.0);
  if (n < 3) {
    if (n == 2) out[0] = out[1] = (ys[1] - ys[0]) / dt;
    return out;
  }
  out[0] = (-3.0 * ys[0] + 4.0 * ys[1] - ys[2]) / (2.0 * dt);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (ys[i + 1] - ys[i - 1]) / (2.0 * dt);
  out[n - 1] = (3.0 * ys[n - 1] - 4.0 * ys[n - 2] + ys[n - 3]) / (2.0 * dt);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FrontSeries
// ---------------------------------------------------------------------------

double FrontSeries::at(double t) const { return sample_series(times, phi, t); }

double FrontSeries::prime_at(double t) const { return sample_series(times, phi_prime, t); }

// ---------------------------------------------------------------------------
// EulerSolution
// ---------------------------------------------------------------------------

double EulerSolution::sample(Side s, int comp, double t, double rt) const {
  const auto& xs = grid.nodes(s);
  return sample_tx(
      times, xs,
      [&](std::size_t lev) -> std::span<const double> { return fields[lev][s][std::size_t(comp)]; },
      t, rt);
}

// ---------------------------------------------------------------------------
// Front-straightened Euler sweeps
// ---------------------------------------------------------------------------

namespace {

/// Density time/space derivative tables of a frozen iterate, one entry per
/// (level, side, node); index 0 holds the time derivative, 1 the space one.
struct DensityGradients {
  std::vector<TwoSided<std::array<std::vector<double>, 2>>> lv;

  double sample(int which, const EulerSolution& sol, Side s, double t, double rt) const {
    return sample_tx(
        sol.times, sol.grid.nodes(s),
        [&](std::size_t n) -> std::span<const double> { return lv[n][s][std::size_t(which)]; }, t,
        rt);
  }
};

DensityGradients density_gradients(const EulerSolution& sol) {
  const std::size_t nlev = sol.times.size();
  const double dt = nlev > 1 ? sol.times[1] - sol.times[0] : 1.0;
  DensityGradients g;
  g.lv.resize(nlev);
  for (Side s : {Side::Minus, Side::Plus}) {
    const auto& xs = sol.grid.nodes(s);
    for (std::size_t n = 0; n < nlev; ++n) {
      auto& dr = g.lv[n][s][1];
      dr.resize(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i)
        dr[i] = node_derivative(xs, sol.fields[n][s][0], i);
      g.lv[n][s][0].assign(xs.size(), 0.0);
    }
    std::vector<double> series(nlev);
    for (std::size_t i = 0; i < sol.grid.size(s); ++i) {
      for (std::size_t n = 0; n < nlev; ++n) series[n] = sol.fields[n][s][0][i];
      const std::vector<double> dts = time_derivative_series(series, dt);
      for (std::size_t n = 0; n < nlev; ++n) g.lv[n][s][0][i] = dts[n];
    }
  }
  return g;
}

}  // namespace

EulerSolution solve_vortex_sheet_euler(const Scenario& sc, const EulerOptions& opt) {
  if (!(sc.b > sc.a)) throw ConfigError("euler solve: front radius b must exceed wall radius a");
  if (!(sc.grid.r_max > sc.b))
    throw ConfigError("euler solve: radial truncation r_max must exceed the front radius");
  if (sc.grid.n_minus < 4 || sc.grid.n_plus < 4 || sc.grid.n_time < 4)
    throw ConfigError("euler solve: need at least 4 cells per side and 4 time steps");
  if (!(sc.T > 0.0)) throw ConfigError("euler solve: final time must be positive");

  const double gamma = sc.gamma;
  const Straightening chart{sc.a, sc.b, sc.grid.r_max};
  const TwoSidedGrid grid =
      make_two_sided_grid(sc.a, sc.b, sc.grid.r_max, sc.grid.n_minus, sc.grid.n_plus);
  const std::size_t nt = sc.grid.n_time;
  const double dt = sc.T / double(nt);
  const std::size_t ibm = grid.minus.size() - 1;

  // Initial level straight from the data; the straightening is the identity at
  // t = 0. The acoustic transmissions assume the level tables agree at the
  // interface copy pair, so the plus-side copies of rho and u are taken from
  // the minus side (the data jump only in v).
  TwoSided<std::array<std::vector<double>, 3>> level0;
  for (Side s : {Side::Minus, Side::Plus}) {
    const auto& xs = grid.nodes(s);
    for (int c = 0; c < 3; ++c) level0[s][std::size_t(c)].resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      level0[s][0][i] = sc.rho0(xs[i], s);
      level0[s][1][i] = sc.u0(xs[i], s);
      level0[s][2][i] = sc.v0(xs[i], s);
      if (!(level0[s][0][i] > 0.0))
        throw SolverError("euler solve: nonpositive initial density at r = " +
                          std::to_string(xs[i]));
    }
  }
  level0.plus[0][0] = level0.minus[0][ibm];
  level0.plus[1][0] = level0.minus[1][ibm];

  EulerSolution cur;
  cur.chart = chart;
  cur.grid = grid;
  cur.gamma = gamma;
  cur.times.resize(nt + 1);
  for (std::size_t n = 0; n <= nt; ++n) cur.times[n] = dt * double(n);
  cur.fields.assign(nt + 1, level0);
  const double u_b0 = level0.minus[1][ibm];
  cur.front.times = cur.times;
  cur.front.phi_prime.assign(nt + 1, u_b0);
  cur.front.phi.resize(nt + 1);
  for (std::size_t n = 0; n <= nt; ++n) cur.front.phi[n] = sc.b + u_b0 * cur.times[n];

  const Vec3 far0{level0.plus[0].back(), level0.plus[1].back(), level0.plus[2].back()};

  double change = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    const EulerSolution prev = cur;  // frozen coefficients for this sweep

    for (std::size_t n = 0; n <= nt; ++n) {
      if (!(prev.front.phi[n] > sc.a))
        throw SolverError("euler solve: front reached the wall at t = " +
                          std::to_string(prev.times[n]));
      if (!(prev.front.phi[n] < sc.grid.r_max))
        throw SolverError("euler solve: front reached the outer edge at t = " +
                          std::to_string(prev.times[n]));
      if (std::abs(prev.front.phi_prime[n]) > opt.front_speed_limit)
        throw SolverError("euler solve: front speed exceeded the configured bound " +
                          std::to_string(opt.front_speed_limit));
    }

    const DensityGradients grads = density_gradients(prev);

    auto lam2_at = [&](Side s, double t, double rt) {
      const double pr = chart.d_r(s, prev.front.at(t));
      const double pt = chart.d_t(s, prev.front.prime_at(t), rt);
      return (prev.sample(s, 1, t, rt) - pt) / pr;
    };

    CharacteristicProblem cp;
    cp.grid = grid;
    cp.t0 = 0.0;
    cp.t1 = sc.T;
    cp.n_steps = nt;
    cp.interp = opt.interp;
    cp.system.n_fields = 3;
    cp.system.speed = [&](int k, Side s, double t, double rt) {
      const double lam2 = lam2_at(s, t, rt);
      if (k == 1) return lam2;
      const double c = sound_speed_radial(prev.sample(s, 0, t, rt), gamma);
      const double pr = chart.d_r(s, prev.front.at(t));
      return k == 0 ? lam2 - c / pr : lam2 + c / pr;
    };
    cp.system.coupling = [&](Side s, double t, double rt) -> Mat3 {
      const double rho = prev.sample(s, 0, t, rt);
      const double c = sound_speed_radial(rho, gamma);
      const double pr = chart.d_r(s, prev.front.at(t));
      const double lam2 = lam2_at(s, t, rt);
      const double rho_t = grads.sample(0, prev, s, t, rt);
      const double rho_r = grads.sample(1, prev, s, t, rt);
      const double p1 = rho_t + (lam2 - c / pr) * rho_r;
      const double p3 = rho_t + (lam2 + c / pr) * rho_r;
      Mat3 m{};
      m[0][0] = -0.25 * (gamma + 1.0) * p1 / rho;
      m[0][2] = 0.25 * (gamma - 3.0) * p1 / rho;
      m[2][0] = 0.25 * (gamma - 3.0) * p3 / rho;
      m[2][2] = -0.25 * (gamma + 1.0) * p3 / rho;
      return m;
    };
    cp.system.source = [&](Side s, double t, double rt) -> Vec3 {
      const double r = chart.map(s, prev.front.at(t), rt);
      const double rho = prev.sample(s, 0, t, rt);
      const double u = prev.sample(s, 1, t, rt);
      const double v = prev.sample(s, 2, t, rt);
      const double c = sound_speed_radial(rho, gamma);
      const double acoustic = 0.5 * v * v / (c * r);
      return {-0.5 * u / r - acoustic, -u * v / r, -0.5 * u / r + acoustic};
    };
    cp.initial = [&](int k, Side s, double rt) {
      if (k == 1) return sc.v0(rt, s);
      const double c = sound_speed_radial(sc.rho0(rt, s), gamma);
      const double shift = 0.5 * sc.u0(rt, s) / c;
      return k == 0 ? 0.5 - shift : 0.5 + shift;
    };

    // Wall reflects the outgoing acoustic field (u = 0); the interface
    // transmits both acoustic fields; the contact holds its own trace if a
    // perturbed run ever classifies it as incoming. Far data freeze the
    // initial far state, rotated by the frozen eigenvectors there.
    cp.boundary.wall[2][0] = 1.0;
    cp.boundary.wall[1][1] = 1.0;
    cp.boundary.from[Side::Minus][0][0] = 1.0;
    cp.boundary.from[Side::Plus][2][2] = 1.0;
    cp.boundary.own[Side::Minus][1][1] = 1.0;
    cp.boundary.own[Side::Plus][1][1] = 1.0;
    const double r_far = grid.plus.back();
    cp.boundary.far[0] = [&, r_far](double t) {
      const double rho_f = prev.sample(Side::Plus, 0, t, r_far);
      const double c_f = sound_speed_radial(rho_f, gamma);
      return 0.5 * far0[0] / rho_f - 0.5 * far0[1] / c_f;
    };
    cp.boundary.far[1] = [&](double) { return far0[2]; };

    const CharacteristicSolution w = solve_characteristics(cp);

    EulerSolution next;
    next.chart = chart;
    next.grid = grid;
    next.gamma = gamma;
    next.times = cur.times;
    next.fields.assign(nt + 1, level0);
    for (std::size_t n = 1; n <= nt; ++n) {
      for (Side s : {Side::Minus, Side::Plus}) {
        auto& f = next.fields[n][s];
        const auto& frozen = prev.fields[n][s][0];
        for (std::size_t i = 0; i < grid.size(s); ++i) {
          const double rho_f = frozen[i];
          const double c_f = sound_speed_radial(rho_f, gamma);
          const double w1 = w.value(n, s, 0, i);
          const double w3 = w.value(n, s, 2, i);
          f[0][i] = rho_f * (w1 + w3);
          f[1][i] = c_f * (w3 - w1);
          f[2][i] = w.value(n, s, 1, i);
          if (!(f[0][i] > 1e-12))
            throw SolverError("euler solve: vacuum state during front iteration at t = " +
                              std::to_string(cur.times[n]));
        }
      }
      // One-sided limits of rho and u agree across the sheet; store the shared
      // values bitwise so interface speeds cancel identically on both sides.
      next.fields[n].plus[0][0] = next.fields[n].minus[0][ibm];
      next.fields[n].plus[1][0] = next.fields[n].minus[1][ibm];
    }

    next.front.times = next.times;
    next.front.phi_prime.resize(nt + 1);
    for (std::size_t n = 0; n <= nt; ++n)
      next.front.phi_prime[n] = next.fields[n].minus[1][ibm];
    const std::vector<double> drift = cumulative_trapezoid(next.times, next.front.phi_prime);
    next.front.phi.resize(nt + 1);
    for (std::size_t n = 0; n <= nt; ++n) next.front.phi[n] = sc.b + drift[n];

    change = 0.0;
    for (std::size_t n = 0; n <= nt; ++n) {
      for (Side s : {Side::Minus, Side::Plus})
        for (int c = 0; c < 3; ++c)
          for (std::size_t i = 0; i < grid.size(s); ++i)
            change = std::max(change, std::abs(next.fields[n][s][std::size_t(c)][i] -
                                               prev.fields[n][s][std::size_t(c)][i]));
      change = std::max(change, std::abs(next.front.phi[n] - prev.front.phi[n]));
    }

    cur = std::move(next);
    cur.sweeps = sweep + 1;
    cur.final_change = change;
    if (change < opt.tol) break;
  }

  if (!(change < opt.tol))
    throw SolverError("euler solve: front iteration not converged after " +
                      std::to_string(opt.max_sweeps) +
                      " sweeps, last change " + std::to_string(change));
  return cur;
}

// ---------------------------------------------------------------------------
// Mass-coordinate resampling
// ---------------------------------------------------------------------------

double OuterSolution::sample(Side s, int comp, double t, double x) const {
  return sample_tx(
      times, xs.nodes(s),
      [&](std::size_t lev) -> std::span<const double> { return fields[lev][s][std::size_t(comp)]; },
      t, x);
}

double OuterSolution::sample_radius(Side s, double t, double x) const {
  return sample_tx(
      times, xs.nodes(s),
      [&](std::size_t lev) -> std::span<const double> { return radius[lev][s]; }, t, x);
}

OuterSolution to_lagrangian(const EulerSolution& eul, const MassCoordinateMap& map,
                            const TwoSidedGrid& xs) {
  if (xs.right() > map.x_max() * (1.0 + 1e-12))
    throw FeasibilityError("mass grid reaches x = " + std::to_string(xs.right()) +
                           " but radial data only cover x <= " + std::to_string(map.x_max()) +
                           "; extend r_max");
  const std::size_t nlev = eul.times.size();
  const double dt = eul.times[1] - eul.times[0];
  const Straightening& chart = eul.chart;

  OuterSolution out;
  out.times = eul.times;
  out.xs = xs;
  out.h = map.h();
  out.gamma = eul.gamma;
  out.fields.resize(nlev);
  out.radius.resize(nlev);
  for (std::size_t n = 0; n < nlev; ++n) {
    for (Side s : {Side::Minus, Side::Plus}) {
      for (int c = 0; c < 3; ++c) out.fields[n][s][std::size_t(c)].resize(xs.size(s));
      out.radius[n][s].resize(xs.size(s));
    }
  }

  auto lam2 = [&](Side s, double t, double rt) {
    const double pr = chart.d_r(s, eul.front.at(t));
    const double pt = chart.d_t(s, eul.front.prime_at(t), rt);
    return (eul.sample(s, 1, t, rt) - pt) / pr;
  };

  for (Side s : {Side::Minus, Side::Plus}) {
    const auto& nodes = xs.nodes(s);
    const double lo = (s == Side::Minus) ? chart.a : chart.b;
    const double hi = (s == Side::Minus) ? chart.b : chart.r_max;
    const std::size_t iface = (s == Side::Minus) ? nodes.size() - 1 : 0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      double rt = (j == iface) ? chart.b : std::clamp(map.r0(nodes[j]), lo, hi);
      for (std::size_t n = 0; n < nlev; ++n) {
        const double t = eul.times[n];
        const double rho =
            interp_eval(Interp::Cubic, eul.grid.nodes(s), eul.fields[n][s][0], rt);
        const double u = interp_eval(Interp::Cubic, eul.grid.nodes(s), eul.fields[n][s][1], rt);
        const double v = interp_eval(Interp::Cubic, eul.grid.nodes(s), eul.fields[n][s][2], rt);
        out.fields[n][s][0][j] = 1.0 / rho;
        out.fields[n][s][1][j] = u;
        out.fields[n][s][2][j] = v;
        out.radius[n][s][j] = chart.map(s, eul.front.phi[n], rt);
        if (n + 1 < nlev) {
          const double k1 = lam2(s, t, rt);
          const double rh = std::clamp(rt + 0.5 * dt * k1, lo, hi);
          const double k2 = lam2(s, t + 0.5 * dt, rh);
          rt = std::clamp(rt + dt * k2, lo, hi);
          if (j == iface) rt = chart.b;  // the sheet rides its pinned station
        }
      }
    }
  }

  // The sheet station carries the same one-sided limits of tau, u and r on
  // both sides; copy the minus values so downstream jump checks read zero.
  const std::size_t ibm = xs.minus.size() - 1;
  for (std::size_t n = 0; n < nlev; ++n) {
    out.fields[n].plus[0][0] = out.fields[n].minus[0][ibm];
    out.fields[n].plus[1][0] = out.fields[n].minus[1][ibm];
    out.radius[n].plus[0] = out.radius[n].minus[ibm];
  }
  return out;
}

OuterTraces extract_traces(const OuterSolution& outer) {
  const std::size_t nlev = outer.times.size();
  const double dt = outer.times[1] - outer.times[0];
  const std::size_t ibm = outer.xs.minus.size() - 1;
  const auto& xm = outer.xs.minus;
  const auto& xp = outer.xs.plus;

  OuterTraces tr;
  tr.times = outer.times;
  tr.tau_wall.resize(nlev);
  tr.v_wall.resize(nlev);
  tr.u_x_wall.resize(nlev);
  tr.tau_x_wall.resize(nlev);
  tr.r_wall.resize(nlev);
  tr.tau_if.resize(nlev);
  tr.u_if.resize(nlev);
  tr.r_if.resize(nlev);
  for (Side s : {Side::Minus, Side::Plus}) {
    tr.v_if[s].resize(nlev);
    tr.v_x_if[s].resize(nlev);
    tr.tau_x_if[s].resize(nlev);
    tr.u_x_if[s].resize(nlev);
  }

  for (std::size_t n = 0; n < nlev; ++n) {
    const auto& fm = outer.fields[n].minus;
    const auto& fp = outer.fields[n].plus;
    tr.tau_wall[n] = fm[0][0];
    tr.v_wall[n] = fm[2][0];
    tr.u_x_wall[n] = node_derivative(xm, fm[1], 0);
    tr.tau_x_wall[n] = node_derivative(xm, fm[0], 0);
    tr.r_wall[n] = outer.radius[n].minus[0];
    tr.tau_if[n] = fm[0][ibm];
    tr.u_if[n] = fm[1][ibm];
    tr.r_if[n] = outer.radius[n].minus[ibm];
    tr.v_if[Side::Minus][n] = fm[2][ibm];
    tr.v_if[Side::Plus][n] = fp[2][0];
    tr.v_x_if[Side::Minus][n] = node_derivative(xm, fm[2], ibm);
    tr.v_x_if[Side::Plus][n] = node_derivative(xp, fp[2], 0);
    tr.tau_x_if[Side::Minus][n] = node_derivative(xm, fm[0], ibm);
    tr.tau_x_if[Side::Plus][n] = node_derivative(xp, fp[0], 0);
    tr.u_x_if[Side::Minus][n] = node_derivative(xm, fm[1], ibm);
    tr.u_x_if[Side::Plus][n] = node_derivative(xp, fp[1], 0);
  }
  tr.u_t_if = time_derivative_series(tr.u_if, dt);
  return tr;
}

// ---------------------------------------------------------------------------
// First-order outer correction
// ---------------------------------------------------------------------------

double OuterCorrection::sample(Side s, int comp, double t, double x) const {
  return sample_tx(
      times, xs.nodes(s),
      [&](std::size_t lev) -> std::span<const double> { return fields[lev][s][std::size_t(comp)]; },
      t, x);
}

double OuterCorrection::sample_r1(Side s, double t, double x) const {
  return sample_tx(
      times, xs.nodes(s),
      [&](std::size_t lev) -> std::span<const double> { return r1[lev][s]; }, t, x);
}

OuterCorrection solve_outer_correction(const OuterSolution& outer,
                                       const std::function<double(double)>& phi1) {
  const double gamma = outer.gamma;
  const std::size_t nlev = outer.times.size();
  const std::size_t nt = nlev - 1;
  const double dt = outer.times[1] - outer.times[0];
  const TwoSidedGrid& xs = outer.xs;

  // Frozen-coefficient tables: the leading outer fields plus the tau
  // derivatives entering the linearized acoustic coupling.
  std::vector<TwoSided<std::array<std::vector<double>, 2>>> tgrad(nlev);  // 0: tau_t, 1: tau_x
  for (Side s : {Side::Minus, Side::Plus}) {
    const auto& nodes = xs.nodes(s);
    for (std::size_t n = 0; n < nlev; ++n) {
      tgrad[n][s][1].resize(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i)
        tgrad[n][s][1][i] = node_derivative(nodes, outer.fields[n][s][0], i);
      tgrad[n][s][0].assign(nodes.size(), 0.0);
    }
    std::vector<double> series(nlev);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t n = 0; n < nlev; ++n) series[n] = outer.fields[n][s][0][i];
      const std::vector<double> dts = time_derivative_series(series, dt);
      for (std::size_t n = 0; n < nlev; ++n) tgrad[n][s][0][i] = dts[n];
    }
  }

  auto field = [&](int comp, Side s, double t, double x) {
    return outer.sample(s, comp, t, x);
  };
  auto rad = [&](Side s, double t, double x) { return outer.sample_radius(s, t, x); };
  auto grad = [&](int which, Side s, double t, double x) {
    return sample_tx(
        outer.times, xs.nodes(s),
        [&](std::size_t n) -> std::span<const double> { return tgrad[n][s][std::size_t(which)]; },
        t, x);
  };

  std::vector<double> r_if(nlev);
  const std::size_t ibm = xs.minus.size() - 1;
  for (std::size_t n = 0; n < nlev; ++n) r_if[n] = outer.radius[n].minus[ibm];
  auto r_front = [&](double t) { return sample_series(outer.times, r_if, t); };

  CharacteristicProblem cp;
  cp.grid = xs;
  cp.t0 = outer.times.front();
  cp.t1 = outer.times.back();
  cp.n_steps = nt;
  cp.interp = Interp::Cubic;
  cp.picard_tol = 1e-12;
  cp.system.n_fields = 3;
  cp.system.speed = [&](int k, Side s, double t, double x) {
    if (k == 1) return 0.0;
    const double c = sound_speed_mass(rad(s, t, x), field(0, s, t, x), gamma);
    return k == 0 ? -c : c;
  };
  cp.system.coupling = [&](Side s, double t, double x) -> Mat3 {
    const double tau = field(0, s, t, x);
    const double u = field(1, s, t, x);
    const double v = field(2, s, t, x);
    const double r = rad(s, t, x);
    const double tau_t = grad(0, s, t, x);
    const double tau_x = grad(1, s, t, x);
    const double ti = std::pow(tau, -0.5 * (gamma + 1.0));
    const double c = r * ti;
    const double rx = tau / r;  // the mass-coordinate identity d(r)/dx = tau/r
    const double cx = ti * (rx - 0.5 * (gamma + 1.0) * (r / tau) * tau_x);
    const double ct = ti * (u - 0.5 * (gamma + 1.0) * (r / tau) * tau_t);
    const double tg = ti * ti;  // tau^-(gamma+1)
    const double m21r = (gamma + 1.0) * r * (tg / tau) * tau_x * r;
    const double g10 = -r * cx - tau * c / r;
    const double g12 = -g10;
    const double g20 = ct - r * tg * rx + m21r;
    const double g21 = -2.0 * v / r;
    const double g22 = -ct - r * tg * rx + m21r;
    const double g30 = v * c / r;
    const double g31 = u / r;
    const double i2r = 0.5 / r;
    const double i2c = 0.5 / c;
    Mat3 m{};
    m[0][0] = -(g10 * i2r + g20 * i2c);
    m[0][1] = -(g21 * i2c);
    m[0][2] = -(g12 * i2r + g22 * i2c);
    m[1][0] = -g30;
    m[1][1] = -g31;
    m[1][2] = g30;
    m[2][0] = -(g10 * i2r - g20 * i2c);
    m[2][1] = g21 * i2c;
    m[2][2] = -(g12 * i2r - g22 * i2c);
    return m;
  };
  cp.initial = [](int, Side, double) { return 0.0; };

  cp.boundary.wall[2][0] = 1.0;  // u correction vanishes at the wall
  cp.boundary.wall[1][1] = 1.0;
  cp.boundary.from[Side::Minus][0][0] = 1.0;
  cp.boundary.from[Side::Plus][2][2] = 1.0;
  cp.boundary.own[Side::Minus][1][1] = 1.0;
  cp.boundary.own[Side::Plus][1][1] = 1.0;
  if (phi1) {
    cp.boundary.interface_datum[Side::Minus][0] = [&, phi1](double t) {
      return 0.5 * phi1(t) / r_front(t);
    };
    cp.boundary.interface_datum[Side::Plus][2] = [&, phi1](double t) {
      return -0.5 * phi1(t) / r_front(t);
    };
  }
  cp.boundary.far[0] = [](double) { return 0.0; };
  cp.boundary.far[1] = [](double) { return 0.0; };

  const CharacteristicSolution w = solve_characteristics(cp);

  OuterCorrection out;
  out.times = outer.times;
  out.xs = xs;
  out.h = outer.h;
  out.fields.resize(nlev);
  out.r1.resize(nlev);
  for (std::size_t n = 0; n < nlev; ++n) {
    for (Side s : {Side::Minus, Side::Plus}) {
      const auto& nodes = xs.nodes(s);
      auto& f = out.fields[n][s];
      for (int c = 0; c < 3; ++c) f[std::size_t(c)].resize(nodes.size());
      out.r1[n][s].assign(nodes.size(), 0.0);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double tau_f = outer.fields[n][s][0][i];
        const double r_f = outer.radius[n][s][i];
        const double c_f = sound_speed_mass(r_f, tau_f, gamma);
        const double w0 = w.value(n, s, 0, i);
        const double w2 = w.value(n, s, 2, i);
        f[0][i] = r_f * (w0 + w2);
        f[1][i] = c_f * (w0 - w2);
        f[2][i] = w.value(n, s, 1, i);
        out.sup_norm = std::max({out.sup_norm, std::abs(f[0][i]), std::abs(f[1][i]),
                                 std::abs(f[2][i])});
      }
      if (n > 0) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
          out.r1[n][s][i] = out.r1[n - 1][s][i] +
                            0.5 * dt * (out.fields[n - 1][s][1][i] + f[1][i]);
      }
    }
  }
  return out;
}

}  // namespace vortex
