#include "vortex/viscous.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "vortex/numerics.hpp"

namespace vortex {

namespace {

constexpr std::size_t kCellCap = 200000;
constexpr std::size_t kStepCap = 3000000;

// Four-level cubic window over the stored slices (shared sampling stencil).
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

/// Derivative of the quadratic through (x0,f0),(x1,f1),(x2,f2) at position at.
double deriv3(double x0, double x1, double x2, double f0, double f1, double f2, double at) {
  return f0 * (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
         f1 * (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
         f2 * (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

/// Per-slice scratch split into components; avoids striding through Vec3.
struct Components {
  std::vector<double> tau, u, v;

  void load(std::span<const Vec3> slice) {
    const std::size_t n = slice.size();
    tau.resize(n);
    u.resize(n);
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      tau[i] = slice[i][0];
      u[i] = slice[i][1];
      v[i] = slice[i][2];
    }
  }
};

/// Everything except the second-derivative diffusion terms, plus the diffusion
/// coefficient fields the implicit stage needs. The acoustic pair (tau, u) is
/// differenced along characteristics: each Riemann combination is one-sided
/// toward the side its wave comes from, which is what keeps the undiffused
/// tau equation free of odd-even wiggles on coarse far-field cells.
void explicit_rhs(std::span<const double> xs, const Components& s, std::span<const double> r,
                  const ViscousParams& par, std::vector<Vec3>& out, std::vector<double>& du,
                  std::vector<double>& dv) {
  const std::size_t n = xs.size();
  out.resize(n);
  du.resize(n);
  dv.resize(n);
  const double visc_u = par.eps * (par.lambda + 2.0 * par.mu);
  const double visc_v = par.eps * par.mu;

  for (std::size_t i = 0; i < n; ++i) {
    const double tau = s.tau[i], u = s.u[i], v = s.v[i], ri = r[i];
    const double txc = node_derivative(xs, s.tau, i);
    const double uxc = node_derivative(xs, s.u, i);
    const double vxc = node_derivative(xs, s.v, i);

    double txl = txc, uxl = uxc, txr = txc, uxr = uxc;
    if (i >= 2) {
      txl = deriv3(xs[i - 2], xs[i - 1], xs[i], s.tau[i - 2], s.tau[i - 1], tau, xs[i]);
      uxl = deriv3(xs[i - 2], xs[i - 1], xs[i], s.u[i - 2], s.u[i - 1], u, xs[i]);
    }
    if (i + 2 < n) {
      txr = deriv3(xs[i], xs[i + 1], xs[i + 2], tau, s.tau[i + 1], s.tau[i + 2], xs[i]);
      uxr = deriv3(xs[i], xs[i + 1], xs[i + 2], u, s.u[i + 1], s.u[i + 2], xs[i]);
    }

    const double c = sound_speed_mass(ri, tau, par.gamma);
    const double w0x = txr / (2.0 * ri) + uxr / (2.0 * c);  // wave running left
    const double w2x = txl / (2.0 * ri) - uxl / (2.0 * c);  // wave running right
    const double tx_hat = ri * (w0x + w2x);
    const double ux_hat = c * (w0x - w2x);

    const double rt = ri / tau;
    const double tgp = std::pow(tau, -(par.gamma + 1.0));
    out[i][0] = ri * ux_hat + tau * u / ri;
    out[i][1] = ri * tgp * tx_hat + v * v / ri +
                visc_u * (-rt * rt * txc * uxc + 2.0 * uxc - tau * u / (ri * ri));
    out[i][2] = -u * v / ri + visc_v * (-rt * rt * txc * vxc + 2.0 * vxc - tau * v / (ri * ri));
    du[i] = visc_u * ri * ri / tau;
    dv[i] = visc_v * ri * ri / tau;
  }
}

std::vector<double> second_derivative(std::span<const double> xs, std::span<const double> f) {
  const std::size_t n = xs.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = node_second_derivative(xs, f, i);
  if (n >= 3) {
    out[0] = out[1];
    out[n - 1] = out[n - 2];
  }
  return out;
}

/// Solve (I - theta_dt * D d^2/dx^2) f = rhs with Dirichlet end rows.
void diffusion_solve(std::span<const double> xs, std::span<const double> D, double theta_dt,
                     std::vector<double>& rhs, double bc_left, double bc_right,
                     std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up) {
  const std::size_t n = xs.size();
  lo.resize(n);
  di.resize(n);
  up.resize(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dxm = xs[i] - xs[i - 1];
    const double dxp = xs[i + 1] - xs[i];
    const double alpha = 2.0 / (dxm * (dxm + dxp));
    const double gamma = 2.0 / (dxp * (dxm + dxp));
    const double k = theta_dt * D[i];
    lo[i] = -k * alpha;
    di[i] = 1.0 + k * (alpha + gamma);
    up[i] = -k * gamma;
  }
  lo[0] = up[0] = 0.0;
  di[0] = 1.0;
  rhs[0] = bc_left;
  lo[n - 1] = up[n - 1] = 0.0;
  di[n - 1] = 1.0;
  rhs[n - 1] = bc_right;
  solve_tridiagonal(lo, di, up, rhs);
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid construction
// ---------------------------------------------------------------------------

std::vector<double> build_viscous_grid(const GridSpec& g, double h, double eps) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(h > 0.0 && g.x_max > h))
    throw FeasibilityError("mass domain [0, " + std::to_string(g.x_max) +
                           "] must contain the sheet station x = " + std::to_string(h) +
                           " strictly inside");
  if (g.cells_per_sqrt_eps < 4.0)
    throw FeasibilityError("layers of width sqrt(eps) need cells_per_sqrt_eps >= 4, got " +
                           std::to_string(g.cells_per_sqrt_eps));

  const double growth = std::min(0.1, g.grade_ratio - 1.0);
  double hf = std::sqrt(eps) / g.cells_per_sqrt_eps;
  hf = std::min(hf, std::min(h, g.x_max - h) / 8.0);  // never fewer than ~8 cells per segment

  auto fill_segment = [&](std::vector<double>& nodes, double lo, double hi, bool anchor_right) {
    // Walk with the local target spacing, then scale the walk onto [lo, hi];
    // scaling preserves neighbor ratios, so the grade contract survives.
    std::vector<double> walk{0.0};
    const double len = hi - lo;
    while (walk.back() < len) {
      const double p = walk.back();
      const double dist = anchor_right ? std::min(p, len - p) : p;
      const double dx = std::min(g.coarse_dx, hf + growth * std::max(dist, 0.0));
      walk.push_back(p + dx);
      if (nodes.size() + walk.size() > kCellCap)
        throw FeasibilityError(
            "eps = " + std::to_string(eps) + " needs more than " + std::to_string(kCellCap) +
            " mass cells under the current spacing rules; lower cells_per_sqrt_eps, raise "
            "coarse_dx, or shrink x_max");
    }
    const double scale = len / walk.back();
    for (std::size_t k = 1; k < walk.size(); ++k) nodes.push_back(lo + walk[k] * scale);
    nodes.back() = hi;
  };

  std::vector<double> xs{0.0};
  fill_segment(xs, 0.0, h, true);
  fill_segment(xs, h, g.x_max, false);
  return xs;
}

// ---------------------------------------------------------------------------
// Shared spatial operator
// ---------------------------------------------------------------------------

std::vector<Vec3> apply_viscous_operator(std::span<const double> xs, std::span<const Vec3> slice,
                                         std::span<const double> radii,
                                         const ViscousParams& par) {
  Components s;
  s.load(slice);
  std::vector<Vec3> out;
  std::vector<double> du, dv;
  explicit_rhs(xs, s, radii, par, out, du, dv);
  const std::vector<double> uxx = second_derivative(xs, s.u);
  const std::vector<double> vxx = second_derivative(xs, s.v);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i][1] += du[i] * uxx[i];
    out[i][2] += dv[i] * vxx[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time marching
// ---------------------------------------------------------------------------

double ViscousSolution::sample(int comp, double t, double x) const {
  auto column = [&](std::size_t lev, double& val) {
    if (comp == 3) {
      val = interp_eval(Interp::Cubic, xs, radii[lev], x);
    } else {
      std::vector<double> tmp(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) tmp[i] = states[lev][i][std::size_t(comp)];
      val = interp_eval(Interp::Cubic, xs, tmp, x);
    }
  };
  if (times.size() <= 1) {
    double v = 0.0;
    column(0, v);
    return v;
  }
  const double dt_slice = times[1] - times[0];
  const Window w = time_window(times.size(), (t - times.front()) / dt_slice);
  std::array<double, 4> win{};
  for (std::size_t m = 0; m < w.cnt; ++m) column(w.lo + m, win[m]);
  return series_eval(std::span<const double>(win.data(), w.cnt), times[w.lo], dt_slice, t);
}

ViscousSolution run_viscous(const Scenario& sc, const MassCoordinateMap& map, double eps) {
  if (!(sc.T > 0.0)) throw ConfigError("T must be positive");
  if (!sc.wall_v) throw ConfigError("scenario lacks a wall swirl datum");

  ViscousSolution sol;
  sol.eps = eps;
  sol.h = map.h();
  sol.xs = build_viscous_grid(sc.grid, map.h(), eps);
  const std::size_t n = sol.xs.size();
  if (sol.xs.back() > map.x_max() * (1.0 + 1e-12))
    throw FeasibilityError("mass grid reaches x = " + std::to_string(sol.xs.back()) +
                           " but radial data only cover x <= " + std::to_string(map.x_max()) +
                           "; extend grid.r_max");

  std::vector<Vec3> state = build_viscous_initial(sc, map, eps, sol.xs);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = map.r0(sol.xs[i]);
  const Vec3 far = state.back();
  const Vec3 far_probe = state[n - 2];

  // Acoustic CFL from the initial state; the runs stay near it throughout.
  double rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = (i == 0) ? sol.xs[1] - sol.xs[0]
                               : std::min(sol.xs[i] - sol.xs[i - 1],
                                          (i + 1 < n ? sol.xs[i + 1] - sol.xs[i] : 1e300));
    rate = std::max(rate, sound_speed_mass(r[i], state[i][0], sc.gamma) / dx);
  }
  const std::size_t slices = std::max<std::size_t>(1, sc.grid.output_slices);
  const std::size_t n_raw = std::size_t(std::ceil(sc.T * rate / sc.grid.cfl));
  const std::size_t per_slice = std::max<std::size_t>(1, (n_raw + slices - 1) / slices);
  const std::size_t n_steps = per_slice * slices;
  if (n_steps > kStepCap)
    throw FeasibilityError("eps = " + std::to_string(eps) + " needs " + std::to_string(n_steps) +
                           " time steps (cap " + std::to_string(kStepCap) +
                           "); relax cfl or shorten T");
  const double dt = sc.T / double(n_steps);
  sol.dt = dt;
  sol.n_steps = n_steps;

  const ViscousParams par{sc.gamma, sc.mu, sc.lambda, eps};
  sol.min_tau = sol.max_tau = state[0][0];

  Components comp;
  std::vector<Vec3> e_old, e_mid;
  std::vector<double> du_old, dv_old, du_mid, dv_mid;
  std::vector<double> lo, di, up, rhs_u, rhs_v;
  std::vector<Vec3> star(n);
  std::vector<double> r_star(n), r2(n);

  auto store_slice = [&](double t) {
    sol.times.push_back(t);
    sol.states.push_back(state);
    sol.radii.push_back(r);
    for (std::size_t i = 0; i < n; ++i) r2[i] = r[i] * r[i];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double defect = 0.5 * node_derivative(sol.xs, r2, i) - state[i][0];
      sol.max_geometry_defect = std::max(sol.max_geometry_defect, std::abs(defect));
    }
    for (int k = 0; k < 3; ++k)
      sol.max_far_drift =
          std::max(sol.max_far_drift, std::abs(state[n - 2][std::size_t(k)] - far_probe[std::size_t(k)]));
    comp.load(state);
    const double vx0 = node_derivative(sol.xs, comp.v, 0);
    sol.wall_flux_v.push_back(eps * sc.mu * (r[0] * r[0] / state[0][0]) * vx0);
  };

  store_slice(0.0);

  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double t_new = dt * double(step);

    // predictor: explicit sources at t_n, backward Euler diffusion
    comp.load(state);
    explicit_rhs(sol.xs, comp, r, par, e_old, du_old, dv_old);
    const std::vector<double> uxx_old = second_derivative(sol.xs, comp.u);
    const std::vector<double> vxx_old = second_derivative(sol.xs, comp.v);

    rhs_u.resize(n);
    rhs_v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      star[i][0] = state[i][0] + dt * e_old[i][0];
      rhs_u[i] = state[i][1] + dt * e_old[i][1];
      rhs_v[i] = state[i][2] + dt * e_old[i][2];
    }
    diffusion_solve(sol.xs, du_old, dt, rhs_u, 0.0, far[1], lo, di, up);
    diffusion_solve(sol.xs, dv_old, dt, rhs_v, sc.wall_v(t_new), far[2], lo, di, up);
    for (std::size_t i = 0; i < n; ++i) {
      star[i][1] = rhs_u[i];
      star[i][2] = rhs_v[i];
      r_star[i] = r[i] + dt * rhs_u[i];
    }
    star.back() = far;

    // corrector: trapezoid on sources and diffusion, implicit half at t_new
    comp.load(star);
    explicit_rhs(sol.xs, comp, r_star, par, e_mid, du_mid, dv_mid);
    for (std::size_t i = 0; i < n; ++i) {
      const double half = 0.5 * dt;
      state[i][0] += half * (e_old[i][0] + e_mid[i][0]);
      rhs_u[i] = state[i][1] + half * (e_old[i][1] + e_mid[i][1]) + half * du_old[i] * uxx_old[i];
      rhs_v[i] = state[i][2] + half * (e_old[i][2] + e_mid[i][2]) + half * dv_old[i] * vxx_old[i];
    }
    diffusion_solve(sol.xs, du_mid, 0.5 * dt, rhs_u, 0.0, far[1], lo, di, up);
    diffusion_solve(sol.xs, dv_mid, 0.5 * dt, rhs_v, sc.wall_v(t_new), far[2], lo, di, up);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] += 0.5 * dt * (state[i][1] + rhs_u[i]);
      state[i][1] = rhs_u[i];
      state[i][2] = rhs_v[i];
    }
    state.back() = far;

    for (std::size_t i = 0; i < n; ++i) {
      const double tau = state[i][0];
      if (!(tau > 1e-12) || !std::isfinite(tau) || !std::isfinite(state[i][1]))
        throw SolverError("viscous march lost positivity at t = " + std::to_string(t_new) +
                          ", x = " + std::to_string(sol.xs[i]));
      sol.min_tau = std::min(sol.min_tau, tau);
      sol.max_tau = std::max(sol.max_tau, tau);
    }

    if (step % per_slice == 0) store_slice(t_new);
  }
  return sol;
}

}  // namespace vortex
