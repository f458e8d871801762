#include "vortex/layer_profiles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "vortex/numerics.hpp"

namespace vortex {

namespace {

// Four-level cubic time window, the same stencil every tabulated series in
// the project is read through.

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

/// Evaluate column i of a level table through an already-chosen time window.
double gather_eval(const std::vector<double>& times, const Window& w,
                   const std::vector<std::vector<double>>& tab, std::size_t i, double t) {
  std::array<double, 4> win{};
  for (std::size_t m = 0; m < w.cnt; ++m) win[m] = tab[w.lo + m][i];
  const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
  return series_eval(std::span<const double>(win.data(), w.cnt), times[w.lo], dt, t);
}

Window window_at(const std::vector<double>& times, double t) {
  if (times.size() <= 1) return {0, times.size()};
  const double dt = times[1] - times[0];
  return time_window(times.size(), (t - times.front()) / dt);
}

/// First derivative table on the field's uniform grid, one row per level.
std::vector<std::vector<double>> derivative_table(const LayerField& f) {
  std::vector<std::vector<double>> out(f.values.size());
  for (std::size_t n = 0; n < f.values.size(); ++n) {
    out[n].resize(f.zs.size());
    for (std::size_t i = 0; i < f.zs.size(); ++i)
      out[n][i] = node_derivative(f.zs, f.values[n], i);
  }
  return out;
}

/// Second derivative table; fourth-point one-sided stencils at the ends keep
/// the boundary rows second-order accurate.
std::vector<std::vector<double>> second_derivative_table(const LayerField& f) {
  const std::size_t nn = f.zs.size();
  const double dz = f.zs[1] - f.zs[0];
  const double idz2 = 1.0 / (dz * dz);
  std::vector<std::vector<double>> out(f.values.size());
  for (std::size_t n = 0; n < f.values.size(); ++n) {
    const auto& w = f.values[n];
    auto& d = out[n];
    d.resize(nn);
    d[0] = (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) * idz2;
    for (std::size_t i = 1; i + 1 < nn; ++i) d[i] = (w[i - 1] - 2.0 * w[i] + w[i + 1]) * idz2;
    d[nn - 1] = (2.0 * w[nn - 1] - 5.0 * w[nn - 2] + 4.0 * w[nn - 3] - w[nn - 4]) * idz2;
  }
  return out;
}

std::vector<double> resample(const std::vector<double>& src_times, const std::vector<double>& src,
                             const std::vector<double>& dst_times) {
  std::vector<double> out(dst_times.size());
  for (std::size_t n = 0; n < dst_times.size(); ++n)
    out[n] = sample_series(src_times, src, dst_times[n]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// LayerField
// ---------------------------------------------------------------------------

double LayerField::value_at(double t, double z) const {
  if (times.size() <= 1) return interp_eval(Interp::Cubic, zs, values.at(0), z);
  const Window w = window_at(times, t);
  std::array<double, 4> win{};
  for (std::size_t m = 0; m < w.cnt; ++m)
    win[m] = interp_eval(Interp::Cubic, zs, values[w.lo + m], z);
  const double dt = times[1] - times[0];
  return series_eval(std::span<const double>(win.data(), w.cnt), times[w.lo], dt, t);
}

double LayerField::far_model(Side s, double t, double z) const {
  double out = 0.0;
  if (!base[s].empty()) out += sample_series(times, base[s], t);
  if (!slope[s].empty()) out += z * sample_series(times, slope[s], t);
  return out;
}

double LayerField::layer_at(Side s, double t, double z) const {
  const double zc = std::clamp(z, zs.front(), zs.back());
  return value_at(t, zc) - far_model(s, t, zc);
}

// ---------------------------------------------------------------------------
// BDF2 line marcher
// ---------------------------------------------------------------------------

LayerField march_line(const LineProblem& p) {
  if (!p.diffusivity) throw ConfigError("line marcher needs a diffusivity");
  if (p.cells < 4) throw ConfigError("line marcher needs at least 4 cells");
  if (p.steps < 2) throw ConfigError("line marcher needs at least 2 steps");
  if (!(p.z_hi > p.z_lo)) throw ConfigError("line marcher needs z_hi > z_lo");
  if (!(p.t1 > p.t0)) throw ConfigError("line marcher needs t1 > t0");

  const std::size_t nn = p.cells + 1;
  const double dz = (p.z_hi - p.z_lo) / double(p.cells);

  // Round the step count up to a multiple of the storage stride so the kept
  // levels are uniform in time and include the final one.
  const std::size_t keep = std::max<std::size_t>(2, p.keep_levels);
  const std::size_t stride = std::max<std::size_t>(1, p.steps / (keep - 1));
  const std::size_t nsteps = stride * ((p.steps + stride - 1) / stride);
  const double dt = (p.t1 - p.t0) / double(nsteps);

  std::vector<double> zs(nn);
  for (std::size_t i = 0; i < nn; ++i) zs[i] = p.z_lo + dz * double(i);

  std::vector<double> w_prev(nn, 0.0), w_curr(nn, 0.0);
  if (p.initial)
    for (std::size_t i = 0; i < nn; ++i) w_curr[i] = p.initial(zs[i]);

  LayerField out;
  out.kind = p.kind;
  out.zs = zs;
  out.times.reserve(nsteps / stride + 1);
  out.values.reserve(nsteps / stride + 1);
  out.times.push_back(p.t0);
  out.values.push_back(w_curr);

  std::vector<double> lo(nn), di(nn), up(nn), rhs(nn), frow(nn, 0.0);
  for (std::size_t n = 1; n <= nsteps; ++n) {
    const double t_new = p.t0 + dt * double(n);
    const double D = p.diffusivity(t_new);
    const double q = p.reaction ? p.reaction(t_new) : 0.0;
    if (!(D > 0.0) || !std::isfinite(D) || !std::isfinite(q))
      throw SolverError("layer coefficients degenerate at t = " + std::to_string(t_new));

    if (p.forcing_slice)
      p.forcing_slice(t_new, zs, frow);
    else if (p.forcing)
      for (std::size_t i = 0; i < nn; ++i) frow[i] = p.forcing(t_new, zs[i]);

    const bool startup = (n == 1);
    const double tc = (startup ? 1.0 : 1.5) / dt;
    const double r = D / (dz * dz);
    for (std::size_t i = 1; i + 1 < nn; ++i) {
      lo[i] = -r;
      di[i] = tc + q + 2.0 * r;
      up[i] = -r;
      rhs[i] = (startup ? w_curr[i] / dt : (4.0 * w_curr[i] - w_prev[i]) / (2.0 * dt)) + frow[i];
    }
    lo[0] = 0.0;
    di[0] = 1.0;
    up[0] = 0.0;
    rhs[0] = p.left ? p.left(t_new) : 0.0;
    lo[nn - 1] = 0.0;
    di[nn - 1] = 1.0;
    up[nn - 1] = 0.0;
    rhs[nn - 1] = p.right ? p.right(t_new) : 0.0;

    solve_tridiagonal(lo, di, up, rhs);
    w_prev = w_curr;
    w_curr = rhs;

    if (n % stride == 0) {
      if (!std::isfinite(w_curr[nn / 2]))
        throw SolverError("layer march diverged at t = " + std::to_string(t_new));
      out.times.push_back(t_new);
      out.values.push_back(w_curr);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correction traces
// ---------------------------------------------------------------------------

CorrectionTraces extract_correction_traces(const OuterCorrection& corr) {
  CorrectionTraces tr;
  tr.times = corr.times;
  const std::size_t nlev = corr.times.size();
  const std::size_t iback = corr.xs.minus.size() - 1;
  tr.tau1_wall.resize(nlev);
  tr.v1_wall.resize(nlev);
  tr.u1_if.resize(nlev);
  tr.r1_if.resize(nlev);
  for (Side s : {Side::Minus, Side::Plus}) {
    tr.tau1_if[s].resize(nlev);
    tr.v1_if[s].resize(nlev);
  }
  for (std::size_t n = 0; n < nlev; ++n) {
    tr.tau1_wall[n] = corr.fields[n][Side::Minus][0][0];
    tr.v1_wall[n] = corr.fields[n][Side::Minus][2][0];
    tr.u1_if[n] = corr.fields[n][Side::Minus][1][iback];
    tr.r1_if[n] = corr.r1[n][Side::Minus][iback];
    tr.tau1_if[Side::Minus][n] = corr.fields[n][Side::Minus][0][iback];
    tr.tau1_if[Side::Plus][n] = corr.fields[n][Side::Plus][0][0];
    tr.v1_if[Side::Minus][n] = corr.fields[n][Side::Minus][2][iback];
    tr.v1_if[Side::Plus][n] = corr.fields[n][Side::Plus][2][0];
  }
  return tr;
}

CorrectionTraces zero_correction_traces(const std::vector<double>& times) {
  CorrectionTraces tr;
  tr.times = times;
  const std::vector<double> zs(times.size(), 0.0);
  tr.tau1_wall = zs;
  tr.v1_wall = zs;
  tr.u1_if = zs;
  tr.r1_if = zs;
  tr.tau1_if[Side::Minus] = zs;
  tr.tau1_if[Side::Plus] = zs;
  tr.v1_if[Side::Minus] = zs;
  tr.v1_if[Side::Plus] = zs;
  return tr;
}

// ---------------------------------------------------------------------------
// Leading-order layers
// ---------------------------------------------------------------------------

LayerField solve_boundary_layer_v0(const Scenario& sc, const OuterTraces& tr) {
  if (!sc.wall_v) throw ConfigError("scenario lacks a wall swirl datum");
  const double mismatch = sc.wall_v(0.0) - tr.v_wall.front();
  if (std::abs(mismatch) > 1e-8)
    throw DataError("wall datum breaks zeroth-order compatibility by " + std::to_string(mismatch));

  LineProblem p;
  p.kind = LayerField::Kind::Wall;
  p.z_lo = 0.0;
  p.z_hi = sc.grid.layer_L;
  p.cells = sc.grid.layer_cells;
  p.steps = sc.grid.layer_steps;
  p.t0 = tr.times.front();
  p.t1 = tr.times.back();
  const double a2mu = sc.a * sc.a * sc.mu;
  p.diffusivity = [&, a2mu](double t) { return a2mu / sample_series(tr.times, tr.tau_wall, t); };
  p.left = [&sc, &tr](double t) { return sc.wall_v(t) - sample_series(tr.times, tr.v_wall, t); };
  return march_line(p);
}

LayerField solve_vortex_layer_v0(const Scenario& sc, const OuterTraces& tr) {
  if (!sc.sheet_ramp) throw ConfigError("scenario lacks a sheet ramp");

  LineProblem p;
  p.kind = LayerField::Kind::Sheet;
  p.z_lo = -sc.grid.layer_L;
  p.z_hi = sc.grid.layer_L;
  p.cells = 2 * sc.grid.layer_cells;
  p.steps = sc.grid.layer_steps;
  p.t0 = tr.times.front();
  p.t1 = tr.times.back();
  const double mu = sc.mu;
  p.diffusivity = [&, mu](double t) {
    const double phi = sample_series(tr.times, tr.r_if, t);
    return mu * phi * phi / sample_series(tr.times, tr.tau_if, t);
  };
  p.reaction = [&](double t) {
    return sample_series(tr.times, tr.u_if, t) / sample_series(tr.times, tr.r_if, t);
  };
  p.left = [&](double t) { return sample_series(tr.times, tr.v_if[Side::Minus], t); };
  p.right = [&](double t) { return sample_series(tr.times, tr.v_if[Side::Plus], t); };
  p.initial = [&](double z) {
    if (std::abs(z) <= 1.0) return sc.sheet_ramp(z);
    return z < 0.0 ? tr.v_if[Side::Minus].front() : tr.v_if[Side::Plus].front();
  };
  LayerField f = march_line(p);
  for (Side s : {Side::Minus, Side::Plus}) f.base[s] = resample(tr.times, tr.v_if[s], f.times);
  return f;
}

// ---------------------------------------------------------------------------
// First-order correctors
// ---------------------------------------------------------------------------

LayerField compute_tau_b1(const Scenario& sc, const OuterTraces& tr, const LayerField& vb0) {
  LayerField out;
  out.kind = LayerField::Kind::Wall;
  out.times = vb0.times;
  out.zs = vb0.zs;
  out.values.resize(vb0.values.size());

  const double ia2 = 1.0 / (sc.a * sc.a);
  std::vector<double> integrand(vb0.zs.size());
  for (std::size_t n = 0; n < vb0.values.size(); ++n) {
    const double t = vb0.times[n];
    const double taub = sample_series(tr.times, tr.tau_wall, t);
    const double vbar = sample_series(tr.times, tr.v_wall, t);
    const double coef = std::pow(taub, sc.gamma + 1.0) * ia2;
    for (std::size_t i = 0; i < vb0.zs.size(); ++i) {
      const double v = vb0.values[n][i];
      integrand[i] = coef * (v + 2.0 * vbar) * v;
    }
    // tau decreases outward through the layer and vanishes at the far edge.
    const std::vector<double> prim = cumulative_trapezoid(vb0.zs, integrand);
    out.values[n].resize(vb0.zs.size());
    for (std::size_t i = 0; i < vb0.zs.size(); ++i) out.values[n][i] = prim.back() - prim[i];
  }
  return out;
}

LayerField solve_boundary_layer_v1(const Scenario& sc, const OuterTraces& tr,
                                   const LayerField& vb0, const LayerField& tau_b1,
                                   const CorrectionTraces& corr) {
  const auto dv = derivative_table(vb0);
  const auto d2v = second_derivative_table(vb0);
  const std::vector<double> iux = cumulative_trapezoid(tr.times, tr.u_x_wall);
  const double tau00 = tr.tau_wall.front();

  LineProblem p;
  p.kind = LayerField::Kind::Wall;
  p.z_lo = 0.0;
  p.z_hi = sc.grid.layer_L;
  p.cells = sc.grid.layer_cells;
  p.steps = sc.grid.layer_steps;
  p.t0 = tr.times.front();
  p.t1 = tr.times.back();
  const double a = sc.a, mu = sc.mu, gamma = sc.gamma;
  p.diffusivity = [&, a, mu](double t) {
    return a * a * mu / sample_series(tr.times, tr.tau_wall, t);
  };
  p.left = [&](double t) { return -sample_series(corr.times, corr.v1_wall, t); };
  p.forcing_slice = [&, a, mu, gamma, tau00](double t, std::span<const double> zs,
                                             std::span<double> out) {
    const double taub = sample_series(tr.times, tr.tau_wall, t);
    const double vbar = sample_series(tr.times, tr.v_wall, t);
    const double txw = sample_series(tr.times, tr.tau_x_wall, t);
    const double uxw = sample_series(tr.times, tr.u_x_wall, t);
    const double t1w = sample_series(corr.times, corr.tau1_wall, t);
    const double iu = sample_series(tr.times, iux, t);
    const double coef = std::pow(taub, gamma + 1.0) / (a * a);
    const double it2 = 1.0 / (taub * taub);
    const Window w = window_at(vb0.times, t);
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const double xi = zs[i];
      const double v = gather_eval(vb0.times, w, vb0.values, i, t);
      const double dvi = gather_eval(vb0.times, w, dv, i, t);
      const double d2vi = gather_eval(vb0.times, w, d2v, i, t);
      const double dtau0 = -coef * (v + 2.0 * vbar) * v + txw;
      const double tau0b1 = gather_eval(tau_b1.times, w, tau_b1.values, i, t) + t1w + xi * txw;
      const double r0b1 = xi * (tau00 / a + iu);
      out[i] = -a * a * mu * it2 * dvi * dtau0 +
               mu * ((2.0 * a / taub) * r0b1 - a * a * it2 * tau0b1) * d2vi + 2.0 * mu * dvi -
               (xi / a) * uxw * v;
    }
  };
  return march_line(p);
}

SheetTau1 compute_tau_s1(const Scenario& sc, const OuterTraces& tr, const LayerField& vs0,
                         const CorrectionTraces& corr) {
  SheetTau1 out;
  LayerField& f = out.field;
  f.kind = LayerField::Kind::Sheet;
  f.times = vs0.times;
  f.zs = vs0.zs;
  f.values.resize(vs0.values.size());
  for (Side s : {Side::Minus, Side::Plus}) {
    f.base[s] = resample(corr.times, corr.tau1_if[s], f.times);
    f.slope[s] = resample(tr.times, tr.tau_x_if[s], f.times);
  }
  out.tail_minus.resize(f.times.size());
  out.implied_front_jump.resize(f.times.size());

  const double L = f.zs.back();
  std::vector<double> slope(f.zs.size());
  for (std::size_t n = 0; n < f.times.size(); ++n) {
    const double t = f.times[n];
    const double taub = sample_series(tr.times, tr.tau_if, t);
    const double phi = sample_series(tr.times, tr.r_if, t);
    const double ut = sample_series(tr.times, tr.u_t_if, t);
    const double coef = std::pow(taub, sc.gamma + 1.0) / (phi * phi);
    for (std::size_t i = 0; i < f.zs.size(); ++i) {
      const double v = vs0.values[n][i];
      slope[i] = coef * (phi * ut - v * v);
    }
    std::vector<double> prim = cumulative_trapezoid(f.zs, slope);
    // Pin the layer part to zero at +L; the leftover at -L is the tail the
    // front corrector would have to absorb.
    const double shift = f.base[Side::Plus][n] + L * f.slope[Side::Plus][n] - prim.back();
    for (double& p : prim) p += shift;
    f.values[n] = std::move(prim);

    const double far_minus = f.base[Side::Minus][n] - L * f.slope[Side::Minus][n];
    out.tail_minus[n] = f.values[n].front() - far_minus;
    // The outer correction realizes tau1(h-) = tau1(h+) + phi1, so the datum
    // that would deliver the jump this profile needs is the tail itself,
    // measured relative to whatever jump the supplied correction already has.
    const double jump_now = f.base[Side::Plus][n] - f.base[Side::Minus][n];
    out.implied_front_jump[n] = out.tail_minus[n] - jump_now;
  }
  return out;
}

LayerField solve_vortex_layer_v1(const Scenario& sc, const OuterTraces& tr,
                                 const LayerField& vs0, const SheetTau1& tau_s1,
                                 const CorrectionTraces& corr) {
  const auto dv = derivative_table(vs0);
  const auto d2v = second_derivative_table(vs0);
  const double L = sc.grid.layer_L;

  LineProblem p;
  p.kind = LayerField::Kind::Sheet;
  p.z_lo = -L;
  p.z_hi = L;
  p.cells = 2 * sc.grid.layer_cells;
  p.steps = sc.grid.layer_steps;
  p.t0 = tr.times.front();
  p.t1 = tr.times.back();
  const double mu = sc.mu, gamma = sc.gamma;
  p.diffusivity = [&, mu](double t) {
    const double phi = sample_series(tr.times, tr.r_if, t);
    return mu * phi * phi / sample_series(tr.times, tr.tau_if, t);
  };
  p.reaction = [&](double t) {
    return sample_series(tr.times, tr.u_if, t) / sample_series(tr.times, tr.r_if, t);
  };
  p.left = [&, L](double t) {
    return sample_series(corr.times, corr.v1_if[Side::Minus], t) -
           L * sample_series(tr.times, tr.v_x_if[Side::Minus], t);
  };
  p.right = [&, L](double t) {
    return sample_series(corr.times, corr.v1_if[Side::Plus], t) +
           L * sample_series(tr.times, tr.v_x_if[Side::Plus], t);
  };
  p.initial = [&](double z) {
    const Side s = sheet_side(z);
    return corr.v1_if[s].front() + z * tr.v_x_if[s].front();
  };
  p.forcing_slice = [&, mu, gamma](double t, std::span<const double> zs, std::span<double> out) {
    const double taub = sample_series(tr.times, tr.tau_if, t);
    const double phi = sample_series(tr.times, tr.r_if, t);
    const double ubar = sample_series(tr.times, tr.u_if, t);
    const double ut = sample_series(tr.times, tr.u_t_if, t);
    const double u1 = sample_series(corr.times, corr.u1_if, t);
    const double r1 = sample_series(corr.times, corr.r1_if, t);
    const double ux_m = sample_series(tr.times, tr.u_x_if[Side::Minus], t);
    const double ux_p = sample_series(tr.times, tr.u_x_if[Side::Plus], t);
    const double coef = std::pow(taub, gamma + 1.0) / (phi * phi);
    const double pt = phi / taub;
    const Window w = window_at(vs0.times, t);
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const double z = zs[i];
      const double v = gather_eval(vs0.times, w, vs0.values, i, t);
      const double dvi = gather_eval(vs0.times, w, dv, i, t);
      const double d2vi = gather_eval(vs0.times, w, d2v, i, t);
      const double u0s1 = u1 + z * (z < 0.0 ? ux_m : ux_p);
      const double r0s1 = z * taub / phi + r1;
      const double tau0s1 = gather_eval(tau_s1.field.times, w, tau_s1.field.values, i, t);
      const double dtau0s1 = coef * (phi * ut - v * v);
      const double f3 = mu * (2.0 * pt * r0s1 - pt * pt * tau0s1) * d2vi +
                        mu * pt * pt * dvi * dtau0s1 + 2.0 * mu * dvi;
      out[i] = f3 - v * u0s1 / phi + r0s1 * v * ubar / (phi * phi);
    }
  };
  LayerField f = march_line(p);
  for (Side s : {Side::Minus, Side::Plus}) {
    f.base[s] = resample(corr.times, corr.v1_if[s], f.times);
    f.slope[s] = resample(tr.times, tr.v_x_if[s], f.times);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Bundles and diagnostics
// ---------------------------------------------------------------------------

LayerSet build_layer_set(const Scenario& sc, const OuterTraces& tr, const CorrectionTraces& corr) {
  LayerSet set;
  set.vb0 = solve_boundary_layer_v0(sc, tr);
  set.vs0 = solve_vortex_layer_v0(sc, tr);
  set.tau_b1 = compute_tau_b1(sc, tr, set.vb0);
  set.tau_s1 = compute_tau_s1(sc, tr, set.vs0, corr);
  set.vb1 = solve_boundary_layer_v1(sc, tr, set.vb0, set.tau_b1, corr);
  set.vs1 = solve_vortex_layer_v1(sc, tr, set.vs0, set.tau_s1, corr);
  return set;
}

double weighted_norm(const LayerField& f, std::size_t level, int n, int l) {
  if (l < 0 || l > 2) throw ConfigError("weighted_norm supports derivatives up to order 2");
  const std::size_t nn = f.zs.size();
  const double t = f.times.at(level);

  std::vector<double> w(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const Side s = f.kind == LayerField::Kind::Sheet ? sheet_side(f.zs[i]) : Side::Plus;
    w[i] = f.values[level][i] - f.far_model(s, t, f.zs[i]);
  }
  std::vector<double> d = w;
  for (int pass = 0; pass < l; ++pass) {
    std::vector<double> next(nn);
    for (std::size_t i = 0; i < nn; ++i) next[i] = node_derivative(f.zs, d, i);
    d = std::move(next);
  }
  std::vector<double> sq(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double wgt = std::pow(1.0 + f.zs[i] * f.zs[i], 0.5 * double(n));
    sq[i] = wgt * wgt * d[i] * d[i];
  }
  return std::sqrt(trapezoid(f.zs, sq));
}

}  // namespace vortex
