#include "vortex/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace vortex {

// ---------------------------------------------------------------------------
// CompositeExpansion
// ---------------------------------------------------------------------------

CompositeExpansion::CompositeExpansion(const Scenario& sc, const OuterSolution& outer,
                                       const OuterCorrection* corr, const LayerSet& layers,
                                       double eps, int order)
    : outer_(&outer),
      corr_(corr),
      layers_(&layers),
      a_(sc.a),
      h_(outer.h),
      eps_(eps),
      root_eps_(std::sqrt(eps)),
      order_(order) {
  if (!(eps > 0.0)) throw ConfigError("composite needs eps > 0");
  if (order != 0 && order != 1) throw ConfigError("composite order must be 0 or 1");
}

Vec3 CompositeExpansion::state(double t, double x) const {
  const Side s = x < h_ ? Side::Minus : Side::Plus;
  const double xi = x / root_eps_;
  const double zeta = (x - h_) / root_eps_;

  double tau = outer_->sample(s, 0, t, x);
  double u = outer_->sample(s, 1, t, x);
  double v = outer_->sample(s, 2, t, x);
  v += layers_->vb0.layer_at(Side::Plus, t, xi);
  v += layers_->vs0.layer_at(s, t, zeta);

  if (order_ >= 1) {
    double tau1 = 0.0, u1 = 0.0, v1 = 0.0;
    if (corr_) {
      tau1 = corr_->sample(s, 0, t, x);
      u1 = corr_->sample(s, 1, t, x);
      v1 = corr_->sample(s, 2, t, x);
    }
    tau1 += layers_->tau_b1.layer_at(Side::Plus, t, xi);
    tau1 += layers_->tau_s1.field.layer_at(s, t, zeta);
    v1 += layers_->vb1.layer_at(Side::Plus, t, xi);
    v1 += layers_->vs1.layer_at(s, t, zeta);
    tau += root_eps_ * tau1;
    u += root_eps_ * u1;
    v += root_eps_ * v1;
  }
  return {tau, u, v};
}

std::vector<Vec3> CompositeExpansion::slice(double t, std::span<const double> xs) const {
  std::vector<Vec3> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = state(t, xs[i]);
  return out;
}

std::vector<double> CompositeExpansion::radius_slice(std::span<const double> xs,
                                                     std::span<const Vec3> states) const {
  std::vector<double> tau(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) tau[i] = states[i][0];
  const std::vector<double> prim = cumulative_trapezoid(xs, tau);
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) r[i] = std::sqrt(a_ * a_ + 2.0 * prim[i]);
  return r;
}

// ---------------------------------------------------------------------------
// Residual of the composite under the discrete operator
// ---------------------------------------------------------------------------

ResidualNorms composite_residual(const CompositeExpansion& comp, const Scenario& sc,
                                 const MassCoordinateMap& map, int refine,
                                 std::size_t n_times) {
  if (refine < 1) throw ConfigError("residual refine factor must be >= 1");
  if (n_times < 4) throw ConfigError("residual needs at least 4 time samples");

  GridSpec g = sc.grid;
  g.cells_per_sqrt_eps *= refine;
  g.coarse_dx /= double(refine);
  const std::vector<double> xs = build_viscous_grid(g, map.h(), comp.eps());
  const std::size_t n = xs.size();
  if (n < 8) throw ConfigError("residual grid too small");

  const ViscousParams par{sc.gamma, sc.mu, sc.lambda, comp.eps()};
  const double delta = sc.T / 512.0;

  // Interior trim: boundary rows of the marcher are data rows, not equations.
  const std::size_t i0 = 2, i1 = n - 3;
  std::vector<double> xin(xs.begin() + i0, xs.begin() + i1 + 1);

  ResidualNorms out;
  out.eps = comp.eps();
  out.n_times = n_times;
  out.n_cells = n;

  std::vector<double> sq_total(xin.size()), sq_gtau(xin.size()), rtau(xin.size());
  std::vector<double> time_total(n_times), time_gtau(n_times);
  std::vector<double> ts(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    const double t = delta + (sc.T - 2.0 * delta) * double(k) / double(n_times - 1);
    ts[k] = t;

    const std::vector<Vec3> mid = comp.slice(t, xs);
    const std::vector<Vec3> fwd = comp.slice(t + delta, xs);
    const std::vector<Vec3> bwd = comp.slice(t - delta, xs);
    const std::vector<double> radii = comp.radius_slice(xs, mid);
    const std::vector<Vec3> rhs = apply_viscous_operator(xs, mid, radii, par);

    for (std::size_t i = i0; i <= i1; ++i) {
      double s2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const std::size_t ci = std::size_t(c);
        const double du_dt = (fwd[i][ci] - bwd[i][ci]) / (2.0 * delta);
        const double res = du_dt - rhs[i][ci];
        s2 += res * res;
        if (c == 0) rtau[i - i0] = res;
      }
      sq_total[i - i0] = s2;
    }
    for (std::size_t i = 0; i < xin.size(); ++i) {
      const double gr = node_derivative(xin, rtau, i) * comp.eps();
      sq_gtau[i] = gr * gr;
    }
    time_total[k] = trapezoid(xin, sq_total);
    time_gtau[k] = trapezoid(xin, sq_gtau);
  }
  out.total = std::sqrt(trapezoid(ts, time_total));
  out.eps_grad_tau = std::sqrt(trapezoid(ts, time_gtau));
  return out;
}

// ---------------------------------------------------------------------------
// Error metrics against a viscous run
// ---------------------------------------------------------------------------

namespace {

/// Distance from the anchor at which |w - w_far| first drops below half its
/// anchor value, scanning the slice outward from index start.
double half_decay_width(std::span<const double> xs, std::span<const double> dev,
                        std::size_t start) {
  const double a0 = std::abs(dev[start]);
  if (a0 <= 0.0) return 0.0;
  for (std::size_t i = start; i < xs.size(); ++i) {
    if (std::abs(dev[i]) <= 0.5 * a0) return xs[i] - xs[start];
  }
  return xs.back() - xs[start];
}

}  // namespace

ErrorMetrics error_metrics(const Scenario& sc, const ViscousSolution& vs,
                           const CompositeExpansion& comp, const OuterSolution& outer) {
  ErrorMetrics m;
  m.eps = vs.eps;
  const double T = vs.times.back();
  const std::size_t n = vs.xs.size();
  const std::vector<Vec3>& fin = vs.states.back();
  const std::vector<Vec3> ca = comp.slice(T, vs.xs);

  for (std::size_t i = 0; i + 1 < n; ++i) {  // far node is a Dirichlet data row
    for (int c = 0; c < 3; ++c) {
      const double d = std::abs(fin[i][std::size_t(c)] - ca[i][std::size_t(c)]);
      m.sup_total = std::max(m.sup_total, d);
      if (c == 2) m.sup_v = std::max(m.sup_v, d);
    }
  }

  // outer-solution deviations at the final time
  std::vector<double> dev_v(n), dev_u(n), dev_tau(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = vs.xs[i];
    const Side s = x < vs.h ? Side::Minus : Side::Plus;
    dev_tau[i] = fin[i][0] - outer.sample(s, 0, T, x);
    dev_u[i] = fin[i][1] - outer.sample(s, 1, T, x);
    dev_v[i] = fin[i][2] - outer.sample(s, 2, T, x);
  }
  m.width_wall = half_decay_width(vs.xs, dev_v, 0);
  std::size_t ih = 0;
  while (ih + 1 < n && vs.xs[ih] < vs.h) ++ih;
  m.width_front = half_decay_width(vs.xs, dev_v, ih);

  const double strip = sc.grid.layer_L * std::sqrt(vs.eps);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double x = vs.xs[i];
    if (x <= strip || std::abs(x - vs.h) <= strip) {
      m.strip_u = std::max(m.strip_u, std::abs(dev_u[i]));
      m.strip_tau = std::max(m.strip_tau, std::abs(dev_tau[i]));
    }
  }

  // energy of the mismatch over the stored slices
  std::vector<double> diff(n), sq(n), dsq(n);
  for (std::size_t lev = 0; lev < vs.times.size(); ++lev) {
    const std::vector<Vec3> cs = comp.slice(vs.times[lev], vs.xs);
    double e = 0.0;
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        diff[i] = vs.states[lev][i][std::size_t(c)] - cs[i][std::size_t(c)];
        sq[i] = diff[i] * diff[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double g = node_derivative(vs.xs, diff, i);
        dsq[i] = g * g;
      }
      e += trapezoid(vs.xs, sq) + vs.eps * vs.eps * trapezoid(vs.xs, dsq);
    }
    m.energy_sup = std::max(m.energy_sup, e);
    if (lev + 1 == vs.times.size()) m.energy_final = e;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Rate tables
// ---------------------------------------------------------------------------

RateTable make_rate_table(std::string name, std::vector<double> eps, std::vector<double> values) {
  if (eps.size() != values.size()) throw ConfigError("rate table: size mismatch");
  if (eps.size() < 3) throw ConfigError("need >= 3 eps values to fit");
  RateTable t;
  t.name = std::move(name);
  t.eps = std::move(eps);
  t.values = std::move(values);
  t.fit = fit_loglog(t.eps, t.values);
  return t;
}

// ---------------------------------------------------------------------------
// Structure diagnostics
// ---------------------------------------------------------------------------

namespace {

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

constexpr Mat3 kIdentity{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

}  // namespace

StructureReport structure_diagnostics(double gamma, double mu, double lambda, std::uint64_t seed,
                                      int n_samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rho_d(0.3, 3.0), vel_d(-1.0, 1.0), phi_d(1.2, 5.0),
      chart_d(0.5, 2.0), r_d(1.0, 6.0), tau_d(0.3, 3.0);

  StructureReport rep;
  rep.min_coercivity = 1e300;
  for (int s = 0; s < n_samples; ++s) {
    // straightened radial system
    {
      const double rho = rho_d(rng), u = vel_d(rng), c = sound_speed_radial(rho, gamma);
      const double phr = chart_d(rng), pht = vel_d(rng);
      const double lam2 = (u - pht) / phr;
      const Mat3 B{{{lam2, rho / phr, 0.0},
                    {c * c / (rho * phr), lam2, 0.0},
                    {0.0, 0.0, lam2}}};
      const Mat3 R{{{rho, 0.0, rho}, {-c, 0.0, c}, {0.0, 1.0, 0.0}}};
      const Mat3 Rinv{{{0.5 / rho, -0.5 / c, 0.0}, {0.0, 0.0, 1.0}, {0.5 / rho, 0.5 / c, 0.0}}};
      const Mat3 lam{{{lam2 - c / phr, 0.0, 0.0}, {0.0, lam2, 0.0}, {0.0, 0.0, lam2 + c / phr}}};
      rep.front_eigen_defect =
          std::max(rep.front_eigen_defect, max_abs_diff(matmul(R, Rinv), kIdentity));
      rep.front_eigen_defect =
          std::max(rep.front_eigen_defect, max_abs_diff(matmul(Rinv, matmul(B, R)), lam));
    }
    // mass-coordinate acoustic pair plus symmetrizer
    {
      const double r = r_d(rng), tau = tau_d(rng);
      const double c = sound_speed_mass(r, tau, gamma);
      const double tg = std::pow(tau, -(gamma + 1.0));
      const Mat3 A{{{0.0, -r, 0.0}, {-r * tg, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
      const Mat3 R{{{r, 0.0, r}, {c, 0.0, -c}, {0.0, 1.0, 0.0}}};
      const Mat3 Rinv{{{0.5 / r, 0.5 / c, 0.0}, {0.0, 0.0, 1.0}, {0.5 / r, -0.5 / c, 0.0}}};
      const Mat3 lam{{{-c, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, c}}};
      rep.acoustic_eigen_defect =
          std::max(rep.acoustic_eigen_defect, max_abs_diff(matmul(R, Rinv), kIdentity));
      rep.acoustic_eigen_defect =
          std::max(rep.acoustic_eigen_defect, max_abs_diff(matmul(Rinv, matmul(A, R)), lam));

      Mat3 S{};
      S[0][0] = tg / r;
      S[1][1] = 1.0 / r;
      S[2][2] = 1.0 / r;
      const Mat3 SA = matmul(S, A);
      Mat3 SAt{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) SAt[i][j] = SA[j][i];
      rep.symmetry_defect = std::max(rep.symmetry_defect, max_abs_diff(SA, SAt));

      // SB acting on the parabolic pair
      const double sb_u = (r / tau) * (lambda + 2.0 * mu);
      const double sb_v = (r / tau) * mu;
      rep.min_coercivity = std::min(rep.min_coercivity, std::min(sb_u, sb_v));
    }
  }
  return rep;
}

}  // namespace vortex
