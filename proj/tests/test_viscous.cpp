#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vortex/scenario.hpp"
#include "vortex/viscous.hpp"

using namespace vortex;

namespace {

struct ViscousFixture {
  Scenario sc;
  MassCoordinateMap map;
  ViscousSolution sol;

  ViscousFixture() : sc(make_tapered_swirl_scenario()), map(sc), sol(run_viscous(sc, map, 1e-3)) {}
};

const ViscousFixture& fixture() {
  static const ViscousFixture f;
  return f;
}

/// Manufactured smooth fields whose radius honors d(r^2)/dx = 2 tau exactly,
/// with hand derivatives for the continuous right-hand side.
struct Manufactured {
  double x0 = 0.3, x1 = 3.3, r0 = 1.5;

  double tau(double x) const { return 1.0 + 0.3 * std::sin(1.2 * x + 0.4); }
  double tau_x(double x) const { return 0.36 * std::cos(1.2 * x + 0.4); }
  double itau(double x) const {
    return (x - x0) - 0.25 * (std::cos(1.2 * x + 0.4) - std::cos(1.2 * x0 + 0.4));
  }
  double r(double x) const { return std::sqrt(r0 * r0 + 2.0 * itau(x)); }

  double u(double x) const { return 0.2 * std::sin(0.9 * x + 0.3); }
  double u_x(double x) const { return 0.18 * std::cos(0.9 * x + 0.3); }
  double u_xx(double x) const { return -0.162 * std::sin(0.9 * x + 0.3); }

  double v(double x) const { return 0.25 * std::cos(0.7 * x); }
  double v_x(double x) const { return -0.175 * std::sin(0.7 * x); }
  double v_xx(double x) const { return -0.1225 * std::cos(0.7 * x); }

  Vec3 rhs(double x, const ViscousParams& par) const {
    const double t = tau(x), tx = tau_x(x), rr = r(x);
    const double uu = u(x), ux = u_x(x), uxx = u_xx(x);
    const double vv = v(x), vx = v_x(x), vxx = v_xx(x);
    const double visc_u = par.eps * (par.lambda + 2.0 * par.mu);
    const double visc_v = par.eps * par.mu;
    const double rt2 = (rr / t) * (rr / t);
    Vec3 out;
    out[0] = rr * ux + t * uu / rr;
    out[1] = rr * std::pow(t, -(par.gamma + 1.0)) * tx + vv * vv / rr +
             visc_u * ((rr * rr / t) * uxx + 2.0 * ux - rt2 * tx * ux - t * uu / (rr * rr));
    out[2] = -uu * vv / rr +
             visc_v * ((rr * rr / t) * vxx + 2.0 * vx - rt2 * tx * vx - t * vv / (rr * rr));
    return out;
  }
};

/// Sup error of the discrete operator against the manufactured right-hand
/// side over the unbiased interior stencils.
double mms_error(std::size_t n_cells, const ViscousParams& par) {
  const Manufactured m;
  const std::size_t n = n_cells + 1;
  std::vector<double> xs(n);
  std::vector<Vec3> slice(n);
  std::vector<double> radii(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = m.x0 + (m.x1 - m.x0) * double(i) / double(n_cells);
    slice[i] = {m.tau(xs[i]), m.u(xs[i]), m.v(xs[i])};
    radii[i] = m.r(xs[i]);
  }
  const std::vector<Vec3> got = apply_viscous_operator(xs, slice, radii, par);
  double sup = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const Vec3 want = m.rhs(xs[i], par);
    for (int k = 0; k < 3; ++k)
      sup = std::max(sup, std::abs(got[i][std::size_t(k)] - want[std::size_t(k)]));
  }
  return sup;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact invariants of the march
// ---------------------------------------------------------------------------

TEST_CASE("rest state is preserved to rounding across the whole run") {
  const Scenario sc = make_rest_scenario();
  const MassCoordinateMap map(sc);
  const ViscousSolution sol = run_viscous(sc, map, 1e-3);

  const auto& first = sol.states.front();
  double drift = 0.0;
  for (const auto& slice : sol.states)
    for (std::size_t i = 0; i < slice.size(); ++i)
      for (int k = 0; k < 3; ++k)
        drift = std::max(drift, std::abs(slice[i][std::size_t(k)] - first[i][std::size_t(k)]));
  CHECK(drift <= 1e-12);
}

TEST_CASE("wall rows hold their data exactly") {
  const auto& f = fixture();
  REQUIRE(f.sol.states.size() == f.sol.times.size());
  for (std::size_t k = 0; k < f.sol.times.size(); ++k) {
    CHECK(f.sol.states[k][0][1] == 0.0);
    CHECK(f.sol.states[k][0][2] == f.sc.wall_v(f.sol.times[k]));
  }
  // u = 0 at the wall freezes the wall radius too.
  for (const auto& rr : f.sol.radii) CHECK(rr[0] == f.sc.a);
}

TEST_CASE("far state and geometry stay pinned at defaults") {
  const auto& s = fixture().sol;
  CHECK(s.max_geometry_defect <= 1e-3);
  CHECK(s.max_far_drift <= 1e-8);
  CHECK(s.min_tau > 0.5);
  CHECK(s.max_tau < 2.0);
  CHECK(s.times.back() == doctest::Approx(fixture().sc.T));
}

// ---------------------------------------------------------------------------
// Consistency of the discrete operator
// ---------------------------------------------------------------------------

TEST_CASE("spatial operator converges at second order on manufactured fields") {
  ViscousParams par;
  par.eps = 0.05;  // large enough that the viscous terms carry weight
  const double e1 = mms_error(200, par);
  const double e2 = mms_error(400, par);
  const double e3 = mms_error(800, par);
  const double o12 = std::log2(e1 / e2);
  const double o23 = std::log2(e2 / e3);
  CHECK(o12 >= 1.9);
  CHECK(o23 >= 1.9);
  CHECK(e3 < 1e-5);
}

TEST_CASE("time stepping self-converges at second order") {
  const auto& f = fixture();
  Scenario half = f.sc, quarter = f.sc;
  half.grid.cfl = 0.5 * f.sc.grid.cfl;
  quarter.grid.cfl = 0.25 * f.sc.grid.cfl;
  const ViscousSolution s2 = run_viscous(half, f.map, 1e-3);
  const ViscousSolution s4 = run_viscous(quarter, f.map, 1e-3);

  auto final_gap = [](const ViscousSolution& a, const ViscousSolution& b) {
    const auto& ua = a.states.back();
    const auto& ub = b.states.back();
    double sup = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i)
      for (int k = 0; k < 3; ++k)
        sup = std::max(sup, std::abs(ua[i][std::size_t(k)] - ub[i][std::size_t(k)]));
    return sup;
  };
  const double d1 = final_gap(f.sol, s2);
  const double d2 = final_gap(s2, s4);
  CHECK(d1 / d2 >= 3.0);
}

// ---------------------------------------------------------------------------
// Feasibility guards
// ---------------------------------------------------------------------------

TEST_CASE("infeasible resolutions are refused up front") {
  const auto& f = fixture();
  const double h = f.map.h();

  GridSpec g = f.sc.grid;
  g.cells_per_sqrt_eps = 2.0;
  CHECK_THROWS_WITH_AS(build_viscous_grid(g, h, 1e-3),
                       doctest::Contains("cells_per_sqrt_eps >= 4"), FeasibilityError);

  g = f.sc.grid;
  g.x_max = 0.5 * h;
  CHECK_THROWS_WITH_AS(build_viscous_grid(g, h, 1e-3),
                       doctest::Contains("contain the sheet station"), FeasibilityError);

  CHECK_THROWS_WITH_AS(build_viscous_grid(f.sc.grid, h, 0.0), doctest::Contains("eps must be"),
                       ConfigError);
  CHECK_THROWS_AS(build_viscous_grid(f.sc.grid, h, -1e-3), ConfigError);

  // Resolving eps = 1e-12 would blow the time-step budget.
  CHECK_THROWS_WITH_AS(run_viscous(f.sc, f.map, 1e-12), doctest::Contains("time steps"),
                       FeasibilityError);
}

TEST_CASE("graded grid lands on the anchors and keeps its grade") {
  const auto& f = fixture();
  const double h = f.map.h();
  const std::vector<double> xs = build_viscous_grid(f.sc.grid, h, 1e-4);

  CHECK(xs.front() == 0.0);
  CHECK(xs.back() == doctest::Approx(f.sc.grid.x_max));
  CHECK(std::count(xs.begin(), xs.end(), h) == 1);
  CHECK(std::is_sorted(xs.begin(), xs.end()));

  // Spacing near the wall and the sheet resolves sqrt(eps).
  const double fine = std::sqrt(1e-4) / f.sc.grid.cells_per_sqrt_eps;
  CHECK(xs[1] - xs[0] <= fine * 1.5);
  double ratio = 0.0;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double a = xs[i] - xs[i - 1], b = xs[i + 1] - xs[i];
    ratio = std::max(ratio, std::max(a / b, b / a));
  }
  CHECK(ratio <= f.sc.grid.grade_ratio * 1.5);
}
