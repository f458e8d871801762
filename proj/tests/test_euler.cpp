#include <doctest.h>

#include <cmath>

#include "vortex/euler_front.hpp"
#include "vortex/scenario.hpp"

using namespace vortex;

namespace {

struct SteadyError {
  double sup = 0.0;
  double jump_u = 0.0;
  double jump_p = 0.0;
  double front_drift = 0.0;
};

/// Solve the steady swirl scenario at a resolution multiple and measure the
/// worst deviation from the closed-form balance rho = rho_b + V^2 log(r/b).
SteadyError steady_error(double scale) {
  Scenario sc = make_steady_swirl_scenario(0.4, -0.4);
  sc.grid.n_minus = static_cast<std::size_t>(140 * scale);
  sc.grid.n_plus = static_cast<std::size_t>(260 * scale);
  sc.grid.n_time = static_cast<std::size_t>(250 * scale);
  const EulerSolution eul = solve_vortex_sheet_euler(sc);

  SteadyError err;
  const std::size_t N = eul.times.size() - 1;
  for (std::size_t n = 0; n <= N; ++n) {
    err.front_drift = std::max(err.front_drift, std::abs(eul.front.phi[n] - sc.b));
    const auto& fm = eul.fields[n][Side::Minus];
    const auto& fp = eul.fields[n][Side::Plus];
    err.jump_u = std::max(err.jump_u, std::abs(fm[1].back() - fp[1].front()));
    err.jump_p = std::max(err.jump_p, std::abs(pressure(fm[0].back(), sc.gamma) -
                                               pressure(fp[0].front(), sc.gamma)));
  }
  for (Side s : {Side::Minus, Side::Plus}) {
    const auto& rts = eul.grid.nodes(s);
    for (std::size_t i = 0; i < rts.size(); ++i) {
      const double r = eul.radius(s, eul.times[N], rts[i]);
      const double rho_exact = 1.0 + 0.16 * std::log(r / sc.b);
      const double v_exact = s == Side::Minus ? 0.4 : -0.4;
      err.sup = std::max(err.sup, std::abs(eul.fields[N][s][0][i] - rho_exact));
      err.sup = std::max(err.sup, std::abs(eul.fields[N][s][1][i]));
      err.sup = std::max(err.sup, std::abs(eul.fields[N][s][2][i] - v_exact));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("steady swirl is preserved with a pinned contact") {
  const SteadyError err = steady_error(1.0);
  CHECK(err.sup < 1e-5);          // well inside the 1e-3 budget
  CHECK(err.jump_u == 0.0);       // interface continuity is enforced by construction
  CHECK(err.jump_p == 0.0);
  CHECK(err.front_drift < 1e-6);  // u stays at truncation level, front barely moves
}

TEST_CASE("steady swirl error refines at better than order 1.6") {
  const double coarse = steady_error(0.5).sup;
  const double base = steady_error(1.0).sup;
  CHECK(std::log2(coarse / base) > 1.6);
}

TEST_CASE("lagrangian carry-over pins the front at x = h") {
  const Scenario sc = make_steady_swirl_scenario(0.4, -0.4);
  const MassCoordinateMap map(sc);
  const EulerSolution eul = solve_vortex_sheet_euler(sc);
  const TwoSidedGrid xs =
      make_two_sided_grid(0.0, map.h(), map.x_max(), sc.grid.n_minus, sc.grid.n_plus);
  const OuterSolution outer = to_lagrangian(eul, map, xs);

  CHECK(outer.h == map.h());
  CHECK(outer.xs.interface() == map.h());
  // Initial radius tables agree with the static map.
  for (double x : {0.1, 0.9, map.h(), 3.7, 9.0}) {
    const Side s = x <= map.h() ? Side::Minus : Side::Plus;
    CHECK(outer.sample_radius(s, 0.0, x) == doctest::Approx(map.r0(x)).epsilon(1e-7));
  }
  // Steady fields: tau matches 1/rho(r0(x)) at all times, v keeps its jump.
  for (double t : {0.0, 0.25, 0.5}) {
    const double tau_minus = outer.sample(Side::Minus, 0, t, 0.7);
    const double r = map.r0(0.7);
    CHECK(tau_minus == doctest::Approx(1.0 / (1.0 + 0.16 * std::log(r / sc.b))).epsilon(1e-5));
    CHECK(outer.sample(Side::Minus, 2, t, map.h()) == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(outer.sample(Side::Plus, 2, t, map.h()) == doctest::Approx(-0.4).epsilon(1e-6));
  }

  const OuterTraces tr = extract_traces(outer);
  CHECK(tr.times.size() == outer.times.size());
  CHECK(tr.v_if[Side::Minus].front() - tr.v_if[Side::Plus].front() == doctest::Approx(0.8));
  CHECK(tr.u_if.front() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(tr.r_if.front() == doctest::Approx(sc.b).epsilon(1e-9));
}

TEST_CASE("zero-datum correction vanishes identically") {
  const Scenario sc = make_steady_swirl_scenario(0.4, -0.4);
  const MassCoordinateMap map(sc);
  const EulerSolution eul = solve_vortex_sheet_euler(sc);
  const OuterSolution outer = to_lagrangian(
      eul, map, make_two_sided_grid(0.0, map.h(), map.x_max(), sc.grid.n_minus, sc.grid.n_plus));

  const OuterCorrection zero = solve_outer_correction(outer, [](double) { return 0.0; });
  CHECK(zero.sup_norm == 0.0);

  // The correction is linear in the front datum.
  const OuterCorrection one = solve_outer_correction(outer, [](double) { return 0.02; });
  const OuterCorrection two = solve_outer_correction(outer, [](double) { return 0.04; });
  CHECK(one.sup_norm > 0.0);
  for (double x : {0.3, map.h() - 0.05, map.h() + 0.05, 4.0}) {
    const Side s = x <= map.h() ? Side::Minus : Side::Plus;
    for (int comp = 0; comp < 3; ++comp) {
      const double a = one.sample(s, comp, 0.4, x);
      const double b = two.sample(s, comp, 0.4, x);
      CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-9));
    }
  }
}
