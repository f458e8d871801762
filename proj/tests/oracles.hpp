#pragma once

// Analytic reference problems shared by the unit tests and the acceptance
// runner. Each oracle has a closed-form exact solution evaluated independently
// of the solver under test.

#include <chrono>
#include <cmath>
#include <cstddef>

#include "vortex/characteristics.hpp"
#include "vortex/layer_profiles.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Constant-coefficient diagonal system with wall reflection and a transparent
// interface. Speeds (-1, 0, 1) on [0, 1] | [1, 2]; the incoming field at the
// wall reflects the outgoing one, the interface passes traces through, the far
// end feeds the analytic continuation. Initial data are even about the wall,
// which keeps the reflected solution smooth, and the two moving fields share
// their profile so the wall corner is compatible to all orders.
// Exact solution: w1 = G(r + t), w2 = w2(r), w3 = G(r - t).
// ---------------------------------------------------------------------------

inline double diagonal_bump(double s) {
  const double inv = 1.0 / (2.0 * 0.25 * 0.25);
  const double wall = 0.8 * std::exp(-s * s * inv);
  const double sheet = std::exp(-(s - 1.0) * (s - 1.0) * inv);
  const double mirror = std::exp(-(s + 1.0) * (s + 1.0) * inv);
  return wall + sheet + mirror;
}

inline double diagonal_still(double r) { return 0.3 * std::cos(1.5 * r); }

struct DiagonalResult {
  double sup_error = 0.0;
  double seconds = 0.0;
  std::size_t cells = 0;
  std::size_t steps = 0;
};

inline DiagonalResult run_diagonal_oracle(std::size_t cells_per_side, std::size_t steps,
                                          double T) {
  using vortex::Side;
  vortex::CharacteristicProblem prob;
  prob.grid = vortex::make_two_sided_grid(0.0, 1.0, 2.0, cells_per_side, cells_per_side);
  prob.t0 = 0.0;
  prob.t1 = T;
  prob.n_steps = steps;
  prob.system.speed = [](int k, Side, double, double) { return double(k - 1); };
  prob.boundary.wall[2][0] = 1.0;          // reflect the outgoing field
  prob.boundary.from[Side::Minus][0][0] = 1.0;  // transparent interface
  prob.boundary.from[Side::Plus][2][2] = 1.0;
  prob.boundary.far[0] = [](double t) { return diagonal_bump(2.0 + t); };
  prob.initial = [](int k, Side, double r) {
    return k == 1 ? diagonal_still(r) : diagonal_bump(r);
  };

  const auto t_start = std::chrono::steady_clock::now();
  const vortex::CharacteristicSolution sol = vortex::solve_characteristics(prob);
  DiagonalResult res;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  res.cells = 2 * cells_per_side;
  res.steps = steps;

  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    const double t = sol.times[n];
    for (Side s : {Side::Minus, Side::Plus}) {
      const auto& rs = sol.grid.nodes(s);
      for (std::size_t i = 0; i < rs.size(); ++i) {
        const double exact[3] = {diagonal_bump(rs[i] + t), diagonal_still(rs[i]),
                                 diagonal_bump(rs[i] - t)};
        for (int k = 0; k < 3; ++k)
          res.sup_error = std::max(res.sup_error, std::abs(sol.value(n, s, k, i) - exact[k]));
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Frozen-coefficient wall layer: constant diffusivity k and constant datum V.
// The march starts from the similarity profile at t0 > 0, so the exact
// solution stays V erfc(z / (2 sqrt(k t))) over the whole window and the
// comparison is uniform in time (the t = 0 corner of the similarity solution
// is never part of the discrete problem).
// ---------------------------------------------------------------------------

struct LineOracleResult {
  double sup_error = 0.0;
};

inline LineOracleResult run_erfc_oracle(double diffusivity, double datum, double t0, double t1,
                                        std::size_t cells, std::size_t steps) {
  auto exact = [=](double t, double z) {
    return datum * std::erfc(z / (2.0 * std::sqrt(diffusivity * t)));
  };
  vortex::LineProblem p;
  p.kind = vortex::LayerField::Kind::Wall;
  p.z_lo = 0.0;
  p.z_hi = 20.0;
  p.cells = cells;
  p.steps = steps;
  p.t0 = t0;
  p.t1 = t1;
  p.diffusivity = [diffusivity](double) { return diffusivity; };
  p.left = [datum](double) { return datum; };
  p.initial = [=](double z) { return exact(t0, z); };

  const vortex::LayerField f = vortex::march_line(p);
  LineOracleResult res;
  for (std::size_t n = 0; n < f.times.size(); ++n)
    for (std::size_t i = 0; i < f.zs.size(); ++i)
      res.sup_error =
          std::max(res.sup_error, std::abs(f.values[n][i] - exact(f.times[n], f.zs[i])));
  return res;
}

// ---------------------------------------------------------------------------
// Sheet-geometry heat kernel: a Gaussian of width s0 spreading under constant
// diffusivity on (-L, L). Exact solution keeps the Gaussian shape with
// variance s0^2 + 2 D t; the ends feed the (tiny) exact traces.
// ---------------------------------------------------------------------------

inline LineOracleResult run_heat_kernel_oracle(double diffusivity, double s0, double T,
                                               std::size_t cells, std::size_t steps) {
  const double L = 20.0;
  auto exact = [=](double t, double z) {
    const double var = s0 * s0 + 2.0 * diffusivity * t;
    return (s0 / std::sqrt(var)) * std::exp(-0.5 * z * z / var);
  };

  vortex::LineProblem p;
  p.kind = vortex::LayerField::Kind::Sheet;
  p.z_lo = -L;
  p.z_hi = L;
  p.cells = cells;
  p.steps = steps;
  p.t0 = 0.0;
  p.t1 = T;
  p.diffusivity = [diffusivity](double) { return diffusivity; };
  p.left = [=](double t) { return exact(t, -L); };
  p.right = [=](double t) { return exact(t, L); };
  p.initial = [=](double z) { return exact(0.0, z); };

  const vortex::LayerField f = vortex::march_line(p);
  LineOracleResult res;
  for (std::size_t n = 0; n < f.times.size(); ++n)
    for (std::size_t i = 0; i < f.zs.size(); ++i)
      res.sup_error =
          std::max(res.sup_error, std::abs(f.values[n][i] - exact(f.times[n], f.zs[i])));
  return res;
}

}  // namespace oracle
