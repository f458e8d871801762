#pragma once

#include <functional>
#include <vector>

#include "vortex/characteristics.hpp"
#include "vortex/scenario.hpp"
#include "vortex/types.hpp"

namespace vortex {

/// Front path phi(t) and its derivative on the uniform solver time grid.
struct FrontSeries {
  std::vector<double> times;
  std::vector<double> phi;
  std::vector<double> phi_prime;

  double at(double t) const;
  double prime_at(double t) const;
};

/// Linear chart pinning the moving interface r = phi(t) to the fixed station
/// b while keeping the wall a and the outer truncation r_max in place.
struct Straightening {
  double a = 1.0;
  double b = 2.0;
  double r_max = 6.0;

  // The ratios below are computed before multiplying so that the anchor
  // stations are exact: the ratio is 0/y or y/y at the wall, the front and the
  // outer edge, hence exactly 0 or 1 in floating point. The contact speed at
  // the pinned front then cancels to exactly zero.
  double map(Side s, double phi, double rt) const {
    if (s == Side::Minus) return a + (phi - a) * ((rt - a) / (b - a));
    return r_max - (r_max - phi) * ((r_max - rt) / (r_max - b));
  }
  double d_r(Side s, double phi) const {
    return s == Side::Minus ? (phi - a) / (b - a) : (r_max - phi) / (r_max - b);
  }
  double d_t(Side s, double phi_prime, double rt) const {
    return s == Side::Minus ? phi_prime * ((rt - a) / (b - a))
                            : phi_prime * ((r_max - rt) / (r_max - b));
  }
};

/// Free-boundary Euler solution in straightened coordinates: primitive fields
/// (rho, u, v) on the fixed two-sided grid plus the front path.
struct EulerSolution {
  Straightening chart;
  TwoSidedGrid grid;  // straightened radii, interface pinned at b
  std::vector<double> times;
  double gamma = 2.0;
  std::vector<TwoSided<std::array<std::vector<double>, 3>>> fields;  // 0:rho 1:u 2:v
  FrontSeries front;
  int sweeps = 0;
  double final_change = 0.0;

  double sample(Side s, int comp, double t, double rt) const;
  /// Physical radius of the straightened station rt at time t.
  double radius(Side s, double t, double rt) const { return chart.map(s, front.at(t), rt); }
};

struct EulerOptions {
  double tol = 1e-8;
  int max_sweeps = 30;
  Interp interp = Interp::Monotone;
  double front_speed_limit = 10.0;  // abort when |phi'| exceeds this bound
};

/// Solve the vortex-sheet Euler system: straighten the front, rewrite in
/// characteristic variables with coefficients frozen at the previous sweep,
/// march, rebuild the primitives and the front, and repeat to a fixed point.
/// The wall enforces u = 0, the interface transmits both acoustic fields, and
/// the contact field rides the front exactly.
EulerSolution solve_vortex_sheet_euler(const Scenario& sc, const EulerOptions& opt = {});

/// Zeroth-order outer solution in mass coordinates: (tau, u, v) and the
/// physical radius r per time level and mass node. The sheet sits at x = h.
struct OuterSolution {
  std::vector<double> times;
  TwoSidedGrid xs;
  double h = 0.0;
  double gamma = 2.0;
  std::vector<TwoSided<std::array<std::vector<double>, 3>>> fields;  // 0:tau 1:u 2:v
  std::vector<TwoSided<std::vector<double>>> radius;

  double sample(Side s, int comp, double t, double x) const;
  double sample_radius(Side s, double t, double x) const;
};

/// Carry the straightened Euler solution to mass coordinates by following the
/// contact characteristic through each mass node. The front lands on x = h
/// exactly, so no interpolation ever crosses the sheet.
OuterSolution to_lagrangian(const EulerSolution& eul, const MassCoordinateMap& map,
                            const TwoSidedGrid& xs);

/// Boundary traces of the outer solution consumed by the layer equations.
struct OuterTraces {
  std::vector<double> times;
  // wall station x = 0
  std::vector<double> tau_wall, v_wall, u_x_wall, tau_x_wall, r_wall;
  // sheet station x = h
  std::vector<double> tau_if, u_if, u_t_if, r_if;
  TwoSided<std::vector<double>> v_if, v_x_if, tau_x_if, u_x_if;
};

OuterTraces extract_traces(const OuterSolution& outer);

/// First-order outer correction driven by a prescribed front corrector phi1.
/// The datum enters through the acoustic jumps at x = h; zero datum, zero
/// initial data and a zero far state give the identically zero correction.
struct OuterCorrection {
  std::vector<double> times;
  TwoSidedGrid xs;
  double h = 0.0;
  std::vector<TwoSided<std::array<std::vector<double>, 3>>> fields;  // tau1, u1, v1
  std::vector<TwoSided<std::vector<double>>> r1;  // time integral of u1 per node
  double sup_norm = 0.0;

  double sample(Side s, int comp, double t, double x) const;
  double sample_r1(Side s, double t, double x) const;
};

OuterCorrection solve_outer_correction(const OuterSolution& outer,
                                       const std::function<double(double)>& phi1);

}  // namespace vortex
