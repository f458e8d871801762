#pragma once

#include <array>
#include <functional>
#include <vector>

#include "vortex/numerics.hpp"
#include "vortex/types.hpp"

namespace vortex {

/// Pointwise coefficients of a diagonal first-order system
///   d/dt w_k + lambda_k(t,r) d/dr w_k = sum_j m_kj(t,r) w_j + f_k(t,r)
/// posed on both sides of an interior interface. Coupling and source closures
/// may be left empty when the system is homogeneous.
struct DiagonalSystem {
  int n_fields = 3;
  std::function<double(int, Side, double, double)> speed;  // (k, side, t, r)
  std::function<Mat3(Side, double, double)> coupling;      // (side, t, r) -> m
  std::function<Vec3(Side, double, double)> source;        // (side, t, r) -> f
};

/// Boundary closure. At every boundary node the solver classifies each field by
/// the sign of its speed; incoming fields are assigned a linear combination of
/// the simultaneous traces of the other fields plus a datum, outgoing and
/// tangent fields are transported from the interior. The same combinations
/// supply values where backward characteristics exit through a boundary.
struct BoundaryClosure {
  /// Wall (left end): incoming k gets sum_j wall[k][j] w_j(t,a) + wall_datum[k](t).
  Mat3 wall{};
  std::array<std::function<double(double)>, 3> wall_datum{};

  /// Interface: incoming k on side s gets
  ///   sum_j from[s][k][j] w_j^other(t,b) + sum_j own[s][k][j] w_j^s(t,b)
  ///   + interface_datum[s][k](t).
  TwoSided<Mat3> from{};
  TwoSided<Mat3> own{};
  TwoSided<std::array<std::function<double(double)>, 3>> interface_datum{};

  /// Far end (right end): Dirichlet data for incoming fields. An empty entry
  /// freezes the initial value of the far node.
  std::array<std::function<double(double)>, 3> far{};
};

struct CharacteristicProblem {
  TwoSidedGrid grid;
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t n_steps = 100;
  DiagonalSystem system;
  BoundaryClosure boundary;
  std::function<double(int, Side, double)> initial;  // (k, side, r)
  Interp interp = Interp::Cubic;
  double picard_tol = 1e-10;  // per-step coupling iteration tolerance
  int picard_max = 50;
};

/// Dense history produced by the semi-Lagrangian marcher. Both sides carry
/// their own copy of the interface node, so one-sided traces are exact reads.
struct CharacteristicSolution {
  std::vector<double> times;
  TwoSidedGrid grid;
  int n_fields = 3;
  std::vector<TwoSided<std::array<std::vector<double>, 3>>> levels;  // [n][side][k][i]

  double value(std::size_t level, Side s, int k, std::size_t i) const {
    return levels[level][s][k][i];
  }
  /// Field k on side s at (t, r); cubic in space and time, clamped outside.
  double sample(Side s, int k, double t, double r) const;
  /// Time series of field k at a boundary node of side s (0 = first node).
  std::vector<double> boundary_series(Side s, int k, std::size_t node) const;
};

/// March the diagonal system from t0 to t1. Characteristic feet are traced
/// backward with one midpoint step per time level; values are picked up by
/// cubic interpolation, sources by the trapezoid rule, and the coupling closed
/// with an inner fixed-point iteration. Feet that exit through a boundary pick
/// up the boundary combination at the crossing time, interpolated cubically in
/// time, which keeps wall reflection and interface transmission sharp.
CharacteristicSolution solve_characteristics(const CharacteristicProblem& prob);

/// Integrate dr/dt = speed(t, r) from (t0, r0) to t1 with n_steps midpoint
/// steps, clamping the path to [lo, hi]. Returns r(t1).
double trace_characteristic(const std::function<double(double, double)>& speed, double t0,
                            double r0, double t1, std::size_t n_steps, double lo, double hi);

}  // namespace vortex
