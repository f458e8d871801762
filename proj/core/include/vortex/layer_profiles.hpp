#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vortex/euler_front.hpp"
#include "vortex/scenario.hpp"
#include "vortex/types.hpp"

namespace vortex {

// ---------------------------------------------------------------------------
// Stretched-coordinate profiles
//
// Wall profiles live on xi in [0, L] with xi = x / sqrt(eps); sheet profiles
// live on zeta in [-L, L] with zeta = (x - h) / sqrt(eps). Sheet fields are
// stored in composed form (outer trace plus layer part), wall fields store the
// decaying layer part directly.
// ---------------------------------------------------------------------------

/// A profile tabulated on a uniform stretched grid at uniform time levels.
/// base/slope give the affine far model per side: subtracting
/// base[s](t) + z * slope[s](t) from the stored values isolates the decaying
/// layer part. Sides left empty stand for a zero far model.
struct LayerField {
  enum class Kind { Wall, Sheet };

  Kind kind = Kind::Wall;
  std::vector<double> times;
  std::vector<double> zs;
  std::vector<std::vector<double>> values;  // [level][node]
  TwoSided<std::vector<double>> base;
  TwoSided<std::vector<double>> slope;

  double z_lo() const { return zs.front(); }
  double z_hi() const { return zs.back(); }

  /// Stored variable at (t, z), clamped to the tabulated ranges.
  double value_at(double t, double z) const;

  /// Layer part on side s: stored value minus the affine far model, with the
  /// edge value continued beyond the truncation. Decaying profiles therefore
  /// contribute (nearly) nothing outside the table.
  double layer_at(Side s, double t, double z) const;

  /// Far-model value base[s](t) + z * slope[s](t).
  double far_model(Side s, double t, double z) const;
};

/// Pick the sheet side from the sign of the stretched coordinate.
inline Side sheet_side(double zeta) { return zeta < 0.0 ? Side::Minus : Side::Plus; }

// ---------------------------------------------------------------------------
// Generic marcher
// ---------------------------------------------------------------------------

/// Linear parabolic problem on a fixed stretched interval,
///   d/dt w = D(t) d^2 w/dz^2 - q(t) w + F(t, z),
/// Dirichlet at both ends. Marched with BDF2 (backward Euler startup) and a
/// tridiagonal solve per step, so the stiff stretched grid costs nothing in
/// stability. Unset closures default to zero; diffusivity is required.
struct LineProblem {
  LayerField::Kind kind = LayerField::Kind::Wall;
  double z_lo = 0.0;
  double z_hi = 20.0;
  std::size_t cells = 500;
  std::size_t steps = 2000;
  double t0 = 0.0;
  double t1 = 1.0;
  std::function<double(double)> diffusivity;
  std::function<double(double)> reaction;
  std::function<double(double)> left;
  std::function<double(double)> right;
  std::function<double(double, double)> forcing;  // (t, z)
  /// Fills a whole forcing row per step; takes precedence over forcing. Lets
  /// table-backed sources hoist their per-step work out of the node loop.
  std::function<void(double, std::span<const double>, std::span<double>)> forcing_slice;
  std::function<double(double)> initial;
  std::size_t keep_levels = 251;  // stored time resolution (marching is finer)
};

LayerField march_line(const LineProblem& p);

// ---------------------------------------------------------------------------
// Traces of the first-order outer correction
// ---------------------------------------------------------------------------

/// Boundary traces of the outer correction consumed by the first-order layer
/// problems. A zero correction (no front corrector datum) gives all-zero
/// series; use zero_correction_traces to build that directly.
struct CorrectionTraces {
  std::vector<double> times;
  std::vector<double> tau1_wall, v1_wall;
  std::vector<double> u1_if, r1_if;
  TwoSided<std::vector<double>> tau1_if, v1_if;
};

CorrectionTraces extract_correction_traces(const OuterCorrection& corr);
CorrectionTraces zero_correction_traces(const std::vector<double>& times);

// ---------------------------------------------------------------------------
// Individual layer problems
// ---------------------------------------------------------------------------

/// Leading wall layer of the swirl: heat flow in xi driven by the mismatch
/// between the wall datum and the outer swirl trace. Throws DataError when the
/// datum violates zeroth-order compatibility at t = 0.
LayerField solve_boundary_layer_v0(const Scenario& sc, const OuterTraces& tr);

/// Leading sheet layer of the swirl in composed form: the initial ramp relaxes
/// by heat flow about the front while the far field follows the outer traces,
/// which satisfy the same damped equation, so the truncation stays clean.
LayerField solve_vortex_layer_v0(const Scenario& sc, const OuterTraces& tr);

/// First-order wall corrector of tau: an ODE in xi (no time derivative),
/// integrated inward from the decay end. Positive swirl layers thicken tau.
LayerField compute_tau_b1(const Scenario& sc, const OuterTraces& tr, const LayerField& vb0);

/// First-order wall layer of the swirl, forced by the leading layer through
/// the metric correctors.
LayerField solve_boundary_layer_v1(const Scenario& sc, const OuterTraces& tr,
                                   const LayerField& vb0, const LayerField& tau_b1,
                                   const CorrectionTraces& corr);

/// First-order sheet corrector of tau plus its decay diagnostics. The profile
/// is normalized to decay at +L; whatever is left at -L measures the front
/// corrector the outer problem would need to absorb it.
struct SheetTau1 {
  LayerField field;                       // composed tau corrector at the sheet
  std::vector<double> tail_minus;         // layer part left at zeta = -L
  std::vector<double> implied_front_jump; // front datum that would remove it
};

SheetTau1 compute_tau_s1(const Scenario& sc, const OuterTraces& tr, const LayerField& vs0,
                         const CorrectionTraces& corr);

/// First-order sheet layer of the swirl in composed form, forced by the
/// leading layer and the tau corrector.
LayerField solve_vortex_layer_v1(const Scenario& sc, const OuterTraces& tr,
                                 const LayerField& vs0, const SheetTau1& tau_s1,
                                 const CorrectionTraces& corr);

// ---------------------------------------------------------------------------
// Bundles and diagnostics
// ---------------------------------------------------------------------------

/// Every layer profile through first order. The u profiles vanish identically
/// at these orders and the tau wall/sheet profiles start at order one, so this
/// set is complete for the two-term expansion.
struct LayerSet {
  LayerField vb0, vs0;
  LayerField tau_b1, vb1;
  SheetTau1 tau_s1;
  LayerField vs1;
};

LayerSet build_layer_set(const Scenario& sc, const OuterTraces& tr, const CorrectionTraces& corr);

/// Discrete weighted Sobolev seminorm of the layer part at one stored time
/// level: the L2 norm of <z>^n d^l/dz^l (layer part), l <= 2.
double weighted_norm(const LayerField& f, std::size_t level, int n, int l);

}  // namespace vortex
