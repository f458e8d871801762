#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vortex/euler_front.hpp"
#include "vortex/layer_profiles.hpp"
#include "vortex/numerics.hpp"
#include "vortex/viscous.hpp"

namespace vortex {

// ---------------------------------------------------------------------------
// Composite expansion
// ---------------------------------------------------------------------------

/// Matched composite of the outer solution and the stretched layers for one
/// eps, at order 0 (leading) or 1 (adds the sqrt(eps) correctors). Holds
/// references to the precomputed stages; callers keep them alive.
class CompositeExpansion {
 public:
  /// corr may be null, in which case the first-order outer correction is zero.
  CompositeExpansion(const Scenario& sc, const OuterSolution& outer, const OuterCorrection* corr,
                     const LayerSet& layers, double eps, int order);

  /// Composite (tau, u, v) at time t and mass coordinate x.
  Vec3 state(double t, double x) const;

  std::vector<Vec3> slice(double t, std::span<const double> xs) const;

  /// Radius consistent with a tau slice: integrates d(r^2)/dx = 2 tau from
  /// r = a at the wall.
  std::vector<double> radius_slice(std::span<const double> xs,
                                   std::span<const Vec3> states) const;

  double eps() const { return eps_; }
  int order() const { return order_; }
  double h() const { return h_; }

 private:
  const OuterSolution* outer_;
  const OuterCorrection* corr_;
  const LayerSet* layers_;
  double a_ = 1.0, h_ = 0.0, eps_ = 0.0, root_eps_ = 0.0;
  int order_ = 0;
};

// ---------------------------------------------------------------------------
// Discrete residual of the composite
// ---------------------------------------------------------------------------

struct ResidualNorms {
  double eps = 0.0;
  double total = 0.0;         // || L(U^a) ||_{L2(0,T;L2)}, all components
  double eps_grad_tau = 0.0;  // eps || d/dx of the tau residual ||_{L2(0,T;L2)}
  std::size_t n_times = 0;
  std::size_t n_cells = 0;
};

/// Push the composite through the viscous spatial operator on the graded mass
/// grid (the same stencils the viscous marcher uses) and measure what is left
/// over. refine > 1 tightens the grid by that factor for stability checks.
ResidualNorms composite_residual(const CompositeExpansion& comp, const Scenario& sc,
                                 const MassCoordinateMap& map, int refine = 1,
                                 std::size_t n_times = 64);

// ---------------------------------------------------------------------------
// Solution-vs-expansion metrics
// ---------------------------------------------------------------------------

struct ErrorMetrics {
  double eps = 0.0;
  double sup_total = 0.0;   // sup over x at T of the worst component mismatch
  double sup_v = 0.0;       // swirl alone
  double width_wall = 0.0;  // half-decay width of the wall swirl layer at T
  double width_front = 0.0; // same on the outer side of the sheet
  double strip_u = 0.0;     // sup |u - outer u| over both layer strips at T
  double strip_tau = 0.0;
  double energy_sup = 0.0;    // sup over slices of ||diff||^2 + eps^2 ||d_x diff||^2
  double energy_final = 0.0;  // the same functional at the final slice
};

ErrorMetrics error_metrics(const Scenario& sc, const ViscousSolution& vs,
                           const CompositeExpansion& comp, const OuterSolution& outer);

// ---------------------------------------------------------------------------
// Rate tables
// ---------------------------------------------------------------------------

struct RateTable {
  std::string name;
  std::vector<double> eps;
  std::vector<double> values;
  PowerFit fit;
};

/// Fit log(value) against log(eps). Requires three or more entries.
RateTable make_rate_table(std::string name, std::vector<double> eps, std::vector<double> values);

// ---------------------------------------------------------------------------
// Algebraic structure checks
// ---------------------------------------------------------------------------

/// Worst-case defects of the eigendecompositions and the symmetrizer over
/// randomly sampled admissible states.
struct StructureReport {
  double front_eigen_defect = 0.0;     // straightened radial system
  double acoustic_eigen_defect = 0.0;  // mass-coordinate acoustic pair
  double symmetry_defect = 0.0;        // |SA - (SA)^T|
  double min_coercivity = 0.0;         // measured lower bound of SB on (u, v)
};

StructureReport structure_diagnostics(double gamma, double mu, double lambda, std::uint64_t seed,
                                      int n_samples = 200);

}  // namespace vortex
