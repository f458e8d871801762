#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortex/types.hpp"

namespace vortex {

inline double pressure(double rho, double gamma) { return std::pow(rho, gamma) / gamma; }

/// Sound speed in the radial (physical) frame, p = rho^gamma / gamma.
inline double sound_speed_radial(double rho, double gamma) {
  return std::pow(rho, 0.5 * (gamma - 1.0));
}

/// Sound speed in mass coordinates: c^2 = r^2 (1/tau)^(gamma+1).
inline double sound_speed_mass(double r, double tau, double gamma) {
  return r * std::pow(tau, -0.5 * (gamma + 1.0));
}

struct GridSpec {
  // Radial solver (front-straightened coordinates).
  std::size_t n_minus = 140;
  std::size_t n_plus = 260;
  std::size_t n_time = 250;

  // Mass-coordinate truncations.
  double x_max = 12.0;   // outer edge of the mass domain
  double r_max = 6.0;    // radial extent covered by data tables

  // Stretched layer grids.
  double layer_L = 20.0;
  std::size_t layer_cells = 500;   // per L of stretched width
  std::size_t layer_steps = 2000;

  // Viscous mass grid and time stepping.
  double cells_per_sqrt_eps = 10.0;
  double coarse_dx = 0.05;
  double grade_ratio = 1.1;
  double cfl = 0.4;
  std::size_t output_slices = 50;

  int quad_order = 4;      // Gauss-Legendre panel order
  double quad_dr = 2e-3;   // spacing of quadrature anchor nodes
};

/// One-sided radial initial data plus wall and front data. Functions of r take
/// the side explicitly so that one-sided limits at r = b are well defined.
struct Scenario {
  double a = 1.0;
  double b = 2.0;
  double gamma = 2.0;
  double mu = 1.0;
  double lambda = 0.5;
  double T = 0.5;
  std::vector<double> eps_list;
  GridSpec grid;

  std::function<double(double, Side)> rho0;
  std::function<double(double, Side)> u0;
  std::function<double(double, Side)> v0;
  std::function<double(double)> wall_v;      // v at r = a as a function of t
  std::function<double(double)> sheet_ramp;  // g(zeta): smoothed sheet profile, locked for |zeta| >= 1
  std::function<double(double)> front_jump_datum;  // jump datum for the order-1 outer problem

  std::string initial_preset;
  std::string boundary_preset;
  std::uint64_t seed = 0;
  std::string canonical_json;  // normalized config used for hashing and manifests

  double tau0(double r, Side s) const { return 1.0 / rho0(r, s); }
  /// State (tau, u, v) immediately right of the radial truncation; used as the
  /// far Dirichlet state by the viscous solver.
  Vec3 far_state_at(double r) const {
    return {1.0 / rho0(r, Side::Plus), u0(r, Side::Plus), v0(r, Side::Plus)};
  }
};

/// Mass (Lagrangian) coordinate x(r) = integral of y rho0(y) from a to r and
/// its inverse. Quadrature anchors are accumulated once; point queries add a
/// single partial Gauss panel, so eta is smooth and quadrature-exact rather
/// than table-interpolated.
class MassCoordinateMap {
 public:
  MassCoordinateMap(const Scenario& sc);

  double eta(double r) const;
  double r0(double x) const;
  double h() const { return h_; }
  double x_max() const { return x_available_; }
  double a() const { return a_; }

 private:
  double partial(double lo, double hi, Side s) const;

  std::function<double(double, Side)> rho_;
  double a_, b_, h_, x_available_;
  int order_;
  std::vector<double> r_nodes_, eta_nodes_;
};

struct Violation {
  std::string what;
  double magnitude;
};

/// Verify vortex-sheet admissibility of the data: u0(a) = 0, wall_v(0) = v0(a),
/// [u0] = [tau0] = 0 at r = b, positive bounded tau, settled far field.
std::vector<Violation> check_compatibility(const Scenario& sc, double tol = 1e-9);

/// Mollified viscous initial data on a mass grid: the sheet jump in v is
/// replaced by the ramp g((x - h)/sqrt(eps)); tau and u are sampled directly.
std::vector<Vec3> build_viscous_initial(const Scenario& sc, const MassCoordinateMap& map,
                                        double eps, std::span<const double> xs);

/// Parse a scenario JSON document (already-read file contents).
Scenario scenario_from_json(const std::string& text);

Scenario make_rest_scenario(double tau_bar = 1.0);
Scenario make_steady_swirl_scenario(double v_minus, double v_plus, double rho_b = 1.0);
Scenario make_tapered_swirl_scenario();  // library default, matches configs/default.json

}  // namespace vortex
