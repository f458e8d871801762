#include "vortex/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "vortex/numerics.hpp"

namespace vortex {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Mass coordinate map
// ---------------------------------------------------------------------------

MassCoordinateMap::MassCoordinateMap(const Scenario& sc)
    : rho_(sc.rho0), a_(sc.a), b_(sc.b), order_(sc.grid.quad_order) {
  const double r_max = sc.grid.r_max;
  if (r_max <= b_) throw ConfigError("grid.r_max must exceed b");
  const double dr = std::max(1e-5, sc.grid.quad_dr);

  // Anchor nodes, with b forced in so panels never straddle the front.
  r_nodes_.push_back(a_);
  const auto fill = [&](double lo, double hi) {
    const int n = std::max(1, int(std::ceil((hi - lo) / dr)));
    for (int i = 1; i <= n; ++i) r_nodes_.push_back(lo + (hi - lo) * double(i) / double(n));
  };
  fill(a_, b_);
  fill(b_, r_max);

  eta_nodes_.resize(r_nodes_.size());
  eta_nodes_[0] = 0.0;
  for (std::size_t k = 1; k < r_nodes_.size(); ++k) {
    const Side s = (r_nodes_[k] <= b_) ? Side::Minus : Side::Plus;
    eta_nodes_[k] = eta_nodes_[k - 1] + partial(r_nodes_[k - 1], r_nodes_[k], s);
  }

  const auto itb = std::lower_bound(r_nodes_.begin(), r_nodes_.end(), b_);
  h_ = eta_nodes_[std::size_t(itb - r_nodes_.begin())];
  x_available_ = eta_nodes_.back();
}

double MassCoordinateMap::partial(double lo, double hi, Side s) const {
  return gauss_legendre([&](double y) { return y * rho_(y, s); }, lo, hi, 1, order_);
}

double MassCoordinateMap::eta(double r) const {
  if (r < a_ - 1e-12) throw DataError("eta: radius below the wall");
  if (r > r_nodes_.back() + 1e-12) throw DataError("eta: radius beyond tabulated range");
  r = std::clamp(r, a_, r_nodes_.back());
  auto it = std::upper_bound(r_nodes_.begin(), r_nodes_.end(), r);
  const std::size_t k = (it == r_nodes_.begin()) ? 0 : std::size_t(it - r_nodes_.begin()) - 1;
  const Side s = (r <= b_) ? Side::Minus : Side::Plus;
  return eta_nodes_[k] + partial(r_nodes_[k], r, s);
}

double MassCoordinateMap::r0(double x) const {
  if (x < -1e-12) throw DataError("r0: negative mass coordinate");
  if (x > x_available_ + 1e-12) throw DataError("r0: mass coordinate beyond tabulated range");
  x = std::clamp(x, 0.0, x_available_);
  auto it = std::upper_bound(eta_nodes_.begin(), eta_nodes_.end(), x);
  std::size_t k = (it == eta_nodes_.begin()) ? 0 : std::size_t(it - eta_nodes_.begin()) - 1;
  k = std::min(k, eta_nodes_.size() - 2);
  const Side s = (r_nodes_[k + 1] <= b_) ? Side::Minus : Side::Plus;
  if (x == eta_nodes_[k]) return r_nodes_[k];
  const double r = solve_monotone(
      [&](double y) { return eta_nodes_[k] + partial(r_nodes_[k], y, s) - x; }, r_nodes_[k],
      r_nodes_[k + 1], 1e-14 * std::max(1.0, r_nodes_[k + 1]));
  return r;
}

// ---------------------------------------------------------------------------
// Data checks and viscous initial data
// ---------------------------------------------------------------------------

std::vector<Violation> check_compatibility(const Scenario& sc, double tol) {
  std::vector<Violation> out;
  const auto flag = [&](const std::string& what, double mag) {
    if (std::abs(mag) > tol) out.push_back({what, std::abs(mag)});
  };
  flag("u0(a) != 0", sc.u0(sc.a, Side::Minus));
  flag("wall_v(0) != v0(a)", sc.wall_v(0.0) - sc.v0(sc.a, Side::Minus));
  flag("[u0] != 0 at r=b", sc.u0(sc.b, Side::Plus) - sc.u0(sc.b, Side::Minus));
  flag("[tau0] != 0 at r=b",
       1.0 / sc.rho0(sc.b, Side::Plus) - 1.0 / sc.rho0(sc.b, Side::Minus));

  double rho_min = 1e300, rho_max = 0.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double r = sc.a + (sc.grid.r_max - sc.a) * double(i) / double(n);
    const Side s = (r <= sc.b) ? Side::Minus : Side::Plus;
    const double rho = sc.rho0(r, s);
    rho_min = std::min(rho_min, rho);
    rho_max = std::max(rho_max, rho);
  }
  if (!(rho_min > 0.0) || !std::isfinite(rho_max))
    out.push_back({"rho0 not positive and bounded", rho_min});
  return out;
}

std::vector<Vec3> build_viscous_initial(const Scenario& sc, const MassCoordinateMap& map,
                                        double eps, std::span<const double> xs) {
  if (!(eps > 0.0)) throw ConfigError("build_viscous_initial: eps must be positive");
  const double h = map.h();
  const double root_eps = std::sqrt(eps);
  std::vector<Vec3> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double r = map.r0(x);
    const Side s = (x < h) ? Side::Minus : Side::Plus;
    const double zeta = (x - h) / root_eps;
    double v = sc.v0(r, s);
    if (std::abs(zeta) < 1.0) {
      const Side zs = (zeta < 0.0) ? Side::Minus : Side::Plus;
      v = sc.v0(r, zs) + sc.sheet_ramp(zeta) - sc.v0(sc.b, zs);
    }
    out[i] = {1.0 / sc.rho0(r, s), sc.u0(r, s), v};
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON parsing and presets
// ---------------------------------------------------------------------------

namespace {

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing required key \"" + key + "\"");
  if (!j[key].is_number()) throw ConfigError("key \"" + key + "\" must be a number");
  return j[key].get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("key \"" + key + "\" must be a number");
  return j[key].get<double>();
}

GridSpec parse_grid(const json& j) {
  GridSpec g;
  if (!j.contains("grid")) return g;
  const json& gj = j["grid"];
  g.n_minus = std::size_t(optional_number(gj, "n_minus", double(g.n_minus)));
  g.n_plus = std::size_t(optional_number(gj, "n_plus", double(g.n_plus)));
  g.n_time = std::size_t(optional_number(gj, "n_time", double(g.n_time)));
  g.x_max = optional_number(gj, "x_max", g.x_max);
  g.r_max = optional_number(gj, "r_max", g.r_max);
  g.layer_L = optional_number(gj, "layer_L", g.layer_L);
  g.layer_cells = std::size_t(optional_number(gj, "layer_cells", double(g.layer_cells)));
  g.layer_steps = std::size_t(optional_number(gj, "layer_steps", double(g.layer_steps)));
  g.cells_per_sqrt_eps = optional_number(gj, "cells_per_sqrt_eps", g.cells_per_sqrt_eps);
  g.coarse_dx = optional_number(gj, "coarse_dx", g.coarse_dx);
  g.grade_ratio = optional_number(gj, "grade_ratio", g.grade_ratio);
  g.cfl = optional_number(gj, "cfl", g.cfl);
  g.output_slices = std::size_t(optional_number(gj, "output_slices", double(g.output_slices)));
  g.quad_order = int(optional_number(gj, "quad_order", double(g.quad_order)));
  g.quad_dr = optional_number(gj, "quad_dr", g.quad_dr);
  if (g.n_minus < 8 || g.n_plus < 8) throw ConfigError("grid: need at least 8 cells per side");
  if (g.grade_ratio <= 1.0) throw ConfigError("grid.grade_ratio must exceed 1");
  if (!(g.cfl > 0.0 && g.cfl < 1.0)) throw ConfigError("grid.cfl must lie in (0,1)");
  return g;
}

/// Smooth radial taper: 1 below r1, 0 above r2.
std::function<double(double)> make_taper(double r1, double r2) {
  return [r1, r2](double r) { return 1.0 - smooth_step((r - r1) / (r2 - r1)); };
}

/// Cumulative integral of v(s)^2 / s from b, tabulated densely and wrapped in
/// a cubic interpolation; used for swirl density balance with tapered v.
std::function<double(double)> tabulate_swirl_integral(const std::function<double(double)>& v,
                                                      double b, double r_hi, int order) {
  auto xs = std::make_shared<std::vector<double>>();
  auto ys = std::make_shared<std::vector<double>>();
  const int n = std::max(64, int(std::ceil((r_hi - b) / 2e-3)));
  xs->resize(n + 1);
  ys->resize(n + 1);
  (*xs)[0] = b;
  (*ys)[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    (*xs)[i] = b + (r_hi - b) * double(i) / double(n);
    (*ys)[i] = (*ys)[i - 1] + gauss_legendre([&](double s) { return v(s) * v(s) / s; },
                                             (*xs)[i - 1], (*xs)[i], 1, order);
  }
  return [xs, ys](double r) { return interp_eval(Interp::Cubic, *xs, *ys, r); };
}

/// Density solving rho^(gamma-2) rho' = v^2 / r with rho(b) = rho_b, given the
/// accumulated integral I(r) of v^2/s from b.
double swirl_density(double rho_b, double gamma, double integral) {
  if (std::abs(gamma - 2.0) < 1e-14) return rho_b + integral;
  const double base = std::pow(rho_b, gamma - 1.0) + (gamma - 1.0) * integral;
  if (base <= 0.0) throw DataError("swirl density balance hit vacuum");
  return std::pow(base, 1.0 / (gamma - 1.0));
}

json default_scenario_json() {
  return json{
      {"a", 1.0},
      {"b", 2.0},
      {"gamma", 2.0},
      {"mu", 1.0},
      {"lambda", 0.5},
      {"T", 0.5},
      {"eps_list", {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}},
      {"initial",
       {{"preset", "tapered_swirl"},
        {"V_minus", 0.4},
        {"V_plus", -0.4},
        {"rho_b", 1.0},
        {"r1", 3.0},
        {"r2", 4.0}}},
      {"boundary_v", {{"preset", "smooth_ramp"}, {"amplitude", 0.3}, {"ramp_time", 0.25}}},
  };
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }

  Scenario sc;
  sc.a = require_number(j, "a");
  sc.b = require_number(j, "b");
  sc.gamma = require_number(j, "gamma");
  sc.mu = require_number(j, "mu");
  sc.lambda = require_number(j, "lambda");
  sc.T = require_number(j, "T");
  if (!(sc.a > 0.0)) throw ConfigError("a must be positive");
  if (!(sc.b > sc.a)) throw ConfigError("front inside wall: requires a < b");
  if (!(sc.gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  if (!(sc.mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(sc.lambda + 2.0 * sc.mu > 0.0)) throw ConfigError("lambda + 2 mu must be positive");
  if (!(sc.T > 0.0)) throw ConfigError("T must be positive");

  if (j.contains("eps_list")) {
    if (!j["eps_list"].is_array() || j["eps_list"].empty())
      throw ConfigError("eps_list must be a non-empty array");
    for (const auto& e : j["eps_list"]) {
      const double v = e.get<double>();
      if (!(v > 0.0)) throw ConfigError("eps_list entries must be positive");
      sc.eps_list.push_back(v);
    }
    std::sort(sc.eps_list.rbegin(), sc.eps_list.rend());
  } else {
    sc.eps_list = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  }

  sc.grid = parse_grid(j);
  if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();

  if (!j.contains("initial")) throw ConfigError("missing required key \"initial\"");
  const json& init = j["initial"];
  const std::string preset = init.value("preset", std::string{});
  sc.initial_preset = preset;

  const double a = sc.a, b = sc.b, gamma = sc.gamma;

  if (preset == "rest") {
    const double tau_bar = optional_number(init, "tau", 1.0);
    if (!(tau_bar > 0.0)) throw ConfigError("initial.tau must be positive");
    sc.rho0 = [tau_bar](double, Side) { return 1.0 / tau_bar; };
    sc.u0 = [](double, Side) { return 0.0; };
    sc.v0 = [](double, Side) { return 0.0; };
  } else if (preset == "steady_swirl") {
    const double vm = require_number(init, "V_minus");
    const double vp = require_number(init, "V_plus");
    const double rho_b = optional_number(init, "rho_b", 1.0);
    sc.v0 = [vm, vp](double, Side s) { return s == Side::Minus ? vm : vp; };
    sc.u0 = [](double, Side) { return 0.0; };
    sc.rho0 = [vm, vp, rho_b, gamma, b](double r, Side s) {
      const double V = (s == Side::Minus) ? vm : vp;
      return swirl_density(rho_b, gamma, V * V * std::log(r / b));
    };
  } else if (preset == "tapered_swirl") {
    const double vm = require_number(init, "V_minus");
    const double vp = require_number(init, "V_plus");
    const double rho_b = optional_number(init, "rho_b", 1.0);
    const double r1 = optional_number(init, "r1", b + 1.0);
    const double r2 = optional_number(init, "r2", b + 2.0);
    if (!(b <= r1 && r1 < r2 && r2 < sc.grid.r_max))
      throw ConfigError("tapered_swirl requires b <= r1 < r2 < grid.r_max");
    auto taper = make_taper(r1, r2);
    auto v_plus = [vp, taper](double r) { return vp * taper(r); };
    auto integral = tabulate_swirl_integral(v_plus, b, sc.grid.r_max + 0.5, sc.grid.quad_order);
    sc.v0 = [vm, v_plus](double r, Side s) { return s == Side::Minus ? vm : v_plus(r); };
    sc.u0 = [](double, Side) { return 0.0; };
    sc.rho0 = [vm, integral, rho_b, gamma, b](double r, Side s) {
      const double I =
          (s == Side::Minus) ? vm * vm * std::log(r / b) : integral(std::max(r, b));
      return swirl_density(rho_b, gamma, I);
    };
  } else {
    throw ConfigError("unknown initial.preset \"" + preset + "\"");
  }

  // Optional smooth radial bump added to u0 (vanishes at the wall, decays far).
  if (init.contains("u_bump")) {
    const json& ub = init["u_bump"];
    const double amp = require_number(ub, "amplitude");
    const double center = optional_number(ub, "center", 0.5 * (a + b));
    const double width = optional_number(ub, "width", 0.3);
    auto base = sc.u0;
    sc.u0 = [base, amp, center, width, a](double r, Side s) {
      const double z = (r - center) / width;
      return base(r, s) + amp * (r - a) * std::exp(-z * z);
    };
  }

  // Sheet ramp g: C-infinity transition between the one-sided v limits at b,
  // locked to them outside |zeta| <= 1.
  {
    const double v_lo = sc.v0(b, Side::Minus);
    const double v_hi = sc.v0(b, Side::Plus);
    sc.sheet_ramp = [v_lo, v_hi](double zeta) {
      return v_lo + (v_hi - v_lo) * smooth_step(0.5 * (zeta + 1.0));
    };
  }

  // Wall swirl datum.
  const json bv = j.contains("boundary_v") ? j["boundary_v"] : json{{"preset", "initial"}};
  const std::string bpreset = bv.value("preset", std::string("initial"));
  sc.boundary_preset = bpreset;
  const double v_wall0 = sc.v0(a, Side::Minus);
  if (bpreset == "initial") {
    sc.wall_v = [v_wall0](double) { return v_wall0; };
  } else if (bpreset == "smooth_ramp") {
    const double amp = require_number(bv, "amplitude");
    const double ramp_time = optional_number(bv, "ramp_time", 0.5 * sc.T);
    if (!(ramp_time > 0.0)) throw ConfigError("boundary_v.ramp_time must be positive");
    sc.wall_v = [v_wall0, amp, ramp_time](double t) {
      return v_wall0 + amp * smooth_step(t / ramp_time);
    };
  } else {
    throw ConfigError("unknown boundary_v.preset \"" + bpreset + "\"");
  }

  // Jump datum for the order-1 outer problem (constant unless configured).
  const double phi1 = optional_number(j, "phi1", 0.0);
  sc.front_jump_datum = [phi1](double) { return phi1; };

  sc.canonical_json = j.dump();
  return sc;
}

Scenario make_rest_scenario(double tau_bar) {
  json j = default_scenario_json();
  j["initial"] = {{"preset", "rest"}, {"tau", tau_bar}};
  j["boundary_v"] = {{"preset", "initial"}};
  return scenario_from_json(j.dump());
}

Scenario make_steady_swirl_scenario(double v_minus, double v_plus, double rho_b) {
  json j = default_scenario_json();
  j["initial"] = {
      {"preset", "steady_swirl"}, {"V_minus", v_minus}, {"V_plus", v_plus}, {"rho_b", rho_b}};
  j["boundary_v"] = {{"preset", "initial"}};
  return scenario_from_json(j.dump());
}

Scenario make_tapered_swirl_scenario() { return scenario_from_json(default_scenario_json().dump()); }

}  // namespace vortex
