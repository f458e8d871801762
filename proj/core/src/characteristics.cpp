#include "vortex/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

namespace vortex {

namespace {

double eval_datum(const std::function<double(double)>& f, double t) { return f ? f(t) : 0.0; }

enum class Kind { Interior, CrossLeft, CrossRight, Incoming };

/// Per-node update plan for one step. Everything that stays fixed over the
/// coupling iteration is precomputed here.
struct NodePlan {
  Kind kind = Kind::Interior;
  double foot = 0.0;         // start radius: interior foot or boundary radius
  double tau = 0.0;          // start time (t_old, or the crossing time)
  double base = 0.0;         // w_k at the foot, interpolated from the old level
  double fixed_start = 0.0;  // coupling + source at the start, when frozen
  std::array<double, 3> m_end{};
  double f_end = 0.0;
  std::array<double, 3> m_start{};  // crossing nodes only
  double f_start = 0.0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Marcher
// ---------------------------------------------------------------------------

CharacteristicSolution solve_characteristics(const CharacteristicProblem& prob) {
  const int K = prob.system.n_fields;
  if (K < 1 || K > 3) throw ConfigError("solve_characteristics: n_fields must be 1..3");
  if (!prob.system.speed) throw ConfigError("solve_characteristics: speed closure required");
  if (!prob.initial) throw ConfigError("solve_characteristics: initial closure required");
  if (prob.n_steps < 1) throw ConfigError("solve_characteristics: need at least one step");
  if (!(prob.t1 > prob.t0)) throw ConfigError("solve_characteristics: need t1 > t0");

  const bool has_m = bool(prob.system.coupling);
  const bool has_f = bool(prob.system.source);
  const auto& gm = prob.grid.minus;
  const auto& gp = prob.grid.plus;
  const double b_if = prob.grid.interface();
  const std::size_t ibm = gm.size() - 1;  // interface node index, minus side

  CharacteristicSolution sol;
  sol.grid = prob.grid;
  sol.n_fields = K;
  const double dt = (prob.t1 - prob.t0) / double(prob.n_steps);
  sol.times.resize(prob.n_steps + 1);
  for (std::size_t n = 0; n <= prob.n_steps; ++n) sol.times[n] = prob.t0 + dt * double(n);

  auto blank_level = [&]() {
    TwoSided<std::array<std::vector<double>, 3>> lv;
    for (int k = 0; k < K; ++k) {
      lv.minus[k].assign(gm.size(), 0.0);
      lv.plus[k].assign(gp.size(), 0.0);
    }
    return lv;
  };

  sol.levels.reserve(prob.n_steps + 1);
  sol.levels.push_back(blank_level());
  for (int k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < gm.size(); ++i)
      sol.levels[0].minus[k][i] = prob.initial(k, Side::Minus, gm[i]);
    for (std::size_t i = 0; i < gp.size(); ++i)
      sol.levels[0].plus[k][i] = prob.initial(k, Side::Plus, gp[i]);
  }

  std::array<TwoSided<std::vector<NodePlan>>, 3> plans;
  for (int k = 0; k < K; ++k) {
    plans[k].minus.resize(gm.size());
    plans[k].plus.resize(gp.size());
  }

  for (std::size_t n = 0; n < prob.n_steps; ++n) {
    const double t_old = sol.times[n];
    const double t_new = sol.times[n + 1];
    const auto& prev = sol.levels[n];
    auto work = prev;  // current-level iterate, seeded with the old level

    // Boundary trace of field j on side s at an intra-step time, cubic over the
    // last completed levels plus the in-progress one.
    auto trace_at = [&](Side s, int j, std::size_t ib, double tau) -> double {
      const std::size_t lo = (n >= 2) ? n - 2 : 0;
      std::array<double, 4> win{};
      std::size_t cnt = 0;
      for (std::size_t m = lo; m <= n; ++m) win[cnt++] = sol.levels[m][s][j][ib];
      win[cnt++] = work[s][j][ib];
      return series_eval(std::span<const double>(win.data(), cnt), sol.times[lo], dt, tau);
    };

    auto wall_value = [&](int k, double tau) {
      double v = eval_datum(prob.boundary.wall_datum[k], tau);
      for (int j = 0; j < K; ++j) {
        const double c = prob.boundary.wall[k][j];
        if (c != 0.0) v += c * trace_at(Side::Minus, j, 0, tau);
      }
      return v;
    };
    auto interface_value = [&](Side s, int k, double tau) {
      double v = eval_datum(prob.boundary.interface_datum[s][k], tau);
      const Side o = other(s);
      const std::size_t ib_other = (o == Side::Minus) ? ibm : 0;
      const std::size_t ib_own = (s == Side::Minus) ? ibm : 0;
      for (int j = 0; j < K; ++j) {
        const double cf = prob.boundary.from[s][k][j];
        if (cf != 0.0) v += cf * trace_at(o, j, ib_other, tau);
        const double co = prob.boundary.own[s][k][j];
        if (co != 0.0) v += co * trace_at(s, j, ib_own, tau);
      }
      return v;
    };
    auto far_value = [&](int k, double tau) {
      return prob.boundary.far[k] ? prob.boundary.far[k](tau)
                                  : sol.levels[0][Side::Plus][k].back();
    };
    auto boundary_value = [&](Side s, bool left_end, int k, double tau) {
      if (s == Side::Minus)
        return left_end ? wall_value(k, tau) : interface_value(Side::Minus, k, tau);
      return left_end ? interface_value(Side::Plus, k, tau) : far_value(k, tau);
    };

    // Plan feet and frozen coefficients for every (field, side, node).
    for (Side s : {Side::Minus, Side::Plus}) {
      const auto& xs = prob.grid.nodes(s);
      const double lo = xs.front();
      const double hi = xs.back();
      const double snap = 1e-13 * std::max(hi - lo, 1.0);
      for (int k = 0; k < K; ++k) {
        auto& pls = plans[k][s];
        for (std::size_t i = 0; i < xs.size(); ++i) {
          NodePlan& pl = pls[i];
          pl = NodePlan{};
          const double r = xs[i];
          const double lam = prob.system.speed(k, s, t_new, r);
          const bool at_left = (i == 0);
          const bool at_right = (i + 1 == xs.size());
          if ((at_left && lam > 0.0) || (at_right && lam < 0.0)) {
            pl.kind = Kind::Incoming;
            continue;
          }
          const double rh = std::clamp(r - 0.5 * dt * lam, lo, hi);
          const double lam_mid = prob.system.speed(k, s, t_old + 0.5 * dt, rh);
          const double foot = r - dt * lam_mid;
          if (foot >= lo - snap && foot <= hi + snap) {
            pl.kind = Kind::Interior;
            pl.foot = std::clamp(foot, lo, hi);
            pl.tau = t_old;
            pl.base = interp_eval(prob.interp, xs, prev[s][k], pl.foot);
            double start = 0.0;
            if (has_m) {
              const Mat3 m = prob.system.coupling(s, t_old, pl.foot);
              for (int j = 0; j < K; ++j)
                if (m[std::size_t(k)][std::size_t(j)] != 0.0)
                  start += m[std::size_t(k)][std::size_t(j)] *
                           interp_eval(prob.interp, xs, prev[s][j], pl.foot);
            }
            if (has_f) start += prob.system.source(s, t_old, pl.foot)[std::size_t(k)];
            pl.fixed_start = start;
          } else {
            const bool left = foot < lo;
            const double rb = left ? lo : hi;
            const double s_eff = (r - foot) / dt;
            pl.kind = left ? Kind::CrossLeft : Kind::CrossRight;
            pl.tau = std::clamp(t_new - (r - rb) / s_eff, t_old, t_new);
            pl.foot = rb;
            if (has_m) {
              const Mat3 m = prob.system.coupling(s, pl.tau, rb);
              for (int j = 0; j < K; ++j) pl.m_start[std::size_t(j)] = m[std::size_t(k)][std::size_t(j)];
            }
            if (has_f) pl.f_start = prob.system.source(s, pl.tau, rb)[std::size_t(k)];
          }
          if (has_m) {
            const Mat3 m = prob.system.coupling(s, t_new, r);
            for (int j = 0; j < K; ++j) pl.m_end[std::size_t(j)] = m[std::size_t(k)][std::size_t(j)];
          }
          if (has_f) pl.f_end = prob.system.source(s, t_new, r)[std::size_t(k)];
        }
      }
    }

    // Sweep order: fields feeding the interface first, so transmissions read
    // fresh traces on the first pass where possible.
    std::vector<std::pair<int, Side>> order;
    order.reserve(std::size_t(2 * K));
    for (int k = 0; k < K; ++k)
      if (prob.system.speed(k, Side::Plus, t_new, b_if) <= 0.0) order.emplace_back(k, Side::Plus);
    for (int k = 0; k < K; ++k)
      if (prob.system.speed(k, Side::Minus, t_new, b_if) < 0.0) order.emplace_back(k, Side::Minus);
    for (int k = 0; k < K; ++k)
      if (prob.system.speed(k, Side::Minus, t_new, b_if) >= 0.0) order.emplace_back(k, Side::Minus);
    for (int k = 0; k < K; ++k)
      if (prob.system.speed(k, Side::Plus, t_new, b_if) > 0.0) order.emplace_back(k, Side::Plus);

    double dmax = 0.0;
    int iter = 0;
    for (; iter < prob.picard_max; ++iter) {
      dmax = 0.0;
      for (const auto& [k, s] : order) {
        const auto& xs = prob.grid.nodes(s);
        auto& wk = work[s][k];
        const auto& pls = plans[k][s];
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const NodePlan& pl = pls[i];
          double val = 0.0;
          switch (pl.kind) {
            case Kind::Incoming:
              val = boundary_value(s, i == 0, k, t_new);
              break;
            case Kind::Interior: {
              double end = pl.f_end;
              if (has_m)
                for (int j = 0; j < K; ++j)
                  if (pl.m_end[std::size_t(j)] != 0.0)
                    end += pl.m_end[std::size_t(j)] * work[s][j][i];
              val = pl.base + 0.5 * (t_new - pl.tau) * (pl.fixed_start + end);
              break;
            }
            case Kind::CrossLeft:
            case Kind::CrossRight: {
              const bool left = (pl.kind == Kind::CrossLeft);
              const double w_start = boundary_value(s, left, k, pl.tau);
              double start = pl.f_start;
              if (has_m) {
                const std::size_t ib = left ? 0 : xs.size() - 1;
                for (int j = 0; j < K; ++j)
                  if (pl.m_start[std::size_t(j)] != 0.0)
                    start += pl.m_start[std::size_t(j)] *
                             (j == k ? w_start : trace_at(s, j, ib, pl.tau));
              }
              double end = pl.f_end;
              if (has_m)
                for (int j = 0; j < K; ++j)
                  if (pl.m_end[std::size_t(j)] != 0.0)
                    end += pl.m_end[std::size_t(j)] * work[s][j][i];
              val = w_start + 0.5 * (t_new - pl.tau) * (start + end);
              break;
            }
          }
          dmax = std::max(dmax, std::abs(val - wk[i]));
          wk[i] = val;
        }
      }
      if (dmax <= prob.picard_tol) break;
    }
    if (iter >= prob.picard_max && dmax > prob.picard_tol)
      throw SolverError("characteristic step: coupling iteration stalled at residual " +
                        std::to_string(dmax));

    sol.levels.push_back(std::move(work));
  }

  return sol;
}

// ---------------------------------------------------------------------------
// Solution sampling
// ---------------------------------------------------------------------------

double CharacteristicSolution::sample(Side s, int k, double t, double r) const {
  const std::size_t n = times.size();
  if (n == 0) throw DataError("sample: empty solution");
  const auto& xs = grid.nodes(s);
  if (n == 1) return interp_eval(Interp::Cubic, xs, levels[0][s][k], r);
  const double dt = times[1] - times[0];
  double si = (t - times.front()) / dt;
  si = std::clamp(si, 0.0, double(n - 1));
  std::size_t i = std::min(std::size_t(si), n - 2);
  std::size_t lo = (i == 0) ? 0 : i - 1;
  const std::size_t cnt = std::min<std::size_t>(4, n);
  if (lo + cnt > n) lo = n - cnt;
  std::array<double, 4> win{};
  for (std::size_t m = 0; m < cnt; ++m)
    win[m] = interp_eval(Interp::Cubic, xs, levels[lo + m][s][k], r);
  return series_eval(std::span<const double>(win.data(), cnt), times[lo], dt, t);
}

std::vector<double> CharacteristicSolution::boundary_series(Side s, int k,
                                                            std::size_t node) const {
  std::vector<double> out(levels.size());
  for (std::size_t m = 0; m < levels.size(); ++m) out[m] = levels[m][s][k][node];
  return out;
}

double trace_characteristic(const std::function<double(double, double)>& speed, double t0,
                            double r0, double t1, std::size_t n_steps, double lo, double hi) {
  double r = std::clamp(r0, lo, hi);
  if (n_steps == 0) return r;
  const double dt = (t1 - t0) / double(n_steps);
  for (std::size_t m = 0; m < n_steps; ++m) {
    const double t = t0 + dt * double(m);
    const double k1 = speed(t, r);
    const double rh = std::clamp(r + 0.5 * dt * k1, lo, hi);
    const double k2 = speed(t + 0.5 * dt, rh);
    r = std::clamp(r + dt * k2, lo, hi);
  }
  return r;
}

}  // namespace vortex
