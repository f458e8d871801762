#include "vortex/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "vortex/asymptotics.hpp"
#include "vortex/euler_front.hpp"
#include "vortex/io.hpp"
#include "vortex/layer_profiles.hpp"
#include "vortex/scenario.hpp"
#include "vortex/viscous.hpp"

namespace vortex {

namespace {

using json = nlohmann::json;
using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

struct RunOutcome {
  std::string key;
  std::filesystem::path run_dir;
  std::vector<std::string> outputs;
  json extra = json::object();
};

void require_compatible(const Scenario& sc) {
  const auto violations = check_compatibility(sc);
  if (violations.empty()) return;
  std::string msg = "incompatible scenario data:";
  for (const Violation& v : violations)
    msg += " " + v.what + " (defect " + format_double(v.magnitude) + ");";
  msg.pop_back();
  throw ConfigError(msg);
}

bool zero_front_datum(const Scenario& sc) {
  if (!sc.front_jump_datum) return true;
  for (int k = 0; k <= 8; ++k)
    if (sc.front_jump_datum(sc.T * k / 8.0) != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Shared solve stages
// ---------------------------------------------------------------------------

struct OuterBundle {
  EulerSolution euler;
  std::optional<MassCoordinateMap> map;
  OuterSolution outer;
  OuterTraces traces;
  OuterCorrection corr;
  CorrectionTraces corr_traces;
};

OuterBundle build_outer(const Scenario& sc) {
  OuterBundle st;
  st.euler = solve_vortex_sheet_euler(sc);
  st.map.emplace(sc);
  const TwoSidedGrid xs = make_two_sided_grid(0.0, st.map->h(), st.map->x_max(),
                                              sc.grid.n_minus, sc.grid.n_plus);
  st.outer = to_lagrangian(st.euler, *st.map, xs);
  st.traces = extract_traces(st.outer);
  st.corr = solve_outer_correction(st.outer, sc.front_jump_datum);
  st.corr_traces = extract_correction_traces(st.corr);
  return st;
}

json interface_jump_stats(const OuterSolution& outer) {
  double ju = 0.0;
  double jp = 0.0;
  for (const auto& level : outer.fields) {
    const auto& fm = level[Side::Minus];
    const auto& fp = level[Side::Plus];
    ju = std::max(ju, std::abs(fm[1].back() - fp[1].front()));
    const double pm = pressure(1.0 / fm[0].back(), outer.gamma);
    const double pp = pressure(1.0 / fp[0].front(), outer.gamma);
    jp = std::max(jp, std::abs(pm - pp));
  }
  return {{"max_interface_jump_u", ju}, {"max_interface_jump_p", jp}};
}

// ---------------------------------------------------------------------------
// euler
// ---------------------------------------------------------------------------

RunOutcome run_euler_cmd(const RunConfig& rc, const Scenario& sc, const std::string& hash) {
  RunOutcome out;
  out.run_dir = rc.out_dir / ("euler-" + hash.substr(0, 12));
  std::filesystem::create_directories(out.run_dir);

  const OuterBundle st = build_outer(sc);
  for (const auto& p : write_outer_slices(out.run_dir, st.outer, sc.grid.output_slices))
    out.outputs.push_back(p.string());
  const auto front_file = out.run_dir / "front.csv";
  write_front_csv(front_file, st.euler.front);
  out.outputs.push_back(front_file.string());

  out.extra = interface_jump_stats(st.outer);
  out.extra["sweeps"] = st.euler.sweeps;
  out.extra["final_change"] = st.euler.final_change;
  out.extra["correction_sup"] = st.corr.sup_norm;
  out.extra["front_jump_datum_zero"] = zero_front_datum(sc);
  out.extra["front_final"] = st.euler.front.phi.back();

  std::cout << "[euler] " << st.euler.sweeps << " sweeps, front ends at "
            << format_double(st.euler.front.phi.back()) << ", interface jumps u "
            << format_double(out.extra["max_interface_jump_u"].get<double>()) << " p "
            << format_double(out.extra["max_interface_jump_p"].get<double>()) << "\n";
  return out;
}

// ---------------------------------------------------------------------------
// layers
// ---------------------------------------------------------------------------

RunOutcome run_layers_cmd(const RunConfig& rc, const Scenario& sc, const std::string& hash) {
  RunOutcome out;
  out.run_dir = rc.out_dir / ("layers-" + hash.substr(0, 12));
  std::filesystem::create_directories(out.run_dir);

  const OuterBundle st = build_outer(sc);
  const LayerSet layers = build_layer_set(sc, st.traces, st.corr_traces);

  struct Named {
    const LayerField* f;
    const char* name;
  };
  const std::array<Named, 6> fields{{{&layers.vb0, "wall_swirl_0"},
                                     {&layers.vs0, "sheet_swirl_0"},
                                     {&layers.tau_b1, "wall_stretch_1"},
                                     {&layers.vb1, "wall_swirl_1"},
                                     {&layers.tau_s1.field, "sheet_stretch_1"},
                                     {&layers.vs1, "sheet_swirl_1"}}};

  json decay = json::object();
  for (const Named& nf : fields) {
    const auto csv = out.run_dir / ("layer_" + std::string(nf.name) + ".csv");
    const auto sidecar = out.run_dir / ("layer_" + std::string(nf.name) + ".json");
    write_layer_csv(csv, *nf.f, sc.grid.output_slices);
    write_layer_sidecar(sidecar, *nf.f, nf.name);
    out.outputs.push_back(csv.string());
    out.outputs.push_back(sidecar.string());

    // Residual layer content at the truncation edges of the final slice; a
    // healthy profile has decayed to its far model there.
    const double t_end = nf.f->times.back();
    double edge = std::abs(nf.f->layer_at(Side::Plus, t_end, nf.f->z_hi()));
    if (nf.f->kind == LayerField::Kind::Sheet)
      edge = std::max(edge, std::abs(nf.f->layer_at(Side::Minus, t_end, nf.f->z_lo())));
    decay[nf.name] = edge;
  }
  double implied = 0.0;
  double tail = 0.0;
  for (std::size_t n = 0; n < layers.tau_s1.implied_front_jump.size(); ++n) {
    implied = std::max(implied, std::abs(layers.tau_s1.implied_front_jump[n]));
    tail = std::max(tail, std::abs(layers.tau_s1.tail_minus[n]));
  }
  out.extra["edge_residuals"] = decay;
  out.extra["max_implied_front_jump"] = implied;
  out.extra["max_sheet_stretch_tail"] = tail;
  out.extra["front_jump_datum_zero"] = zero_front_datum(sc);

  std::cout << "[layers] wrote " << fields.size() << " profiles, implied front jump <= "
            << format_double(implied) << "\n";
  return out;
}

// ---------------------------------------------------------------------------
// viscous
// ---------------------------------------------------------------------------

json viscous_stats(const ViscousSolution& vs) {
  json j;
  j["eps"] = vs.eps;
  j["dt"] = vs.dt;
  j["n_steps"] = vs.n_steps;
  j["cells"] = vs.xs.size();
  j["min_tau"] = vs.min_tau;
  j["max_tau"] = vs.max_tau;
  j["max_geometry_defect"] = vs.max_geometry_defect;
  j["max_far_drift"] = vs.max_far_drift;
  if (!vs.wall_flux_v.empty()) j["wall_flux_v_final"] = vs.wall_flux_v.back();
  return j;
}

RunOutcome run_viscous_cmd(const RunConfig& rc, const Scenario& sc, const std::string& hash) {
  if (!rc.eps_override && sc.eps_list.empty())
    throw ConfigError("no eps given: set eps_list in the config or pass --eps");
  const double eps = rc.eps_override ? *rc.eps_override : sc.eps_list.front();

  RunOutcome out;
  out.key = format_double(eps);
  out.run_dir = rc.out_dir / ("viscous-" + hash.substr(0, 12) + "-" + out.key);
  const MassCoordinateMap map(sc);

  if (rc.resume) {
    if (auto hit = find_cached(rc.out_dir, "viscous", hash, out.key)) {
      for (const std::string& f : hit->outputs) {
        if (f.size() < 4 || f.substr(f.size() - 4) != ".csv" || !std::filesystem::exists(f))
          continue;
        const ViscousSolution vs = read_viscous_csv(f, eps, map.h());
        out.run_dir = hit->run_dir;
        out.extra = viscous_stats(vs);
        out.extra["resumed_from"] = hit->run_dir;
        std::cout << "[viscous] eps " << out.key << " resumed from " << hit->run_dir << "\n";
        return out;
      }
    }
  }

  std::filesystem::create_directories(out.run_dir);
  const ViscousSolution vs = run_viscous(sc, map, eps);
  const auto traj = out.run_dir / "trajectory.csv";
  write_viscous_csv(traj, vs);
  out.outputs.push_back(traj.string());
  out.extra = viscous_stats(vs);

  std::cout << "[viscous] eps " << out.key << ": " << vs.n_steps << " steps on "
            << vs.xs.size() << " cells, geometry defect "
            << format_double(vs.max_geometry_defect) << "\n";
  return out;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct EpsResult {
  double eps = 0.0;
  ErrorMetrics met;
  ResidualNorms res;
  bool resumed = false;
  std::string traj_file;
  double seconds = 0.0;
};

json eps_extra(const EpsResult& r) {
  json j;
  j["eps"] = r.eps;
  j["sup_error"] = r.met.sup_total;
  j["sup_error_v"] = r.met.sup_v;
  j["width_wall"] = r.met.width_wall;
  j["width_front"] = r.met.width_front;
  j["strip_u"] = r.met.strip_u;
  j["strip_tau"] = r.met.strip_tau;
  j["energy_sup"] = r.met.energy_sup;
  j["energy_final"] = r.met.energy_final;
  j["residual_l2l2"] = r.res.total;
  j["residual_grad_tau"] = r.res.eps_grad_tau;
  j["resumed"] = r.resumed;
  j["front_jump_correction"] = "zero datum";
  return j;
}

/// Log-log fits need strictly positive ordinates; degenerate scenarios can
/// produce exact zeros, which we floor instead of letting the fit blow up.
std::vector<double> fit_safe(std::vector<double> v) {
  for (double& x : v)
    if (!(x > 0.0) || !std::isfinite(x)) x = 1e-300;
  return v;
}

RunOutcome run_verify_cmd(const RunConfig& rc, const Scenario& sc, const std::string& hash) {
  if (sc.eps_list.size() < 3) throw ConfigError("need >= 3 eps values to fit");

  RunOutcome out;
  out.key = "summary";
  out.run_dir = rc.out_dir / ("verify-" + hash.substr(0, 12));
  std::filesystem::create_directories(out.run_dir);

  const OuterBundle st = build_outer(sc);
  const LayerSet layers = build_layer_set(sc, st.traces, st.corr_traces);
  const MassCoordinateMap& map = *st.map;

  const std::vector<double>& eps_list = sc.eps_list;
  std::vector<EpsResult> results(eps_list.size());
  std::vector<std::exception_ptr> errors(eps_list.size());
  std::mutex manifest_mutex;
  std::atomic<std::size_t> cursor{0};

  auto worker = [&] {
    while (true) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= eps_list.size()) return;
      try {
        const auto t0 = steady::now();
        EpsResult r;
        r.eps = eps_list[k];
        const std::string key = format_double(r.eps);

        ViscousSolution vs;
        bool have = false;
        if (rc.resume) {
          if (auto hit = find_cached(rc.out_dir, "verify", hash, key)) {
            for (const std::string& f : hit->outputs)
              if (f.size() >= 4 && f.substr(f.size() - 4) == ".csv" &&
                  std::filesystem::exists(f)) {
                vs = read_viscous_csv(f, r.eps, map.h());
                r.resumed = true;
                have = true;
                break;
              }
          }
        }
        if (!have) {
          vs = run_viscous(sc, map, r.eps);
          const auto dir = out.run_dir / ("eps-" + key);
          std::filesystem::create_directories(dir);
          r.traj_file = (dir / "trajectory.csv").string();
          write_viscous_csv(r.traj_file, vs);
        }

        const CompositeExpansion lead(sc, st.outer, &st.corr, layers, r.eps, 0);
        const CompositeExpansion full(sc, st.outer, &st.corr, layers, r.eps, 1);
        r.met = error_metrics(sc, vs, lead, st.outer);
        r.res = composite_residual(full, sc, map, 1, 64);
        r.seconds = seconds_since(t0);

        ManifestRecord rec;
        rec.subcommand = "verify";
        rec.hash_hex = hash;
        rec.key = key;
        rec.status = "ok";
        rec.seconds = r.seconds;
        rec.run_dir = (out.run_dir / ("eps-" + key)).string();
        if (!r.traj_file.empty()) rec.outputs.push_back(r.traj_file);
        rec.parameters_json = sc.canonical_json;
        rec.extra_json = eps_extra(r).dump();
        {
          const std::lock_guard<std::mutex> lock(manifest_mutex);
          append_manifest(rc.out_dir, rec);
        }
        results[k] = std::move(r);
      } catch (...) {
        errors[k] = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::clamp<int>(rc.jobs, 1, static_cast<int>(eps_list.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> eps_v(eps_list.begin(), eps_list.end());
  auto column = [&](auto&& pick) {
    std::vector<double> v(results.size());
    for (std::size_t k = 0; k < results.size(); ++k) v[k] = pick(results[k]);
    return v;
  };
  std::vector<RateTable> tables;
  tables.push_back(make_rate_table("sup_error", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.met.sup_total; }))));
  tables.push_back(make_rate_table("width_wall", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.met.width_wall; }))));
  tables.push_back(make_rate_table("width_front", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.met.width_front; }))));
  tables.push_back(make_rate_table("strip_u", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.met.strip_u; }))));
  tables.push_back(make_rate_table("strip_tau", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.met.strip_tau; }))));
  tables.push_back(make_rate_table("residual_l2l2", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.res.total; }))));
  tables.push_back(make_rate_table("residual_grad_tau", eps_v,
                                   fit_safe(column([](const EpsResult& r) { return r.res.eps_grad_tau; }))));

  // Stability constant of the energy estimate: final-time energy against the
  // squared residual norm should stay within a modest band across the sweep.
  std::vector<double> gronwall;
  double g_lo = 0.0, g_hi = 0.0;
  for (const EpsResult& r : results) {
    const double denom = r.res.total * r.res.total;
    const double ratio = denom > 1e-280 ? r.met.energy_final / denom : 0.0;
    gronwall.push_back(ratio);
    if (ratio > 0.0) {
      g_lo = g_lo == 0.0 ? ratio : std::min(g_lo, ratio);
      g_hi = std::max(g_hi, ratio);
    }
  }

  json context;
  context["front_jump_correction"] = "zero datum";
  context["front_jump_datum_zero"] = zero_front_datum(sc);
  context["gronwall_ratio"] = gronwall;
  context["gronwall_spread"] = g_lo > 0.0 ? g_hi / g_lo : 0.0;
  json slopes = json::object();
  for (const RateTable& t : tables) slopes[t.name] = t.fit.slope;
  context["slopes"] = slopes;
  context["resumed"] = column([](const EpsResult& r) { return r.resumed ? 1.0 : 0.0; });
  out.extra = context;

  // On a resumed sweep the rate files already exist and belong to the earlier
  // summary record; rewriting them would leave two records claiming the same
  // outputs. The fresh slopes still go in this record's extra block.
  bool write_files = true;
  if (rc.resume) {
    if (auto hit = find_cached(rc.out_dir, "verify", hash, "summary")) {
      write_files = false;
      out.extra["resumed_from"] = hit->run_dir;
    }
  }
  if (write_files) {
    const auto rates_csv = out.run_dir / "rates.csv";
    const auto rates_json = out.run_dir / "rates.json";
    write_rate_csv(rates_csv, tables);
    write_rate_summary(rates_json, tables, context.dump());
    out.outputs.push_back(rates_csv.string());
    out.outputs.push_back(rates_json.string());
    for (const RateTable& t : tables) {
      const auto dat = out.run_dir / ("rate_" + t.name + ".dat");
      write_gnuplot_dat(dat, t);
      out.outputs.push_back(dat.string());
    }
  }

  for (const EpsResult& r : results)
    std::cout << "[verify] eps " << format_double(r.eps) << ": sup "
              << format_double(r.met.sup_total) << ", width " << format_double(r.met.width_wall)
              << "/" << format_double(r.met.width_front) << ", residual "
              << format_double(r.res.total) << (r.resumed ? " (resumed)" : "") << " in "
              << format_double(r.seconds) << " s\n";
  std::cout << "[verify] slopes:";
  for (const RateTable& t : tables) std::cout << ' ' << t.name << ' ' << format_double(t.fit.slope);
  std::cout << "\n";
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

int dispatch(const std::string& subcommand, const RunConfig& rc) {
  const auto t0 = steady::now();
  ManifestRecord rec;
  rec.subcommand = subcommand;
  rec.status = "ok";
  rec.hash_hex = hash_hex_of(rc.config_text);
  int code = 0;
  try {
    if (subcommand != "euler" && subcommand != "layers" && subcommand != "viscous" &&
        subcommand != "verify")
      throw ConfigError("unknown subcommand '" + subcommand +
                        "' (expected euler, layers, viscous, or verify)");
    if (rc.eps_override && subcommand != "viscous")
      throw ConfigError("--eps applies only to the viscous subcommand");

    const Scenario sc = scenario_from_json(rc.config_text);
    rec.hash_hex = hash_hex_of(sc.canonical_json);
    rec.parameters_json = sc.canonical_json;
    require_compatible(sc);

    RunOutcome out;
    if (subcommand == "euler")
      out = run_euler_cmd(rc, sc, rec.hash_hex);
    else if (subcommand == "layers")
      out = run_layers_cmd(rc, sc, rec.hash_hex);
    else if (subcommand == "viscous")
      out = run_viscous_cmd(rc, sc, rec.hash_hex);
    else
      out = run_verify_cmd(rc, sc, rec.hash_hex);

    rec.key = out.key;
    rec.run_dir = out.run_dir.string();
    rec.outputs = out.outputs;
    rec.extra_json = out.extra.dump();
  } catch (const ConfigError& e) {
    rec.status = "config-error";
    rec.message = e.what();
    code = 2;
  } catch (const DataError& e) {
    rec.status = "data-error";
    rec.message = e.what();
    code = 2;
  } catch (const FeasibilityError& e) {
    rec.status = "infeasible";
    rec.message = e.what();
    code = 3;
  } catch (const SolverError& e) {
    rec.status = "solver-failure";
    rec.message = e.what();
    code = 4;
  } catch (const std::exception& e) {
    rec.status = "solver-failure";
    rec.message = e.what();
    code = 4;
  }
  rec.seconds = seconds_since(t0);
  try {
    append_manifest(rc.out_dir, rec);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot append manifest: " << e.what() << "\n";
    if (code == 0) code = 2;
  }
  if (code != 0) std::cerr << "error: " << rec.message << "\n";
  return code;
}

}  // namespace vortex
