#include "vortex/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vortex {

using json = nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& file, bool append = false) {
  std::ofstream out(file, append ? std::ios::app : std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  return out;
}

/// Evenly spaced level subset including both ends.
std::vector<std::size_t> pick_levels(std::size_t n, std::size_t want) {
  want = std::min(std::max<std::size_t>(want, 2), n);
  std::vector<std::size_t> idx(want);
  for (std::size_t k = 0; k < want; ++k)
    idx[k] = (n == 1) ? 0 : (k * (n - 1) + (want - 1) / 2) / (want - 1);
  idx.front() = 0;
  idx.back() = n - 1;
  return idx;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw DataError("bad numeric field '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

std::vector<std::filesystem::path> write_outer_slices(const std::filesystem::path& dir,
                                                      const OuterSolution& outer,
                                                      std::size_t max_slices) {
  std::vector<std::filesystem::path> written;
  const auto levels = pick_levels(outer.times.size(), max_slices);

  auto index = open_out(dir / "outer_slices.csv");
  index << "slice,t,file\n";
  for (std::size_t k = 0; k < levels.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof(name), "outer_slice_%03zu.csv", k);
    const std::filesystem::path file = dir / name;
    auto out = open_out(file);
    out << "x,tau,u,v,side\n";
    const std::size_t lev = levels[k];
    for (Side s : {Side::Minus, Side::Plus}) {
      const char tag = (s == Side::Minus) ? '-' : '+';
      const auto& xs = outer.xs.nodes(s);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        out << format_double(xs[i]) << ',' << format_double(outer.fields[lev][s][0][i]) << ','
            << format_double(outer.fields[lev][s][1][i]) << ','
            << format_double(outer.fields[lev][s][2][i]) << ',' << tag << '\n';
      }
    }
    index << k << ',' << format_double(outer.times[lev]) << ',' << name << '\n';
    written.push_back(file);
  }
  written.push_back(dir / "outer_slices.csv");
  return written;
}

void write_front_csv(const std::filesystem::path& file, const FrontSeries& front) {
  auto out = open_out(file);
  out << "t,phi,phi_prime\n";
  for (std::size_t n = 0; n < front.times.size(); ++n)
    out << format_double(front.times[n]) << ',' << format_double(front.phi[n]) << ','
        << format_double(front.phi_prime[n]) << '\n';
}

void write_layer_csv(const std::filesystem::path& file, const LayerField& f,
                     std::size_t max_slices) {
  auto out = open_out(file);
  out << "t,z,value\n";
  for (std::size_t lev : pick_levels(f.times.size(), max_slices)) {
    const std::string ts = format_double(f.times[lev]);
    for (std::size_t i = 0; i < f.zs.size(); ++i)
      out << ts << ',' << format_double(f.zs[i]) << ',' << format_double(f.values[lev][i])
          << '\n';
  }
}

void write_layer_sidecar(const std::filesystem::path& file, const LayerField& f,
                         const std::string& name) {
  json j;
  j["name"] = name;
  j["kind"] = f.kind == LayerField::Kind::Wall ? "wall" : "sheet";
  j["times"] = f.times;
  j["far_base"] = {{"minus", f.base[Side::Minus]}, {"plus", f.base[Side::Plus]}};
  j["far_slope"] = {{"minus", f.slope[Side::Minus]}, {"plus", f.slope[Side::Plus]}};

  json norms;
  const std::array<std::pair<const char*, std::pair<int, int>>, 4> kinds{
      {{"l2", {0, 0}}, {"weighted_l2", {2, 0}}, {"dz_l2", {0, 1}}, {"dzz_l2", {0, 2}}}};
  for (const auto& [key, nl] : kinds) {
    std::vector<double> series(f.times.size());
    for (std::size_t lev = 0; lev < f.times.size(); ++lev)
      series[lev] = weighted_norm(f, lev, nl.first, nl.second);
    norms[key] = series;
  }
  j["weighted_norms"] = norms;
  open_out(file) << j.dump(2) << '\n';
}

void write_viscous_csv(const std::filesystem::path& file, const ViscousSolution& vs) {
  auto out = open_out(file);
  out << "t,x,tau,u,v,r\n";
  for (std::size_t lev = 0; lev < vs.times.size(); ++lev) {
    const std::string ts = format_double(vs.times[lev]);
    for (std::size_t i = 0; i < vs.xs.size(); ++i) {
      const Vec3& s = vs.states[lev][i];
      out << ts << ',' << format_double(vs.xs[i]) << ',' << format_double(s[0]) << ','
          << format_double(s[1]) << ',' << format_double(s[2]) << ','
          << format_double(vs.radii[lev][i]) << '\n';
    }
  }
}

ViscousSolution read_viscous_csv(const std::filesystem::path& file, double eps, double h) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,", 0) != 0)
    throw DataError(file.string() + ": not a trajectory slice file");

  ViscousSolution vs;
  vs.eps = eps;
  vs.h = h;
  bool first_slice = true;
  std::size_t col = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 6) throw DataError(file.string() + ": malformed row");
    const double t = parse_double(fields[0]);
    if (vs.times.empty() || t != vs.times.back()) {
      if (!vs.times.empty()) {
        if (first_slice) first_slice = false;
        if (col != vs.xs.size()) throw DataError(file.string() + ": ragged slices");
      }
      vs.times.push_back(t);
      vs.states.emplace_back();
      vs.radii.emplace_back();
      col = 0;
    }
    const double x = parse_double(fields[1]);
    if (first_slice)
      vs.xs.push_back(x);
    else if (x != vs.xs.at(col))
      throw DataError(file.string() + ": slice grids differ");
    vs.states.back().push_back({parse_double(fields[2]), parse_double(fields[3]),
                                parse_double(fields[4])});
    vs.radii.back().push_back(parse_double(fields[5]));
    ++col;
  }
  if (vs.times.empty()) throw DataError(file.string() + ": no data rows");
  if (col != vs.xs.size()) throw DataError(file.string() + ": truncated final slice");
  vs.dt = vs.times.size() > 1 ? vs.times[1] - vs.times[0] : 0.0;
  vs.n_steps = vs.times.size() - 1;
  vs.min_tau = vs.max_tau = vs.states[0][0][0];
  for (const auto& slice : vs.states)
    for (const Vec3& s : slice) {
      vs.min_tau = std::min(vs.min_tau, s[0]);
      vs.max_tau = std::max(vs.max_tau, s[0]);
    }
  return vs;
}

void write_rate_csv(const std::filesystem::path& file, const std::vector<RateTable>& tables) {
  auto out = open_out(file);
  out << "table,eps,value\n";
  for (const RateTable& t : tables)
    for (std::size_t k = 0; k < t.eps.size(); ++k)
      out << t.name << ',' << format_double(t.eps[k]) << ',' << format_double(t.values[k])
          << '\n';
}

void write_rate_summary(const std::filesystem::path& file, const std::vector<RateTable>& tables,
                        const std::string& extra_json) {
  json j;
  j["tables"] = json::array();
  for (const RateTable& t : tables) {
    json tj;
    tj["name"] = t.name;
    tj["slope"] = t.fit.slope;
    tj["intercept"] = t.fit.intercept;
    tj["r_squared"] = t.fit.r_squared;
    tj["slope_stderr"] = t.fit.slope_stderr;
    tj["ci_half_width"] = t.fit.ci_half_width;
    json pts = json::array();
    for (std::size_t k = 0; k < t.eps.size(); ++k)
      pts.push_back({{"eps", t.eps[k]}, {"value", t.values[k]}});
    tj["points"] = pts;
    j["tables"].push_back(tj);
  }
  j["context"] = json::parse(extra_json);
  open_out(file) << j.dump(2) << '\n';
}

void write_gnuplot_dat(const std::filesystem::path& file, const RateTable& table) {
  auto out = open_out(file);
  out << "# " << table.name << "\n# eps value\n";
  for (std::size_t k = 0; k < table.eps.size(); ++k)
    out << format_double(table.eps[k]) << ' ' << format_double(table.values[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::string hash_hex_of(const std::string& canonical_json) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_json)));
  return buf;
}

void append_manifest(const std::filesystem::path& out_dir, const ManifestRecord& rec) {
  std::filesystem::create_directories(out_dir);
  json j;
  j["subcommand"] = rec.subcommand;
  j["hash"] = rec.hash_hex;
  j["key"] = rec.key;
  j["status"] = rec.status;
  j["message"] = rec.message;
  j["seconds"] = rec.seconds;
  j["run_dir"] = rec.run_dir;
  j["outputs"] = rec.outputs;
  j["parameters"] = json::parse(rec.parameters_json);
  j["extra"] = json::parse(rec.extra_json);
  open_out(out_dir / "manifest.jsonl", true) << j.dump() << '\n';
}

std::optional<ManifestRecord> find_cached(const std::filesystem::path& out_dir,
                                          const std::string& subcommand,
                                          const std::string& hash_hex, const std::string& key) {
  std::ifstream in(out_dir / "manifest.jsonl");
  if (!in) return std::nullopt;
  std::optional<ManifestRecord> found;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    if (j.value("subcommand", "") != subcommand || j.value("hash", "") != hash_hex ||
        j.value("key", "") != key || j.value("status", "") != "ok")
      continue;
    ManifestRecord rec;
    rec.subcommand = subcommand;
    rec.hash_hex = hash_hex;
    rec.key = key;
    rec.status = "ok";
    rec.message = j.value("message", "");
    rec.seconds = j.value("seconds", 0.0);
    rec.run_dir = j.value("run_dir", "");
    if (j.contains("outputs"))
      for (const auto& o : j["outputs"]) rec.outputs.push_back(o.get<std::string>());
    rec.parameters_json = j.contains("parameters") ? j["parameters"].dump() : "{}";
    rec.extra_json = j.contains("extra") ? j["extra"].dump() : "{}";
    found = std::move(rec);
  }
  return found;
}

}  // namespace vortex
