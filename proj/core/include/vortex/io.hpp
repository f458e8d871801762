#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vortex/asymptotics.hpp"
#include "vortex/euler_front.hpp"
#include "vortex/layer_profiles.hpp"
#include "vortex/viscous.hpp"

namespace vortex {

/// Shortest decimal form that round-trips the double exactly; every writer
/// goes through this, which is what makes repeated runs bit-identical.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

/// One file per selected time level (columns x, tau, u, v, side) plus an index
/// file mapping slice number to time. Returns the written paths.
std::vector<std::filesystem::path> write_outer_slices(const std::filesystem::path& dir,
                                                      const OuterSolution& outer,
                                                      std::size_t max_slices);

void write_front_csv(const std::filesystem::path& file, const FrontSeries& front);

/// Long-form table (t, z, value) over at most max_slices stored levels.
void write_layer_csv(const std::filesystem::path& file, const LayerField& f,
                     std::size_t max_slices);

/// Far-field traces and weighted-norm series for one layer field.
void write_layer_sidecar(const std::filesystem::path& file, const LayerField& f,
                         const std::string& name);

void write_viscous_csv(const std::filesystem::path& file, const ViscousSolution& vs);

/// Rebuild a solution from its slice file; eps and h are not stored in the
/// CSV, so the caller supplies them.
ViscousSolution read_viscous_csv(const std::filesystem::path& file, double eps, double h);

void write_rate_csv(const std::filesystem::path& file, const std::vector<RateTable>& tables);

/// JSON summary of all fitted tables; extra_json (an object, may be "{}")
/// is merged in under "context".
void write_rate_summary(const std::filesystem::path& file, const std::vector<RateTable>& tables,
                        const std::string& extra_json);

/// Two-column log-log data file for gnuplot.
void write_gnuplot_dat(const std::filesystem::path& file, const RateTable& table);

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// One line of the append-only manifest log. parameters_json and extra_json
/// hold already-serialized objects so the header stays JSON-library-free.
struct ManifestRecord {
  std::string subcommand;
  std::string hash_hex;
  std::string key;      // distinguishes per-eps runs, empty otherwise
  std::string status;   // ok | config-error | data-error | infeasible | solver-failure
  std::string message;  // failure detail, empty when ok
  double seconds = 0.0;
  std::string run_dir;
  std::vector<std::string> outputs;
  std::string parameters_json = "{}";
  std::string extra_json = "{}";
};

/// Append one record to <out_dir>/manifest.jsonl, creating it if needed.
void append_manifest(const std::filesystem::path& out_dir, const ManifestRecord& rec);

/// Most recent successful record matching (subcommand, hash, key), if any.
std::optional<ManifestRecord> find_cached(const std::filesystem::path& out_dir,
                                          const std::string& subcommand,
                                          const std::string& hash_hex, const std::string& key);

std::string hash_hex_of(const std::string& canonical_json);

}  // namespace vortex
