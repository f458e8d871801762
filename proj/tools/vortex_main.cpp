#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vortex/io.hpp"
#include "vortex/pipeline.hpp"

namespace {

const char* describe(const std::string& name) {
  if (name == "euler") return "solve the inviscid outer flow, write front and slice tables";
  if (name == "layers") return "build wall and sheet layer profiles from the outer flow";
  if (name == "viscous") return "march the viscous system at one viscosity value";
  return "run the eps sweep, fit convergence rates, write summaries";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vanishing-viscosity toolkit for a cylindrical vortex sheet"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  double eps = 0.0;
  int jobs = 1;
  bool resume = false;

  for (const std::string name : {"euler", "layers", "viscous", "verify"}) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "scenario JSON file")
        ->required()
        ->type_name("PATH");
    sub->add_option("--eps", eps, "viscosity scale for a single viscous run")
        ->type_name("FLOAT");
    sub->add_option("--out", out_dir, "output root (env VORTEX_OUT overrides)")
        ->type_name("DIR");
    sub->add_option("--jobs", jobs, "max concurrent sweep runs")
        ->check(CLI::PositiveNumber)
        ->type_name("N");
    sub->add_flag("--resume", resume, "reuse cached runs recorded in the manifest");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();

  vortex::RunConfig rc;
  rc.config_path = config_path;
  rc.out_dir = out_dir;
  if (const char* env = std::getenv("VORTEX_OUT"); env != nullptr && *env != '\0')
    rc.out_dir = env;
  rc.jobs = jobs;
  rc.resume = resume;
  if (sub->count("--eps") > 0) rc.eps_override = eps;

  std::ifstream in(config_path);
  if (!in) {
    vortex::ManifestRecord rec;
    rec.subcommand = sub->get_name();
    rec.hash_hex = vortex::hash_hex_of(config_path);
    rec.status = "config-error";
    rec.message = "cannot read config file " + config_path;
    try {
      vortex::append_manifest(rc.out_dir, rec);
    } catch (const std::exception&) {
    }
    std::cerr << "error: " << rec.message << "\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  rc.config_text = buf.str();

  return vortex::dispatch(sub->get_name(), rc);
}
