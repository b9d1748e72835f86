#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "floq/floq.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_command(floq_status (*cmd)(const char*, const char*, int64_t,
                                   const char*, char**),
                const std::string& config_path, const std::string& out_dir,
                int64_t seed, const std::string& params) {
  std::string config = config_path.empty() ? "{}" : read_file(config_path);
  char* summary = nullptr;
  floq_status st = cmd(config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                       seed, params.empty() ? nullptr : params.c_str(), &summary);
  if (summary) {
    std::printf("%s\n", summary);
    floq_string_free(summary);
  }
  if (st == FLOQ_OK) return 0;
  std::fprintf(stderr, "error: %s\n", floq_last_error());
  return st == FLOQ_ERR_INVARIANT ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"floq: Floquet analysis and Sobolev-growth experiments for the "
               "time-dependent Schrodinger equation on the circle"};
  app.require_subcommand(1);

  std::string config_path, out_dir, params;
  int64_t seed = -1;
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "directory for result files");
  app.add_option("--seed", seed, "RNG seed override");
  app.add_option("--params", params, "parameter pack name (default|wide)");

  struct Sub {
    const char* name;
    const char* help;
    floq_status (*fn)(const char*, const char*, int64_t, const char*, char**);
  };
  const Sub subs[] = {
      {"simulate", "one growth run with exponent fit", floq_cmd_simulate},
      {"floquet", "assemble + eigensolve + export", floq_cmd_floquet},
      {"localize", "eigenfunction localization dichotomy report",
       floq_cmd_localize},
      {"estimates", "a priori estimate measurement suite", floq_cmd_estimates},
      {"compare", "scenario comparison table", floq_cmd_compare},
      {"plot-data", "gnuplot-ready two-column growth files", floq_cmd_plot_data},
  };
  // let "floq simulate --config ..." resolve the global options
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& s : subs)
      if (app.got_subcommand(s.name))
        return run_command(s.fn, config_path, out_dir, seed, params);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
