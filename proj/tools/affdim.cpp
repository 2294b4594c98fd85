#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affdim/commands.hpp"
#include "affdim/config.hpp"
#include "affdim/error.hpp"
#include "affdim/fixtures.hpp"

namespace {

void fail(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::ordered_json{{"error", code}, {"message", message}}.dump() << "\n";
}

// Pulls --tolerance.<name>=v and --tolerance.<name> v out of argv; CLI11 has
// no notion of dynamic option names.
std::vector<std::string> take_tolerances(std::vector<std::string> args, std::map<std::string, double>& out) {
  const std::string prefix = "--tolerance.";
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind(prefix, 0) != 0) {
      rest.push_back(a);
      continue;
    }
    std::string name = a.substr(prefix.size()), value;
    const auto eq = name.find('=');
    if (eq != std::string::npos) {
      value = name.substr(eq + 1);
      name.resize(eq);
    } else if (i + 1 < args.size()) {
      value = args[++i];
    }
    out[name] = affdim::parse_number(nlohmann::json(value), "tolerance." + name);
  }
  return rest;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace affdim;
  RunConfig config;
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = take_tolerances(args, config.tolerances);
  } catch (const Error& e) {
    fail(std::string(to_string(e.code())), e.what());
    return 1;
  }

  CLI::App app{"Dimension toolkit for planar self-affine measures"};
  app.name("affdim");
  std::string config_path, fixture_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<int> nmax, threads;
  std::optional<std::size_t> cap;
  app.add_option("command", config.command, "validate | sample | lyapunov | furstenberg | separation | "
                                            "entropy | dimension | verify | convolve | fixtures")
      ->required();
  app.add_option("--config", config_path, "system JSON file");
  app.add_option("--fixture", fixture_name, "shipped fixture: F1, F2, F2r, F3, F4, dyadic");
  app.add_option("--seed", seed, "64-bit seed (required for stochastic commands)");
  app.add_option("--samples", samples, "sample budget N");
  app.add_option("--nmax", nmax, "finest level / maximal word length");
  app.add_option("--cap", cap, "word enumeration cap");
  app.add_option("--out-dir", config.out_dir, "artifact directory");
  app.add_option("--threads", threads, "worker threads (default AFFDIM_THREADS or hardware)");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("ValidationError", e.what());
    return 1;
  }

  try {
    if (!config_path.empty() && !fixture_name.empty()) {
      throw Error(ErrorCode::ValidationError, "system: give only one of --fixture and --config");
    }
    config.system_source = "none";
    config.samples = default_samples(config.command);
    if (!config_path.empty()) load_config(config_path, config);
    if (!fixture_name.empty()) {
      config.system = fixture(fixture_name);
      config.system_source = "fixture:" + fixture_name;
    }
    if (seed) config.seed = seed;
    if (samples) config.samples = *samples;
    if (nmax) config.nmax = *nmax;
    if (cap) config.cap = *cap;
    if (threads) {
      config.threads = *threads;
    } else if (const char* env = std::getenv("AFFDIM_THREADS")) {
      config.threads = std::atoi(env);
    }
  } catch (const Error& e) {
    fail(std::string(to_string(e.code())), e.what());
    return 1;
  }
  return run(config, std::cout, std::cerr);
}
