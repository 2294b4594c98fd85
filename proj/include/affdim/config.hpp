#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "affdim/ifs.hpp"

namespace affdim {

struct RunConfig {
  std::string command;
  IfsSystem system;
  std::string system_source;  // "fixture:<name>", "file:<path>" or "none"
  bool p_defaulted = false;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 100'000;
  int nmax = 8;
  std::size_t cap = kDefaultWordCap;
  std::string out_dir = ".";
  std::map<std::string, double> tolerances;
  int threads = 0;  // 0: AFFDIM_THREADS or hardware
};

/// Parses a decimal string or JSON number to the nearest double.
double parse_number(const nlohmann::json& value, const std::string& path);

/// {"name": ..., "maps": [{"A": [[..],[..]], "b": [..]}, ...], "p": [...]}.
/// Missing "p" means uniform; `p_defaulted` reports that.
IfsSystem parse_system(const nlohmann::json& doc, bool* p_defaulted = nullptr);

/// Reads a system document (optionally with "seed", "samples", "nmax",
/// "tolerances") into `config`. Throws ParseError with line and column.
void load_config(const std::string& path, RunConfig& config);
void load_config_text(const std::string& text, const std::string& origin, RunConfig& config);

/// Checks budgets and required fields for the configured command.
void validate_config(const RunConfig& config);

nlohmann::ordered_json system_to_json(const IfsSystem& system);
nlohmann::ordered_json config_echo(const RunConfig& config);

double tolerance(const RunConfig& config, const std::string& name, double fallback);

}  // namespace affdim
