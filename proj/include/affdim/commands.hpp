#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "affdim/config.hpp"

namespace affdim {

std::vector<std::string> command_names();

/// Sample budget used when --samples is not given.
std::size_t default_samples(const std::string& command);

/// Runs one command: human summary to `out`, JSON/CSV artifacts under
/// config.out_dir, structured error JSON to `err`. Returns 0 on completion,
/// 2 on a hypothesis-failure verdict, 1 on errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace affdim
