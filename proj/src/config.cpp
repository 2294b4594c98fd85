#include "affdim/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace affdim {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxSamples = 50'000'000;
constexpr int kMaxLevel = 40;

[[noreturn]] void parse_fail(const std::string& message) { throw Error(ErrorCode::ParseError, message); }

}  // namespace

double parse_number(const json& value, const std::string& path) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size() && errno == 0) return x;
  }
  parse_fail(path + ": expected a number or decimal string");
}

IfsSystem parse_system(const json& doc, bool* p_defaulted) {
  if (!doc.is_object()) parse_fail("system document must be a JSON object");
  IfsSystem system;
  system.name = doc.value("name", std::string("inline"));
  if (!doc.contains("maps") || !doc["maps"].is_array()) parse_fail("\"maps\" must be an array");
  const json& maps = doc["maps"];
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string where = "maps[" + std::to_string(i) + "]";
    const json& m = maps[i];
    if (!m.is_object() || !m.contains("A") || !m.contains("b")) parse_fail(where + ": needs \"A\" and \"b\"");
    const json& a = m["A"];
    if (!a.is_array() || a.size() != 2 || !a[0].is_array() || !a[1].is_array() || a[0].size() != 2 ||
        a[1].size() != 2) {
      parse_fail(where + ".A: expected a 2x2 matrix [[a11, a12], [a21, a22]]");
    }
    const json& b = m["b"];
    if (!b.is_array() || b.size() != 2) parse_fail(where + ".b: expected a 2-vector");
    Matrix2d lin;
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) {
        lin(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            parse_number(a[r][c], where + ".A[" + std::to_string(r) + "][" + std::to_string(c) + "]");
      }
    }
    const Vector2d t(parse_number(b[0], where + ".b[0]"), parse_number(b[1], where + ".b[1]"));
    system.maps.emplace_back(lin, t);
  }
  if (doc.contains("p")) {
    if (!doc["p"].is_array()) parse_fail("\"p\" must be an array");
    for (std::size_t i = 0; i < doc["p"].size(); ++i) {
      system.probs.push_back(parse_number(doc["p"][i], "p[" + std::to_string(i) + "]"));
    }
    if (p_defaulted) *p_defaulted = false;
  } else {
    system.probs.assign(system.maps.size(), system.maps.empty() ? 0.0 : 1.0 / static_cast<double>(system.maps.size()));
    if (p_defaulted) *p_defaulted = true;
  }
  return system;
}

void load_config_text(const std::string& text, const std::string& origin, RunConfig& config) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    parse_fail(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": malformed JSON");
  }
  config.system = parse_system(doc, &config.p_defaulted);
  config.system_source = "file:" + origin;
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (s.is_number_unsigned() || s.is_number_integer()) {
      config.seed = s.get<std::uint64_t>();
    } else if (s.is_string()) {
      config.seed = std::stoull(s.get<std::string>());
    } else {
      parse_fail("seed: expected an integer");
    }
  }
  if (doc.contains("samples")) config.samples = static_cast<std::size_t>(parse_number(doc["samples"], "samples"));
  if (doc.contains("nmax")) config.nmax = static_cast<int>(parse_number(doc["nmax"], "nmax"));
  if (doc.contains("tolerances")) {
    if (!doc["tolerances"].is_object()) parse_fail("tolerances: expected an object");
    for (const auto& [key, value] : doc["tolerances"].items()) {
      config.tolerances[key] = parse_number(value, "tolerances." + key);
    }
  }
}

void load_config(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  load_config_text(buffer.str(), path, config);
}

void validate_config(const RunConfig& config) {
  static const std::map<std::string, bool> stochastic = {
      {"validate", false}, {"sample", true},    {"lyapunov", true}, {"furstenberg", true},
      {"separation", false}, {"entropy", true}, {"dimension", true}, {"verify", true},
      {"convolve", true},  {"fixtures", false}};
  const auto it = stochastic.find(config.command);
  if (it == stochastic.end()) throw Error(ErrorCode::ValidationError, "command: unknown \"" + config.command + "\"");
  if (config.command == "fixtures") return;
  if (config.system.maps.empty()) throw Error(ErrorCode::ValidationError, "system: give --fixture or --config");
  if (it->second && !config.seed) {
    throw Error(ErrorCode::ValidationError, "seed: required for " + config.command);
  }
  if (config.samples == 0 || config.samples > kMaxSamples) {
    throw Error(ErrorCode::ValidationError, "samples: must be in [1, " + std::to_string(kMaxSamples) + "]");
  }
  if (config.nmax < 1 || config.nmax > kMaxLevel) {
    throw Error(ErrorCode::ValidationError, "nmax: must be in [1, " + std::to_string(kMaxLevel) + "]");
  }
}

nlohmann::ordered_json system_to_json(const IfsSystem& system) {
  nlohmann::ordered_json doc;
  doc["name"] = system.name;
  doc["maps"] = nlohmann::ordered_json::array();
  for (const auto& m : system.maps) {
    doc["maps"].push_back({{"A", {{m.linear(0, 0), m.linear(0, 1)}, {m.linear(1, 0), m.linear(1, 1)}}},
                           {"b", {m.translation(0), m.translation(1)}}});
  }
  doc["p"] = system.probs;
  return doc;
}

nlohmann::ordered_json config_echo(const RunConfig& config) {
  nlohmann::ordered_json doc;
  doc["command"] = config.command;
  doc["system_source"] = config.system_source;
  if (!config.system.maps.empty()) doc["system"] = system_to_json(config.system);
  doc["p_defaulted_to_uniform"] = config.p_defaulted;
  if (config.seed) {
    doc["seed"] = *config.seed;
  } else {
    doc["seed"] = nullptr;
  }
  doc["samples"] = config.samples;
  doc["nmax"] = config.nmax;
  doc["word_cap"] = config.cap;
  doc["tolerances"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.tolerances) doc["tolerances"][k] = v;
  return doc;
}

double tolerance(const RunConfig& config, const std::string& name, double fallback) {
  const auto it = config.tolerances.find(name);
  return it == config.tolerances.end() ? fallback : it->second;
}

}  // namespace affdim
