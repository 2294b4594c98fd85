#include "affdim/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "affdim/convolution.hpp"
#include "affdim/dimension.hpp"
#include "affdim/entropy.hpp"
#include "affdim/separation.hpp"
#include "affdim/spectral.hpp"

namespace affdim {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

nlohmann::ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

nlohmann::ordered_json calibration_constants() {
  return {
      {"entropy_bias_factor", kBiasFactor},
      {"coincidence_threshold", kCoincidenceThreshold},
      {"conic_threshold", kConicThreshold},
      {"affinity_threshold", kAffinityThreshold},
      {"h3_threshold", kH3Threshold},
      {"h3_slack", kH3Slack},
      {"invariant_line_tolerance", kInvariantTolerance},
      {"borderline_line_tolerance", kBorderlineTolerance},
      {"triangular_rate_tolerance", kRateTolerance},
      {"l_dispersion_tolerance", kLDispersionTolerance},
      {"l_convergence_ratio", kLConvergence},
      {"l_tail_cap", kLTailCap},
      {"furstenberg_burnin", kDefaultBurnin},
      {"furstenberg_start_lines", kStartLines},
      {"projection_sweep_angles", kSweepAngles},
      {"convolution_thin_target", kThinTarget},
      {"word_cap", kDefaultWordCap},
      {"sample_depth_margin_levels", default_depth(0)},
  };
}

nlohmann::ordered_json make_report(const RunConfig& config, nlohmann::ordered_json metrics) {
  nlohmann::ordered_json doc;
  doc["tool"] = "affdim";
  doc["version"] = kToolVersion;
  doc["command"] = config.command;
  doc["seed"] = config.seed ? nlohmann::ordered_json(*config.seed) : nlohmann::ordered_json(nullptr);
  doc["config"] = config_echo(config);
  doc["metric"] = {{"affine_group", "frobenius norm of 3x3 embedding difference"},
                   {"entropy", "plug-in Shannon entropy, base 2, half-open dyadic cells"}};
  doc["calibration"] = calibration_constants();
  doc["results"] = std::move(metrics);
  return doc;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ValidationError, "out-dir: cannot write " + path);
  out << content;
}

}  // namespace affdim
