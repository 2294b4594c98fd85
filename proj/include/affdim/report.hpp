#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "affdim/config.hpp"

namespace affdim {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" otherwise.
std::string format_number(double x);

/// RFC-4180 table with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_field(const std::string& field);

/// Report skeleton: tool, version, command, effective config, seed, metric
/// choices and calibration constants, with `metrics` as the body.
nlohmann::ordered_json make_report(const RunConfig& config, nlohmann::ordered_json metrics);

nlohmann::ordered_json calibration_constants();

/// NaN and infinities become strings so the document stays valid JSON.
nlohmann::ordered_json json_number(double x);

void write_file(const std::string& path, const std::string& content);

}  // namespace affdim
