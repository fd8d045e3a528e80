#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "polaron/model.hpp"

namespace polaron::io {

using json = nlohmann::json;

/// Model definition: {"d", "m", "alpha", "v": {...}, "eps": {...}}, each profile
/// {"kind", "params", "decay_scale"} and optionally {"table": [[r, value], ...]}.
PolaronModel model_from_json(const json& j);
json model_to_json(const PolaronModel& model);
PolaronModel load_model(const std::filesystem::path& path);

/// Shortest decimal that round-trips.
std::string format_double(double x);

/// One RFC-4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a64(std::string_view bytes);

/// Writes `content` and returns its hash.
std::string write_file(const std::filesystem::path& path, std::string_view content);

/// Comma-separated list of reals, e.g. "1,10,1e2".
std::vector<double> parse_list(std::string_view text);

}  // namespace polaron::io
