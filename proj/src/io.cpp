#include "polaron/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "polaron/errors.hpp"

namespace polaron::io {

namespace {

RadialProfile profile_from_json(const json& j, const char* which) {
  if (!j.is_object()) throw PolaronError(ErrorCode::InvalidModel, std::string(which) + " must be an object");
  const ProfileKind kind = profile_kind_from_string(j.at("kind").get<std::string>());
  std::vector<double> params = j.value("params", std::vector<double>{});
  const double decay = j.value("decay_scale", 1.0);
  std::vector<std::pair<double, double>> table;
  if (j.contains("table")) {
    for (const auto& knot : j.at("table")) {
      if (!knot.is_array() || knot.size() != 2) {
        throw PolaronError(ErrorCode::InvalidModel, std::string(which) + ".table entries must be [r, value]");
      }
      table.emplace_back(knot[0].get<double>(), knot[1].get<double>());
    }
  }
  // A constant may be written with the single parameter [value].
  if (kind == ProfileKind::PowerWithCutoff && params.size() == 1) params = {params[0], 0.0, 0.0};
  return RadialProfile(kind, std::move(params), decay, std::move(table));
}

json profile_to_json(const RadialProfile& p) {
  json j;
  j["kind"] = std::string(to_string(p.kind()));
  j["params"] = p.params();
  j["decay_scale"] = p.decay_scale();
  if (!p.table().empty()) {
    json table = json::array();
    for (const auto& [r, v] : p.table()) table.push_back({r, v});
    j["table"] = table;
  }
  return j;
}

}  // namespace

PolaronModel model_from_json(const json& j) {
  try {
    if (!j.is_object()) throw PolaronError(ErrorCode::InvalidModel, "model file must hold a JSON object");
    return PolaronModel(j.at("d").get<int>(), j.value("m", 1.0), j.value("alpha", 1.0),
                        profile_from_json(j.at("v"), "v"), profile_from_json(j.at("eps"), "eps"));
  } catch (const json::exception& e) {
    throw PolaronError(ErrorCode::InvalidModel, std::string("model JSON: ") + e.what());
  }
}

json model_to_json(const PolaronModel& model) {
  return {{"d", model.d},
          {"m", model.m},
          {"alpha", model.alpha},
          {"v", profile_to_json(model.v)},
          {"eps", profile_to_json(model.eps)}};
}

PolaronModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PolaronError(ErrorCode::InvalidModel, "cannot open model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw PolaronError(ErrorCode::InvalidModel, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw PolaronError(ErrorCode::InvalidArgument, "CSV row width does not match the header");
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_field(cells[i]);
    os << "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PolaronError(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  return fnv1a64(content);
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw PolaronError(ErrorCode::InvalidArgument, "empty entry in list '" + std::string(text) + "'");
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw PolaronError(ErrorCode::InvalidArgument, "not a number: '" + std::string(item) + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace polaron::io
