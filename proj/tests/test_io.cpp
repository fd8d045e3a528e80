#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "polaron/errors.hpp"
#include "polaron/io.hpp"

using namespace polaron;
using io::json;

TEST_CASE("model JSON round trip") {
  const PolaronModel model(3, 1.5, 20.0, RadialProfile::gaussian(2.0, 0.7), RadialProfile::gapped_linear(1.0, 0.5));
  const auto back = io::model_from_json(io::model_to_json(model));
  CHECK(back.d == 3);
  CHECK(back.m == 1.5);
  CHECK(back.alpha == 20.0);
  CHECK(back.v.kind() == ProfileKind::Gaussian);
  CHECK(back.eps.kind() == ProfileKind::GappedLinear);
  for (double r : {0.0, 0.3, 1.0, 4.0}) {
    CHECK(back.v(r) == model.v(r));
    CHECK(back.eps(r) == model.eps(r));
  }
}

TEST_CASE("tabulated profile and constant shorthand") {
  const json j = json::parse(R"({
    "d": 1, "m": 1, "alpha": 0.5,
    "v": {"kind": "tabulated", "decay_scale": 1.0,
          "table": [[0, 1], [1, 0.6], [2, 0.1], [3, 0.0], [8, 0.0]]},
    "eps": {"kind": "power", "params": [1.0]}
  })");
  const auto model = io::model_from_json(j);
  CHECK(model.v.kind() == ProfileKind::Tabulated);
  CHECK(model.v(1.0) == doctest::Approx(0.6));
  CHECK(model.eps(5.0) == doctest::Approx(1.0));
  const auto again = io::model_from_json(io::model_to_json(model));
  CHECK(again.v(1.7) == model.v(1.7));
}

TEST_CASE("malformed models are InvalidModel") {
  auto code_of = [](const char* text) {
    try {
      io::model_from_json(json::parse(text));
    } catch (const PolaronError& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of(R"([1, 2])") == ErrorCode::InvalidModel);
  CHECK(code_of(R"({"d": 3, "v": {"kind": "gaussian", "params": [1, 1]}})") == ErrorCode::InvalidModel);
  CHECK(code_of(R"({"d": 3, "v": {"kind": "gaussian", "params": "x"},
                    "eps": {"kind": "power", "params": [1]}})") == ErrorCode::InvalidModel);
  CHECK(code_of(R"({"d": 3, "v": {"kind": "nope"}, "eps": {"kind": "power", "params": [1]}})") ==
        ErrorCode::InvalidModel);
  CHECK_THROWS_AS(io::load_model("/nonexistent/model.json"), PolaronError);
}

TEST_CASE("CSV quoting and number formatting") {
  CHECK(io::csv_field("plain") == "plain");
  CHECK(io::csv_field("a,b") == "\"a,b\"");
  CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(io::csv_field("two\nlines") == "\"two\nlines\"");

  io::CsvTable t({"x", "note"});
  t.row({"1", "ok"}).row({"2", "a,b"});
  CHECK(t.rows() == 2);
  CHECK(t.str() == "x,note\r\n1,ok\r\n2,\"a,b\"\r\n");
  CHECK_THROWS_AS(t.row({"only one"}), PolaronError);

  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.4375) == "2.4375");
  CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
  const double x = std::numbers::pi * 1e-7;
  CHECK(std::stod(io::format_double(x)) == x);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(io::fnv1a64("") == "cbf29ce484222325");
  CHECK(io::fnv1a64("a") == "af63dc4c8601ec8c");
  CHECK(io::fnv1a64("foobar") == "85944171f73967e8");
}

TEST_CASE("write_file hashes what it writes") {
  const auto path = std::filesystem::temp_directory_path() / "polaron_io_test.txt";
  const std::string body = "alpha,P\r\n1,2\r\n";
  CHECK(io::write_file(path, body) == io::fnv1a64(body));
  std::ifstream in(path, std::ios::binary);
  std::string read((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(read == body);
  std::filesystem::remove(path);
}

TEST_CASE("parse_list") {
  CHECK(io::parse_list("1,10,1e2") == std::vector<double>{1.0, 10.0, 100.0});
  CHECK(io::parse_list(" 0.5 , -2 ") == std::vector<double>{0.5, -2.0});
  CHECK_THROWS_AS(io::parse_list("1,,2"), PolaronError);
  CHECK_THROWS_AS(io::parse_list("1,x"), PolaronError);
  CHECK_THROWS_AS(io::parse_list(""), PolaronError);
}
