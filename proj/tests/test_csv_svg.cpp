#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "weakshot/csv.hpp"
#include "weakshot/errors.hpp"
#include "weakshot/svg.hpp"

using namespace weakshot;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("csv write and read back") {
  const std::string path = temp_path("wk_csv_roundtrip.csv");
  {
    CsvWriter w(path, {"name", "value"});
    w.row({"a", "1"});
    w.row({"b", "2.5"});
    w.close();
  }
  const auto rows = read_csv(path);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"name", "value"});
  CHECK(rows[1] == std::vector<std::string>{"a", "1"});
  CHECK(rows[2] == std::vector<std::string>{"b", "2.5"});
  std::remove(path.c_str());
}

TEST_CASE("csv rejects rows of the wrong width") {
  const std::string path = temp_path("wk_csv_width.csv");
  CsvWriter w(path, {"a", "b", "c"});
  CHECK_THROWS_AS(w.row({"1", "2"}), config_error);
  w.close();
  std::remove(path.c_str());
}

TEST_CASE("csv rejects an empty header and bad paths") {
  CHECK_THROWS_AS(CsvWriter("/nonexistent/dir/x.csv", {"a"}), io_error);
  CHECK_THROWS_AS(CsvWriter(temp_path("wk_csv_hdr.csv"), {}), config_error);
  CHECK_THROWS_AS(read_csv("/nonexistent/dir/x.csv"), io_error);
}

TEST_CASE("svg plot contains axes, title and one polyline per series") {
  const std::string path = temp_path("wk_plot.svg");
  const std::vector<SvgSeries> series = {
      {"first", {0.0, 1.0, 2.0}, {1.0, 4.0, 9.0}},
      {"second", {0.0, 1.0, 2.0}, {2.0, 2.0, 2.0}},
  };
  write_line_plot(path, "losses", "epoch", "loss", series);
  const std::string text = slurp(path);
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
  CHECK(text.find("losses") != std::string::npos);
  CHECK(text.find("epoch") != std::string::npos);
  CHECK(text.find("first") != std::string::npos);
  CHECK(text.find("second") != std::string::npos);

  std::size_t polylines = 0;
  for (std::size_t pos = text.find("<polyline"); pos != std::string::npos;
       pos = text.find("<polyline", pos + 1))
    ++polylines;
  CHECK(polylines >= series.size());
  std::remove(path.c_str());
}

TEST_CASE("svg handles a flat series without dividing by zero") {
  const std::string path = temp_path("wk_plot_flat.svg");
  write_line_plot(path, "flat", "x", "y", {{"only", {1.0, 2.0}, {5.0, 5.0}}});
  const std::string text = slurp(path);
  CHECK(text.find("nan") == std::string::npos);
  CHECK(text.find("inf") == std::string::npos);
  std::remove(path.c_str());
}
