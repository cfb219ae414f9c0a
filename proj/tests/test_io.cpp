#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sharpext/io.hpp"

using namespace sharpext;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("sharpext_io_" + name);
  std::ofstream(p) << text;
  return p.string();
}

std::string message(const std::function<void()>& f) {
  try {
    f();
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("syntax errors carry line and column") {
  const std::string path = temp_file("bad.json", "{\n  \"kind\": \"disk\",\n  \"radius\": \n}\n");
  const std::string m = message([&] { load_domain_case(path); });
  CHECK(m.find("line 4, column 1") != std::string::npos);
  CHECK(m.find(path) != std::string::npos);
}

TEST_CASE("semantic errors carry a JSON pointer") {
  CHECK(message([] { parse_domain(json::parse(R"({"kind": "disk", "radius": "x"})")); }).find("/radius") !=
        std::string::npos);
  CHECK(message([] { parse_domain(json::parse(R"({"kind": "annulus", "r_inner": 0.2, "extra": 1})")); })
            .find("/extra") != std::string::npos);
  CHECK(message([] { parse_domain(json::parse(R"({"kind": "torus"})")); }).find("/kind") != std::string::npos);
  const json bad = json::parse(R"({"domain": {"kind": "disk"}, "variety": {"kind": "slice"}, "datum": 1})");
  CHECK(message([&] { parse_problem(bad, "."); }).find("/variety") != std::string::npos);
}

TEST_CASE("points") {
  CHECK(parse_point_text("0.5", 1).z1 == cplx(0.5));
  CHECK(parse_point_text("0.3,-0.1", 1).z1 == cplx(0.3, -0.1));
  const Point p = parse_point_text("0.1,0;0,0.2", 2);
  CHECK(p.z2 == cplx(0.0, 0.2));
  CHECK_THROWS_AS(parse_point_text("0.1x", 1), SpecError);
  CHECK(parse_point(json::parse("[[0.1, 0], [0, 0.2]]"), 2, "").z2 == cplx(0.0, 0.2));
}

TEST_CASE("every shipped case loads") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(SHARPEXT_CASES_DIR)) {
    const std::string path = e.path().string();
    const json j = read_json_file(path);
    CAPTURE(path);
    if (j.contains("variety")) {
      CHECK_NOTHROW(load_problem(path));
    } else if (j.contains("kind")) {
      CHECK_NOTHROW(load_domain_case(path));
    }
    ++n;
  }
  CHECK(n >= 10);
}

TEST_CASE("atomic writes") {
  const fs::path dir = fs::temp_directory_path() / "sharpext_io_out" / "nested";
  fs::remove_all(dir.parent_path());
  write_file_atomic((dir / "a.txt").string(), "one");
  write_file_atomic((dir / "a.txt").string(), "two");
  std::ifstream f(dir / "a.txt");
  std::string s;
  f >> s;
  CHECK(s == "two");
  CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
}

TEST_CASE("svg plots are deterministic") {
  const std::vector<Series> s{{"a", {-2, -1, 0}, {1, 0.5, 0.25}}, {"flat", {-2, 0}, {3, 3}}};
  PlotOptions o;
  o.title = "k(t) <test>";
  const std::string a = svg_plot(s, o), b = svg_plot(s, o);
  CHECK(a == b);
  CHECK(a.find("<polyline") != std::string::npos);
  CHECK(a.find("&lt;test&gt;") != std::string::npos);
  CHECK(a.rfind("<svg", 0) == 0);
}
