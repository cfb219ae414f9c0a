#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sharpext/extension.hpp"

namespace sharpext {

/// Parses a JSON file. Syntax errors carry the file name, line and column.
json read_json_file(const std::string& path);

/// Complex number from a number or a [re, im] pair. `where` is a JSON pointer
/// used in error messages.
cplx parse_complex(const json& j, const std::string& where);
/// A point of C^dimension: a complex number, or a pair of them in C^2.
Point parse_point(const json& j, int dimension, const std::string& where);
/// "0.5", "0.3,0.1" or "0.3,0.1;0,0" (C^2) from the command line.
Point parse_point_text(const std::string& text, int dimension);

Domain parse_domain(const json& j, const std::string& where = "");
VarietySpec parse_variety(const json& j, int dimension, const std::string& where);
/// Weight field {"kind": "zero" | "gaussian" | "gaussian_z1", "coefficient": c}.
ScalarField parse_weight(const json& j, int dimension, const std::string& where);

/// A domain file: the domain object itself (optionally wrapped in "domain")
/// with an optional "pole".
struct DomainCase {
  Domain domain;
  std::optional<Point> pole;
  json source;
};
DomainCase load_domain_case(const std::string& path);

/// An extension problem file. `expected` holds the optional {"ratio", "tolerance"}.
struct ProblemCase {
  ExtensionProblem problem;
  json expected = json::object();
  json source;
};
ProblemCase parse_problem(const json& j, const std::string& base_dir);
ProblemCase load_problem(const std::string& path);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& text);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  int width = 640;
  int height = 400;
};

/// Static SVG line plot with axes, ticks and a legend.
std::string svg_plot(const std::vector<Series>& series, const PlotOptions& options = {});

}  // namespace sharpext
