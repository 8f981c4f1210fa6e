#pragma once

#include "corrugate/grassmann.hpp"

namespace corrugate {

struct ExportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// OBJ mesh from the grid samples of a surface (n = 2): res1*res2 vertices in
// row-major order, each cell split into two triangles. Deterministic output;
// written atomically (temp file + rename).
void export_mesh(const Embedding& e, const std::string& path);

// CSV polyline for a curve (n = 1): header s,x1..xd, one row per grid node.
void export_polyline(const Embedding& e, const std::string& path);

// Vertical-angle map for a curve or surface: CSV grid of angles (radians)
// plus an SVG heatmap with a fixed blue-to-red ramp over [0, pi/2].
void export_angle_map(const Embedding& e, const VerticalSplit& split,
                      const std::string& csv_path, const std::string& svg_path);

// Atomic text write used by all exporters and the report writer.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace corrugate
