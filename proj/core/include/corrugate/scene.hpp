#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrugate/flatten.hpp"
#include "corrugate/verify.hpp"

namespace corrugate {

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Axis-box mask bounds, one entry per domain axis.
struct MaskSpec {
    std::vector<double> inner_lo, inner_hi, outer_lo, outer_hi;
};

// A rank-k plane field given by k spanning vectors of ambient-coordinate
// expressions (variables x y z w, time s for homotopies).
struct FieldSpec {
    std::vector<std::vector<std::string>> vectors;
};

// Declarative run description, parsed from the JSON scene format.
struct Scene {
    std::string pipeline;  // ripple1d | model-ripple | scale | flatten |
                           // flatten-bundle | deform | directed | shrink
    std::string family;
    int grid = 0;  // 0: family default
    std::map<std::string, double> family_params;
    std::optional<std::pair<int, int>> split;  // horizontal, vertical dims
    std::optional<FieldSpec> field;            // moving field (may use s)
    std::optional<FieldSpec> target;           // directed target field
    std::map<std::string, double> params;      // R, T, eps, delta, A, omega, ...
    std::optional<MaskSpec> mask;
    unsigned long long seed = 0;  // 0: config default
    std::vector<std::string> outputs;  // mesh | polyline | angles
};

// Strict parser: unknown keys rejected, syntax errors reported with
// line/column, dimension mismatches caught here.
Scene parse_scene(const std::string& text);
std::string serialize_scene(const Scene& s);

struct RunReport {
    std::string text;  // JSON: scene echo, resolved parameters,
                       // certificates, timings, version + config hash
    bool all_pass = false;
};

// Executes the scene's pipeline, writes requested artifacts into out_dir
// (atomically), and returns the report.
RunReport run_scene(const Scene& s, const std::string& out_dir, Config cfg);

// The scene's input embedding (also used by the export subcommand).
Embedding build_scene_embedding(const Scene& s);

// Plane field / homotopy from expression vectors.
BundleField build_field(const FieldSpec& spec, int ambient_dim, double s_value);
BundleHomotopy build_homotopy(const FieldSpec& spec, int ambient_dim);

double scene_param(const Scene& s, const std::string& key, double fallback);

}  // namespace corrugate
