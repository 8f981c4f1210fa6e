#pragma once

#include "corrugate/ripple.hpp"

namespace corrugate {

struct CompressibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepNormalityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HypothesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request for a flattening pass. "Vertical" is either a coordinate split
// (last t coordinates) or the fibers of a plane field; exactly one is set.
struct FlattenRequest {
    Embedding e;
    std::optional<VerticalSplit> split;
    std::optional<BundleField> field;
    double delta = 5.0 * M_PI / 180;  // target verticality angle
    double eps = 0.1;                 // displacement budget
    BumpFunction support;             // where the isotopy may move points
};

// Makes the tangent planes almost horizontal: ripples the horizontal
// coordinate (scale chosen from the worst vertical slope) and carries the
// vertical coordinate along bitwise unchanged. Fixed where `support`
// vanishes. Final max vertical angle <= delta; sup displacement <= eps.
IsotopyTrace flatten(const FlattenRequest& req, const Config& cfg);

// Field version: per overlapping patch, maps into an orthonormal frame with
// the field fibers last, flattens with the coordinate split, maps back.
// Final tangent planes within delta of the fiber's orthogonal complement.
IsotopyTrace flatten_bundle(const FlattenRequest& req, const Config& cfg);

struct DeformRequest {
    Embedding e;
    BundleHomotopy field;  // xi_s; xi_0 must be normal to e (verified)
    double eps = 0.2;
    double delta = 5.0 * M_PI / 180;
};

struct PassRecord {
    double s = 0.0;             // homotopy time flattened against
    double normal_margin = 0.0; // pre-pass min principal angle(tangent, fiber)
    double displacement = 0.0;  // this pass alone
    double delta_used = 0.0;
};

struct DeformResult {
    IsotopyTrace trace;             // steps aligned with `partition`
    std::vector<double> partition;  // s_0 = 0 < ... < s_r = 1
    std::vector<PassRecord> passes; // r + 1 of them
    double total_displacement = 0.0;
    double final_min_angle = 0.0;   // min principal angle(tangent, final fiber)
};

// Carries e to a position normal to the moving plane field's final slice:
// partitions s by split_homotopy, then one flattening pass per partition
// value with budget eps/(r+1) each; normality is re-verified before every
// pass. Final min principal angle >= pi/2 - delta; total displacement <= eps.
DeformResult normal_deform(const DeformRequest& req, const Config& cfg);

struct DirectedResult {
    IsotopyTrace trace;
    double final_max_angle = 0.0;  // max principal angle(tangent, eta fiber)
    double lambda = 1.0;           // core shrink factor used
    double align_displacement = 0.0;  // post-shrink alignment move only
};

// Carries the tangent planes of e into a delta-neighbourhood of the rank-n
// field eta, given a deformation of the tangent field from TM to eta. The
// complement of the tangent field fills the ambient space (t + n = d), so
// this routes through a core shrink followed by a small rigid alignment;
// eps bounds the post-shrink alignment move.
DirectedResult directed_embedding(const Embedding& e, const BundleField& eta,
                                  const BundleHomotopy& tangent_deformation,
                                  double delta, double eps, const Config& cfg);

// Radial domain contraction toward the chart center; image is a subset of
// the original image. Requires a non-periodic chart.
Embedding shrink_to_core(const Embedding& e, double lambda);

// Resamples a curve onto `res` nodes and rebuilds it as a Catmull-Rom
// spline with an analytic derivative: evaluation cost stays O(1) however
// deep the construction that produced `e` was.
Embedding bake_curve(const Embedding& e, int res);

// Measurement helpers shared by the pipelines (the verify module has its
// own independent implementations).
double max_vertical_angle(const Embedding& e, const VerticalSplit& split,
                          const BumpFunction& inside, int oversample = 3);
double min_fiber_angle(const Embedding& e, const BundleField& field,
                       int oversample = 1);
double max_field_angle(const Embedding& e, const BundleField& field,
                       int oversample = 1);

}  // namespace corrugate
