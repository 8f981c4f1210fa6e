#pragma once

#include <functional>
#include <vector>

#include "corrugate/geom.hpp"

namespace corrugate {

struct FrameError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContinuityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An orthonormal k-frame in R^d, representing a k-plane through the origin.
class Plane {
public:
    Plane() = default;
    // Orthonormalizes the given spanning columns (QR).
    static Plane span(const Mat& columns);
    // Accepts an already-orthonormal frame; throws FrameError otherwise.
    static Plane from_orthonormal(const Mat& frame, double ortho_tol = 1e-10);
    static Plane coordinate(int d, std::initializer_list<int> axes);

    int ambient_dim() const { return static_cast<int>(frame_.rows()); }
    int rank() const { return static_cast<int>(frame_.cols()); }
    const Mat& frame() const { return frame_; }

private:
    Mat frame_;
};

// Product split R^q x R^t with the last t coordinates vertical.
struct VerticalSplit {
    int horizontal_dim = 1;  // q
    int vertical_dim = 1;    // t
    VerticalSplit(int q, int t) : horizontal_dim(q), vertical_dim(t) {
        if (q < 1 || t < 1) throw DomainError("split requires q >= 1 and t >= 1");
    }
    int ambient_dim() const { return horizontal_dim + vertical_dim; }
};

// Nondecreasing principal angles between two planes (min(k1,k2) of them),
// computed from singular values of the frame product.
std::vector<double> principal_angles(const Plane& p, const Plane& q);
double max_principal_angle(const Plane& p, const Plane& q);
double min_principal_angle(const Plane& p, const Plane& q);

// Largest angle between P and its best horizontal approximation: arcsin of
// the largest singular value of the vertical block of P's frame. 0 iff P is
// horizontal; pi/2 iff P contains a vertical vector.
double vertical_angle(const Plane& p, const VerticalSplit& split);

// Tangent plane of an embedding at a domain point (orthonormalized Jacobian).
Plane tangent_plane(const Embedding& e, const Vec& u);

struct CompressibilityResult {
    bool compressible = false;
    double margin = 0.0;  // min singular value of the horizontal block of the
                          // orthonormal tangent frame over all grid samples
    long worst_node = -1;
};
CompressibilityResult is_compressible(const Embedding& e, const VerticalSplit& split,
                                      const Config& cfg);

// A t-plane field on an ambient region; analytic families are closures.
class BundleField {
public:
    using FieldFn = std::function<Plane(const Vec&)>;
    BundleField() = default;
    BundleField(int ambient_dim, int rank, FieldFn fn, std::string label = "field");

    static BundleField constant(const Plane& p, std::string label = "constant");

    int ambient_dim() const { return ambient_; }
    int rank() const { return rank_; }
    Plane at(const Vec& x) const;
    const std::string& label() const { return label_; }

private:
    int ambient_ = 0;
    int rank_ = 0;
    FieldFn fn_;
    std::string label_;
};

// A time-dependent plane field xi_s, s in [0,1].
class BundleHomotopy {
public:
    using HomotopyFn = std::function<Plane(double, const Vec&)>;
    BundleHomotopy() = default;
    BundleHomotopy(int ambient_dim, int rank, HomotopyFn fn,
                   std::string label = "homotopy");

    static BundleHomotopy constant(const BundleField& f);

    int ambient_dim() const { return ambient_; }
    int rank() const { return rank_; }
    Plane at(double s, const Vec& x) const;
    BundleField slice(double s) const;

private:
    int ambient_ = 0;
    int rank_ = 0;
    HomotopyFn fn_;
    std::string label_;
};

// Uniform time partition 0 = s_0 < ... < s_r = 1 with consecutive slices at
// largest principal angle < pi/4 - margin over all probe points; r minimal.
std::vector<double> split_homotopy(const BundleHomotopy& h,
                                   const std::vector<Vec>& probe_points,
                                   double margin, const Config& cfg,
                                   int time_samples_per_step = 4);

// Pointwise orthogonal complement of the tangent spaces along the grid, with
// the frame continued across the chart (adjacent frames close).
BundleField orthogonal_complement_field(const Embedding& e, const Config& cfg);

// Complement of a given rank-n plane field restricted along an embedding.
Plane orthogonal_complement(const Plane& p);

}  // namespace corrugate
