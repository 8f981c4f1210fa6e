#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrugate/config.hpp"

namespace corrugate {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ImmersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter space of an embedding: an axis-aligned unit box, sampled on a
// regular grid. Periodic axes identify coordinate 0 with coordinate 1.
struct DomainChart {
    int dim = 1;
    std::vector<int> resolution;     // samples per axis, >= 3
    std::vector<bool> periodic;      // per-axis wrap flag

    DomainChart() = default;
    DomainChart(int n, int res, bool wrap = false)
        : dim(n), resolution(n, res), periodic(n, wrap) {
        validate();
    }
    DomainChart(std::vector<int> res, std::vector<bool> wrap);

    void validate() const;
    double spacing(int axis) const { return 1.0 / (resolution[axis] - 1); }
    double min_spacing() const;
    long node_count() const;

    // Flattened node index <-> multi-index <-> domain coordinates.
    std::vector<int> unflatten(long node) const;
    long flatten(const std::vector<int>& idx) const;
    Vec coords(const std::vector<int>& idx) const;
    Vec coords(long node) const { return coords(unflatten(node)); }

    // Wraps a point into the box on periodic axes; throws DomainError if a
    // non-periodic coordinate lies outside [0,1] beyond tolerance.
    Vec clamp(const Vec& u) const;

    // Distance in the domain, shortest way around on periodic axes.
    double domain_distance(const Vec& u, const Vec& v) const;

    long snap(const Vec& u) const;  // nearest grid node
};

// Smooth step built from t -> exp(-1/t): exactly 1 on the inner box,
// exactly 0 outside the outer box, monotone on each collar.
class BumpFunction {
public:
    BumpFunction() = default;  // mask identically 1
    BumpFunction(Vec inner_lo, Vec inner_hi, Vec outer_lo, Vec outer_hi);

    static BumpFunction all_of(int dim);  // identically 1
    static BumpFunction interval(double outer_lo, double inner_lo,
                                 double inner_hi, double outer_hi);

    bool trivial() const { return trivial_; }
    double operator()(const Vec& u) const;
    double axis_value(int axis, double t) const;
    double axis_derivative(int axis, double t) const;

    // The one-sided smooth step sigma(t) on [0,1] and its derivative.
    static double smooth_step(double t);
    static double smooth_step_derivative(double t);

    const Vec& inner_lo() const { return ilo_; }
    const Vec& inner_hi() const { return ihi_; }
    const Vec& outer_lo() const { return olo_; }
    const Vec& outer_hi() const { return ohi_; }

private:
    bool trivial_ = true;
    Vec ilo_, ihi_, olo_, ohi_;
};

// A sampled-and-differentiable map from a domain chart into R^d. The map is
// stored as a closure; analytic Jacobians are attached where a family
// provides one, otherwise central finite differences are used.
class Embedding {
public:
    using MapFn = std::function<Vec(const Vec&)>;
    using JacFn = std::function<Mat(const Vec&)>;

    Embedding() = default;
    Embedding(DomainChart chart, int ambient_dim, MapFn map, JacFn jac = nullptr,
              std::string label = "embedding");

    const DomainChart& chart() const { return chart_; }
    int domain_dim() const { return chart_.dim; }
    int ambient_dim() const { return ambient_; }
    const std::string& label() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }
    bool has_analytic_jacobian() const { return static_cast<bool>(jac_); }

    Vec eval(const Vec& u) const;
    // n x d matrix of partial derivatives (rows indexed by domain axis).
    Mat jacobian(const Vec& u) const;
    Mat finite_difference_jacobian(const Vec& u, double h) const;
    double fd_step(const Config& cfg) const;

    // Rank/margin check at every grid sample; throws ImmersionError on failure.
    void certify_immersion(const Config& cfg) const;
    double immersion_margin(const Config& cfg) const;

    // Images of all grid nodes, cached on first use.
    const Mat& grid_images() const;

private:
    DomainChart chart_;
    int ambient_ = 0;
    MapFn map_;
    JacFn jac_;
    std::string label_;
    mutable std::shared_ptr<Mat> image_cache_;
};

// Named analytic families used as pipeline inputs.
namespace families {
Embedding interval(int res);                                   // u -> (u, 0)
Embedding circle(double radius, int res, int ambient_dim = 2); // periodic
Embedding helix(int res);                                      // (cos, sin, u)
Embedding flat_cube(int n, int d, int res);                    // identity + zero pad
Embedding graph1d(std::function<double(double)> h,
                  std::function<double(double)> dh, int res, int ambient_dim = 2);
Embedding torus_patch(double major, double minor, int res);
Embedding figure_eight(int res);                               // self-intersecting control
}  // namespace families

// A time-sampled family of embeddings with provenance labels per step.
struct IsotopyTrace {
    struct Step {
        double time;
        Embedding embedding;
        std::string provenance;
    };
    std::vector<Step> steps;

    void validate(const Config& cfg) const;
    const Embedding& initial() const { return steps.front().embedding; }
    const Embedding& final() const { return steps.back().embedding; }
    static IsotopyTrace identity(const Embedding& e, const std::string& why);

    // Sup over steps and grid samples of |f_s(u) - f_0(u)|.
    double sup_displacement() const;
};

// Grid-graph shortest-path engine approximating the induced Riemannian
// metric. The stencil controls the neighbor set (and hence the documented
// metric distortion): Chain for n=1, King (8) or KingKnight (16) for n=2.
enum class Stencil { Chain, King, KingKnight };

class PathMetric {
public:
    PathMetric(const Embedding& e, Stencil stencil = Stencil::KingKnight);

    // Full distance field from a source node (Dijkstra).
    std::vector<double> distance_field(long source) const;
    double distance(long a, long b) const;
    double distance(const Vec& u, const Vec& v) const;

    const DomainChart& chart() const { return chart_; }

private:
    DomainChart chart_;
    Mat images_;
    std::vector<std::pair<std::vector<int>, double>> stencil_;  // offset, unused weight slot
    std::optional<long> neighbor(const std::vector<int>& idx,
                                 const std::vector<int>& off) const;
};

// Convenience wrapper with snapping; resolution_override > 0 re-samples the
// embedding on a finer grid first.
double induced_path_distance(const Embedding& e, const Vec& u, const Vec& v,
                             int resolution_override = 0,
                             Stencil stencil = Stencil::KingKnight);

Embedding resample(const Embedding& e, int res);

struct ChordPathGap {
    double max_gap = 0.0;         // max over pairs of 1 - chord/path
    double normalized_gap = 0.0;  // max_gap / scale
};

// Max relative gap between ambient chord distance and induced path distance
// over pairs at domain separation <= scale.
ChordPathGap chord_vs_path_agreement(const Embedding& e, double scale,
                                     int sample_count = 64);

// Arc length of a curve embedding (n=1) over [a,b] by composite quadrature.
double curve_arclength(const Embedding& e, double a, double b,
                       int subdivisions = 0);

}  // namespace corrugate
