#pragma once

#include "corrugate/geom.hpp"
#include "corrugate/grassmann.hpp"

namespace corrugate {

struct TubeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterSearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CodimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameters of one ripple stage: y = A * mask(u) * sin(2 pi omega u_axis)
// applied along a unit normal field.
struct RippleParams {
    double amplitude = 0.0;       // A, ambient length units
    double omega = 1.0;           // cycles per unit domain length
    BumpFunction mask;            // support / phasing
    double tube_radius = 0.0;     // bound on normal excursion; 0 = unconstrained
    double target_scale = 1.0;    // R or T this stage was calibrated for

    void validate() const;
};

struct StagePlan {
    std::vector<RippleParams> stages;  // one per axis, tube radii decreasing
};

// The 1-D sine ripple of the interval in R^2, phased by the mask:
// x -> (x, A * mask(x) * sin(2 pi omega x)).
Embedding basic_ripple(const RippleParams& p, int res);

// Arc length of the basic ripple graph over [a,b] (quadrature oracle).
double basic_ripple_arclength(const RippleParams& p, double a, double b);

// Smallest power-of-two frequency (with A = eps/2) whose arclength stretch
// inside the mask's inner region reaches R * safety, subject to
// A + 1/omega <= eps.
RippleParams choose_ripple_params(double R, double eps, double boundary_margin,
                                  const Config& cfg);

// Monotone diffeo table of [0,1]: identity outside (inner_lo, inner_hi).
// Inside, psi solves G(psi(u)) = G(lo) + ratio * (B(u) - B(lo)) where G and
// B are the cumulative arclengths of the rippled and the base profile, so
// the composition has speed = ratio * base_speed(u) pointwise. With base
// speed 1 this is the constant-speed reparametrization.
class DiffeoTable {
public:
    DiffeoTable() = default;  // identity
    static DiffeoTable from_speed(const std::function<double(double)>& speed,
                                  double inner_lo, double inner_hi, int samples);
    static DiffeoTable from_profiles(const std::function<double(double)>& speed,
                                     const std::function<double(double)>& base,
                                     double inner_lo, double inner_hi,
                                     int samples);

    double operator()(double v) const;
    double inner_speed() const { return inner_speed_; }  // mean absolute speed
    double inner_ratio() const { return ratio_; }        // relative stretch
    double total_length() const { return total_length_; }
    bool identity() const { return s_.empty(); }
    double max_shift() const;  // sup |psi(u) - u|

private:
    // cumulative arclengths, sampled uniformly in position; psi is computed
    // per query by inverting them (a psi table in the domain variable cannot
    // resolve the fast transit through low-speed regions)
    std::vector<double> s_, b_;
    double inner_lo_ = 0.0, inner_hi_ = 1.0;
    double s_lo_ = 0.0, b_lo_ = 0.0;
    double inner_speed_ = 1.0, ratio_ = 1.0, total_length_ = 1.0;
    double max_shift_ = 0.0;
};

struct Reparametrized {
    Embedding embedding;
    DiffeoTable diffeo;
};

// Constant-speed reparametrization of a curve on [inner_lo, inner_hi]
// (defaults: the whole domain), identity outside.
Reparametrized arclength_reparametrize(const Embedding& e, double inner_lo = 0.0,
                                       double inner_hi = 1.0);

// Unit normal of a codimension-1 embedding, from the generalized cross
// product of the Jacobian rows. Continuous wherever the Jacobian is.
Vec unit_normal(const Embedding& e, const Vec& u);

// One inductive ripple stage: q -> e(q) + A mask(q) sin(2 pi omega q_axis) nu(q).
Embedding stage_ripple(const Embedding& e, int axis, const RippleParams& p,
                       const Config& cfg);

struct ModelRipple {
    Embedding embedding;
    StagePlan plan;
    double coarsest_period = 1.0;  // 1/omega_1, in domain units
    double min_ratio = 0.0, max_ratio = 0.0;  // sampled pair ratio extremes
};

// The j-fold iterated model ripple of I^j in I^j x R, each stage calibrated
// to scale its axis by T; certifies the in-cube pair ratio band.
ModelRipple model_ripple(int j, double T, const Vec& inner_lo, const Vec& inner_hi,
                         double eps, int res, const Config& cfg,
                         bool certify_band = true);

struct ShrinkProbe {
    double worst_factor = 1.0;  // min pair ratio, normalized by the
                                // orthogonal-frame control run
    long pairs = 0;
};

// Ripples a deliberately skewed coordinate frame (axis images at angle
// alpha) and measures the worst metric shrink against an orthogonal control.
ShrinkProbe skew_shrinkage_probe(double alpha, const Config& cfg, int res = 65,
                                 double stage_scale = 3.0);

struct ScaleResult {
    IsotopyTrace trace;
    RippleParams params;
    DiffeoTable diffeo;
    double coarsest_period = 1.0;
    double min_speed_ratio = 0.0;  // inner-region local speed ratio
};

// The single-chart scaling driver: final embedding scales induced distances
// by more than R at separations past one ripple period, moving points at
// most eps, fixed where the mask vanishes.
ScaleResult ripple_scale_metric(const Embedding& e, double R, double eps,
                                const BumpFunction& mask, const Config& cfg);

}  // namespace corrugate
