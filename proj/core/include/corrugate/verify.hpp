#pragma once

#include "corrugate/grassmann.hpp"

namespace corrugate {

struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Outcome of one oracle run. Measured values are reproducible bitwise for a
// fixed (seed, config) pair.
struct Certificate {
    std::string claim;  // displacement | scaling | verticality | normality |
                        // proximity | injectivity | following-trace
    bool pass = false;
    double measured = 0.0;  // the extremal value the claim is judged on
    double bound = 0.0;
    long samples = 0;
    unsigned long long seed = 0;
    std::string detail;
};

// Axis box in the domain; with `outside` set, everything outside the box is
// excluded (the usual collar exclusion for scaling certificates).
struct Region {
    Vec lo, hi;
    bool outside = true;
    bool excludes(const Vec& u) const;
};

// Min over domain-separated sample pairs of image distance / domain
// distance; passes at inj_margin.
Certificate check_injectivity(const Embedding& e, const Config& cfg);

// Max over trace times and samples of |f_s(u) - f_0(u)| against eps.
Certificate check_displacement(const IsotopyTrace& tr, double eps,
                               const Config& cfg);

// Over seeded pairs at domain separation >= min_separation and outside the
// exclusion region: induced path distance ratio after/before > R for every
// pair. The path engine here is verify's own (chord sums at doubled
// resolution for curves, an 8-neighbour grid graph for surfaces), distinct
// from the construction-side engine.
Certificate check_scaling(const Embedding& before, const Embedding& after,
                          double R, const std::optional<Region>& exclusion,
                          double min_separation, const Config& cfg);

enum class AngleMode { Verticality, Perpendicularity, Proximity };

// Verticality: max vertical angle <= bound.
Certificate check_angles(const Embedding& e, const VerticalSplit& split,
                         double bound, const Config& cfg);
// Perpendicularity: min principal angle(tangent, fiber) >= pi/2 - bound.
// Proximity: max principal angle(tangent, fiber) <= bound.
Certificate check_angles(const Embedding& e, const BundleField& field,
                         AngleMode mode, double bound, const Config& cfg);

// At every trace step past the first, the field slice at the matching time
// stays normal to the current embedding (min principal angle > 0).
Certificate check_following(const IsotopyTrace& tr, const BundleHomotopy& h,
                            const std::vector<double>& step_times,
                            const Config& cfg);

}  // namespace corrugate
