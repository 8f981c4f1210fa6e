#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace corrugate {

// Numeric knobs shared across the library. Every field can be overridden
// through an environment variable CORRUGATE_<UPPERCASE_NAME>.
struct Config {
    double immersion_margin = 1e-6;        // min singular value of the Jacobian
    double inj_margin = 0.5;               // grid injectivity ratio floor
    double ortho_tol = 1e-10;              // frame orthonormality tolerance
    double compressibility_margin = 1e-4;  // horizontal-block singular value floor
    double field_continuity_tol = 0.35;    // max angle (rad) between adjacent fibers
    double reparam_tol = 0.01;             // relative speed deviation after reparametrization
    double smoothness_tol = 1e-3;          // bump derivative at support boundaries
    double probe_tol = 0.05;               // slack for the shrinkage probe
    double ratio_band = 0.25;              // tau: model ripple ratio band half-width
    double stretch_safety = 1.05;          // overshoot for the arclength stretch target
    double flatten_safety = 0.8;           // delta is multiplied by this before inverting
    double tube_fraction = 0.25;           // stage tube radius vs previous ripple period
    double strict_tol = 1e-6;              // slack used when an inequality must be strict
    double boundary_margin = 0.1;          // default collar width masked off near the boundary
    int fd_divisor = 8;                    // finite-difference step = spacing / fd_divisor
    int pair_count = 1000;                 // certification pair sample size
    std::uint32_t omega_max = 1u << 20;    // frequency search ceiling
    std::uint64_t seed = 20010424;         // default RNG seed for pair sampling

    // Applies CORRUGATE_* environment overrides on top of the defaults.
    static Config from_env();

    // Stable key/value view, used for the report's config hash.
    std::map<std::string, std::string> items() const;
    std::uint64_t hash() const;
};

}  // namespace corrugate
