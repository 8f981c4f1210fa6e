#include "corrugate/config.hpp"

#include <cstdlib>
#include <sstream>

namespace corrugate {
namespace {

void read_env(const char* name, double& out) {
    if (const char* v = std::getenv(name)) out = std::atof(v);
}
void read_env(const char* name, int& out) {
    if (const char* v = std::getenv(name)) out = std::atoi(v);
}
void read_env(const char* name, std::uint32_t& out) {
    if (const char* v = std::getenv(name)) out = static_cast<std::uint32_t>(std::atoll(v));
}
void read_env(const char* name, std::uint64_t& out) {
    if (const char* v = std::getenv(name)) out = static_cast<std::uint64_t>(std::atoll(v));
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Config Config::from_env() {
    Config c;
    read_env("CORRUGATE_IMMERSION_MARGIN", c.immersion_margin);
    read_env("CORRUGATE_INJ_MARGIN", c.inj_margin);
    read_env("CORRUGATE_ORTHO_TOL", c.ortho_tol);
    read_env("CORRUGATE_COMPRESSIBILITY_MARGIN", c.compressibility_margin);
    read_env("CORRUGATE_FIELD_CONTINUITY_TOL", c.field_continuity_tol);
    read_env("CORRUGATE_REPARAM_TOL", c.reparam_tol);
    read_env("CORRUGATE_SMOOTHNESS_TOL", c.smoothness_tol);
    read_env("CORRUGATE_PROBE_TOL", c.probe_tol);
    read_env("CORRUGATE_RATIO_BAND", c.ratio_band);
    read_env("CORRUGATE_STRETCH_SAFETY", c.stretch_safety);
    read_env("CORRUGATE_FLATTEN_SAFETY", c.flatten_safety);
    read_env("CORRUGATE_TUBE_FRACTION", c.tube_fraction);
    read_env("CORRUGATE_STRICT_TOL", c.strict_tol);
    read_env("CORRUGATE_BOUNDARY_MARGIN", c.boundary_margin);
    read_env("CORRUGATE_FD_DIVISOR", c.fd_divisor);
    read_env("CORRUGATE_PAIR_COUNT", c.pair_count);
    read_env("CORRUGATE_OMEGA_MAX", c.omega_max);
    read_env("CORRUGATE_SEED", c.seed);
    return c;
}

std::map<std::string, std::string> Config::items() const {
    return {
        {"immersion_margin", fmt(immersion_margin)},
        {"inj_margin", fmt(inj_margin)},
        {"ortho_tol", fmt(ortho_tol)},
        {"compressibility_margin", fmt(compressibility_margin)},
        {"field_continuity_tol", fmt(field_continuity_tol)},
        {"reparam_tol", fmt(reparam_tol)},
        {"smoothness_tol", fmt(smoothness_tol)},
        {"probe_tol", fmt(probe_tol)},
        {"ratio_band", fmt(ratio_band)},
        {"stretch_safety", fmt(stretch_safety)},
        {"flatten_safety", fmt(flatten_safety)},
        {"tube_fraction", fmt(tube_fraction)},
        {"strict_tol", fmt(strict_tol)},
        {"boundary_margin", fmt(boundary_margin)},
        {"fd_divisor", std::to_string(fd_divisor)},
        {"pair_count", std::to_string(pair_count)},
        {"omega_max", std::to_string(omega_max)},
        {"seed", std::to_string(seed)},
    };
}

std::uint64_t Config::hash() const {
    // FNV-1a over the sorted key=value list.
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& [k, v] : items()) {
        for (char c : k + "=" + v + ";") {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
    }
    return h;
}

}  // namespace corrugate
