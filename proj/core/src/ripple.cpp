#include "corrugate/ripple.hpp"

#include "corrugate/flatten.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace corrugate {

void RippleParams::validate() const {
    if (amplitude < 0) throw DomainError("ripple amplitude must be >= 0");
    if (omega < 1) throw DomainError("ripple frequency must be >= 1");
    if (tube_radius > 0 && amplitude > tube_radius)
        throw TubeError("ripple amplitude exceeds the tube radius");
}

// ---------------------------------------------------------------------------
// Basic ripple

Embedding basic_ripple(const RippleParams& p, int res) {
    p.validate();
    const double A = p.amplitude, w = p.omega;
    const BumpFunction mask = p.mask;
    auto height = [A, w, mask](double x) {
        Vec u(1);
        u << x;
        return A * mask(u) * std::sin(2 * M_PI * w * x);
    };
    auto dheight = [A, w, mask](double x) {
        Vec u(1);
        u << x;
        const double m = mask(u), dm = mask.trivial() ? 0.0 : mask.axis_derivative(0, x);
        return A * (dm * std::sin(2 * M_PI * w * x) +
                    m * 2 * M_PI * w * std::cos(2 * M_PI * w * x));
    };
    return Embedding(DomainChart(1, res), 2,
                     [height](const Vec& u) {
                         Vec x(2);
                         x << u[0], height(u[0]);
                         return x;
                     },
                     [dheight](const Vec& u) {
                         Mat J(1, 2);
                         J << 1.0, dheight(u[0]);
                         return J;
                     },
                     "basic_ripple");
}

double basic_ripple_arclength(const RippleParams& p, double a, double b) {
    Embedding e = basic_ripple(p, 9);
    int n = std::max(2048, static_cast<int>(64 * p.omega * (b - a)));
    return curve_arclength(e, a, b, n);
}

RippleParams choose_ripple_params(double R, double eps, double boundary_margin,
                                  const Config& cfg) {
    if (R <= 0 || eps <= 0) throw DomainError("scale and budget must be positive");
    RippleParams p;
    p.amplitude = eps / 2;
    p.target_scale = R;
    double ilo = 0.0, ihi = 1.0;
    if (boundary_margin > 0) {
        p.mask = BumpFunction::interval(boundary_margin / 2, boundary_margin,
                                        1 - boundary_margin, 1 - boundary_margin / 2);
        ilo = boundary_margin;
        ihi = 1 - boundary_margin;
    } else {
        p.mask = BumpFunction::all_of(1);
    }
    double omega = 1;
    while (p.amplitude + 1.0 / omega > eps) omega *= 2;
    const double target = R * cfg.stretch_safety;
    for (; omega <= cfg.omega_max; omega *= 2) {
        p.omega = omega;
        if (R <= 1.0) return p;  // degenerate target: first admissible frequency
        const double stretch =
            basic_ripple_arclength(p, ilo, ihi) / (ihi - ilo);
        if (stretch >= target) return p;
    }
    throw ParameterSearchError("no frequency below omega_max reaches scale " +
                               std::to_string(R));
}

// ---------------------------------------------------------------------------
// Reparametrization

namespace {

std::vector<double> cumulative_trapezoid(const std::function<double(double)>& f,
                                         int n) {
    std::vector<double> s(n + 1);
    s[0] = 0;
    double prev = f(0.0);
    for (int k = 1; k <= n; ++k) {
        const double cur = f(double(k) / n);
        s[k] = s[k - 1] + 0.5 * (prev + cur) / n;
        prev = cur;
    }
    return s;
}

double table_at(const std::vector<double>& s, double x) {
    const int n = static_cast<int>(s.size()) - 1;
    const double f = x * n;
    const int k = std::clamp(static_cast<int>(f), 0, n - 1);
    return s[k] + (f - k) * (s[k + 1] - s[k]);
}

}  // namespace

DiffeoTable DiffeoTable::from_speed(const std::function<double(double)>& speed,
                                    double inner_lo, double inner_hi, int samples) {
    return from_profiles(speed, [](double) { return 1.0; }, inner_lo, inner_hi,
                         samples);
}

DiffeoTable DiffeoTable::from_profiles(const std::function<double(double)>& speed,
                                       const std::function<double(double)>& base,
                                       double inner_lo, double inner_hi,
                                       int samples) {
    DiffeoTable t;
    t.inner_lo_ = inner_lo;
    t.inner_hi_ = inner_hi;
    const int n = std::max(samples, 64);
    t.s_ = cumulative_trapezoid(speed, n);
    t.b_ = cumulative_trapezoid(base, n);
    t.total_length_ = t.s_[n];

    t.s_lo_ = table_at(t.s_, inner_lo);
    t.b_lo_ = table_at(t.b_, inner_lo);
    t.inner_speed_ = (table_at(t.s_, inner_hi) - t.s_lo_) / (inner_hi - inner_lo);
    t.ratio_ = (table_at(t.s_, inner_hi) - t.s_lo_) /
               (table_at(t.b_, inner_hi) - t.b_lo_);

    for (int k = 0; k <= n; ++k) {
        const double u = double(k) / n;
        t.max_shift_ = std::max(t.max_shift_, std::abs(t(u) - u));
    }
    return t;
}

double DiffeoTable::operator()(double v) const {
    if (s_.empty()) return v;
    if (v <= inner_lo_ || v >= inner_hi_) return v;  // exact identity outside
    const int n = static_cast<int>(s_.size()) - 1;
    const double sigma = s_lo_ + ratio_ * (table_at(b_, v) - b_lo_);
    const auto it = std::lower_bound(s_.begin(), s_.end(), sigma);
    if (it == s_.begin()) return 0.0;
    if (it == s_.end()) return 1.0;
    const int k = static_cast<int>(it - s_.begin());
    const double span = s_[k] - s_[k - 1];
    const double f = span > 0 ? (sigma - s_[k - 1]) / span : 0.0;
    return (k - 1 + f) / n;
}

double DiffeoTable::max_shift() const { return max_shift_; }

Reparametrized arclength_reparametrize(const Embedding& e, double inner_lo,
                                       double inner_hi) {
    if (e.domain_dim() != 1) throw DomainError("reparametrization requires n = 1");
    auto speed = [&e](double x) {
        Vec u(1);
        u << x;
        return e.jacobian(u).row(0).norm();
    };
    const int samples = 16 * (e.chart().resolution[0] - 1);
    DiffeoTable table = DiffeoTable::from_speed(speed, inner_lo, inner_hi, samples);
    // chain rule with psi' = inner_speed / speed(psi): constant speed inside,
    // untouched outside (finite differences across the inverted table would
    // only see its sampling noise)
    const double s_bar = table.inner_speed();
    Embedding out(e.chart(), e.ambient_dim(),
                  [e, table](const Vec& u) {
                      Vec w(1);
                      w << table(u[0]);
                      return e.eval(w);
                  },
                  [e, table, s_bar, inner_lo, inner_hi](const Vec& u) {
                      Vec w(1);
                      w << table(u[0]);
                      Mat J = e.jacobian(w);
                      if (u[0] > inner_lo && u[0] < inner_hi) {
                          const double sp = J.row(0).norm();
                          if (sp > 0) J *= s_bar / sp;
                      }
                      return J;
                  },
                  e.label() + "_reparam");
    return {std::move(out), std::move(table)};
}

// ---------------------------------------------------------------------------
// Normal fields and stages

Vec unit_normal(const Embedding& e, const Vec& u) {
    const int n = e.domain_dim(), d = e.ambient_dim();
    if (d != n + 1) throw DomainError("unit normal requires codimension 1");
    Mat J = e.jacobian(u);  // n x d
    Vec nu(d);
    Mat minor(n, n);
    for (int i = 0; i < d; ++i) {
        int c = 0;
        for (int col = 0; col < d; ++col) {
            if (col == i) continue;
            minor.col(c++) = J.col(col);
        }
        nu[i] = ((n + i) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
    }
    const double len = nu.norm();
    if (len < 1e-12) throw ImmersionError("degenerate tangent frame; no unit normal");
    return nu / len;
}

Embedding stage_ripple(const Embedding& e, int axis, const RippleParams& p,
                       const Config& cfg) {
    p.validate();
    const int n = e.domain_dim();
    if (e.ambient_dim() != n + 1)
        throw DomainError("stage ripple requires codimension 1");
    if (axis < 0 || axis >= n) throw DomainError("stage axis out of range");
    if (p.amplitude == 0.0) return e;

    if (p.tube_radius > 0) {
        // sampled non-self-intersection check of the tube at radius rho
        std::mt19937_64 rng(cfg.seed);
        const auto& chart = e.chart();
        const long count = chart.node_count();
        std::uniform_int_distribution<long> pick(0, count - 1);
        const Mat& img = e.grid_images();
        for (int k = 0; k < 20000; ++k) {
            const long a = pick(rng), b = pick(rng);
            const Vec ua = chart.coords(a), ub = chart.coords(b);
            if (chart.domain_distance(ua, ub) < 0.1) continue;
            if ((img.row(a) - img.row(b)).norm() <= 2 * p.tube_radius)
                throw TubeError("tube of radius rho self-intersects; shrink A or rho");
        }
    }

    const double A = p.amplitude, w = p.omega;
    const BumpFunction mask = p.mask;
    auto map = [e, A, w, mask, axis](const Vec& q) {
        const double m = mask(q);
        Vec base = e.eval(q);
        if (m == 0.0) return base;  // bitwise fixed outside the support
        return Vec(base + A * m * std::sin(2 * M_PI * w * q[axis]) * unit_normal(e, q));
    };
    return Embedding(e.chart(), e.ambient_dim(), map, nullptr,
                     e.label() + "+stage" + std::to_string(axis));
}

// ---------------------------------------------------------------------------
// Model ripple

namespace {

// Arc length of the embedding restricted to an axis line through `center`.
double axis_arclength(const Embedding& e, int axis, const Vec& center, double lo,
                      double hi, double omega) {
    int n = std::max(512, static_cast<int>(48 * omega * (hi - lo)));
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    const double dh = 1e-5;
    auto speed = [&](double t) {
        Vec a = center, b = center;
        a[axis] = std::max(lo, t - dh);
        b[axis] = std::min(hi, t + dh);
        return (e.eval(b) - e.eval(a)).norm() / (b[axis] - a[axis]);
    };
    double s = speed(lo) + speed(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * speed(lo + i * h);
    return s * h / 3.0;
}

// Solves for the amplitude that makes stage `axis` stretch the inner
// interval by factor T. Returns nullopt when even A = cap falls short.
std::optional<double> solve_stage_amplitude(const Embedding& current, int axis,
                                            const RippleParams& proto, double cap,
                                            double T, const Vec& center, double lo,
                                            double hi, const Config& cfg) {
    auto stretch = [&](double A) {
        RippleParams p = proto;
        p.amplitude = A;
        p.tube_radius = 0;  // the tube check runs once, on the accepted stage
        Embedding cand = stage_ripple(current, axis, p, cfg);
        return axis_arclength(cand, axis, center, lo, hi, p.omega) / (hi - lo);
    };
    const double base = axis_arclength(current, axis, center, lo, hi, proto.omega) /
                        (hi - lo);
    const double target = T * base;
    if (stretch(cap) < target) return std::nullopt;
    double a = 0.0, b = cap;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (a + b);
        (stretch(mid) < target ? a : b) = mid;
        if ((b - a) < 1e-4 * cap) break;
    }
    return 0.5 * (a + b);
}

std::string ratio_histogram(const std::vector<double>& ratios, double lo, double hi) {
    std::ostringstream os;
    constexpr int kBins = 10;
    std::vector<int> bins(kBins, 0);
    for (double r : ratios) {
        int b = static_cast<int>((r - lo) / (hi - lo) * kBins);
        bins[std::clamp(b, 0, kBins - 1)]++;
    }
    os << "ratio histogram [" << lo << "," << hi << "]:";
    for (int b : bins) os << " " << b;
    return os.str();
}

}  // namespace

ModelRipple model_ripple(int j, double T, const Vec& inner_lo, const Vec& inner_hi,
                         double eps, int res, const Config& cfg, bool certify_band) {
    if (j < 1) throw DomainError("model ripple requires j >= 1");
    if (T <= 1) throw DomainError("model ripple requires T > 1");
    Vec olo(j), ohi(j);
    double collar = 1.0;
    for (int a = 0; a < j; ++a) {
        olo[a] = inner_lo[a] / 2;
        ohi[a] = (1 + inner_hi[a]) / 2;
        collar = std::min({collar, inner_lo[a] - olo[a], ohi[a] - inner_hi[a]});
    }
    BumpFunction mask(inner_lo, inner_hi, olo, ohi);
    Vec center = 0.5 * (inner_lo + inner_hi);

    ModelRipple out;
    Embedding current = families::flat_cube(j, j + 1, res);
    double prev_ambient_period = 0.0;
    double eps_t = eps / 2;
    for (int t = 1; t <= j; ++t, eps_t /= 2) {
        const int axis = t - 1;
        const double rho =
            t == 1 ? 0.0 : cfg.tube_fraction * prev_ambient_period;
        double cap = std::min(eps_t, collar / 2);
        if (rho > 0) cap = std::min(cap, 0.99 * rho);

        RippleParams stage;
        stage.mask = mask;
        stage.tube_radius = rho;
        stage.target_scale = T;
        bool found = false;
        for (double omega = 8; omega <= (res - 1) / 4.0; omega *= 2) {
            stage.omega = omega;
            auto A = solve_stage_amplitude(current, axis, stage, cap, T, center,
                                           inner_lo[axis], inner_hi[axis], cfg);
            if (A) {
                stage.amplitude = *A;
                found = true;
                break;
            }
        }
        if (!found)
            throw CalibrationError("stage " + std::to_string(t) +
                                   ": no grid-resolvable frequency fits the tube");
        current = stage_ripple(current, axis, stage, cfg);
        prev_ambient_period = T / stage.omega;
        if (t == 1) out.coarsest_period = 1.0 / stage.omega;
        out.plan.stages.push_back(stage);
    }
    out.embedding = current;

    if (certify_band) {
        const double tau = cfg.ratio_band;
        PathMetric before(families::flat_cube(j, j + 1, res));
        PathMetric after(current);
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> unif;
        const auto& chart = current.chart();
        auto sample_inner = [&] {
            Vec u(j);
            for (int a = 0; a < j; ++a)
                u[a] = inner_lo[a] + unif(rng) * (inner_hi[a] - inner_lo[a]);
            return u;
        };
        std::vector<double> ratios;
        const int sources = 24, targets = 32;
        for (int si = 0; si < sources; ++si) {
            const Vec us = sample_inner();
            const long s = chart.snap(us);
            auto db = before.distance_field(s);
            auto da = after.distance_field(s);
            for (int ti = 0; ti < targets; ++ti) {
                Vec ut = sample_inner();
                if (chart.domain_distance(us, ut) < out.coarsest_period) continue;
                const long tt = chart.snap(ut);
                if (db[tt] > 0) ratios.push_back(da[tt] / db[tt]);
            }
        }
        if (ratios.size() < 500)
            throw CalibrationError("too few admissible certification pairs");
        out.min_ratio = *std::min_element(ratios.begin(), ratios.end());
        out.max_ratio = *std::max_element(ratios.begin(), ratios.end());
        if (out.min_ratio < (1 - tau) * T || out.max_ratio > (1 + tau) * T)
            throw CalibrationError(
                "pair ratio band violated: [" + std::to_string(out.min_ratio) + ", " +
                std::to_string(out.max_ratio) + "] outside [" +
                std::to_string((1 - tau) * T) + ", " + std::to_string((1 + tau) * T) +
                "]; " + ratio_histogram(ratios, out.min_ratio, out.max_ratio));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Skew shrinkage probe

namespace {

Embedding skew_square(double alpha, int res) {
    Vec u1(3), u2(3);
    u1 << 1, 0, 0;
    u2 << std::cos(alpha), std::sin(alpha), 0;
    Mat J(2, 3);
    J.row(0) = u1.transpose();
    J.row(1) = u2.transpose();
    return Embedding(DomainChart(2, res), 3,
                     [u1, u2](const Vec& q) { return Vec(q[0] * u1 + q[1] * u2); },
                     [J](const Vec&) { return J; }, "skew_square");
}

}  // namespace

ShrinkProbe skew_shrinkage_probe(double alpha, const Config& cfg, int res,
                                 double stage_scale) {
    if (!(alpha > 0 && alpha <= M_PI / 2))
        throw DomainError("skew angle must lie in (0, pi/2]");
    RippleParams p;
    p.mask = BumpFunction::all_of(2);
    p.omega = 8;
    p.target_scale = stage_scale;
    {  // amplitude from the 1-D quadrature oracle
        RippleParams probe = p;
        probe.mask = BumpFunction::all_of(1);
        double a = 0, b = 1.0;
        for (int it = 0; it < 48; ++it) {
            probe.amplitude = 0.5 * (a + b);
            (basic_ripple_arclength(probe, 0, 1) < stage_scale ? a : b) =
                probe.amplitude;
        }
        p.amplitude = 0.5 * (a + b);
    }
    Embedding skew = stage_ripple(skew_square(alpha, res), 1, p, cfg);
    Embedding ctrl = stage_ripple(skew_square(M_PI / 2, res), 1, p, cfg);
    Embedding skew_base = skew_square(alpha, res);
    Embedding ctrl_base = skew_square(M_PI / 2, res);

    PathMetric pm_skew(skew), pm_ctrl(ctrl), pm_skew0(skew_base), pm_ctrl0(ctrl_base);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    const auto& chart = skew.chart();
    ShrinkProbe out;
    const int sources = 16, targets = 24;
    for (int si = 0; si < sources; ++si) {
        Vec us(2);
        us << unif(rng), unif(rng);
        const long s = chart.snap(us);
        auto ds = pm_skew.distance_field(s);
        auto ds0 = pm_skew0.distance_field(s);
        auto dc = pm_ctrl.distance_field(s);
        auto dc0 = pm_ctrl0.distance_field(s);
        for (int ti = 0; ti < targets; ++ti) {
            Vec ut(2);
            ut << unif(rng), unif(rng);
            if (chart.domain_distance(us, ut) < 0.15) continue;
            const long t = chart.snap(ut);
            if (ds0[t] <= 0 || dc0[t] <= 0 || dc[t] <= 0) continue;
            const double ratio_skew = ds[t] / ds0[t];
            const double ratio_ctrl = dc[t] / dc0[t];
            out.worst_factor = std::min(out.worst_factor, ratio_skew / ratio_ctrl);
            ++out.pairs;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling driver

namespace {

// Spline fit of the speed-modulated unit normal w(u) = (speed(u)/gamma_max)
// nu(u). It varies at the base curve's own feature scale (not the new ripple
// frequency), so a dense spline is faithful, and it gives the rippled curve
// an analytic jacobian: evaluation cost stays constant per composition level
// instead of doubling through nested finite differences.
Embedding modulated_normal_spline(const Embedding& e, double gamma_max) {
    const int n = e.domain_dim(), d = e.ambient_dim();
    auto raw = Embedding(e.chart(), d,
                         [e, gamma_max, n, d](const Vec& u) {
                             Mat J = e.jacobian(u);
                             Vec nu(d);
                             Mat minor(n, n);
                             for (int i = 0; i < d; ++i) {
                                 int c = 0;
                                 for (int col = 0; col < d; ++col) {
                                     if (col == i) continue;
                                     minor.col(c++) = J.col(col);
                                 }
                                 nu[i] = ((n + i) % 2 == 0 ? 1.0 : -1.0) *
                                         minor.determinant();
                             }
                             const double len = nu.norm();
                             if (len < 1e-12)
                                 throw ImmersionError(
                                     "degenerate tangent frame; no unit normal");
                             const double g =
                                 gamma_max > 0 ? J.row(0).norm() / gamma_max : 1.0;
                             return Vec(g / len * nu);
                         },
                         nullptr, e.label() + "_wfield");
    const int res_w = 16 * (e.chart().resolution[0] - 1) + 1;
    return bake_curve(raw, res_w);
}

// Ripple along the splined modulated normal; the amplitude is modulated by
// the local base speed (relative to its maximum) so the induced stretch is
// proportional to the base metric and the relative reparametrization below
// stays close to the identity on curved bases.
Embedding ripple_curve(const Embedding& e, const RippleParams& p,
                       const Embedding& w_field) {
    const double A = p.amplitude, w = p.omega;
    const BumpFunction mask = p.mask;
    auto map = [e, w_field, A, w, mask](const Vec& u) {
        const double m = mask(u);
        Vec base = e.eval(u);
        if (m == 0.0) return base;
        return Vec(base + A * m * std::sin(2 * M_PI * w * u[0]) * w_field.eval(u));
    };
    auto jac = [e, w_field, A, w, mask](const Vec& u) {
        Mat J = e.jacobian(u);
        const double m = mask(u);
        if (m == 0.0) return J;
        const double dm =
            mask.trivial() ? 0.0 : mask.axis_derivative(0, u[0]);
        const double ph = 2 * M_PI * w * u[0];
        J.row(0) += A * (dm * std::sin(ph) + m * 2 * M_PI * w * std::cos(ph)) *
                        w_field.eval(u).transpose() +
                    A * m * std::sin(ph) * w_field.jacobian(u).row(0);
        return J;
    };
    return Embedding(e.chart(), e.ambient_dim(), map, jac, e.label() + "_rippled");
}

// Reparametrize so the composed speed is a constant multiple of the base
// speed pointwise: psi solves G(psi(u)) = G(lo) + ratio (B(u) - B(lo)).
Reparametrized relative_reparametrize(const Embedding& r, const Embedding& base,
                                      double ilo, double ihi) {
    auto speed = [r](double x) {
        Vec u(1);
        u << x;
        return r.jacobian(u).row(0).norm();
    };
    auto bspeed = [base](double x) {
        Vec u(1);
        u << x;
        return base.jacobian(u).row(0).norm();
    };
    const int samples = 16 * (r.chart().resolution[0] - 1);
    DiffeoTable table =
        DiffeoTable::from_profiles(speed, bspeed, ilo, ihi, samples);
    const double ratio = table.inner_ratio();
    Embedding out(r.chart(), r.ambient_dim(),
                  [r, table](const Vec& u) {
                      Vec w(1);
                      w << table(u[0]);
                      return r.eval(w);
                  },
                  [r, base, table, ratio, ilo, ihi](const Vec& u) {
                      Vec w(1);
                      w << table(u[0]);
                      Mat J = r.jacobian(w);
                      if (u[0] > ilo && u[0] < ihi) {
                          const double sp = J.row(0).norm();
                          const double bs = base.jacobian(u).row(0).norm();
                          if (sp > 0) J *= ratio * bs / sp;
                      }
                      return J;
                  },
                  r.label() + "_reparam");
    return {std::move(out), std::move(table)};
}

}  // namespace

ScaleResult ripple_scale_metric(const Embedding& e, double R, double eps,
                                const BumpFunction& mask, const Config& cfg) {
    const int n = e.domain_dim(), d = e.ambient_dim();
    if (d - n < 1)
        throw CodimensionError(
            "q = n: no normal direction; use the spine-shrink path instead");
    if (R <= 1.0) {
        ScaleResult out;
        out.trace = IsotopyTrace::identity(e, "scale<=1: identity suffices");
        out.min_speed_ratio = 1.0;
        return out;
    }
    if (n == 1) {
        if (d != 2)
            throw DomainError("curve scaling driver supports ambient R^2");
        const double ilo = mask.trivial() ? 0.0 : std::max(0.0, mask.inner_lo()[0]);
        const double ihi = mask.trivial() ? 1.0 : std::min(1.0, mask.inner_hi()[0]);
        double gamma_max = 0.0;
        const int res = e.chart().resolution[0];
        for (int k = 0; k < res; ++k) {
            const double x = double(k) / (res - 1);
            if (x < ilo || x > ihi) continue;
            Vec u(1);
            u << x;
            gamma_max = std::max(gamma_max, e.jacobian(u).row(0).norm());
        }
        const double target = R * cfg.stretch_safety;  // relative stretch

        // required relative slope c from the phase-mean stretch equation
        // mean_phi sqrt(1 + c^2 cos^2 phi) = target, then the frequency that
        // realizes it within the amplitude cap; failing fast here keeps a
        // too-coarse grid cheap to detect for callers that refine and retry
        auto phase_mean = [](double c) {
            const int m = 256;
            double s = 0;
            for (int k = 0; k < m; ++k) {
                const double ph = M_PI * (k + 0.5) / m, cs = std::cos(ph);
                s += std::sqrt(1 + c * c * cs * cs);
            }
            return s / m;
        };
        double c_lo = 0, c_hi = 4;
        while (phase_mean(c_hi) < target) c_hi *= 2;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (c_lo + c_hi);
            (phase_mean(mid) < target ? c_lo : c_hi) = mid;
        }
        const double c_req = c_hi;
        const double a_cap = eps / 2;

        Embedding w_field = modulated_normal_spline(e, gamma_max);

        RippleParams p;
        p.mask = mask;
        p.target_scale = R;
        double omega = 2;
        while (a_cap + 1.0 / omega > eps) omega *= 2;
        const double omega_req = c_req * gamma_max / (2 * M_PI * a_cap);
        while (omega < omega_req) omega *= 2;
        if (omega > (res - 1) / 4.0)
            throw ParameterSearchError(
                "no grid-resolvable frequency meets the scale/budget pair "
                "(needs omega " + std::to_string(omega) + ", grid admits " +
                std::to_string((res - 1) / 4) + ")");
        for (; omega <= (res - 1) / 4.0; omega *= 2) {
            p.omega = omega;
            double A = std::min(a_cap, c_req * gamma_max / (2 * M_PI * omega));
            bool too_far = false;
            for (int adj = 0; adj < 5 && !too_far;
                 ++adj, A = std::min(a_cap, 1.15 * A)) {
                p.amplitude = A;
                Embedding rippled = ripple_curve(e, p, w_field);
                auto rep = relative_reparametrize(rippled, e, ilo, ihi);
                if (std::getenv("CORRUGATE_TRACE"))
                    fprintf(stderr,
                            "[scale] res=%d omega=%g A=%g ratio=%g target=%g\n",
                            res, omega, A, rep.diffeo.inner_ratio(), target);
                if (rep.diffeo.inner_ratio() < target) {
                    if (A >= a_cap) break;  // amplitude exhausted: next omega
                    continue;
                }
                Embedding final = rep.embedding;
                const Mat& base = e.grid_images();
                const double disp =
                    (final.grid_images() - base).rowwise().norm().maxCoeff();
                if (std::getenv("CORRUGATE_TRACE"))
                    fprintf(stderr, "[scale]   disp=%g eps=%g\n", disp, eps);
                if (disp > eps) {
                    too_far = true;  // larger omega shrinks the shift
                    break;
                }

                ScaleResult out;
                out.params = p;
                out.diffeo = rep.diffeo;
                out.coarsest_period = 1.0 / p.omega;
                // trace: amplitude ramp, then blend in the reparametrization
                DiffeoTable psi = rep.diffeo;
                auto member = [&](double ramp, double blend) {
                    RippleParams q = p;
                    q.amplitude = ramp * p.amplitude;
                    Embedding r = ripple_curve(e, q, w_field);
                    if (blend == 0.0) return r;
                    return Embedding(e.chart(), d,
                                     [r, psi, blend](const Vec& u) {
                                         const double pu = psi(u[0]);
                                         Vec w(1);
                                         // exact where psi is the identity
                                         w << (pu == u[0] ? u[0]
                                                         : (1 - blend) * u[0] + blend * pu);
                                         return r.eval(w);
                                     },
                                     nullptr, r.label() + "_blend");
                };
                out.trace.steps = {{0.0, e, "start"},
                                   {0.25, member(0.5, 0.0), "amplitude ramp"},
                                   {0.5, member(1.0, 0.0), "full amplitude"},
                                   {0.75, member(1.0, 0.5), "reparametrization blend"},
                                   {1.0, final, "reparametrized ripple"}};
                out.trace.steps.back().embedding.set_label(e.label() + "_scaled");
    
                double min_ratio = std::numeric_limits<double>::max();
                for (int k = 0; k < res; ++k) {
                    const double x = double(k) / (res - 1);
                    if (x <= ilo || x >= ihi) continue;
                    Vec u(1);
                    u << x;
                    const double sp = final.jacobian(u).row(0).norm();
                    const double sp0 = e.jacobian(u).row(0).norm();
                    min_ratio = std::min(min_ratio, sp / sp0);
                }
                out.min_speed_ratio = min_ratio;
                if (min_ratio < R)
                    throw CalibrationError("inner-region speed ratio " +
                                           std::to_string(min_ratio) +
                                           " fell below R after reparametrization");
                return out;
            }
        }
        throw ParameterSearchError(
            "no grid-resolvable frequency meets the scale/budget pair");
    }
    if (n == 2 && d == 3) {
        // two model-ripple stages targeting 1.5 R, certified one-sidedly
        const double ilo = mask.trivial() ? 0.15 : mask.inner_lo().minCoeff();
        const double ihi = mask.trivial() ? 0.85 : mask.inner_hi().maxCoeff();
        Vec lo = Vec::Constant(2, ilo), hi = Vec::Constant(2, ihi);
        ModelRipple mr = model_ripple(2, 1.5 * R, lo, hi, eps, e.chart().resolution[0],
                                      cfg, /*certify_band=*/false);
        ScaleResult out;
        out.coarsest_period = mr.coarsest_period;
        out.trace.steps = {{0.0, e, "start"},
                           {1.0, mr.embedding, "two model ripple stages"}};
        out.min_speed_ratio = 1.5 * R;
        if (out.trace.sup_displacement() > eps)
            throw CalibrationError("stage displacement exceeded the budget");
        return out;
    }
    throw DomainError("scaling driver supports n = 1 (R^2) and n = 2 (R^3)");
}

}  // namespace corrugate
