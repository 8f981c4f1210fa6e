#include "corrugate/flatten.hpp"

#include <algorithm>
#include <cmath>

namespace corrugate {

// ---------------------------------------------------------------------------
// Measurement helpers

namespace {

// Uniform parameter samples: grid nodes, optionally oversampled between them
// so features finer than the grid spacing are not missed (n = 1 only).
std::vector<Vec> sample_points(const DomainChart& chart, int oversample) {
    std::vector<Vec> pts;
    if (chart.dim == 1 && oversample > 1) {
        const int n = (chart.resolution[0] - 1) * oversample;
        pts.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            Vec u(1);
            u << double(k) / n;
            pts.push_back(u);
        }
    } else {
        const long n = chart.node_count();
        pts.reserve(n);
        for (long k = 0; k < n; ++k) pts.push_back(chart.coords(k));
    }
    return pts;
}

}  // namespace

double max_vertical_angle(const Embedding& e, const VerticalSplit& split,
                          const BumpFunction& inside, int oversample) {
    double worst = 0.0;
    for (const Vec& u : sample_points(e.chart(), oversample)) {
        if (!inside.trivial() && inside(u) < 1.0) continue;
        worst = std::max(worst, vertical_angle(tangent_plane(e, u), split));
    }
    return worst;
}

double min_fiber_angle(const Embedding& e, const BundleField& field,
                       int oversample) {
    double worst = M_PI / 2;
    for (const Vec& u : sample_points(e.chart(), oversample)) {
        Plane fiber = field.at(e.eval(u));
        worst = std::min(worst, min_principal_angle(tangent_plane(e, u), fiber));
    }
    return worst;
}

double max_field_angle(const Embedding& e, const BundleField& field,
                       int oversample) {
    double worst = 0.0;
    for (const Vec& u : sample_points(e.chart(), oversample)) {
        Plane fiber = field.at(e.eval(u));
        worst = std::max(worst, max_principal_angle(tangent_plane(e, u), fiber));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Coordinate-split flattening

namespace {

Embedding horizontal_projection(const Embedding& e, int q) {
    return Embedding(e.chart(), q,
                     [e, q](const Vec& u) { return Vec(e.eval(u).head(q)); },
                     [e, q](const Vec& u) { return Mat(e.jacobian(u).leftCols(q)); },
                     e.label() + "_horizontal");
}

// (H_s(u), v(u)): scaled horizontal part, vertical carried along verbatim.
Embedding with_vertical(const Embedding& horizontal, const Embedding& original,
                        int q, int t, const std::string& label) {
    return Embedding(
        original.chart(), q + t,
        [horizontal, original, q, t](const Vec& u) {
            Vec x(q + t);
            x.head(q) = horizontal.eval(u);
            x.tail(t) = original.eval(u).tail(t);
            return x;
        },
        [horizontal, original, q, t](const Vec& u) {
            Mat J(original.domain_dim(), q + t);
            J.leftCols(q) = horizontal.jacobian(u);
            J.rightCols(t) = original.jacobian(u).rightCols(t);
            return J;
        },
        label);
}

}  // namespace

IsotopyTrace flatten(const FlattenRequest& req, const Config& cfg) {
    if (!req.split) throw DomainError("flatten needs a coordinate split");
    if (!(req.delta > 0 && req.delta < M_PI / 2))
        throw DomainError("verticality target must lie in (0, pi/2)");
    if (req.eps <= 0) throw DomainError("displacement budget must be positive");
    const Embedding& e = req.e;
    const VerticalSplit& split = *req.split;
    const int q = split.horizontal_dim, t = split.vertical_dim;
    const int n = e.domain_dim();
    if (split.ambient_dim() != e.ambient_dim())
        throw DomainError("split dims do not sum to the ambient dimension");
    if (q - n < 1)
        throw CodimensionError("flatten needs q - n >= 1 horizontal room");
    if (n != 1) throw DomainError("flatten currently handles curves (n = 1)");

    if (std::getenv("CORRUGATE_TRACE")) fprintf(stderr, "[flatten] enter res=%d\n", e.chart().resolution[0]);
    if (max_vertical_angle(e, split, req.support) <= req.delta)
        return IsotopyTrace::identity(e, "already within the verticality target");
    if (std::getenv("CORRUGATE_TRACE")) fprintf(stderr, "[flatten] not-already-flat\n");

    auto comp = is_compressible(e, split, cfg);
    if (!comp.compressible)
        throw CompressibilityError("not compressible: horizontal margin " +
                                   std::to_string(comp.margin) + " at node " +
                                   std::to_string(comp.worst_node));
    if (q != 2)
        throw DomainError("flatten's scaling driver handles q = 2 horizontals");

    double v_max = 0.0;
    for (const Vec& u : sample_points(e.chart(), 3)) {
        if (!req.support.trivial() && req.support(u) < 1.0) continue;
        Mat J = e.jacobian(u);
        const double h = J.leftCols(q).norm(), v = J.rightCols(t).norm();
        v_max = std::max(v_max, v / (h > 1e-12 ? h : 1e-12));
    }

    Embedding h = horizontal_projection(e, q);
    double R = v_max / std::tan(req.delta * cfg.flatten_safety);
    if (std::getenv("CORRUGATE_TRACE"))
        fprintf(stderr, "[flatten] res=%d v_max=%g delta=%g eps=%g R=%g\n",
                e.chart().resolution[0], v_max, req.delta, req.eps, R);
    for (int attempt = 0; attempt < 2; ++attempt, R *= 2) {
        ScaleResult sr;
        try {
            sr = ripple_scale_metric(h, R, req.eps, req.support, cfg);
        } catch (const CalibrationError&) {
            continue;  // retry with doubled scale
        }
        IsotopyTrace out;
        for (const auto& step : sr.trace.steps)
            out.steps.push_back({step.time,
                                 with_vertical(step.embedding, e, q, t,
                                               e.label() + "_flat@" +
                                                   std::to_string(step.time)),
                                 step.provenance});
        const double achieved =
            max_vertical_angle(out.steps.back().embedding, split, req.support);
        if (achieved > req.delta) continue;
        if (out.sup_displacement() > req.eps) continue;
        return out;
    }
    throw CalibrationError("flatten could not reach the verticality target");
}

// ---------------------------------------------------------------------------
// Field (bundle) version

namespace {

Embedding into_frame(const Embedding& e, const Mat& B, const std::string& label) {
    return Embedding(e.chart(), e.ambient_dim(),
                     [e, B](const Vec& u) { return Vec(B.transpose() * e.eval(u)); },
                     [e, B](const Vec& u) { return Mat(e.jacobian(u) * B); }, label);
}

Embedding out_of_frame(const Embedding& e, const Mat& B, const std::string& label) {
    return Embedding(e.chart(), e.ambient_dim(),
                     [e, B](const Vec& u) { return Vec(B * e.eval(u)); },
                     [e, B](const Vec& u) { return Mat(e.jacobian(u) * B.transpose()); },
                     label);
}

// Orthonormal ambient frame with the fiber directions last.
Mat adapted_frame(const Plane& fiber) {
    const int d = fiber.ambient_dim(), t = fiber.rank();
    Mat B(d, d);
    B.leftCols(d - t) = orthogonal_complement(fiber).frame();
    B.rightCols(t) = fiber.frame();
    return B;
}

}  // namespace

IsotopyTrace flatten_bundle(const FlattenRequest& req, const Config& cfg) {
    if (!req.field) throw DomainError("flatten_bundle needs a plane field");
    const Embedding& e = req.e;
    const BundleField& field = *req.field;
    const int d = e.ambient_dim(), n = e.domain_dim(), t = field.rank();
    if (field.ambient_dim() != d) throw DomainError("field ambient dim mismatch");
    if (t + n >= d)
        throw CodimensionError("flatten_bundle needs t + n < d");
    if (n != 1) throw DomainError("flatten_bundle currently handles curves");

    if (std::getenv("CORRUGATE_TRACE")) fprintf(stderr, "[bundle] enter res=%d\n", e.chart().resolution[0]);
    // fiber variation across the image decides the patch count
    const Mat& img = e.grid_images();
    const long count = e.chart().node_count();
    Plane mid = field.at(img.row(count / 2).transpose());
    double variation = 0.0;
    for (long k = 0; k < count; ++k)
        variation = std::max(
            variation, max_principal_angle(field.at(img.row(k).transpose()), mid));
    if (std::getenv("CORRUGATE_TRACE")) fprintf(stderr, "[bundle] variation=%g\n", variation);
    int patches = 1;
    if (variation > req.delta / 2) {
        if (e.chart().periodic[0])
            throw ContinuityError(
                "varying field over a closed chart needs a seam patch; unsupported");
        patches = std::min(64, static_cast<int>(std::ceil(2 * variation / req.delta)));
    }

    IsotopyTrace out;
    out.steps.push_back({0.0, e, "start"});
    Embedding cur = e;
    for (int p = 0; p < patches; ++p) {
        const double lo = double(p) / patches, hi = double(p + 1) / patches;
        Vec uc(1);
        uc << 0.5 * (lo + hi);
        Mat B = adapted_frame(field.at(cur.eval(uc)));

        FlattenRequest sub;
        sub.e = into_frame(cur, B, cur.label() + "_frame");
        sub.split = VerticalSplit(d - t, t);
        sub.delta = patches > 1 ? req.delta / 2 : req.delta;
        sub.eps = patches > 1 ? req.eps / 2 : req.eps;
        if (patches > 1) {
            const double w = 1.0 / patches;
            // end patches keep their outward collar virtual (never sampled)
            sub.support = BumpFunction::interval(
                p == 0 ? -2.0 : lo - 0.5 * w, p == 0 ? -1.0 : lo,
                p == patches - 1 ? 2.0 : hi, p == patches - 1 ? 3.0 : hi + 0.5 * w);
        } else {
            sub.support = req.support;
        }
        IsotopyTrace tr = flatten(sub, cfg);
        for (size_t k = 1; k < tr.steps.size(); ++k) {
            const auto& step = tr.steps[k];
            out.steps.push_back(
                {(p + step.time) / patches,
                 out_of_frame(step.embedding, B, cur.label() + "_patch"),
                 "patch " + std::to_string(p) + ": " + step.provenance});
        }
        cur = out.steps.back().embedding;
    }
    if (out.steps.size() == 1)
        return IsotopyTrace::identity(e, "already within the verticality target");

    const double final_angle = min_fiber_angle(cur, field, 3);
    if (final_angle < M_PI / 2 - req.delta)
        throw CalibrationError("flatten_bundle fiber angle " +
                               std::to_string(final_angle) + " misses pi/2 - delta");
    return out;
}

// ---------------------------------------------------------------------------
// Normal deformation

namespace {

// Same curve, finer grid: rippled passes have image bends far tighter than
// any workable spline node spacing, so later passes reuse the composed
// closures (whose jacobians are analytic) instead of a positional bake.
Embedding rechart(const Embedding& e, int res) {
    return Embedding(DomainChart(1, res, e.chart().periodic[0]), e.ambient_dim(),
                     [e](const Vec& u) { return e.eval(u); },
                     [e](const Vec& u) { return e.jacobian(u); }, e.label());
}

double sup_distance(const Embedding& a, const Embedding& b, int samples = 1024) {
    double worst = 0.0;
    for (int k = 0; k <= samples; ++k) {
        Vec u(1);
        u << double(k) / samples;
        worst = std::max(worst, (a.eval(u) - b.eval(u)).norm());
    }
    return worst;
}

}  // namespace

DeformResult normal_deform(const DeformRequest& req, const Config& cfg) {
    const Embedding& e = req.e;
    const int d = e.ambient_dim(), n = e.domain_dim(), t = req.field.rank();
    if (n != 1) throw DomainError("normal_deform currently handles curves");
    if (t + n >= d)
        throw CodimensionError(
            "normal_deform needs t + n < d; route t + n = d through the core "
            "shrink (directed_embedding)");

    int res = std::max(e.chart().resolution[0], 513);
    Embedding cur = bake_curve(e, res);

    std::vector<Vec> probes;
    {
        const Mat& img = cur.grid_images();
        const long stride = std::max<long>(1, img.rows() / 48);
        for (long k = 0; k < img.rows(); k += stride)
            probes.push_back(img.row(k).transpose());
    }
    DeformResult out;
    out.partition = split_homotopy(req.field, probes, 0.0, cfg);
    const int r = static_cast<int>(out.partition.size()) - 1;
    const double eps_pass = req.eps / (r + 1);
    constexpr int kMaxRes = (1 << 18) + 1;

    out.trace.steps.push_back({0.0, cur, "start"});
    for (int i = 0; i <= r; ++i) {
        const double s = out.partition[i];
        BundleField slice = req.field.slice(s);
        PassRecord rec;
        rec.s = s;
        rec.normal_margin = min_fiber_angle(cur, slice, 2);
        if (rec.normal_margin <= cfg.strict_tol)
            throw StepNormalityError("field not normal before pass " +
                                     std::to_string(i) + " (margin " +
                                     std::to_string(rec.normal_margin) + ")");
        rec.delta_used = i < r ? std::max(req.delta, 0.35) : req.delta;
        if (std::getenv("CORRUGATE_TRACE"))
            fprintf(stderr, "[deform] pass %d/%d s=%g margin=%g delta=%g res=%d\n",
                    i, r, s, rec.normal_margin, rec.delta_used, res);

        IsotopyTrace tr;
        for (;;) {
            FlattenRequest sub;
            sub.e = cur;
            sub.field = slice;
            sub.delta = rec.delta_used;
            sub.eps = eps_pass;
            try {
                tr = flatten_bundle(sub, cfg);
                break;
            } catch (const ParameterSearchError&) {
                if (2 * (res - 1) + 1 > kMaxRes) throw;
                res = 2 * (res - 1) + 1;
                cur = rechart(cur, res);
            }
        }
        rec.displacement = tr.sup_displacement();
        if (rec.displacement > eps_pass * (1 + 1e-9))
            throw CalibrationError("pass " + std::to_string(i) +
                                   " exceeded its displacement share");

        cur = tr.final();
        out.passes.push_back(rec);
        out.trace.steps.push_back(
            {double(i + 1) / (r + 1), cur,
             "flattened against field at s = " + std::to_string(s)});
    }

    out.total_displacement = sup_distance(out.trace.initial(), cur);
    if (out.total_displacement > req.eps)
        throw CalibrationError("total displacement " +
                               std::to_string(out.total_displacement) +
                               " exceeds the budget");
    out.final_min_angle = min_fiber_angle(cur, req.field.slice(1.0), 3);
    if (out.final_min_angle < M_PI / 2 - req.delta)
        throw CalibrationError("final fiber angle " +
                               std::to_string(out.final_min_angle) +
                               " misses pi/2 - delta");
    return out;
}

// ---------------------------------------------------------------------------
// Core shrink and directed embeddings

Embedding shrink_to_core(const Embedding& e, double lambda) {
    if (!(lambda > 0 && lambda <= 1))
        throw DomainError("shrink factor must lie in (0, 1]");
    for (bool p : e.chart().periodic)
        if (p) throw DomainError("core shrink needs a non-periodic chart");
    if (lambda == 1.0) return e;
    const int n = e.domain_dim();
    Vec c = Vec::Constant(n, 0.5);
    return Embedding(e.chart(), e.ambient_dim(),
                     [e, c, lambda](const Vec& u) {
                         return e.eval(c + lambda * (u - c));
                     },
                     [e, c, lambda](const Vec& u) {
                         return Mat(lambda * e.jacobian(c + lambda * (u - c)));
                     },
                     e.label() + "_core");
}

namespace {

// Rotation by phi in the plane spanned by unit a and unit b (b not parallel
// to a), identity on the orthogonal complement.
Mat plane_rotation(const Vec& a, const Vec& b_raw, double phi) {
    const int d = static_cast<int>(a.size());
    Vec b = b_raw - b_raw.dot(a) * a;
    const double len = b.norm();
    if (len < 1e-12) return Mat::Identity(d, d);
    b /= len;
    return Mat::Identity(d, d) + (std::cos(phi) - 1) *
               (a * a.transpose() + b * b.transpose()) +
           std::sin(phi) * (b * a.transpose() - a * b.transpose());
}

}  // namespace

DirectedResult directed_embedding(const Embedding& e, const BundleField& eta,
                                  const BundleHomotopy& tangent_deformation,
                                  double delta, double eps, const Config& cfg) {
    const int n = e.domain_dim();
    if (n != 1) throw DomainError("directed_embedding currently handles curves");
    if (eta.rank() != n || tangent_deformation.rank() != n)
        throw DomainError("target field rank must equal the domain dimension");
    for (bool p : e.chart().periodic)
        if (p) throw DomainError("directed_embedding needs a chart with boundary");

    // hypothesis: the deformation starts at the tangent field
    for (const Vec& u : sample_points(e.chart(), 2)) {
        const double a = max_principal_angle(tangent_deformation.at(0.0, e.eval(u)),
                                             tangent_plane(e, u));
        if (a > 1e-6)
            throw HypothesisError("deformation time-0 slice differs from the "
                                  "tangent field by " + std::to_string(a));
    }

    for (double lambda : {1.0, 0.5, 0.25, 0.125}) {
        Embedding core = shrink_to_core(e, lambda);
        const Mat& img = core.grid_images();
        Vec centroid = img.colwise().mean().transpose();

        Vec mean_tan = Vec::Zero(e.ambient_dim());
        Vec mean_eta = Vec::Zero(e.ambient_dim());
        for (long k = 0; k < img.rows(); ++k) {
            Vec u = core.chart().coords(k);
            Vec tg = core.jacobian(u).row(0).transpose().normalized();
            if (tg.dot(mean_tan) < 0) tg = -tg;
            mean_tan += tg;
            Vec f = eta.at(img.row(k).transpose()).frame().col(0);
            if (f.dot(mean_eta) < 0) f = -f;
            mean_eta += f;
        }
        mean_tan.normalize();
        mean_eta.normalize();
        if (mean_tan.dot(mean_eta) < 0) mean_eta = -mean_eta;
        const double phi =
            std::acos(std::clamp(mean_tan.dot(mean_eta), -1.0, 1.0));

        auto rotated = [&](double frac, const std::string& label) {
            Mat R = plane_rotation(mean_tan, mean_eta, frac * phi);
            return Embedding(core.chart(), core.ambient_dim(),
                             [core, R, centroid](const Vec& u) {
                                 return Vec(centroid + R * (core.eval(u) - centroid));
                             },
                             [core, R](const Vec& u) {
                                 return Mat(core.jacobian(u) * R.transpose());
                             },
                             label);
        };
        Embedding final = rotated(1.0, e.label() + "_directed");
        const double angle = max_field_angle(final, eta, 3);
        const double align_disp = sup_distance(core, final);
        if (angle > delta || align_disp > eps) continue;

        DirectedResult out;
        out.lambda = lambda;
        out.final_max_angle = angle;
        out.align_displacement = align_disp;
        out.trace.steps.push_back({0.0, e, "start"});
        if (lambda < 1.0) {
            out.trace.steps.push_back(
                {0.2, shrink_to_core(e, 0.5 * (1 + lambda)), "core shrink (half)"});
            out.trace.steps.push_back({0.4, core, "core shrink"});
        }
        const int rot_steps = std::max(1, static_cast<int>(std::ceil(phi / (M_PI / 8))));
        for (int k = 1; k <= rot_steps; ++k)
            out.trace.steps.push_back(
                {0.4 + 0.6 * k / rot_steps, rotated(double(k) / rot_steps, "align"),
                 "alignment rotation"});
        out.trace.steps.back().embedding = final;
        return out;
    }
    throw CalibrationError(
        "no core shrink factor admits a rigid alignment within the bounds");
}

// ---------------------------------------------------------------------------
// Curve baking

Embedding bake_curve(const Embedding& e, int res) {
    if (e.domain_dim() != 1) throw DomainError("bake_curve handles curves only");
    if (res < 4) throw DomainError("bake resolution too small");
    const bool periodic = e.chart().periodic[0];
    const int d = e.ambient_dim(), m = res;
    auto pts = std::make_shared<Mat>(m, d);
    for (int k = 0; k < m; ++k) {
        Vec u(1);
        u << double(k) / (m - 1);
        pts->row(k) = e.eval(u).transpose();
    }
    auto tans = std::make_shared<Mat>(m, d);
    for (int k = 0; k < m; ++k) {
        int prev = k - 1, next = k + 1;
        if (periodic) {
            if (prev < 0) prev = m - 2;
            if (next > m - 1) next = 1;
            tans->row(k) = 0.5 * (pts->row(next) - pts->row(prev));
        } else if (k == 0) {
            tans->row(k) = pts->row(1) - pts->row(0);
        } else if (k == m - 1) {
            tans->row(k) = pts->row(m - 1) - pts->row(m - 2);
        } else {
            tans->row(k) = 0.5 * (pts->row(next) - pts->row(prev));
        }
    }
    auto locate = [m, periodic](double u, int& k, double& t) {
        if (periodic) u -= std::floor(u);
        double x = std::clamp(u, 0.0, 1.0) * (m - 1);
        k = std::clamp(static_cast<int>(x), 0, m - 2);
        t = x - k;
    };
    auto map = [pts, tans, locate](const Vec& u) {
        int k;
        double t;
        locate(u[0], k, t);
        const double t2 = t * t, t3 = t2 * t;
        return Vec(((2 * t3 - 3 * t2 + 1) * pts->row(k) +
                    (t3 - 2 * t2 + t) * tans->row(k) +
                    (-2 * t3 + 3 * t2) * pts->row(k + 1) +
                    (t3 - t2) * tans->row(k + 1))
                       .transpose());
    };
    auto jac = [pts, tans, locate, m](const Vec& u) {
        int k;
        double t;
        locate(u[0], k, t);
        const double t2 = t * t;
        return Mat((m - 1) *
                   ((6 * t2 - 6 * t) * pts->row(k) +
                    (3 * t2 - 4 * t + 1) * tans->row(k) +
                    (-6 * t2 + 6 * t) * pts->row(k + 1) +
                    (3 * t2 - 2 * t) * tans->row(k + 1)));
    };
    return Embedding(DomainChart(1, res, periodic), d, map, jac,
                     e.label() + "_baked");
}

}  // namespace corrugate
