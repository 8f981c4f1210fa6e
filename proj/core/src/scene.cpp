#include "corrugate/scene.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "corrugate/export.hpp"
#include "corrugate/expression.hpp"
#include "json.hpp"

namespace corrugate {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kPipelines = {"ripple1d", "model-ripple", "scale",
                                          "flatten",  "flatten-bundle",
                                          "deform",   "directed", "shrink"};

struct FamilyInfo {
    int domain_dim;
    int ambient_dim;  // resolved from params
    int default_grid;
};

FamilyInfo family_info(const std::string& family,
                       const std::map<std::string, double>& params) {
    auto get = [&](const std::string& k, double dflt) {
        auto it = params.find(k);
        return it == params.end() ? dflt : it->second;
    };
    if (family == "interval") return {1, 2, 1025};
    if (family == "circle") return {1, static_cast<int>(get("ambient", 2)), 513};
    if (family == "helix") return {1, 3, 1025};
    if (family == "parabola") return {1, static_cast<int>(get("ambient", 2)), 513};
    if (family == "figure-eight") return {1, 2, 513};
    if (family == "flat-square") return {2, static_cast<int>(get("ambient", 3)), 65};
    if (family == "flat-cube")
        return {static_cast<int>(get("n", 2)), static_cast<int>(get("d", 3)), 65};
    throw SceneError("unknown family '" + family + "'");
}

void expect_keys(const json& j, const std::set<std::string>& keys,
                 const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key()))
            throw SceneError("unknown key '" + it.key() + "' in " + ctx);
}

std::vector<double> number_list(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw SceneError(ctx + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw SceneError(ctx + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

FieldSpec parse_field(const json& j, const std::string& ctx) {
    expect_keys(j, {"vectors"}, ctx);
    if (!j.contains("vectors"))
        throw SceneError(ctx + " needs a 'vectors' array");
    FieldSpec spec;
    for (const auto& vec : j.at("vectors")) {
        std::vector<std::string> comps;
        for (const auto& c : vec) {
            if (!c.is_string())
                throw SceneError(ctx + " components must be expression strings");
            Expression::parse(c.get<std::string>());  // validate now
            comps.push_back(c.get<std::string>());
        }
        spec.vectors.push_back(std::move(comps));
    }
    if (spec.vectors.empty()) throw SceneError(ctx + " needs at least one vector");
    return spec;
}

std::pair<int, int> line_col(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

double scene_param(const Scene& s, const std::string& key, double fallback) {
    auto it = s.params.find(key);
    return it == s.params.end() ? fallback : it->second;
}

Scene parse_scene(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw SceneError("syntax error at line " + std::to_string(line) +
                         ", column " + std::to_string(col));
    }
    expect_keys(j,
                {"pipeline", "embedding", "split", "field", "target", "params",
                 "mask", "seed", "outputs"},
                "scene");
    Scene s;
    if (!j.contains("pipeline") || !j.at("pipeline").is_string())
        throw SceneError("scene needs a 'pipeline' string");
    s.pipeline = j.at("pipeline").get<std::string>();
    if (!kPipelines.count(s.pipeline))
        throw SceneError("unknown pipeline '" + s.pipeline + "'");

    if (!j.contains("embedding")) throw SceneError("scene needs an 'embedding'");
    const json& e = j.at("embedding");
    expect_keys(e, {"family", "grid", "params"}, "embedding");
    if (!e.contains("family") || !e.at("family").is_string())
        throw SceneError("embedding needs a 'family' string");
    s.family = e.at("family").get<std::string>();
    if (e.contains("grid")) s.grid = e.at("grid").get<int>();
    if (e.contains("params"))
        for (auto it = e.at("params").begin(); it != e.at("params").end(); ++it)
            s.family_params[it.key()] = it.value().get<double>();
    const FamilyInfo info = family_info(s.family, s.family_params);

    if (j.contains("split")) {
        const json& sp = j.at("split");
        expect_keys(sp, {"horizontal", "vertical"}, "split");
        const int q = sp.at("horizontal").get<int>();
        const int t = sp.at("vertical").get<int>();
        if (q + t != info.ambient_dim)
            throw SceneError("split dims " + std::to_string(q) + " + " +
                             std::to_string(t) + " != ambient dim " +
                             std::to_string(info.ambient_dim));
        s.split = {q, t};
    }
    if (j.contains("field")) s.field = parse_field(j.at("field"), "field");
    if (j.contains("target")) s.target = parse_field(j.at("target"), "target");
    for (const auto& spec : {s.field, s.target})
        if (spec)
            for (const auto& vec : spec->vectors)
                if (static_cast<int>(vec.size()) != info.ambient_dim)
                    throw SceneError("field vector has " +
                                     std::to_string(vec.size()) +
                                     " components, ambient dim is " +
                                     std::to_string(info.ambient_dim));

    if (j.contains("params"))
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
            if (!it.value().is_number())
                throw SceneError("parameter '" + it.key() + "' must be a number");
            s.params[it.key()] = it.value().get<double>();
        }
    for (const char* key : {"R", "T", "eps", "delta", "A", "omega"})
        if (s.params.count(key) && s.params.at(key) <= 0)
            throw SceneError(std::string("parameter '") + key +
                             "' must be positive");

    if (j.contains("mask")) {
        const json& m = j.at("mask");
        expect_keys(m, {"inner_lo", "inner_hi", "outer_lo", "outer_hi"}, "mask");
        MaskSpec spec;
        spec.inner_lo = number_list(m.at("inner_lo"), "mask.inner_lo");
        spec.inner_hi = number_list(m.at("inner_hi"), "mask.inner_hi");
        spec.outer_lo = number_list(m.at("outer_lo"), "mask.outer_lo");
        spec.outer_hi = number_list(m.at("outer_hi"), "mask.outer_hi");
        const size_t n = spec.inner_lo.size();
        if (spec.inner_hi.size() != n || spec.outer_lo.size() != n ||
            spec.outer_hi.size() != n || n != size_t(info.domain_dim))
            throw SceneError("mask bounds must all have one entry per domain axis");
        s.mask = std::move(spec);
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<unsigned long long>();
    if (j.contains("outputs"))
        for (const auto& o : j.at("outputs")) {
            const std::string what = o.get<std::string>();
            if (what != "mesh" && what != "polyline" && what != "angles")
                throw SceneError("unknown output '" + what + "'");
            s.outputs.push_back(what);
        }
    return s;
}

std::string serialize_scene(const Scene& s) {
    json j;
    j["pipeline"] = s.pipeline;
    j["embedding"]["family"] = s.family;
    if (s.grid > 0) j["embedding"]["grid"] = s.grid;
    if (!s.family_params.empty()) j["embedding"]["params"] = s.family_params;
    if (s.split) {
        j["split"]["horizontal"] = s.split->first;
        j["split"]["vertical"] = s.split->second;
    }
    if (s.field) j["field"]["vectors"] = s.field->vectors;
    if (s.target) j["target"]["vectors"] = s.target->vectors;
    if (!s.params.empty()) j["params"] = s.params;
    if (s.mask) {
        j["mask"]["inner_lo"] = s.mask->inner_lo;
        j["mask"]["inner_hi"] = s.mask->inner_hi;
        j["mask"]["outer_lo"] = s.mask->outer_lo;
        j["mask"]["outer_hi"] = s.mask->outer_hi;
    }
    if (s.seed) j["seed"] = s.seed;
    if (!s.outputs.empty()) j["outputs"] = s.outputs;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Construction from scene specs

Embedding build_scene_embedding(const Scene& s) {
    const FamilyInfo info = family_info(s.family, s.family_params);
    const int res = s.grid > 0 ? s.grid : info.default_grid;
    auto fam = [&](const std::string& k, double dflt) {
        auto it = s.family_params.find(k);
        return it == s.family_params.end() ? dflt : it->second;
    };
    if (s.family == "interval") return families::interval(res);
    if (s.family == "circle")
        return families::circle(fam("radius", 1.0), res, info.ambient_dim);
    if (s.family == "helix") return families::helix(res);
    if (s.family == "parabola") {
        const double c = fam("coeff", 0.01);
        return families::graph1d([c](double x) { return c * x * x; },
                                 [c](double x) { return 2 * c * x; }, res,
                                 info.ambient_dim);
    }
    if (s.family == "figure-eight") return families::figure_eight(res);
    if (s.family == "flat-square")
        return families::flat_cube(2, info.ambient_dim, res);
    if (s.family == "flat-cube")
        return families::flat_cube(info.domain_dim, info.ambient_dim, res);
    throw SceneError("unknown family '" + s.family + "'");
}

namespace {

Plane field_plane(const std::vector<std::vector<Expression>>& vectors,
                  const Vec& x, double s_value) {
    static const char* names[] = {"x", "y", "z", "w"};
    std::map<std::string, double> vars;
    for (int c = 0; c < x.size() && c < 4; ++c) vars[names[c]] = x[c];
    vars["s"] = s_value;
    Mat cols(x.size(), vectors.size());
    for (size_t k = 0; k < vectors.size(); ++k)
        for (size_t c = 0; c < vectors[k].size(); ++c)
            cols(c, k) = vectors[k][c].eval(vars);
    return Plane::span(cols);
}

std::vector<std::vector<Expression>> compile_field(const FieldSpec& spec) {
    std::vector<std::vector<Expression>> out;
    for (const auto& vec : spec.vectors) {
        std::vector<Expression> comps;
        for (const auto& c : vec) comps.push_back(Expression::parse(c));
        out.push_back(std::move(comps));
    }
    return out;
}

}  // namespace

BundleField build_field(const FieldSpec& spec, int ambient_dim, double s_value) {
    auto vectors = compile_field(spec);
    return BundleField(ambient_dim, static_cast<int>(spec.vectors.size()),
                       [vectors, s_value](const Vec& x) {
                           return field_plane(vectors, x, s_value);
                       },
                       "scene_field");
}

BundleHomotopy build_homotopy(const FieldSpec& spec, int ambient_dim) {
    auto vectors = compile_field(spec);
    return BundleHomotopy(ambient_dim, static_cast<int>(spec.vectors.size()),
                          [vectors](double s, const Vec& x) {
                              return field_plane(vectors, x, s);
                          },
                          "scene_homotopy");
}

// ---------------------------------------------------------------------------
// Pipeline execution

namespace {

json cert_json(const Certificate& c) {
    json j;
    j["claim"] = c.claim;
    j["pass"] = c.pass;
    j["measured"] = c.measured;
    j["bound"] = c.bound;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

BumpFunction scene_mask(const Scene& s, int dim) {
    if (!s.mask) return BumpFunction::all_of(dim);
    auto v = [](const std::vector<double>& x) {
        return Eigen::Map<const Vec>(x.data(), x.size());
    };
    return BumpFunction(v(s.mask->inner_lo), v(s.mask->inner_hi),
                        v(s.mask->outer_lo), v(s.mask->outer_hi));
}

Region inner_region(const BumpFunction& mask, int dim) {
    Region r;
    if (mask.trivial()) {
        r.lo = Vec::Constant(dim, 0.0);
        r.hi = Vec::Constant(dim, 1.0);
    } else {
        r.lo = mask.inner_lo().cwiseMax(0.0);
        r.hi = mask.inner_hi().cwiseMin(1.0);
    }
    r.outside = true;
    return r;
}

struct PhaseTimer {
    json& timing;
    std::string phase;
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    ~PhaseTimer() {
        timing[phase] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
    }
};

Certificate direct_cert(const std::string& claim, double measured, double bound,
                        bool pass, unsigned long long seed,
                        const std::string& detail = "") {
    Certificate c;
    c.claim = claim;
    c.measured = measured;
    c.bound = bound;
    c.pass = pass;
    c.seed = seed;
    c.detail = detail;
    return c;
}

// Max |after - before| over nodes where the mask vanishes; 0.0 bitwise means
// untouched.
Certificate fixed_region_cert(const Embedding& before, const Embedding& after,
                              const BumpFunction& mask, unsigned long long seed) {
    double worst = 0.0;
    long n_outside = 0;
    const auto& chart = before.chart();
    for (long k = 0; k < chart.node_count(); ++k) {
        Vec u = chart.coords(k);
        if (!mask.trivial() && mask(u) == 0.0) {
            ++n_outside;
            worst = std::max(worst, (after.eval(u) - before.eval(u)).cwiseAbs().maxCoeff());
        }
    }
    Certificate c = direct_cert("fixed-region", worst, 0.0, worst == 0.0, seed,
                                std::to_string(n_outside) + " nodes outside the mask");
    c.samples = n_outside;
    return c;
}

void write_outputs(const Scene& s, const Embedding& final_e,
                   const std::string& out_dir) {
    for (const auto& what : s.outputs) {
        if (what == "mesh") export_mesh(final_e, out_dir + "/mesh.obj");
        if (what == "polyline")
            export_polyline(final_e, out_dir + "/polyline.csv");
        if (what == "angles") {
            VerticalSplit split =
                s.split ? VerticalSplit(s.split->first, s.split->second)
                        : VerticalSplit(final_e.ambient_dim() - 1, 1);
            export_angle_map(final_e, split, out_dir + "/angles.csv",
                             out_dir + "/angles.svg");
        }
    }
}

}  // namespace

RunReport run_scene(const Scene& s, const std::string& out_dir, Config cfg) {
    if (s.seed) cfg.seed = s.seed;
    json report;
    report["version"] = "0.1.0";
    report["config_hash"] = cfg.hash();
    report["scene"] = json::parse(serialize_scene(s));
    json resolved = json::object();
    json timing = json::object();
    std::vector<Certificate> certs;

    Embedding e = build_scene_embedding(s);
    const int n = e.domain_dim(), d = e.ambient_dim();
    const double eps = scene_param(s, "eps", 0.1);
    const double delta = scene_param(s, "delta", 5.0 * M_PI / 180);
    BumpFunction mask = scene_mask(s, n);
    Embedding final_e = e;

    if (s.pipeline == "ripple1d") {
        RippleParams p;
        p.amplitude = scene_param(s, "A", 0.1);
        p.omega = scene_param(s, "omega", 10);
        p.mask = mask;
        Embedding rippled;
        double length = 0;
        {
            PhaseTimer t{timing, "construct"};
            rippled = basic_ripple(p, e.chart().resolution[0]);
            length = basic_ripple_arclength(p, 0.0, 1.0);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(direct_cert("length", length,
                                        4 * p.amplitude * p.omega,
                                        length > 4 * p.amplitude * p.omega,
                                        cfg.seed, "quadrature arc length"));
            IsotopyTrace ramp;
            for (int k = 0; k <= 3; ++k) {
                RippleParams q = p;
                q.amplitude = p.amplitude * k / 3;
                ramp.steps.push_back({double(k) / 3,
                                      basic_ripple(q, e.chart().resolution[0]),
                                      "amplitude ramp"});
            }
            certs.push_back(
                check_displacement(ramp, p.amplitude + 1.0 / p.omega, cfg));
            certs.push_back(check_injectivity(rippled, cfg));
        }
        resolved["A"] = p.amplitude;
        resolved["omega"] = p.omega;
        final_e = rippled;
    } else if (s.pipeline == "model-ripple") {
        const double T = scene_param(s, "T", 5.0);
        Vec ilo = s.mask ? Vec(mask.inner_lo()) : Vec(Vec::Constant(n, 0.3));
        Vec ihi = s.mask ? Vec(mask.inner_hi()) : Vec(Vec::Constant(n, 0.7));
        ModelRipple mr;
        {
            PhaseTimer t{timing, "construct"};
            mr = model_ripple(n, T, ilo, ihi, eps, e.chart().resolution[0], cfg);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(direct_cert(
                "scaling", mr.min_ratio, (1 - cfg.ratio_band) * T,
                mr.min_ratio >= (1 - cfg.ratio_band) * T, cfg.seed,
                "min sampled pair ratio"));
            certs.push_back(direct_cert(
                "scaling-upper", mr.max_ratio, (1 + cfg.ratio_band) * T,
                mr.max_ratio <= (1 + cfg.ratio_band) * T, cfg.seed,
                "max sampled pair ratio"));
            certs.push_back(fixed_region_cert(
                e, mr.embedding, mr.plan.stages.front().mask, cfg.seed));
            certs.push_back(check_injectivity(mr.embedding, cfg));
        }
        for (size_t k = 0; k < mr.plan.stages.size(); ++k) {
            json st;
            st["A"] = mr.plan.stages[k].amplitude;
            st["omega"] = mr.plan.stages[k].omega;
            st["tube_radius"] = mr.plan.stages[k].tube_radius;
            resolved["stages"].push_back(st);
        }
        final_e = mr.embedding;
    } else if (s.pipeline == "scale") {
        const double R = scene_param(s, "R", 10.0);
        if (!s.mask)
            mask = BumpFunction::interval(0.05, 0.1, 0.9, 0.95);
        ScaleResult sr;
        {
            PhaseTimer t{timing, "construct"};
            sr = ripple_scale_metric(e, R, eps, mask, cfg);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(check_scaling(e, sr.trace.final(), R,
                                          inner_region(mask, n),
                                          sr.coarsest_period, cfg));
            certs.push_back(check_displacement(sr.trace, eps, cfg));
            certs.push_back(direct_cert("speed-ratio", sr.min_speed_ratio, R,
                                        sr.min_speed_ratio >= R, cfg.seed,
                                        "inner-region local speed ratio"));
            certs.push_back(check_injectivity(sr.trace.final(), cfg));
        }
        resolved["A"] = sr.params.amplitude;
        resolved["omega"] = sr.params.omega;
        resolved["period"] = sr.coarsest_period;
        final_e = sr.trace.final();
    } else if (s.pipeline == "flatten") {
        if (!s.split) throw SceneError("flatten needs a split");
        FlattenRequest req;
        req.e = e;
        req.split = VerticalSplit(s.split->first, s.split->second);
        req.delta = delta;
        req.eps = eps;
        req.support = mask;
        IsotopyTrace tr;
        {
            PhaseTimer t{timing, "construct"};
            tr = flatten(req, cfg);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(check_angles(tr.final(), *req.split, delta, cfg));
            double vert_drift = 0.0;
            const int tdim = req.split->vertical_dim;
            for (long k = 0; k < e.chart().node_count(); ++k) {
                Vec u = e.chart().coords(k);
                vert_drift = std::max(vert_drift,
                                      (tr.final().eval(u).tail(tdim) -
                                       e.eval(u).tail(tdim))
                                          .cwiseAbs()
                                          .maxCoeff());
            }
            certs.push_back(direct_cert("vertical-fixed", vert_drift, 0.0,
                                        vert_drift == 0.0, cfg.seed,
                                        "max vertical coordinate drift"));
            certs.push_back(check_displacement(tr, eps, cfg));
            certs.push_back(check_injectivity(tr.final(), cfg));
        }
        final_e = tr.final();
    } else if (s.pipeline == "flatten-bundle") {
        if (!s.field) throw SceneError("flatten-bundle needs a field");
        FlattenRequest req;
        req.e = e;
        req.field = build_field(*s.field, d, 0.0);
        req.delta = delta;
        req.eps = eps;
        req.support = mask;
        IsotopyTrace tr;
        {
            PhaseTimer t{timing, "construct"};
            tr = flatten_bundle(req, cfg);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(check_angles(tr.final(), *req.field,
                                         AngleMode::Perpendicularity, delta, cfg));
            certs.push_back(check_displacement(tr, eps, cfg));
            certs.push_back(check_injectivity(tr.final(), cfg));
        }
        final_e = tr.final();
    } else if (s.pipeline == "deform") {
        if (!s.field) throw SceneError("deform needs a field homotopy");
        DeformRequest req;
        req.e = e;
        req.field = build_homotopy(*s.field, d);
        req.eps = eps;
        req.delta = delta;
        DeformResult dr;
        {
            PhaseTimer t{timing, "construct"};
            dr = normal_deform(req, cfg);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(check_angles(dr.trace.final(), req.field.slice(1.0),
                                         AngleMode::Perpendicularity, delta, cfg));
            certs.push_back(check_following(dr.trace, req.field,
                                            dr.partition, cfg));
            certs.push_back(check_displacement(dr.trace, eps, cfg));
            const double share = eps / double(dr.passes.size());
            for (size_t i = 0; i < dr.passes.size(); ++i)
                certs.push_back(direct_cert(
                    "step-displacement", dr.passes[i].displacement, share,
                    dr.passes[i].displacement <= share * (1 + 1e-9), cfg.seed,
                    "pass " + std::to_string(i)));
            certs.push_back(check_injectivity(dr.trace.final(), cfg));
        }
        resolved["partition"] = dr.partition;
        resolved["r"] = dr.partition.size() - 1;
        for (const auto& p : dr.passes) {
            json st;
            st["s"] = p.s;
            st["normal_margin"] = p.normal_margin;
            st["displacement"] = p.displacement;
            st["delta"] = p.delta_used;
            resolved["passes"].push_back(st);
        }
        final_e = dr.trace.final();
    } else if (s.pipeline == "directed") {
        if (!s.field || !s.target)
            throw SceneError("directed needs a field homotopy and a target");
        BundleField eta = build_field(*s.target, d, 0.0);
        BundleHomotopy defm = build_homotopy(*s.field, d);
        DirectedResult dr;
        {
            PhaseTimer t{timing, "construct"};
            dr = directed_embedding(e, eta, defm, delta, eps, cfg);
        }
        {
            PhaseTimer t{timing, "certify"};
            certs.push_back(check_angles(dr.trace.final(), eta,
                                         AngleMode::Proximity, delta, cfg));
            certs.push_back(direct_cert("displacement", dr.align_displacement,
                                        eps, dr.align_displacement <= eps,
                                        cfg.seed, "post-shrink alignment move"));
            certs.push_back(check_injectivity(dr.trace.final(), cfg));
        }
        resolved["lambda"] = dr.lambda;
        resolved["final_angle"] = dr.final_max_angle;
        final_e = dr.trace.final();
    } else if (s.pipeline == "shrink") {
        const double lambda = scene_param(s, "lambda", 0.5);
        Embedding out;
        {
            PhaseTimer t{timing, "construct"};
            out = shrink_to_core(e, lambda);
        }
        {
            PhaseTimer t{timing, "certify"};
            // every shrunk image point lies on the original image, up to the
            // dense-sample spacing of the original curve/surface
            const Mat& orig = resample(e, 4 * e.chart().resolution[0] - 3)
                                  .grid_images();
            double worst = 0.0;
            const Mat& img = out.grid_images();
            for (long k = 0; k < img.rows(); ++k) {
                double best = std::numeric_limits<double>::max();
                for (long m = 0; m < orig.rows(); ++m)
                    best = std::min(best, (img.row(k) - orig.row(m)).norm());
                worst = std::max(worst, best);
            }
            double max_speed = 0.0;
            for (long k = 0; k < e.chart().node_count(); ++k)
                max_speed = std::max(
                    max_speed, e.jacobian(e.chart().coords(k)).norm());
            const double bound = max_speed * 4 * e.chart().min_spacing();
            certs.push_back(direct_cert("image-subset", worst, bound,
                                        worst <= bound, cfg.seed,
                                        "max distance to the original image"));
            certs.push_back(check_injectivity(out, cfg));
        }
        resolved["lambda"] = lambda;
        final_e = out;
    }

    {
        PhaseTimer t{timing, "export"};
        write_outputs(s, final_e, out_dir);
    }

    report["resolved"] = std::move(resolved);
    report["timing"] = std::move(timing);
    bool all = true;
    json cert_list = json::array();
    for (const auto& c : certs) {
        cert_list.push_back(cert_json(c));
        all = all && c.pass;
    }
    report["certificates"] = std::move(cert_list);
    report["pass"] = all;

    RunReport out;
    out.text = report.dump(2) + "\n";
    out.all_pass = all;
    return out;
}

}  // namespace corrugate
