#include "corrugate/verify.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

namespace corrugate {

bool Region::excludes(const Vec& u) const {
    bool in_box = true;
    for (int a = 0; a < u.size(); ++a)
        if (u[a] < lo[a] || u[a] > hi[a]) {
            in_box = false;
            break;
        }
    return outside ? !in_box : in_box;
}

namespace {

// Verify-side tangent frame: central differences of the map itself (never
// the construction's analytic Jacobian), orthonormalized by SVD.
Mat fd_tangent_frame(const Embedding& e, const Vec& u, const Config& cfg) {
    const int n = e.domain_dim(), d = e.ambient_dim();
    const double h = e.chart().min_spacing() / cfg.fd_divisor;
    Mat J(d, n);
    for (int a = 0; a < n; ++a) {
        Vec up = u, um = u;
        if (e.chart().periodic[a]) {
            up[a] += h;
            um[a] -= h;
        } else {
            up[a] = std::min(1.0, u[a] + h);
            um[a] = std::max(0.0, u[a] - h);
        }
        J.col(a) = (e.eval(up) - e.eval(um)) / (up[a] - um[a]);
    }
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU);
    return svd.matrixU();
}

std::vector<Vec> angle_samples(const DomainChart& chart) {
    std::vector<Vec> pts;
    if (chart.dim == 1) {
        const int n = (chart.resolution[0] - 1) * 4;
        for (int k = 0; k <= n; ++k) {
            Vec u(1);
            u << double(k) / n;
            pts.push_back(u);
        }
    } else {
        for (long k = 0; k < chart.node_count(); ++k) pts.push_back(chart.coords(k));
    }
    return pts;
}

// Verify-side path engine, curves: cumulative chord length at doubled
// resolution.
class ChordEngine {
public:
    ChordEngine(const Embedding& e) : periodic_(e.chart().periodic[0]) {
        const int m = 2 * (e.chart().resolution[0] - 1) + 1;
        cum_.resize(m);
        cum_[0] = 0;
        Vec prev = e.eval(Vec::Constant(1, 0.0));
        for (int k = 1; k < m; ++k) {
            Vec cur = e.eval(Vec::Constant(1, double(k) / (m - 1)));
            cum_[k] = cum_[k - 1] + (cur - prev).norm();
            prev = cur;
        }
    }
    double distance(double u, double v) const {
        const double raw = std::abs(at(u) - at(v));
        return periodic_ ? std::min(raw, cum_.back() - raw) : raw;
    }

private:
    double at(double u) const {
        const int m = static_cast<int>(cum_.size());
        const double x = std::clamp(u, 0.0, 1.0) * (m - 1);
        const int k = std::clamp(static_cast<int>(x), 0, m - 2);
        return cum_[k] + (x - k) * (cum_[k + 1] - cum_[k]);
    }
    std::vector<double> cum_;
    bool periodic_;
};

// Verify-side path engine, surfaces: Dijkstra over the 8-neighbour stencil
// (the construction side uses 16 neighbours).
class KingEngine {
public:
    KingEngine(const Embedding& e) : chart_(e.chart()), img_(e.grid_images()) {}

    std::vector<double> field(long source) const {
        const long count = chart_.node_count();
        std::vector<double> dist(count, std::numeric_limits<double>::max());
        using Item = std::pair<double, long>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[source] = 0;
        heap.push({0.0, source});
        while (!heap.empty()) {
            auto [d0, node] = heap.top();
            heap.pop();
            if (d0 > dist[node]) continue;
            auto idx = chart_.unflatten(node);
            for (int dx = -1; dx <= 1; ++dx)
                for (int dy = -1; dy <= 1; ++dy) {
                    if (dx == 0 && dy == 0) continue;
                    auto j = idx;
                    j[0] += dx;
                    j[1] += dy;
                    bool ok = true;
                    for (int a = 0; a < 2; ++a) {
                        const int range =
                            chart_.periodic[a] ? chart_.resolution[a] - 1
                                               : chart_.resolution[a];
                        if (chart_.periodic[a])
                            j[a] = (j[a] % range + range) % range;
                        else if (j[a] < 0 || j[a] >= range)
                            ok = false;
                    }
                    if (!ok) continue;
                    const long nb = chart_.flatten(j);
                    const double w =
                        (img_.row(nb) - img_.row(node)).norm();
                    if (dist[node] + w < dist[nb]) {
                        dist[nb] = dist[node] + w;
                        heap.push({dist[nb], nb});
                    }
                }
        }
        return dist;
    }

private:
    DomainChart chart_;
    Mat img_;
};

}  // namespace

// ---------------------------------------------------------------------------

Certificate check_injectivity(const Embedding& e, const Config& cfg) {
    Certificate c;
    c.claim = "injectivity";
    c.bound = cfg.inj_margin;
    c.seed = cfg.seed;
    const auto& chart = e.chart();
    const Mat& img = e.grid_images();
    const long count = chart.node_count();
    const double min_sep = 4 * chart.min_spacing();

    double worst = std::numeric_limits<double>::max();
    long wa = -1, wb = -1;
    auto consider = [&](long a, long b) {
        const double dd = chart.domain_distance(chart.coords(a), chart.coords(b));
        if (dd < min_sep) return;
        const double ratio = (img.row(a) - img.row(b)).norm() / dd;
        ++c.samples;
        if (ratio < worst) {
            worst = ratio;
            wa = a;
            wb = b;
        }
    };
    // coarse exhaustive sweep plus seeded random pairs
    const long stride = std::max<long>(1, count / 256);
    for (long a = 0; a < count; a += stride)
        for (long b = a + 1; b < count; b += stride) consider(a, b);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<long> pick(0, count - 1);
    for (long k = 0; k < cfg.pair_count; ++k) consider(pick(rng), pick(rng));

    c.measured = worst;
    c.pass = worst >= cfg.inj_margin;
    std::ostringstream os;
    os << "worst pair: nodes " << wa << ", " << wb;
    c.detail = os.str();
    return c;
}

Certificate check_displacement(const IsotopyTrace& tr, double eps,
                               const Config& cfg) {
    Certificate c;
    c.claim = "displacement";
    c.bound = eps;
    c.seed = cfg.seed;
    const Embedding& base = tr.initial();
    std::vector<Vec> pts;
    if (base.domain_dim() == 1) {
        for (int k = 0; k <= 2048; ++k)
            pts.push_back(Vec::Constant(1, double(k) / 2048));
    } else {
        for (long k = 0; k < base.chart().node_count(); ++k)
            pts.push_back(base.chart().coords(k));
    }
    double worst = 0.0;
    for (size_t s = 1; s < tr.steps.size(); ++s)
        for (const Vec& u : pts) {
            worst = std::max(
                worst, (tr.steps[s].embedding.eval(u) - base.eval(u)).norm());
            ++c.samples;
        }
    c.measured = worst;
    c.pass = worst <= eps;
    return c;
}

Certificate check_scaling(const Embedding& before, const Embedding& after,
                          double R, const std::optional<Region>& exclusion,
                          double min_separation, const Config& cfg) {
    if (before.domain_dim() != after.domain_dim())
        throw DomainError("scaling check needs a common domain");
    Certificate c;
    c.claim = "scaling";
    c.bound = R;
    c.seed = cfg.seed;
    const int n = before.domain_dim();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif;
    auto admissible = [&](const Vec& u) {
        return !exclusion || !exclusion->excludes(u);
    };

    double worst = std::numeric_limits<double>::max();
    if (n == 1) {
        ChordEngine eb(before), ea(after);
        const auto& chart = before.chart();
        while (c.samples < cfg.pair_count) {
            Vec u = Vec::Constant(1, unif(rng)), v = Vec::Constant(1, unif(rng));
            if (!admissible(u) || !admissible(v)) continue;
            if (chart.domain_distance(u, v) < min_separation) continue;
            const double db = eb.distance(u[0], v[0]);
            if (db <= 0) continue;
            worst = std::min(worst, ea.distance(u[0], v[0]) / db);
            ++c.samples;
        }
    } else if (n == 2) {
        KingEngine eb(before), ea(after);
        const auto& chart = before.chart();
        const long count = chart.node_count();
        std::uniform_int_distribution<long> pick(0, count - 1);
        const int sources = 40, targets = 32;
        for (int si = 0; si < sources; ++si) {
            long s = pick(rng);
            while (!admissible(chart.coords(s))) s = pick(rng);
            auto db = eb.field(s);
            auto da = ea.field(s);
            for (int ti = 0; ti < targets; ++ti) {
                const long t = pick(rng);
                if (!admissible(chart.coords(t))) continue;
                if (chart.domain_distance(chart.coords(s), chart.coords(t)) <
                    min_separation)
                    continue;
                if (db[t] <= 0) continue;
                worst = std::min(worst, da[t] / db[t]);
                ++c.samples;
            }
        }
    } else {
        throw DomainError("scaling oracle handles n = 1 and n = 2");
    }
    c.measured = worst;
    c.pass = c.samples > 0 && worst > R;
    c.detail = "min ratio over " + std::to_string(c.samples) + " pairs";
    return c;
}

Certificate check_angles(const Embedding& e, const VerticalSplit& split,
                         double bound, const Config& cfg) {
    Certificate c;
    c.claim = "verticality";
    c.bound = bound;
    c.seed = cfg.seed;
    double worst = 0.0;
    for (const Vec& u : angle_samples(e.chart())) {
        Mat frame = fd_tangent_frame(e, u, cfg);
        Eigen::JacobiSVD<Mat> svd(frame.bottomRows(split.vertical_dim));
        worst = std::max(
            worst, std::asin(std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0)));
        ++c.samples;
    }
    c.measured = worst;
    c.pass = worst <= bound;
    return c;
}

Certificate check_angles(const Embedding& e, const BundleField& field,
                         AngleMode mode, double bound, const Config& cfg) {
    Certificate c;
    c.bound = bound;
    c.seed = cfg.seed;
    double worst_min = M_PI / 2, worst_max = 0.0;
    for (const Vec& u : angle_samples(e.chart())) {
        Mat frame = fd_tangent_frame(e, u, cfg);
        Mat prod = frame.transpose() * field.at(e.eval(u)).frame();
        Eigen::JacobiSVD<Mat> svd(prod);
        const auto& sv = svd.singularValues();
        worst_min = std::min(
            worst_min, std::acos(std::clamp(sv.maxCoeff(), -1.0, 1.0)));
        worst_max = std::max(
            worst_max, std::acos(std::clamp(sv.minCoeff(), -1.0, 1.0)));
        ++c.samples;
    }
    switch (mode) {
        case AngleMode::Verticality:
            throw DomainError("verticality mode takes a coordinate split");
        case AngleMode::Perpendicularity:
            c.claim = "normality";
            c.measured = worst_min;
            c.pass = worst_min >= M_PI / 2 - bound;
            break;
        case AngleMode::Proximity:
            c.claim = "proximity";
            c.measured = worst_max;
            c.pass = worst_max <= bound;
            break;
    }
    return c;
}

Certificate check_following(const IsotopyTrace& tr, const BundleHomotopy& h,
                            const std::vector<double>& step_times,
                            const Config& cfg) {
    if (step_times.size() != tr.steps.size() - 1)
        throw AlignmentError("trace steps do not match the homotopy partition");
    Certificate c;
    c.claim = "following-trace";
    c.bound = 0.0;
    c.seed = cfg.seed;
    double worst = M_PI / 2;
    int worst_step = -1;
    for (size_t i = 0; i < step_times.size(); ++i) {
        const Embedding& m = tr.steps[i + 1].embedding;
        for (const Vec& u : angle_samples(m.chart())) {
            Mat frame = fd_tangent_frame(m, u, cfg);
            Mat prod =
                frame.transpose() * h.at(step_times[i], m.eval(u)).frame();
            Eigen::JacobiSVD<Mat> svd(prod);
            const double ang = std::acos(
                std::clamp(svd.singularValues().maxCoeff(), -1.0, 1.0));
            if (ang < worst) {
                worst = ang;
                worst_step = static_cast<int>(i);
            }
            ++c.samples;
        }
    }
    c.measured = worst;
    c.pass = worst > cfg.strict_tol;
    c.detail = "tightest step: " + std::to_string(worst_step);
    return c;
}

}  // namespace corrugate
