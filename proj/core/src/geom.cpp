#include "corrugate/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace corrugate {

// ---------------------------------------------------------------------------
// DomainChart

DomainChart::DomainChart(std::vector<int> res, std::vector<bool> wrap)
    : dim(static_cast<int>(res.size())),
      resolution(std::move(res)),
      periodic(std::move(wrap)) {
    validate();
}

void DomainChart::validate() const {
    if (dim < 1) throw DomainError("domain dimension must be >= 1");
    if (static_cast<int>(resolution.size()) != dim ||
        static_cast<int>(periodic.size()) != dim)
        throw DomainError("per-axis field size mismatch");
    for (int r : resolution)
        if (r < 3) throw DomainError("resolution must be >= 3 per axis");
}

double DomainChart::min_spacing() const {
    double s = std::numeric_limits<double>::max();
    for (int a = 0; a < dim; ++a) s = std::min(s, spacing(a));
    return s;
}

long DomainChart::node_count() const {
    long n = 1;
    for (int r : resolution) n *= r;
    return n;
}

std::vector<int> DomainChart::unflatten(long node) const {
    std::vector<int> idx(dim);
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(node % resolution[a]);
        node /= resolution[a];
    }
    return idx;
}

long DomainChart::flatten(const std::vector<int>& idx) const {
    long node = 0;
    for (int a = 0; a < dim; ++a) node = node * resolution[a] + idx[a];
    return node;
}

Vec DomainChart::coords(const std::vector<int>& idx) const {
    Vec u(dim);
    for (int a = 0; a < dim; ++a) u[a] = idx[a] * spacing(a);
    return u;
}

Vec DomainChart::clamp(const Vec& u) const {
    constexpr double kTol = 1e-9;
    Vec w = u;
    for (int a = 0; a < dim; ++a) {
        if (periodic[a]) {
            w[a] = w[a] - std::floor(w[a]);
        } else if (w[a] < -kTol || w[a] > 1.0 + kTol) {
            throw DomainError("coordinate outside non-periodic axis range");
        } else {
            w[a] = std::clamp(w[a], 0.0, 1.0);
        }
    }
    return w;
}

double DomainChart::domain_distance(const Vec& u, const Vec& v) const {
    double s = 0;
    for (int a = 0; a < dim; ++a) {
        double d = std::abs(u[a] - v[a]);
        if (periodic[a]) d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return std::sqrt(s);
}

long DomainChart::snap(const Vec& u) const {
    Vec w = clamp(u);
    std::vector<int> idx(dim);
    for (int a = 0; a < dim; ++a) {
        int i = static_cast<int>(std::lround(w[a] / spacing(a)));
        idx[a] = std::clamp(i, 0, resolution[a] - 1);
    }
    return flatten(idx);
}

// ---------------------------------------------------------------------------
// BumpFunction

double BumpFunction::smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double BumpFunction::smooth_step_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    const double da = a / (t * t);
    const double db = -b / ((1.0 - t) * (1.0 - t));
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

BumpFunction::BumpFunction(Vec inner_lo, Vec inner_hi, Vec outer_lo, Vec outer_hi)
    : trivial_(false),
      ilo_(std::move(inner_lo)),
      ihi_(std::move(inner_hi)),
      olo_(std::move(outer_lo)),
      ohi_(std::move(outer_hi)) {
    const auto n = ilo_.size();
    if (ihi_.size() != n || olo_.size() != n || ohi_.size() != n)
        throw DomainError("bump region dimension mismatch");
    for (Eigen::Index a = 0; a < n; ++a) {
        if (!(olo_[a] <= ilo_[a] && ilo_[a] < ihi_[a] && ihi_[a] <= ohi_[a]))
            throw DomainError("bump regions must nest: outer_lo <= inner_lo < inner_hi <= outer_hi");
    }
}

BumpFunction BumpFunction::all_of(int dim) {
    BumpFunction b;
    b.trivial_ = true;
    b.ilo_ = Vec::Zero(dim);
    b.ihi_ = Vec::Ones(dim);
    b.olo_ = Vec::Zero(dim);
    b.ohi_ = Vec::Ones(dim);
    return b;
}

BumpFunction BumpFunction::interval(double outer_lo, double inner_lo,
                                    double inner_hi, double outer_hi) {
    Vec il(1), ih(1), ol(1), oh(1);
    il << inner_lo;
    ih << inner_hi;
    ol << outer_lo;
    oh << outer_hi;
    return BumpFunction(il, ih, ol, oh);
}

double BumpFunction::axis_value(int a, double t) const {
    if (trivial_) return 1.0;
    if (t < ilo_[a]) {
        if (t <= olo_[a]) return 0.0;
        return smooth_step((t - olo_[a]) / (ilo_[a] - olo_[a]));
    }
    if (t > ihi_[a]) {
        if (t >= ohi_[a]) return 0.0;
        return smooth_step((ohi_[a] - t) / (ohi_[a] - ihi_[a]));
    }
    return 1.0;
}

double BumpFunction::axis_derivative(int a, double t) const {
    if (trivial_) return 0.0;
    if (t < ilo_[a] && t > olo_[a]) {
        const double w = ilo_[a] - olo_[a];
        return smooth_step_derivative((t - olo_[a]) / w) / w;
    }
    if (t > ihi_[a] && t < ohi_[a]) {
        const double w = ohi_[a] - ihi_[a];
        return -smooth_step_derivative((ohi_[a] - t) / w) / w;
    }
    return 0.0;
}

double BumpFunction::operator()(const Vec& u) const {
    if (trivial_) return 1.0;
    double v = 1.0;
    for (int a = 0; a < u.size() && v != 0.0; ++a) v *= axis_value(a, u[a]);
    return v;
}

// ---------------------------------------------------------------------------
// Embedding

Embedding::Embedding(DomainChart chart, int ambient_dim, MapFn map, JacFn jac,
                     std::string label)
    : chart_(std::move(chart)),
      ambient_(ambient_dim),
      map_(std::move(map)),
      jac_(std::move(jac)),
      label_(std::move(label)) {
    if (ambient_ < chart_.dim)
        throw DomainError("ambient dimension below domain dimension");
}

Vec Embedding::eval(const Vec& u) const {
    if (u.size() != chart_.dim) throw DomainError("domain point dimension mismatch");
    Vec x = map_(chart_.clamp(u));
    if (!x.allFinite()) throw DomainError("embedding produced non-finite coordinates");
    return x;
}

double Embedding::fd_step(const Config& cfg) const {
    return chart_.min_spacing() / cfg.fd_divisor;
}

Mat Embedding::finite_difference_jacobian(const Vec& u, double h) const {
    const Vec w = chart_.clamp(u);
    Mat J(chart_.dim, ambient_);
    for (int a = 0; a < chart_.dim; ++a) {
        Vec up = w, um = w;
        double c = w[a];
        if (!chart_.periodic[a]) c = std::clamp(c, h, 1.0 - h);
        up[a] = c + h;
        um[a] = c - h;
        J.row(a) = (map_(chart_.clamp(up)) - map_(chart_.clamp(um))) / (2.0 * h);
    }
    return J;
}

Mat Embedding::jacobian(const Vec& u) const {
    if (jac_) return jac_(chart_.clamp(u));
    Config cfg = Config::from_env();
    return finite_difference_jacobian(u, fd_step(cfg));
}

double Embedding::immersion_margin(const Config& cfg) const {
    double worst = std::numeric_limits<double>::max();
    const long n = chart_.node_count();
    const double h = fd_step(cfg);
    for (long node = 0; node < n; ++node) {
        Vec u = chart_.coords(node);
        Mat J = jac_ ? jac_(u) : finite_difference_jacobian(u, h);
        Eigen::JacobiSVD<Mat> svd(J);
        worst = std::min(worst, svd.singularValues().minCoeff());
    }
    return worst;
}

void Embedding::certify_immersion(const Config& cfg) const {
    double m = immersion_margin(cfg);
    if (m < cfg.immersion_margin)
        throw ImmersionError("immersion failure: Jacobian margin " + std::to_string(m) +
                             " below " + std::to_string(cfg.immersion_margin) +
                             " on '" + label_ + "'");
}

const Mat& Embedding::grid_images() const {
    if (!image_cache_) {
        const long n = chart_.node_count();
        auto cache = std::make_shared<Mat>(n, ambient_);
        for (long node = 0; node < n; ++node)
            cache->row(node) = map_(chart_.coords(node)).transpose();
        image_cache_ = std::move(cache);
    }
    return *image_cache_;
}

// ---------------------------------------------------------------------------
// Families

namespace families {

Embedding interval(int res) {
    return Embedding(DomainChart(1, res), 2,
                     [](const Vec& u) {
                         Vec x(2);
                         x << u[0], 0.0;
                         return x;
                     },
                     [](const Vec&) {
                         Mat J(1, 2);
                         J << 1.0, 0.0;
                         return J;
                     },
                     "interval");
}

Embedding circle(double radius, int res, int ambient_dim) {
    DomainChart chart(1, res, /*wrap=*/true);
    return Embedding(chart, ambient_dim,
                     [radius, ambient_dim](const Vec& u) {
                         Vec x = Vec::Zero(ambient_dim);
                         x[0] = radius * std::cos(2 * M_PI * u[0]);
                         x[1] = radius * std::sin(2 * M_PI * u[0]);
                         return x;
                     },
                     [radius, ambient_dim](const Vec& u) {
                         Mat J = Mat::Zero(1, ambient_dim);
                         J(0, 0) = -2 * M_PI * radius * std::sin(2 * M_PI * u[0]);
                         J(0, 1) = 2 * M_PI * radius * std::cos(2 * M_PI * u[0]);
                         return J;
                     },
                     "circle");
}

Embedding helix(int res) {
    return Embedding(DomainChart(1, res), 3,
                     [](const Vec& u) {
                         Vec x(3);
                         x << std::cos(2 * M_PI * u[0]), std::sin(2 * M_PI * u[0]), u[0];
                         return x;
                     },
                     [](const Vec& u) {
                         Mat J(1, 3);
                         J << -2 * M_PI * std::sin(2 * M_PI * u[0]),
                             2 * M_PI * std::cos(2 * M_PI * u[0]), 1.0;
                         return J;
                     },
                     "helix");
}

Embedding flat_cube(int n, int d, int res) {
    return Embedding(DomainChart(n, res), d,
                     [n, d](const Vec& u) {
                         Vec x = Vec::Zero(d);
                         x.head(n) = u;
                         return x;
                     },
                     [n, d](const Vec&) {
                         Mat J = Mat::Zero(n, d);
                         J.leftCols(n).setIdentity();
                         return J;
                     },
                     "flat_cube");
}

Embedding graph1d(std::function<double(double)> h, std::function<double(double)> dh,
                  int res, int ambient_dim) {
    return Embedding(DomainChart(1, res), ambient_dim,
                     [h, ambient_dim](const Vec& u) {
                         Vec x = Vec::Zero(ambient_dim);
                         x[0] = u[0];
                         x[1] = h(u[0]);
                         return x;
                     },
                     [dh, ambient_dim](const Vec& u) {
                         Mat J = Mat::Zero(1, ambient_dim);
                         J(0, 0) = 1.0;
                         J(0, 1) = dh(u[0]);
                         return J;
                     },
                     "graph1d");
}

Embedding torus_patch(double major, double minor, int res) {
    DomainChart chart(2, res, /*wrap=*/true);
    return Embedding(chart, 3,
                     [major, minor](const Vec& u) {
                         const double a = 2 * M_PI * u[0], b = 2 * M_PI * u[1];
                         Vec x(3);
                         x << (major + minor * std::cos(b)) * std::cos(a),
                             (major + minor * std::cos(b)) * std::sin(a),
                             minor * std::sin(b);
                         return x;
                     },
                     nullptr, "torus_patch");
}

Embedding figure_eight(int res) {
    DomainChart chart(1, res, /*wrap=*/true);
    return Embedding(chart, 2,
                     [](const Vec& u) {
                         Vec x(2);
                         x << std::sin(4 * M_PI * u[0]), std::sin(2 * M_PI * u[0]);
                         return x;
                     },
                     [](const Vec& u) {
                         Mat J(1, 2);
                         J << 4 * M_PI * std::cos(4 * M_PI * u[0]),
                             2 * M_PI * std::cos(2 * M_PI * u[0]);
                         return J;
                     },
                     "figure_eight");
}

}  // namespace families

// ---------------------------------------------------------------------------
// IsotopyTrace

void IsotopyTrace::validate(const Config& cfg) const {
    if (steps.empty()) throw DomainError("empty isotopy trace");
    if (steps.front().time != 0.0 || steps.back().time != 1.0)
        throw DomainError("trace times must start at 0 and end at 1");
    for (size_t i = 1; i < steps.size(); ++i)
        if (!(steps[i].time > steps[i - 1].time))
            throw DomainError("trace times must be strictly increasing");
    for (const auto& s : steps) s.embedding.certify_immersion(cfg);
}

IsotopyTrace IsotopyTrace::identity(const Embedding& e, const std::string& why) {
    IsotopyTrace tr;
    tr.steps.push_back({0.0, e, why});
    tr.steps.push_back({1.0, e, why});
    return tr;
}

double IsotopyTrace::sup_displacement() const {
    const Mat& base = steps.front().embedding.grid_images();
    double sup = 0.0;
    for (size_t i = 1; i < steps.size(); ++i) {
        const Mat& img = steps[i].embedding.grid_images();
        sup = std::max(sup, (img - base).rowwise().norm().maxCoeff());
    }
    return sup;
}

// ---------------------------------------------------------------------------
// PathMetric

namespace {

std::vector<std::vector<int>> stencil_offsets(int dim, Stencil stencil) {
    std::vector<std::vector<int>> offs;
    if (dim == 1) {
        offs.push_back({1});
        offs.push_back({-1});
        return offs;
    }
    if (dim != 2) throw DomainError("path metric supports n <= 2 only");
    auto add = [&](int a, int b) { offs.push_back({a, b}); };
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            if (a || b) add(a, b);  // king
    if (stencil == Stencil::KingKnight) {
        for (int sa : {-1, 1})
            for (int sb : {-1, 1}) {
                add(sa, 2 * sb);  // knight
                add(2 * sa, sb);
            }
    }
    return offs;
}

}  // namespace

PathMetric::PathMetric(const Embedding& e, Stencil stencil)
    : chart_(e.chart()), images_(e.grid_images()) {
    for (auto& off : stencil_offsets(chart_.dim, stencil)) stencil_.push_back({off, 0.0});
}

std::optional<long> PathMetric::neighbor(const std::vector<int>& idx,
                                         const std::vector<int>& off) const {
    std::vector<int> j(chart_.dim);
    for (int a = 0; a < chart_.dim; ++a) {
        int i = idx[a];
        const int res = chart_.resolution[a];
        if (chart_.periodic[a]) {
            // node res-1 duplicates node 0; wrap in the reduced index range
            const int m = res - 1;
            int w = (i % m + off[a]) % m;
            if (w < 0) w += m;
            j[a] = w;
        } else {
            int w = i + off[a];
            if (w < 0 || w >= res) return std::nullopt;
            j[a] = w;
        }
    }
    return chart_.flatten(j);
}

std::vector<double> PathMetric::distance_field(long source) const {
    const long n = chart_.node_count();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, long>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, node] = heap.top();
        heap.pop();
        if (d > dist[node]) continue;
        const auto idx = chart_.unflatten(node);
        for (const auto& [off, _] : stencil_) {
            auto nb = neighbor(idx, off);
            if (!nb) continue;
            const double w = (images_.row(node) - images_.row(*nb)).norm();
            if (d + w < dist[*nb]) {
                dist[*nb] = d + w;
                heap.push({d + w, *nb});
            }
        }
    }
    // Periodic duplicate nodes (index res-1 on a wrapped axis) never get
    // relaxed through the reduced-range neighbor map; mirror them from 0.
    for (long node = 0; node < n; ++node) {
        if (!std::isfinite(dist[node])) {
            auto idx = chart_.unflatten(node);
            bool mirrored = false;
            for (int a = 0; a < chart_.dim; ++a)
                if (chart_.periodic[a] && idx[a] == chart_.resolution[a] - 1) {
                    idx[a] = 0;
                    mirrored = true;
                }
            if (mirrored) dist[node] = dist[chart_.flatten(idx)];
        }
    }
    return dist;
}

double PathMetric::distance(long a, long b) const {
    return distance_field(a)[b];
}

double PathMetric::distance(const Vec& u, const Vec& v) const {
    return distance(chart_.snap(u), chart_.snap(v));
}

Embedding resample(const Embedding& e, int res) {
    DomainChart chart(std::vector<int>(e.domain_dim(), res), e.chart().periodic);
    return Embedding(chart, e.ambient_dim(), [e](const Vec& u) { return e.eval(u); },
                     e.has_analytic_jacobian()
                         ? Embedding::JacFn([e](const Vec& u) { return e.jacobian(u); })
                         : Embedding::JacFn(nullptr),
                     e.label() + "@" + std::to_string(res));
}

double induced_path_distance(const Embedding& e, const Vec& u, const Vec& v,
                             int resolution_override, Stencil stencil) {
    if (resolution_override > 0) {
        Embedding fine = resample(e, resolution_override);
        return PathMetric(fine, stencil).distance(u, v);
    }
    return PathMetric(e, stencil).distance(u, v);
}

// ---------------------------------------------------------------------------
// Arc length and chord/path agreement

double curve_arclength(const Embedding& e, double a, double b, int subdivisions) {
    if (e.domain_dim() != 1) throw DomainError("curve_arclength requires n = 1");
    int n = subdivisions > 0 ? subdivisions : 8 * (e.chart().resolution[0] - 1);
    if (n % 2) ++n;
    const double h = (b - a) / n;
    auto speed = [&](double t) {
        Vec u(1);
        u << t;
        return e.jacobian(u).row(0).norm();
    };
    double s = speed(a) + speed(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * speed(a + i * h);
    return s * h / 3.0;
}

ChordPathGap chord_vs_path_agreement(const Embedding& e, double scale,
                                     int sample_count) {
    if (scale < e.chart().min_spacing())
        throw DomainError("scale below grid spacing");
    ChordPathGap out;
    if (e.domain_dim() == 1) {
        const bool wrap = e.chart().periodic[0];
        for (int i = 0; i < sample_count; ++i) {
            double a = wrap ? double(i) / sample_count
                            : double(i) / sample_count * (1.0 - scale);
            double b = a + scale;
            if (!wrap && b > 1.0) continue;
            Vec ua(1), ub(1);
            ua << a;
            ub << (wrap ? std::fmod(b, 1.0) : b);
            const double path = curve_arclength(e, a, b);
            const double chord = (e.eval(ua) - e.eval(ub)).norm();
            if (path > 0)
                out.max_gap = std::max(out.max_gap, 1.0 - chord / path);
        }
    } else {
        PathMetric pm(e);
        const auto& chart = e.chart();
        const int per_side = std::max(2, static_cast<int>(std::sqrt(sample_count)));
        const Vec dirs[4] = {(Vec(2) << 1, 0).finished(), (Vec(2) << 0, 1).finished(),
                             (Vec(2) << M_SQRT1_2, M_SQRT1_2).finished(),
                             (Vec(2) << M_SQRT1_2, -M_SQRT1_2).finished()};
        for (int i = 0; i < per_side; ++i)
            for (int j = 0; j < per_side; ++j) {
                Vec a(2);
                a << 0.1 + 0.8 * i / (per_side - 1), 0.1 + 0.8 * j / (per_side - 1);
                for (const Vec& d : dirs) {
                    Vec b = a + scale * d;
                    bool ok = true;
                    for (int ax = 0; ax < 2; ++ax)
                        if (!chart.periodic[ax] && (b[ax] < 0 || b[ax] > 1)) ok = false;
                    if (!ok) continue;
                    const double path = pm.distance(a, b);
                    const double chord = (e.eval(a) - e.eval(b)).norm();
                    if (path > 0)
                        out.max_gap = std::max(out.max_gap, 1.0 - chord / path);
                }
            }
    }
    out.normalized_gap = out.max_gap / scale;
    return out;
}

}  // namespace corrugate
