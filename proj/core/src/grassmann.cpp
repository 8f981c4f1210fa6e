#include "corrugate/grassmann.hpp"

#include <algorithm>
#include <cmath>

namespace corrugate {

// ---------------------------------------------------------------------------
// Plane

Plane Plane::span(const Mat& columns) {
    Eigen::HouseholderQR<Mat> qr(columns);
    Mat q = qr.householderQ() * Mat::Identity(columns.rows(), columns.cols());
    Plane p;
    p.frame_ = q;
    return p;
}

Plane Plane::from_orthonormal(const Mat& frame, double ortho_tol) {
    Mat gram = frame.transpose() * frame;
    if ((gram - Mat::Identity(frame.cols(), frame.cols())).cwiseAbs().maxCoeff() >
        ortho_tol)
        throw FrameError("frame columns are not orthonormal");
    Plane p;
    p.frame_ = frame;
    return p;
}

Plane Plane::coordinate(int d, std::initializer_list<int> axes) {
    Mat f = Mat::Zero(d, static_cast<long>(axes.size()));
    int c = 0;
    for (int a : axes) f(a, c++) = 1.0;
    Plane p;
    p.frame_ = f;
    return p;
}

// ---------------------------------------------------------------------------
// Angles

std::vector<double> principal_angles(const Plane& p, const Plane& q) {
    if (p.ambient_dim() != q.ambient_dim())
        throw FrameError("principal angles require equal ambient dimension");
    Mat m = p.frame().transpose() * q.frame();
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    const int k = std::min(p.rank(), q.rank());
    std::vector<double> angles(k);
    // singular values are nonincreasing, so angles come out nondecreasing
    for (int i = 0; i < k; ++i) angles[i] = std::acos(std::clamp(sv[i], -1.0, 1.0));
    return angles;
}

double max_principal_angle(const Plane& p, const Plane& q) {
    auto a = principal_angles(p, q);
    return a.back();
}

double min_principal_angle(const Plane& p, const Plane& q) {
    auto a = principal_angles(p, q);
    return a.front();
}

double vertical_angle(const Plane& p, const VerticalSplit& split) {
    if (p.ambient_dim() != split.ambient_dim())
        throw FrameError("split dimension mismatch");
    if (p.rank() > split.horizontal_dim) return M_PI / 2;
    Mat vert = p.frame().bottomRows(split.vertical_dim);
    Eigen::JacobiSVD<Mat> svd(vert);
    return std::asin(std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0));
}

Plane tangent_plane(const Embedding& e, const Vec& u) {
    return Plane::span(e.jacobian(u).transpose());
}

CompressibilityResult is_compressible(const Embedding& e, const VerticalSplit& split,
                                      const Config& cfg) {
    if (split.ambient_dim() != e.ambient_dim())
        throw DomainError("split dims do not sum to the ambient dimension");
    CompressibilityResult out;
    out.margin = std::numeric_limits<double>::max();
    const long n = e.chart().node_count();
    for (long node = 0; node < n; ++node) {
        Plane tp = tangent_plane(e, e.chart().coords(node));
        Mat hor = tp.frame().topRows(split.horizontal_dim);
        Eigen::JacobiSVD<Mat> svd(hor);
        const double m = svd.singularValues().minCoeff();
        if (m < out.margin) {
            out.margin = m;
            out.worst_node = node;
        }
    }
    out.compressible = out.margin > cfg.compressibility_margin;
    return out;
}

// ---------------------------------------------------------------------------
// Bundle fields

BundleField::BundleField(int ambient_dim, int rank, FieldFn fn, std::string label)
    : ambient_(ambient_dim), rank_(rank), fn_(std::move(fn)), label_(std::move(label)) {}

BundleField BundleField::constant(const Plane& p, std::string label) {
    return BundleField(p.ambient_dim(), p.rank(), [p](const Vec&) { return p; },
                       std::move(label));
}

Plane BundleField::at(const Vec& x) const {
    Plane p = fn_(x);
    if (p.rank() != rank_ || p.ambient_dim() != ambient_)
        throw FrameError("bundle field fiber rank changed");
    return p;
}

BundleHomotopy::BundleHomotopy(int ambient_dim, int rank, HomotopyFn fn,
                               std::string label)
    : ambient_(ambient_dim), rank_(rank), fn_(std::move(fn)), label_(std::move(label)) {}

BundleHomotopy BundleHomotopy::constant(const BundleField& f) {
    return BundleHomotopy(f.ambient_dim(), f.rank(),
                          [f](double, const Vec& x) { return f.at(x); },
                          f.label() + "_const");
}

Plane BundleHomotopy::at(double s, const Vec& x) const { return fn_(s, x); }

BundleField BundleHomotopy::slice(double s) const {
    auto fn = fn_;
    return BundleField(ambient_, rank_, [fn, s](const Vec& x) { return fn(s, x); },
                       label_ + "@" + std::to_string(s));
}

std::vector<double> split_homotopy(const BundleHomotopy& h,
                                   const std::vector<Vec>& probe_points,
                                   double margin, const Config& cfg,
                                   int time_samples_per_step) {
    if (margin < 0 || margin >= M_PI / 4)
        throw DomainError("split margin must lie in [0, pi/4)");
    const double bound = M_PI / 4 - margin - cfg.strict_tol;
    constexpr int kMaxSteps = 256;
    for (int r = 1; r <= kMaxSteps; ++r) {
        bool ok = true;
        for (int i = 1; i <= r && ok; ++i) {
            const double s0 = double(i - 1) / r, s1 = double(i) / r;
            // check sub-sampled times too, so a fast wiggle inside one step
            // does not slip through
            for (int k = 1; k <= time_samples_per_step && ok; ++k) {
                const double a = s0 + (s1 - s0) * (k - 1) / time_samples_per_step;
                const double b = s0 + (s1 - s0) * k / time_samples_per_step;
                for (const Vec& x : probe_points) {
                    const double step_angle = max_principal_angle(h.at(s0, x), h.at(s1, x));
                    const double fine_angle = max_principal_angle(h.at(a, x), h.at(b, x));
                    if (step_angle >= bound || fine_angle >= bound) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if (ok) {
            std::vector<double> partition(r + 1);
            for (int i = 0; i <= r; ++i) partition[i] = double(i) / r;
            return partition;
        }
    }
    throw ContinuityError("homotopy discontinuous at sampled resolution");
}

// ---------------------------------------------------------------------------
// Orthogonal complements

Plane orthogonal_complement(const Plane& p) {
    const int d = p.ambient_dim(), k = p.rank();
    Eigen::JacobiSVD<Mat> svd(p.frame(), Eigen::ComputeFullU);
    return Plane::from_orthonormal(svd.matrixU().rightCols(d - k), 1e-9);
}

namespace {

// Rotates the basis of `f` (same subspace) to be as close as possible to
// `ref` in the Frobenius norm (orthogonal Procrustes).
Mat align_basis(const Mat& f, const Mat& ref) {
    Eigen::JacobiSVD<Mat> svd(f.transpose() * ref,
                              Eigen::ComputeFullU | Eigen::ComputeFullV);
    return f * (svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace

BundleField orthogonal_complement_field(const Embedding& e, const Config& cfg) {
    const auto& chart = e.chart();
    const int d = e.ambient_dim(), n = e.domain_dim();
    const int rank = d - n;
    const long count = chart.node_count();
    auto frames = std::make_shared<std::vector<Mat>>(count);
    for (long node = 0; node < count; ++node) {
        Plane tp = tangent_plane(e, chart.coords(node));
        Mat comp = orthogonal_complement(tp).frame();
        if (node > 0) comp = align_basis(comp, (*frames)[node - 1]);
        (*frames)[node] = comp;
    }
    // continuity along each axis, including the periodic seam
    for (long node = 0; node < count; ++node) {
        auto idx = chart.unflatten(node);
        for (int a = 0; a < chart.dim; ++a) {
            auto jdx = idx;
            jdx[a] += 1;
            if (jdx[a] >= chart.resolution[a]) continue;
            long nb = chart.flatten(jdx);
            Mat aligned = align_basis((*frames)[nb], (*frames)[node]);
            double ang = max_principal_angle(
                Plane::from_orthonormal((*frames)[node], 1e-8),
                Plane::from_orthonormal((*frames)[nb], 1e-8));
            double drift = ((*frames)[node] - aligned).norm();
            if (ang > cfg.field_continuity_tol || drift > 0.75)
                throw ContinuityError(
                    "complement frame discontinuity along the chart");
        }
    }
    Mat images = e.grid_images();
    auto fn = [frames, images](const Vec& x) {
        // nearest image point picks the fiber
        long best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (long i = 0; i < images.rows(); ++i) {
            const double d2 = (images.row(i).transpose() - x).squaredNorm();
            if (d2 < best_d) {
                best_d = d2;
                best = i;
            }
        }
        return Plane::from_orthonormal((*frames)[best], 1e-8);
    };
    return BundleField(d, rank, fn, "complement(" + e.label() + ")");
}

}  // namespace corrugate
