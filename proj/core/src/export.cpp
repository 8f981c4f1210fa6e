#include "corrugate/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace corrugate {

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ExportError("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw ExportError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ExportError("rename failed: " + path);
}

void export_mesh(const Embedding& e, const std::string& path) {
    if (e.domain_dim() != 2) throw ExportError("mesh export needs n = 2");
    if (e.ambient_dim() > 3) throw ExportError("mesh export needs d <= 3");
    const auto& chart = e.chart();
    const int r0 = chart.resolution[0], r1 = chart.resolution[1];
    std::ostringstream os;
    os.precision(9);
    const Mat& img = e.grid_images();
    for (long k = 0; k < img.rows(); ++k) {
        os << "v";
        for (int c = 0; c < 3; ++c)
            os << " " << (c < img.cols() ? img(k, c) : 0.0);
        os << "\n";
    }
    // node (i, j) flattens to i * r1 + j; OBJ indices are 1-based
    for (int i = 0; i + 1 < r0; ++i)
        for (int j = 0; j + 1 < r1; ++j) {
            const long a = i * r1 + j + 1, b = a + 1;
            const long c = a + r1, d = c + 1;
            os << "f " << a << " " << b << " " << d << "\n";
            os << "f " << a << " " << d << " " << c << "\n";
        }
    write_atomic(path, os.str());
}

void export_polyline(const Embedding& e, const std::string& path) {
    if (e.domain_dim() != 1) throw ExportError("polyline export needs n = 1");
    std::ostringstream os;
    os.precision(17);
    os << "s";
    for (int c = 0; c < e.ambient_dim(); ++c) os << ",x" << c + 1;
    os << "\n";
    const Mat& img = e.grid_images();
    const int res = e.chart().resolution[0];
    for (int k = 0; k < res; ++k) {
        os << double(k) / (res - 1);
        for (int c = 0; c < img.cols(); ++c) os << "," << img(k, c);
        os << "\n";
    }
    write_atomic(path, os.str());
}

namespace {

std::string ramp_color(double angle) {
    // fixed ramp: blue (0) to red (pi/2)
    const double t = std::clamp(angle / (M_PI / 2), 0.0, 1.0);
    const int r = static_cast<int>(255 * t);
    const int b = static_cast<int>(255 * (1 - t));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x40%02x", r, b);
    return buf;
}

}  // namespace

void export_angle_map(const Embedding& e, const VerticalSplit& split,
                      const std::string& csv_path, const std::string& svg_path) {
    const int n = e.domain_dim();
    if (n > 2) throw ExportError("angle map export needs n <= 2");
    const auto& chart = e.chart();
    const int r0 = chart.resolution[0];
    const int r1 = n == 2 ? chart.resolution[1] : 1;

    Mat angles(r0, r1);
    for (int i = 0; i < r0; ++i)
        for (int j = 0; j < r1; ++j) {
            std::vector<int> idx(n);
            idx[0] = i;
            if (n == 2) idx[1] = j;
            angles(i, j) =
                vertical_angle(tangent_plane(e, chart.coords(idx)), split);
        }

    std::ostringstream csv;
    csv.precision(17);
    for (int i = 0; i < r0; ++i) {
        for (int j = 0; j < r1; ++j) csv << (j ? "," : "") << angles(i, j);
        csv << "\n";
    }
    write_atomic(csv_path, csv.str());

    const int cell = std::max(1, 512 / std::max(r0, r1));
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << r0 * cell
        << "\" height=\"" << std::max(r1 * cell, cell * 8) << "\">\n";
    for (int i = 0; i < r0; ++i)
        for (int j = 0; j < r1; ++j)
            svg << "<rect x=\"" << i * cell << "\" y=\"" << j * cell
                << "\" width=\"" << cell << "\" height=\""
                << (r1 == 1 ? cell * 8 : cell) << "\" fill=\""
                << ramp_color(angles(i, j)) << "\"/>\n";
    svg << "</svg>\n";
    write_atomic(svg_path, svg.str());
}

}  // namespace corrugate
