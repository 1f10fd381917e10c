#include "evlf/lfgeom.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "evlf/parallel.hpp"
#include "evlf/sampling.hpp"

namespace evlf {

ViewLayout ViewLayout::regular(int mosaic_width, int mosaic_height, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ConfigError("layout needs at least one row and column");
    ViewLayout layout;
    layout.rows = rows;
    layout.cols = cols;
    const int vw = mosaic_width / cols;
    const int vh = mosaic_height / rows;
    if (vw < 1 || vh < 1) throw ConfigError("mosaic too small for the requested layout");
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) layout.rects.push_back({c * vw, r * vh, vw, vh});
    return layout;
}

void ViewLayout::validate(int mosaic_width, int mosaic_height) const {
    if (rects.size() != static_cast<std::size_t>(rows) * cols)
        throw ConfigError("layout rectangle count does not match rows*cols");
    for (const ViewRect& r : rects) {
        if (r.width <= 0 || r.height <= 0) throw ConfigError("layout rectangles must be non-empty");
        if (r.width != rects[0].width || r.height != rects[0].height)
            throw ConfigError("layout rectangles must share one size");
        if (r.x < 0 || r.y < 0 || r.x + r.width > mosaic_width || r.y + r.height > mosaic_height)
            throw ConfigError("layout rectangle outside the mosaic");
    }
    for (std::size_t i = 0; i < rects.size(); ++i)
        for (std::size_t j = i + 1; j < rects.size(); ++j) {
            const ViewRect& a = rects[i];
            const ViewRect& b = rects[j];
            const bool overlap = a.x < b.x + b.width && b.x < a.x + a.width &&
                                 a.y < b.y + b.height && b.y < a.y + a.height;
            if (overlap) throw ConfigError("layout rectangles overlap");
        }
}

Homography Homography::translation(double dx, double dy) {
    Homography h;
    h.m = {1, 0, dx, 0, 1, dy, 0, 0, 1};
    return h;
}

Homography Homography::normalized() const {
    Homography out = *this;
    const double w = m[8];
    if (w != 0.0) {
        for (double& v : out.m) v /= w;
    } else {
        double norm = 0.0;
        for (double v : m) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw NumericError("cannot normalize a zero homography");
        for (double& v : out.m) v /= norm;
    }
    return out;
}

Homography Homography::inverse() const {
    const auto& a = m;
    const double det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
                       a[2] * (a[3] * a[7] - a[4] * a[6]);
    if (std::abs(det) <= 1e-12) throw NumericError("homography is not invertible");
    Homography inv;
    inv.m = {(a[4] * a[8] - a[5] * a[7]) / det, (a[2] * a[7] - a[1] * a[8]) / det,
             (a[1] * a[5] - a[2] * a[4]) / det, (a[5] * a[6] - a[3] * a[8]) / det,
             (a[0] * a[8] - a[2] * a[6]) / det, (a[2] * a[3] - a[0] * a[5]) / det,
             (a[3] * a[7] - a[4] * a[6]) / det, (a[1] * a[6] - a[0] * a[7]) / det,
             (a[0] * a[4] - a[1] * a[3]) / det};
    return inv;
}

Homography Homography::compose(const Homography& rhs) const {
    Homography out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m[3 * r + k] * rhs.m[3 * k + c];
            out.m[3 * r + c] = acc;
        }
    return out;
}

Vec2 Homography::apply(double x, double y) const {
    const double w = m[6] * x + m[7] * y + m[8];
    if (w == 0.0) throw NumericError("point maps to infinity");
    return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

bool Homography::is_identity(double tol) const {
    const Homography n = normalized();
    const Homography id = identity();
    for (int i = 0; i < 9; ++i)
        if (std::abs(n.m[i] - id.m[i]) > tol) return false;
    return true;
}

std::vector<Frame> extract_views(const Frame& mosaic, const ViewLayout& layout) {
    layout.validate(mosaic.width, mosaic.height);
    std::vector<Frame> views;
    views.reserve(layout.rects.size());
    for (const ViewRect& r : layout.rects) {
        Frame v(r.width, r.height);
        for (int y = 0; y < r.height; ++y)
            for (int x = 0; x < r.width; ++x) v.at(x, y) = mosaic.at(r.x + x, r.y + y);
        views.push_back(std::move(v));
    }
    return views;
}

std::vector<EventStream> extract_views(const EventStream& mosaic, const ViewLayout& layout) {
    layout.validate(mosaic.width, mosaic.height);
    std::vector<EventStream> views(layout.rects.size());
    for (std::size_t i = 0; i < layout.rects.size(); ++i) {
        views[i].width = static_cast<std::uint16_t>(layout.rects[i].width);
        views[i].height = static_cast<std::uint16_t>(layout.rects[i].height);
        views[i].duration = mosaic.duration;
    }
    for (const Event& e : mosaic.events) {
        for (std::size_t i = 0; i < layout.rects.size(); ++i) {
            const ViewRect& r = layout.rects[i];
            if (e.x >= r.x && e.x < r.x + r.width && e.y >= r.y && e.y < r.y + r.height) {
                Event local = e;
                local.x = static_cast<std::uint16_t>(e.x - r.x);
                local.y = static_cast<std::uint16_t>(e.y - r.y);
                views[i].events.push_back(local);
                break;  // rectangles do not overlap
            }
        }
    }
    return views;
}

HomographyEstimate estimate_homography(std::span<const PointPair> correspondences) {
    const std::size_t n = correspondences.size();
    if (n < 4) throw ConfigError("homography estimation needs at least 4 point pairs");

    // Hartley normalization: each point set translated to its centroid and
    // scaled to mean distance sqrt(2).
    const auto normalizer = [&](bool dst) {
        double mx = 0, my = 0;
        for (const PointPair& p : correspondences) {
            const Vec2& v = dst ? p.dst : p.src;
            mx += v.x;
            my += v.y;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double mean_dist = 0;
        for (const PointPair& p : correspondences) {
            const Vec2& v = dst ? p.dst : p.src;
            mean_dist += std::hypot(v.x - mx, v.y - my);
        }
        mean_dist /= static_cast<double>(n);
        const double scale = mean_dist > 0 ? std::numbers::sqrt2 / mean_dist : 1.0;
        Homography t;
        t.m = {scale, 0, -scale * mx, 0, scale, -scale * my, 0, 0, 1};
        return t;
    };
    const Homography t_src = normalizer(false);
    const Homography t_dst = normalizer(true);

    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 s = t_src.apply(correspondences[i].src.x, correspondences[i].src.y);
        const Vec2 d = t_dst.apply(correspondences[i].dst.x, correspondences[i].dst.y);
        a.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
        a.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A unique solution needs rank 8; collinear/degenerate input drops it.
    // (sv has 8 entries for the minimal 4-pair case, 9 otherwise.)
    if (sv(7) <= 1e-10 * sv(0)) throw NumericError("degenerate correspondence configuration");

    const Eigen::VectorXd h = svd.matrixV().col(8);
    Homography h_norm;
    for (int i = 0; i < 9; ++i) h_norm.m[i] = h(i);

    const Homography result =
        t_dst.inverse().compose(h_norm).compose(t_src).normalized();

    HomographyEstimate estimate;
    estimate.h = result;
    estimate.rms_symmetric_error = symmetric_transfer_rms(result, correspondences);
    return estimate;
}

double symmetric_transfer_rms(const Homography& h, std::span<const PointPair> correspondences) {
    if (correspondences.empty()) return 0.0;
    const Homography inv = h.inverse();
    double acc = 0.0;
    for (const PointPair& p : correspondences) {
        const Vec2 f = h.apply(p.src.x, p.src.y);
        const Vec2 b = inv.apply(p.dst.x, p.dst.y);
        acc += (f.x - p.dst.x) * (f.x - p.dst.x) + (f.y - p.dst.y) * (f.y - p.dst.y);
        acc += (b.x - p.src.x) * (b.x - p.src.x) + (b.y - p.src.y) * (b.y - p.src.y);
    }
    return std::sqrt(acc / (2.0 * static_cast<double>(correspondences.size())));
}

Frame warp_frame(const Frame& frame, const Homography& h) {
    const Homography inv = h.inverse();
    Frame out(frame.width, frame.height);
    parallel_for_index(frame.height, [&](int y) {
        for (int x = 0; x < frame.width; ++x) {
            const Vec2 src = inv.apply(x, y);
            out.at(x, y) = bilinear_sample(frame, src.x, src.y);
        }
    });
    return out;
}

EventStream warp_events(const EventStream& stream, const Homography& h) {
    h.inverse();  // reject non-invertible maps up front
    EventStream out;
    out.width = stream.width;
    out.height = stream.height;
    out.duration = stream.duration;
    out.events.reserve(stream.events.size());
    for (const Event& e : stream.events) {
        const Vec2 p = h.apply(e.x, e.y);
        const long x = std::lround(p.x);
        const long y = std::lround(p.y);
        if (x < 0 || y < 0 || x >= stream.width || y >= stream.height) continue;
        Event moved = e;
        moved.x = static_cast<std::uint16_t>(x);
        moved.y = static_cast<std::uint16_t>(y);
        out.events.push_back(moved);
    }
    std::stable_sort(out.events.begin(), out.events.end(), event_order_less);
    return out;
}

void write_homography(const Homography& h, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out.precision(17);
    for (int i = 0; i < 9; ++i) out << h.m[i] << (i == 8 ? '\n' : ' ');
}

Homography read_homography(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    Homography h;
    for (int i = 0; i < 9; ++i)
        if (!(in >> h.m[i])) throw FormatError("homography file needs 9 numbers: " + path.string());
    return h;
}

std::vector<PointPair> read_correspondences_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<PointPair> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        PointPair p;
        if (!(fields >> p.src.x >> p.src.y >> p.dst.x >> p.dst.y))
            throw FormatError("bad correspondence line: " + line);
        pairs.push_back(p);
    }
    return pairs;
}

ViewLayout read_layout_csv(const std::filesystem::path& path, int rows, int cols) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    ViewLayout layout;
    layout.rows = rows;
    layout.cols = cols;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        ViewRect r;
        if (!(fields >> r.x >> r.y >> r.width >> r.height))
            throw FormatError("bad layout line: " + line);
        layout.rects.push_back(r);
    }
    return layout;
}

}  // namespace evlf
