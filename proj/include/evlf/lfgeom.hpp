#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "evlf/core.hpp"

namespace evlf {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct PointPair {
    Vec2 src;
    Vec2 dst;
};

struct ViewRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

/// Placement of the sub-aperture views inside a mosaic. Rectangles are
/// non-overlapping, equal-sized, and indexed row-major.
struct ViewLayout {
    int rows = 3;
    int cols = 3;
    std::vector<ViewRect> rects;

    /// Evenly tiled layout (floor division; any remainder pixels form gaps
    /// at the right/bottom edges).
    static ViewLayout regular(int mosaic_width, int mosaic_height, int rows, int cols);

    void validate(int mosaic_width, int mosaic_height) const;
};

/// 3x3 projective map, row-major, normalized so m[8] == 1 when nonzero.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Homography identity() { return {}; }
    static Homography translation(double dx, double dy);

    Homography normalized() const;
    Homography inverse() const;  // throws NumericError when |det| <= 1e-12
    Homography compose(const Homography& rhs) const;  // this * rhs

    Vec2 apply(double x, double y) const;

    bool is_identity(double tol = 0.0) const;
};

std::vector<Frame> extract_views(const Frame& mosaic, const ViewLayout& layout);

/// Event-domain extraction: translates coordinates to view-local origin and
/// drops events falling in layout gaps.
std::vector<EventStream> extract_views(const EventStream& mosaic, const ViewLayout& layout);

struct HomographyEstimate {
    Homography h;
    double rms_symmetric_error = 0.0;  // RMS over forward+backward residuals
};

/// Normalized DLT (Hartley normalization, SVD null vector). Needs >= 4
/// pairs; throws NumericError on rank-deficient (degenerate) configurations.
HomographyEstimate estimate_homography(std::span<const PointPair> correspondences);

double symmetric_transfer_rms(const Homography& h, std::span<const PointPair> correspondences);

/// Backward warp: out(p) = frame(H^-1 p), bilinear, clamp-to-edge. Content
/// at source point q lands at H(q).
Frame warp_frame(const Frame& frame, const Homography& h);

/// Maps each event position through H, rounds to the nearest pixel, drops
/// events landing outside bounds, and re-sorts with the standard tie-break.
EventStream warp_events(const EventStream& stream, const Homography& h);

// Serialization: homography as 9 decimal numbers row-major on one line;
// correspondences as "src_x,src_y,dst_x,dst_y" CSV lines; layout as
// "x,y,w,h" CSV lines in row-major view order.
void write_homography(const Homography& h, const std::filesystem::path& path);
Homography read_homography(const std::filesystem::path& path);
std::vector<PointPair> read_correspondences_csv(const std::filesystem::path& path);
ViewLayout read_layout_csv(const std::filesystem::path& path, int rows, int cols);

}  // namespace evlf
