#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/lfgeom.hpp"

namespace evlf {

enum class FusionMode { mean, median, trimmed_mean };

FusionMode fusion_from_name(const std::string& name);

/// Leaky per-pixel integrator + robust cross-view fusion.
struct ReconConfig {
    double contrast = 0.3;   // log step applied per event
    double leak_rate = 0.0;  // 1/s decay toward the running spatial mean
    std::vector<std::uint64_t> timestamps;  // output sample times, microseconds
    FusionMode fusion = FusionMode::median;
    int trim = 1;            // values dropped per side in trimmed_mean
    bool normalize = true;   // map to [0,1] by the robust range below
    double norm_lo_pct = 2.0;
    double norm_hi_pct = 98.0;
    bool has_fixed_range = false;  // when set, lo/hi replace the percentile scan
    double range_lo = 0.0;
    double range_hi = 1.0;
};

/// Raw integration: per pixel, +/- contrast per event with exact exponential
/// decay toward the spatial mean (recomputed at each output sample) between
/// events. Returns one field of log-intensity offsets per requested
/// timestamp.
std::vector<std::vector<double>> integrate_events_raw(const EventStream& stream,
                                                      const ReconConfig& config);

/// integrate_events_raw followed by the configured normalization: linear map
/// of the 2nd-98th percentile range of the first second of samples onto
/// [0, 1], clamped.
FrameSequence integrate_events(const EventStream& stream, const ReconConfig& config);

/// Warps every view to the center with its homography, then reduces across
/// views per pixel with the configured statistic.
FrameSequence fuse_views(std::span<const FrameSequence> views,
                         std::span<const Homography> to_center, FusionMode mode, int trim = 1);

/// 10 log10(peak^2 / MSE); identical frames yield +infinity.
double psnr(const Frame& a, const Frame& b, double peak = 1.0);

/// Mean SSIM over all window x window sliding windows (uniform weighting),
/// constants C1 = (k1 peak)^2, C2 = (k2 peak)^2.
double ssim(const Frame& a, const Frame& b, int window = 8, double k1 = 0.01, double k2 = 0.03,
            double peak = 1.0);

struct MetricsReport {
    std::vector<std::uint64_t> timestamps;  // frames actually compared
    std::vector<double> psnr;
    std::vector<double> ssim;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

/// Frames matched by exact timestamp; throws DataError on empty overlap.
MetricsReport evaluate_clip(const FrameSequence& recon, const FrameSequence& truth);

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);

/// One CSV row per frame: timestamp then the values sampled (bilinearly)
/// along the path. A horizontal row y=r is the common case; radial or
/// angular paths are passed as explicit point lists.
void export_xt_slice(const FrameSequence& frames, std::span<const Vec2> path,
                     std::ostream& sink);

std::vector<Vec2> row_path(int width, double y);

}  // namespace evlf
