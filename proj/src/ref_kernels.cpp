#include "evlf/ref.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evlf/sampling.hpp"
#include "kernels_detail.hpp"

namespace evlf::ref {

Frame gaussian_blur(const Frame& frame, double sigma) {
    if (sigma <= 0.0) return frame;
    const auto kernel = detail::gaussian_kernel(sigma);
    Frame tmp(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y) detail::blur_h_row(frame, kernel, y, &tmp.at(0, y));
    Frame out(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y) detail::blur_v_row(tmp, kernel, y, &out.at(0, y));
    return out;
}

Frame apply_turbulence(const Frame& frame, const SensorFields& fields,
                       const TurbulenceParams& params) {
    if (fields.width != frame.width || fields.height != frame.height)
        throw DataError("field resolution does not match the frame");

    Frame warped(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y)
        detail::warp_tilt_row(frame, fields, y, &warped.at(0, y));

    const auto sigmas = detail::blur_level_sigmas(params);
    std::vector<Frame> levels;
    levels.reserve(sigmas.size());
    for (double s : sigmas) levels.push_back(ref::gaussian_blur(warped, s));

    Frame out(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y)
        detail::blend_gain_row(levels, sigmas, fields, y, out);
    return out;
}

VoxelGrid encode_voxel_grid(const EventStream& stream, std::uint64_t t0, std::uint64_t t1,
                            int bins) {
    if (t1 <= t0) throw ConfigError("voxel window must satisfy t_end > t_start");
    if (bins < 1) throw ConfigError("voxel grid needs at least one bin");
    if (stream.width == 0 || stream.height == 0) throw DataError("empty sensor geometry");
    VoxelGrid grid(bins, stream.height, stream.width, t0, t1);
    for (const Event& e : stream.events)
        if (e.t >= t0 && e.t < t1)
            detail::splat_event(e, t0, t1, bins, grid.width, grid.height, grid.values.data());
    return grid;
}

EventStream frames_to_events(const FrameSequence& frames, const EventSimConfig& config) {
    config.validate();
    frames.validate();
    if (frames.frames.size() < 2) throw DataError("event simulation needs at least two frames");
    const int width = frames.frames[0].width;
    const int height = frames.frames[0].height;

    EventStream stream;
    stream.width = static_cast<std::uint16_t>(width);
    stream.height = static_cast<std::uint16_t>(height);
    stream.duration = frames.timestamps.back();
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            detail::pixel_events(frames, config, x, y, stream.events);
    std::stable_sort(stream.events.begin(), stream.events.end(), event_order_less);
    return stream;
}

std::vector<std::vector<double>> integrate_events_raw(const EventStream& stream,
                                                      const ReconConfig& config) {
    if (!(config.contrast > 0)) throw ConfigError("integration contrast must be > 0");
    if (config.leak_rate < 0) throw ConfigError("leak rate must be >= 0");
    if (config.timestamps.empty()) throw ConfigError("no output timestamps requested");
    stream.validate();

    const int width = stream.width;
    const int height = stream.height;
    const std::size_t n_pixels = static_cast<std::size_t>(width) * height;

    std::vector<std::size_t> counts(n_pixels + 1, 0);
    for (const Event& e : stream.events)
        ++counts[static_cast<std::size_t>(e.y) * width + e.x + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    std::vector<Event> by_pixel(stream.events.size());
    {
        std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
        for (const Event& e : stream.events)
            by_pixel[cursor[static_cast<std::size_t>(e.y) * width + e.x]++] = e;
    }

    std::vector<detail::IntegratorState> state(n_pixels);
    std::vector<std::size_t> cursor(n_pixels);
    for (std::size_t q = 0; q < n_pixels; ++q) cursor[q] = counts[q];

    std::vector<std::vector<double>> samples;
    double mean_level = 0.0;
    for (std::uint64_t t_out : config.timestamps) {
        std::vector<double> field(n_pixels);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const std::size_t q = static_cast<std::size_t>(y) * width + x;
                std::size_t end = cursor[q];
                while (end < counts[q + 1] && by_pixel[end].t <= t_out) ++end;
                detail::integrate_pixel_interval(by_pixel.data(), cursor[q], end,
                                                 static_cast<double>(t_out), config.contrast,
                                                 config.leak_rate, mean_level, state[q]);
                cursor[q] = end;
                field[q] = state[q].level;
            }
        // Same row-partial grouping as the parallel reduction.
        double total = 0.0;
        for (int y = 0; y < height; ++y) {
            double row_acc = 0.0;
            for (int x = 0; x < width; ++x) row_acc += field[static_cast<std::size_t>(y) * width + x];
            total += row_acc;
        }
        mean_level = total / static_cast<double>(n_pixels);
        samples.push_back(std::move(field));
    }
    return samples;
}

FrameSequence fuse_views(std::span<const FrameSequence> views,
                         std::span<const Homography> to_center, FusionMode mode, int trim) {
    if (views.empty()) throw DataError("fusion needs at least one view");
    if (to_center.size() != views.size())
        throw DataError("need one homography per view for fusion");
    const std::size_t n_frames = views[0].frames.size();
    const int width = views[0].frames.at(0).width;
    const int height = views[0].frames.at(0).height;
    const int n_views = static_cast<int>(views.size());

    FrameSequence out;
    out.timestamps = views[0].timestamps;
    std::vector<double> gather(n_views);
    for (std::size_t k = 0; k < n_frames; ++k) {
        std::vector<Frame> aligned(n_views);
        for (int v = 0; v < n_views; ++v) {
            if (to_center[v].is_identity()) {
                aligned[v] = views[v].frames[k];
            } else {
                const Homography inv = to_center[v].inverse();
                Frame warped(width, height);
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x) {
                        const Vec2 src = inv.apply(x, y);
                        warped.at(x, y) = bilinear_sample(views[v].frames[k], src.x, src.y);
                    }
                aligned[v] = std::move(warped);
            }
        }
        Frame fused(width, height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                for (int v = 0; v < n_views; ++v) gather[v] = aligned[v].at(x, y);
                fused.at(x, y) = detail::fuse_values(gather.data(), n_views, mode, trim);
            }
        out.frames.push_back(std::move(fused));
    }
    return out;
}

}  // namespace evlf::ref
