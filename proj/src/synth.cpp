#include "evlf/synth.hpp"

#include <cmath>
#include <numbers>

#include "evlf/rng.hpp"
#include "evlf/sampling.hpp"

namespace evlf {

std::vector<Vec2> dot_grid_centers(const DotGridSpec& spec, int width, int height) {
    std::vector<Vec2> centers;
    centers.reserve(static_cast<std::size_t>(spec.rows) * spec.cols);
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            const double fx = spec.cols == 1 ? 0.5
                                             : spec.margin_frac + (1.0 - 2.0 * spec.margin_frac) *
                                                                      c / (spec.cols - 1);
            const double fy = spec.rows == 1 ? 0.5
                                             : spec.margin_frac + (1.0 - 2.0 * spec.margin_frac) *
                                                                      r / (spec.rows - 1);
            centers.push_back({fx * (width - 1), fy * (height - 1)});
        }
    return centers;
}

Frame render_dot_grid_shifted(const DotGridSpec& spec, int width, int height, double dx,
                              double dy) {
    Frame frame(width, height, spec.background);
    const auto centers = dot_grid_centers(spec, width, height);
    const double s2 = 2.0 * spec.dot_sigma * spec.dot_sigma;
    for (const Vec2& c : centers) {
        const double cx = c.x + dx;
        const double cy = c.y + dy;
        // Only touch a local window; the tails are negligible beyond 5 sigma.
        const int radius = static_cast<int>(std::ceil(5.0 * spec.dot_sigma));
        const int x0 = std::max(0, static_cast<int>(cx) - radius);
        const int x1 = std::min(width - 1, static_cast<int>(cx) + radius + 1);
        const int y0 = std::max(0, static_cast<int>(cy) - radius);
        const int y1 = std::min(height - 1, static_cast<int>(cy) + radius + 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                frame.at(x, y) = clamp01(frame.at(x, y) + spec.amplitude * std::exp(-d2 / s2));
            }
    }
    return frame;
}

Frame render_dot_grid(const DotGridSpec& spec, int width, int height) {
    return render_dot_grid_shifted(spec, width, height, 0.0, 0.0);
}

SceneKind scene_from_name(const std::string& name) {
    if (name == "dot_grid") return SceneKind::dot_grid;
    if (name == "drifting_grating") return SceneKind::drifting_grating;
    if (name == "bouncing_blobs") return SceneKind::bouncing_blobs;
    if (name == "moving_bar") return SceneKind::moving_bar;
    throw ConfigError("unknown synthetic scene: " + name);
}

namespace {

Frame render_grating(int width, int height, double angle, double wavelength, double phase) {
    Frame frame(width, height);
    const double kx = std::cos(angle) * 2.0 * std::numbers::pi / wavelength;
    const double ky = std::sin(angle) * 2.0 * std::numbers::pi / wavelength;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            frame.at(x, y) = 0.5 + 0.45 * std::sin(kx * x + ky * y + phase);
    return frame;
}

struct Blob {
    double x, y, vx, vy, sigma, amplitude;
};

Frame render_blobs(int width, int height, const std::vector<Blob>& blobs, double t_s) {
    Frame frame(width, height, 0.05);
    for (const Blob& b : blobs) {
        // Reflective bounce off the frame borders.
        const auto bounce = [](double p, double v, double t, double size) {
            const double span = size - 1.0;
            double u = std::fmod(p + v * t, 2.0 * span);
            if (u < 0) u += 2.0 * span;
            return u <= span ? u : 2.0 * span - u;
        };
        const double cx = bounce(b.x, b.vx, t_s, width);
        const double cy = bounce(b.y, b.vy, t_s, height);
        const double s2 = 2.0 * b.sigma * b.sigma;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                frame.at(x, y) = clamp01(frame.at(x, y) + b.amplitude * std::exp(-d2 / s2));
            }
    }
    return frame;
}

Frame render_bar(int width, int height, double center_x, double half_width) {
    Frame frame(width, height, 0.05);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            // Soft-edged vertical bar (wrapping), edge scale ~1.5 px.
            double d = std::abs(x - center_x);
            d = std::min(d, width - d);
            const double v = 0.05 + 0.85 / (1.0 + std::exp((d - half_width) / 1.5));
            frame.at(x, y) = clamp01(v);
        }
    return frame;
}

}  // namespace

FrameSequence make_clip(SceneKind kind, int width, int height, int frames, double fps,
                        std::uint64_t seed, std::uint64_t clip_index) {
    if (frames < 1 || width < 1 || height < 1) throw ConfigError("bad clip geometry");
    if (!(fps > 0)) throw ConfigError("fps must be > 0");
    Rng rng(derive_seed(seed, kStreamScene, clip_index));

    FrameSequence clip;
    clip.timestamps.resize(frames);
    for (int k = 0; k < frames; ++k)
        clip.timestamps[k] = static_cast<std::uint64_t>(std::llround(k * 1e6 / fps));

    switch (kind) {
        case SceneKind::dot_grid: {
            DotGridSpec spec;
            const Frame frame = render_dot_grid(spec, width, height);
            clip.frames.assign(frames, frame);
            break;
        }
        case SceneKind::drifting_grating: {
            const double angle = rng.uniform(0.0, std::numbers::pi);
            const double wavelength = rng.uniform(0.15, 0.35) * width;
            const double speed = rng.uniform(2.0, 5.0);  // radians of phase per second
            for (int k = 0; k < frames; ++k)
                clip.frames.push_back(
                    render_grating(width, height, angle, wavelength, speed * k / fps));
            break;
        }
        case SceneKind::bouncing_blobs: {
            std::vector<Blob> blobs;
            const int count = 2 + static_cast<int>(rng.uniform() * 2.0);
            for (int i = 0; i < count; ++i) {
                Blob b;
                b.x = rng.uniform(0.2, 0.8) * width;
                b.y = rng.uniform(0.2, 0.8) * height;
                b.vx = rng.uniform(0.3, 1.2) * width * (rng.uniform() < 0.5 ? -1 : 1);
                b.vy = rng.uniform(0.3, 1.2) * height * (rng.uniform() < 0.5 ? -1 : 1);
                b.sigma = rng.uniform(0.03, 0.07) * width;
                b.amplitude = rng.uniform(0.5, 0.9);
                blobs.push_back(b);
            }
            for (int k = 0; k < frames; ++k)
                clip.frames.push_back(render_blobs(width, height, blobs, k / fps));
            break;
        }
        case SceneKind::moving_bar: {
            const double speed = rng.uniform(0.3, 0.8) * width;  // px per second
            const double half_width = rng.uniform(0.04, 0.08) * width;
            for (int k = 0; k < frames; ++k) {
                const double cx = std::fmod(0.2 * width + speed * k / fps, width);
                clip.frames.push_back(render_bar(width, height, cx, half_width));
            }
            break;
        }
    }
    return clip;
}

Frame resize_bilinear(const Frame& frame, int width, int height) {
    if (width < 1 || height < 1) throw ConfigError("bad resize geometry");
    Frame out(width, height);
    const double sx = width > 1 ? static_cast<double>(frame.width - 1) / (width - 1) : 0.0;
    const double sy = height > 1 ? static_cast<double>(frame.height - 1) / (height - 1) : 0.0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out.at(x, y) = bilinear_sample(frame, x * sx, y * sy);
    return out;
}

Frame center_crop(const Frame& frame, int width, int height) {
    if (width > frame.width || height > frame.height)
        throw ConfigError("crop larger than the source frame");
    const int x0 = (frame.width - width) / 2;
    const int y0 = (frame.height - height) / 2;
    Frame out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out.at(x, y) = frame.at(x0 + x, y0 + y);
    return out;
}

}  // namespace evlf
