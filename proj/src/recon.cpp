#include "evlf/recon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "evlf/parallel.hpp"
#include "evlf/sampling.hpp"
#include "kernels_detail.hpp"

namespace evlf {

FusionMode fusion_from_name(const std::string& name) {
    if (name == "mean") return FusionMode::mean;
    if (name == "median") return FusionMode::median;
    if (name == "trimmed" || name == "trimmed_mean") return FusionMode::trimmed_mean;
    throw ConfigError("unknown fusion mode: " + name);
}

namespace detail {

void integrate_pixel_interval(const Event* events, std::size_t begin, std::size_t end,
                              double t_sample_us, double contrast, double leak_rate,
                              double mean_level, IntegratorState& state) {
    const auto decay_to = [&](double t_us) {
        if (leak_rate > 0.0) {
            const double dt_s = (t_us - state.last_t_us) * 1e-6;
            state.level = mean_level + (state.level - mean_level) * std::exp(-leak_rate * dt_s);
        }
        state.last_t_us = t_us;
    };
    for (std::size_t i = begin; i < end; ++i) {
        decay_to(static_cast<double>(events[i].t));
        state.level += contrast * events[i].p;
    }
    decay_to(t_sample_us);
}

double fuse_values(double* values, int n, FusionMode mode, int trim) {
    switch (mode) {
        case FusionMode::mean: {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += values[i];
            return acc / n;
        }
        case FusionMode::median: {
            std::sort(values, values + n);
            return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        }
        case FusionMode::trimmed_mean:
        default: {
            std::sort(values, values + n);
            const int k = std::clamp(trim, 0, (n - 1) / 2);
            double acc = 0.0;
            for (int i = k; i < n - k; ++i) acc += values[i];
            return acc / (n - 2 * k);
        }
    }
}

double mean_by_rows(const std::vector<double>& values, int width, int height,
                    std::vector<double>& row_partials) {
    row_partials.assign(height, 0.0);
    parallel_for_index(height, [&](int y) {
        double acc = 0.0;
        const double* row = values.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) acc += row[x];
        row_partials[y] = acc;
    });
    double total = 0.0;
    for (double v : row_partials) total += v;
    return total / (static_cast<double>(width) * height);
}

}  // namespace detail

std::vector<std::vector<double>> integrate_events_raw(const EventStream& stream,
                                                      const ReconConfig& config) {
    if (!(config.contrast > 0)) throw ConfigError("integration contrast must be > 0");
    if (config.leak_rate < 0) throw ConfigError("leak rate must be >= 0");
    if (config.timestamps.empty()) throw ConfigError("no output timestamps requested");
    for (std::size_t i = 1; i < config.timestamps.size(); ++i)
        if (config.timestamps[i] <= config.timestamps[i - 1])
            throw ConfigError("output timestamps must be strictly increasing");
    stream.validate();

    const int width = stream.width;
    const int height = stream.height;
    const std::size_t n_pixels = static_cast<std::size_t>(width) * height;

    // Stable per-pixel bucketing keeps each pixel's events in time order.
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
    samples.reserve(config.timestamps.size());
    std::vector<double> row_partials;
    double mean_level = 0.0;  // running spatial mean, updated at each sample

    for (std::uint64_t t_out : config.timestamps) {
        std::vector<double> field(n_pixels);
        parallel_for_index(height, [&](int y) {
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
        });
        mean_level = detail::mean_by_rows(field, width, height, row_partials);
        samples.push_back(std::move(field));
    }
    return samples;
}

namespace {

double nearest_rank_percentile(std::vector<double>& values, double pct) {
    const std::size_t n = values.size();
    const std::size_t idx = static_cast<std::size_t>(
        std::clamp(std::floor(pct / 100.0 * static_cast<double>(n - 1)), 0.0,
                   static_cast<double>(n - 1)));
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx),
                     values.end());
    return values[idx];
}

}  // namespace

FrameSequence integrate_events(const EventStream& stream, const ReconConfig& config) {
    const auto samples = integrate_events_raw(stream, config);

    double lo = config.range_lo;
    double hi = config.range_hi;
    if (config.normalize && !config.has_fixed_range) {
        // Robust display range from the first second of samples.
        const std::uint64_t cutoff = config.timestamps.front() + 1'000'000;
        std::vector<double> pool;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (k > 0 && config.timestamps[k] > cutoff) break;
            pool.insert(pool.end(), samples[k].begin(), samples[k].end());
        }
        std::vector<double> tmp = pool;
        lo = nearest_rank_percentile(tmp, config.norm_lo_pct);
        tmp = pool;
        hi = nearest_rank_percentile(tmp, config.norm_hi_pct);
    }

    FrameSequence out;
    out.timestamps = config.timestamps;
    const int width = stream.width;
    const int height = stream.height;
    for (const auto& field : samples) {
        Frame frame(width, height);
        if (!config.normalize) {
            for (std::size_t i = 0; i < field.size(); ++i) frame.pixels[i] = clamp01(field[i]);
        } else if (hi > lo) {
            const double scale = 1.0 / (hi - lo);
            for (std::size_t i = 0; i < field.size(); ++i)
                frame.pixels[i] = clamp01((field[i] - lo) * scale);
        } else {
            std::fill(frame.pixels.begin(), frame.pixels.end(), 0.5);
        }
        out.frames.push_back(std::move(frame));
    }
    return out;
}

FrameSequence fuse_views(std::span<const FrameSequence> views,
                         std::span<const Homography> to_center, FusionMode mode, int trim) {
    if (views.empty()) throw DataError("fusion needs at least one view");
    if (to_center.size() != views.size())
        throw DataError("need one homography per view for fusion");
    const std::size_t n_frames = views[0].frames.size();
    const int width = views[0].frames.at(0).width;
    const int height = views[0].frames.at(0).height;
    for (const FrameSequence& v : views) {
        if (v.frames.size() != n_frames) throw DataError("views differ in frame count");
        if (v.frames.at(0).width != width || v.frames.at(0).height != height)
            throw DataError("views differ in resolution");
    }

    const int n_views = static_cast<int>(views.size());
    FrameSequence out;
    out.timestamps = views[0].timestamps;
    out.frames.resize(n_frames);

    std::vector<bool> identity(n_views);
    for (int v = 0; v < n_views; ++v) identity[v] = to_center[v].is_identity();

    for (std::size_t k = 0; k < n_frames; ++k) {
        std::vector<Frame> aligned(n_views);
        for (int v = 0; v < n_views; ++v)
            aligned[v] = identity[v] ? views[v].frames[k] : warp_frame(views[v].frames[k], to_center[v]);

        Frame fused(width, height);
        parallel_for_index(height, [&](int y) {
            std::vector<double> gather(n_views);
            for (int x = 0; x < width; ++x) {
                for (int v = 0; v < n_views; ++v) gather[v] = aligned[v].at(x, y);
                fused.at(x, y) = detail::fuse_values(gather.data(), n_views, mode, trim);
            }
        });
        out.frames[k] = std::move(fused);
    }
    return out;
}

double psnr(const Frame& a, const Frame& b, double peak) {
    if (a.width != b.width || a.height != b.height) throw DataError("psnr: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Frame& a, const Frame& b, int window, double k1, double k2, double peak) {
    if (a.width != b.width || a.height != b.height) throw DataError("ssim: shape mismatch");
    if (window < 1 || a.width < window || a.height < window)
        throw DataError("ssim: frames smaller than the window");

    // Summed-area tables for the five window statistics.
    const int w = a.width, h = a.height;
    const std::size_t sw = static_cast<std::size_t>(w) + 1;
    std::vector<double> sa(sw * (h + 1), 0.0), sb(sa), saa(sa), sbb(sa), sab(sa);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i0 = static_cast<std::size_t>(y + 1) * sw + (x + 1);
            const std::size_t iu = i0 - sw;
            const double va = a.at(x, y), vb = b.at(x, y);
            sa[i0] = sa[i0 - 1] + sa[iu] - sa[iu - 1] + va;
            sb[i0] = sb[i0 - 1] + sb[iu] - sb[iu - 1] + vb;
            saa[i0] = saa[i0 - 1] + saa[iu] - saa[iu - 1] + va * va;
            sbb[i0] = sbb[i0 - 1] + sbb[iu] - sbb[iu - 1] + vb * vb;
            sab[i0] = sab[i0 - 1] + sab[iu] - sab[iu - 1] + va * vb;
        }
    const auto box = [&](const std::vector<double>& s, int x, int y) {
        const std::size_t i0 = static_cast<std::size_t>(y) * sw + x;
        const std::size_t i1 = static_cast<std::size_t>(y + window) * sw + (x + window);
        return s[i1] - s[static_cast<std::size_t>(y) * sw + x + window] -
               s[static_cast<std::size_t>(y + window) * sw + x] + s[i0];
    };

    const double c1 = (k1 * peak) * (k1 * peak);
    const double c2 = (k2 * peak) * (k2 * peak);
    const double n = static_cast<double>(window) * window;
    double acc = 0.0;
    std::size_t count = 0;
    for (int y = 0; y + window <= h; ++y)
        for (int x = 0; x + window <= w; ++x) {
            const double mu_a = box(sa, x, y) / n;
            const double mu_b = box(sb, x, y) / n;
            const double var_a = std::max(0.0, box(saa, x, y) / n - mu_a * mu_a);
            const double var_b = std::max(0.0, box(sbb, x, y) / n - mu_b * mu_b);
            const double cov = box(sab, x, y) / n - mu_a * mu_b;
            const double value = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                                 ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            acc += value;
            ++count;
        }
    return acc / static_cast<double>(count);
}

MetricsReport evaluate_clip(const FrameSequence& recon, const FrameSequence& truth) {
    recon.validate();
    truth.validate();
    MetricsReport report;
    std::size_t j = 0;
    for (std::size_t i = 0; i < recon.frames.size(); ++i) {
        while (j < truth.timestamps.size() && truth.timestamps[j] < recon.timestamps[i]) ++j;
        if (j == truth.timestamps.size()) break;
        if (truth.timestamps[j] != recon.timestamps[i]) continue;
        report.timestamps.push_back(recon.timestamps[i]);
        report.psnr.push_back(psnr(recon.frames[i], truth.frames[j]));
        report.ssim.push_back(ssim(recon.frames[i], truth.frames[j]));
    }
    if (report.timestamps.empty())
        throw DataError("no overlapping timestamps between reconstruction and truth");
    report.mean_psnr = std::accumulate(report.psnr.begin(), report.psnr.end(), 0.0) /
                       static_cast<double>(report.psnr.size());
    report.mean_ssim = std::accumulate(report.ssim.begin(), report.ssim.end(), 0.0) /
                       static_cast<double>(report.ssim.size());
    return report;
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out.precision(10);
    out << "t_us,psnr_db,ssim\n";
    for (std::size_t i = 0; i < report.timestamps.size(); ++i)
        out << report.timestamps[i] << ',' << report.psnr[i] << ',' << report.ssim[i] << '\n';
    out << "mean," << report.mean_psnr << ',' << report.mean_ssim << '\n';
}

std::vector<Vec2> row_path(int width, double y) {
    std::vector<Vec2> path(width);
    for (int x = 0; x < width; ++x) path[x] = {static_cast<double>(x), y};
    return path;
}

void export_xt_slice(const FrameSequence& frames, std::span<const Vec2> path,
                     std::ostream& sink) {
    frames.validate();
    if (path.empty()) throw DataError("empty slice path");
    const Frame& first = frames.frames.at(0);
    for (const Vec2& p : path)
        if (p.x < 0 || p.y < 0 || p.x > first.width - 1 || p.y > first.height - 1)
            throw DataError("slice path outside frame bounds");

    sink.precision(9);
    for (std::size_t k = 0; k < frames.frames.size(); ++k) {
        sink << frames.timestamps[k];
        for (const Vec2& p : path)
            sink << ',' << bilinear_sample(frames.frames[k], p.x, p.y);
        sink << '\n';
    }
    if (!sink) throw DataError("slice write failure");
}

}  // namespace evlf
