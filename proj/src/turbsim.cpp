#include "evlf/turbsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>

#include "evlf/parallel.hpp"
#include "evlf/sampling.hpp"
#include "kernels_detail.hpp"

namespace evlf {

void TurbulenceParams::validate() const {
    if (tilt_std < 0) throw ConfigError("tilt_std must be >= 0");
    if (coherence_length < 0) throw ConfigError("coherence_length must be >= 0");
    if (blur_sigma_min < 0 || blur_sigma_max < blur_sigma_min)
        throw ConfigError("blur sigma range must satisfy 0 <= min <= max");
    if (scint_log_std < 0) throw ConfigError("scint_log_std must be >= 0");
    if (ar_coeff < 0 || ar_coeff >= 1) throw ConfigError("ar_coeff must lie in [0, 1)");
    if (grid_res < 2) throw ConfigError("grid_res must be >= 2");
}

int TurbulenceParams::effective_grid_res(int sensor_width) const {
    if (coherence_length <= 0) return grid_res;
    const int res =
        static_cast<int>(std::lround((sensor_width - 1) / coherence_length)) + 1;
    return std::clamp(res, 2, std::max(2, sensor_width));
}

LatentGrid LatentGrid::draw(int res, Rng& rng) {
    LatentGrid g;
    g.res = res;
    g.values.resize(static_cast<std::size_t>(res) * res * 4);
    for (double& v : g.values) v = rng.normal();
    return g;
}

LatentGrid advance_state(const LatentGrid& state, double alpha, Rng& rng) {
    if (alpha < 0 || alpha >= 1) throw ConfigError("ar coefficient must lie in [0, 1)");
    const double fresh = std::sqrt(1.0 - alpha * alpha);
    LatentGrid next;
    next.res = state.res;
    next.values.resize(state.values.size());
    for (std::size_t i = 0; i < state.values.size(); ++i)
        next.values[i] = alpha * state.values[i] + fresh * rng.normal();
    return next;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

FieldFrame realize_fields(const TurbulenceParams& params, const LatentGrid& state) {
    params.validate();
    const int res = state.res;
    const std::size_t n = static_cast<std::size_t>(res) * res;
    FieldFrame f;
    f.res = res;
    f.tilt_x.resize(n);
    f.tilt_y.resize(n);
    f.blur_sigma.resize(n);
    f.log_gain.resize(n);
    const double s = params.scint_log_std;
    const double blur_span = params.blur_sigma_max - params.blur_sigma_min;
    for (std::size_t i = 0; i < n; ++i) {
        const double* latent = state.values.data() + 4 * i;
        f.tilt_x[i] = params.tilt_std * latent[0];
        f.tilt_y[i] = params.tilt_std * latent[1];
        f.blur_sigma[i] = params.blur_sigma_min + blur_span * normal_cdf(latent[2]);
        f.log_gain[i] = s == 0.0 ? 0.0 : s * latent[3] - 0.5 * s * s;
    }
    return f;
}

namespace detail {

// Bilinear upsampling of one coarse field; nodes span [0, size-1] per axis.
void upsample_field_row(const double* coarse, int res, int width, int height, int y,
                        double* out_row) {
    const double sx = width > 1 ? static_cast<double>(res - 1) / (width - 1) : 0.0;
    const double sy = height > 1 ? static_cast<double>(res - 1) / (height - 1) : 0.0;
    const double gy = y * sy;
    int j0 = static_cast<int>(gy);
    if (j0 > res - 2) j0 = res - 2;
    const double fy = gy - j0;
    for (int x = 0; x < width; ++x) {
        const double gx = x * sx;
        int i0 = static_cast<int>(gx);
        if (i0 > res - 2) i0 = res - 2;
        const double fx = gx - i0;
        const double top = coarse[j0 * res + i0] * (1.0 - fx) + coarse[j0 * res + i0 + 1] * fx;
        const double bot =
            coarse[(j0 + 1) * res + i0] * (1.0 - fx) + coarse[(j0 + 1) * res + i0 + 1] * fx;
        out_row[x] = top * (1.0 - fy) + bot * fy;
    }
}

void warp_tilt_row(const Frame& src, const SensorFields& fields, int y, double* out_row) {
    const std::size_t base = static_cast<std::size_t>(y) * src.width;
    for (int x = 0; x < src.width; ++x) {
        // Backward warp: tilt is the apparent displacement of content.
        out_row[x] =
            bilinear_sample(src, x - fields.tilt_x[base + x], y - fields.tilt_y[base + x]);
    }
}

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma <= 0.0) return {1.0};
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& w : k) w /= sum;
    return k;
}

void blur_h_row(const Frame& src, const std::vector<double>& kernel, int y, double* out_row) {
    const int radius = static_cast<int>(kernel.size() / 2);
    for (int x = 0; x < src.width; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            const int xi = std::clamp(x + i, 0, src.width - 1);
            acc += kernel[i + radius] * src.at(xi, y);
        }
        out_row[x] = acc;
    }
}

void blur_v_row(const Frame& src, const std::vector<double>& kernel, int y, double* out_row) {
    const int radius = static_cast<int>(kernel.size() / 2);
    for (int x = 0; x < src.width; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            const int yi = std::clamp(y + i, 0, src.height - 1);
            acc += kernel[i + radius] * src.at(x, yi);
        }
        out_row[x] = acc;
    }
}

std::vector<double> blur_level_sigmas(const TurbulenceParams& params) {
    const double span = params.blur_sigma_max - params.blur_sigma_min;
    if (span <= 0.0) return {params.blur_sigma_min};
    std::vector<double> sigmas(kBlurLevels);
    for (int k = 0; k < kBlurLevels; ++k)
        sigmas[k] = params.blur_sigma_min + span * k / (kBlurLevels - 1);
    return sigmas;
}

// Per-pixel sigma blend across the precomputed levels plus the gain step.
void blend_gain_row(const std::vector<Frame>& levels, const std::vector<double>& sigmas,
                    const SensorFields& fields, int y, Frame& out) {
    const int width = out.width;
    const std::size_t base = static_cast<std::size_t>(y) * width;
    const double lo = sigmas.front();
    const double hi = sigmas.back();
    const int last = static_cast<int>(sigmas.size()) - 1;
    for (int x = 0; x < width; ++x) {
        double v;
        if (last == 0) {
            v = levels[0].at(x, y);
        } else {
            const double u =
                std::clamp((fields.blur_sigma[base + x] - lo) / (hi - lo), 0.0, 1.0) * last;
            int k0 = static_cast<int>(u);
            if (k0 > last - 1) k0 = last - 1;
            const double f = u - k0;
            v = levels[k0].at(x, y) * (1.0 - f) + levels[k0 + 1].at(x, y) * f;
        }
        out.at(x, y) = clamp01(v * fields.gain[base + x]);
    }
}

}  // namespace detail

SensorFields upsample_fields(const FieldFrame& coarse, int width, int height) {
    SensorFields out;
    out.width = width;
    out.height = height;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    out.tilt_x.resize(n);
    out.tilt_y.resize(n);
    out.blur_sigma.resize(n);
    out.gain.resize(n);
    parallel_for_index(height, [&](int y) {
        const std::size_t base = static_cast<std::size_t>(y) * width;
        detail::upsample_field_row(coarse.tilt_x.data(), coarse.res, width, height, y,
                                   out.tilt_x.data() + base);
        detail::upsample_field_row(coarse.tilt_y.data(), coarse.res, width, height, y,
                                   out.tilt_y.data() + base);
        detail::upsample_field_row(coarse.blur_sigma.data(), coarse.res, width, height, y,
                                   out.blur_sigma.data() + base);
        detail::upsample_field_row(coarse.log_gain.data(), coarse.res, width, height, y,
                                   out.gain.data() + base);
        for (std::size_t i = base; i < base + width; ++i) out.gain[i] = std::exp(out.gain[i]);
    });
    return out;
}

Frame gaussian_blur(const Frame& frame, double sigma) {
    if (sigma <= 0.0) return frame;
    const auto kernel = detail::gaussian_kernel(sigma);
    Frame tmp(frame.width, frame.height);
    parallel_for_index(frame.height,
                       [&](int y) { detail::blur_h_row(frame, kernel, y, &tmp.at(0, y)); });
    Frame out(frame.width, frame.height);
    parallel_for_index(frame.height,
                       [&](int y) { detail::blur_v_row(tmp, kernel, y, &out.at(0, y)); });
    return out;
}

Frame apply_turbulence(const Frame& frame, const SensorFields& fields,
                       const TurbulenceParams& params) {
    if (fields.width != frame.width || fields.height != frame.height)
        throw DataError("field resolution does not match the frame");

    Frame warped(frame.width, frame.height);
    parallel_for_index(frame.height,
                       [&](int y) { detail::warp_tilt_row(frame, fields, y, &warped.at(0, y)); });

    const auto sigmas = detail::blur_level_sigmas(params);
    std::vector<Frame> levels;
    levels.reserve(sigmas.size());
    for (double s : sigmas) levels.push_back(gaussian_blur(warped, s));

    Frame out(frame.width, frame.height);
    parallel_for_index(frame.height,
                       [&](int y) { detail::blend_gain_row(levels, sigmas, fields, y, out); });
    return out;
}

FrameSequence simulate_view(const FrameSequence& clean, const TurbulenceParams& params,
                            int view_index) {
    clean.validate();
    params.validate();
    if (clean.frames.empty()) throw DataError("cannot simulate an empty sequence");
    const int width = clean.frames[0].width;
    const int height = clean.frames[0].height;
    const int res = params.effective_grid_res(width);

    // Latent noise for frame k comes from substream (seed, view, k), so the
    // chain is reproducible frame-by-frame regardless of scheduling.
    const std::size_t n_frames = clean.frames.size();
    std::vector<LatentGrid> latents(n_frames);
    {
        Rng rng0(derive_seed(params.seed, kStreamTurbulence, static_cast<std::uint64_t>(view_index), 0));
        latents[0] = LatentGrid::draw(res, rng0);
        for (std::size_t k = 1; k < n_frames; ++k) {
            Rng rng_k(derive_seed(params.seed, kStreamTurbulence,
                                  static_cast<std::uint64_t>(view_index), k));
            latents[k] = advance_state(latents[k - 1], params.ar_coeff, rng_k);
        }
    }

    FrameSequence out;
    out.timestamps = clean.timestamps;
    out.frames.resize(n_frames);
    for (std::size_t k = 0; k < n_frames; ++k) {
        const FieldFrame fields = realize_fields(params, latents[k]);
        const SensorFields sensor = upsample_fields(fields, width, height);
        out.frames[k] = apply_turbulence(clean.frames[k], sensor, params);
    }
    return out;
}

std::vector<FrameSequence> simulate_lightfield(const FrameSequence& clean,
                                               const TurbulenceParams& params, int n_views) {
    if (n_views < 1) throw ConfigError("need at least one view");
    std::vector<FrameSequence> views(n_views);
    parallel_for_index(n_views, [&](int i) { views[i] = simulate_view(clean, params, i); });
    return views;
}

TurbulenceParams turbulence_preset(TurbulenceStrength strength, std::uint64_t seed) {
    // Approximate tabletop-scale presets for the 256 px working resolution.
    TurbulenceParams p;
    p.seed = seed;
    switch (strength) {
        case TurbulenceStrength::weak:
            p.tilt_std = 0.6;
            p.blur_sigma_min = 0.3;
            p.blur_sigma_max = 0.9;
            p.scint_log_std = 0.05;
            p.ar_coeff = 0.9;
            p.grid_res = 4;
            break;
        case TurbulenceStrength::medium:
            p.tilt_std = 1.2;
            p.blur_sigma_min = 0.5;
            p.blur_sigma_max = 1.6;
            p.scint_log_std = 0.1;
            p.ar_coeff = 0.85;
            p.grid_res = 5;
            break;
        case TurbulenceStrength::strong:
            p.tilt_std = 2.4;
            p.blur_sigma_min = 0.8;
            p.blur_sigma_max = 2.6;
            p.scint_log_std = 0.18;
            p.ar_coeff = 0.8;
            p.grid_res = 6;
            break;
    }
    return p;
}

TurbulenceStrength sample_strength(std::uint64_t seed, std::uint64_t clip_index) {
    Rng rng(derive_seed(seed, kStreamStrength, clip_index));
    const double u = rng.uniform();
    if (u < 0.1) return TurbulenceStrength::weak;
    if (u < 0.4) return TurbulenceStrength::medium;
    return TurbulenceStrength::strong;
}

TurbulenceStrength strength_from_name(const std::string& name) {
    if (name == "weak") return TurbulenceStrength::weak;
    if (name == "medium") return TurbulenceStrength::medium;
    if (name == "strong") return TurbulenceStrength::strong;
    throw ConfigError("unknown turbulence strength: " + name);
}

std::string strength_name(TurbulenceStrength s) {
    switch (s) {
        case TurbulenceStrength::weak: return "weak";
        case TurbulenceStrength::medium: return "medium";
        default: return "strong";
    }
}

double pixel_pitch_m(const OpticsGeometry& g) {
    if (g.focal_length_m <= 0 || g.scene_width_m <= 0 || g.distance_m <= 0 ||
        g.sensor_width_px <= 0)
        throw ConfigError("optics geometry values must be positive");
    return g.focal_length_m * g.scene_width_m / g.distance_m / g.sensor_width_px;
}

double angle_to_pixels(double angle_rad, const OpticsGeometry& g) {
    return angle_rad * g.focal_length_m / pixel_pitch_m(g);
}

TurbulenceParams scaled_params(const OpticsGeometry& geometry, double tilt_rms_rad,
                               double blur_min_rad, double blur_max_rad,
                               const TurbulenceParams& base) {
    TurbulenceParams p = base;
    p.tilt_std = angle_to_pixels(tilt_rms_rad, geometry);
    p.blur_sigma_min = angle_to_pixels(blur_min_rad, geometry);
    p.blur_sigma_max = angle_to_pixels(blur_max_rad, geometry);
    p.validate();
    return p;
}

void dump_fields(const FieldFrame& fields, const std::filesystem::path& directory,
                 int frame_index) {
    std::filesystem::create_directories(directory);
    const std::pair<const char*, const std::vector<double>*> planes[] = {
        {"tilt_x", &fields.tilt_x},
        {"tilt_y", &fields.tilt_y},
        {"blur_sigma", &fields.blur_sigma},
        {"log_gain", &fields.log_gain},
    };
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_%06d.f64", frame_index);
    for (const auto& [name, plane] : planes) {
        std::ofstream out(directory / (std::string(name) + suffix), std::ios::binary);
        for (double v : *plane) {
            // Raw little-endian doubles.
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            unsigned char buf[8];
            for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
            out.write(reinterpret_cast<const char*>(buf), 8);
        }
    }
    std::ofstream meta(directory / "fields_meta.txt");
    meta << "res = " << fields.res << "\nlayout = row-major f64 little-endian\n";
}

}  // namespace evlf
