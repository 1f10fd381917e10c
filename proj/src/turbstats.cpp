#include "evlf/turbstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "evlf/parallel.hpp"
#include "evlf/voxel.hpp"

namespace evlf {
namespace {

// Square patch around (cx, cy) clamped inside the frame; returns the patch
// origin so fit coordinates can be mapped back.
Frame extract_patch(const Frame& frame, double cx, double cy, int half, int& ox, int& oy) {
    const int size = 2 * half + 1;
    if (frame.width < size || frame.height < size)
        throw DataError("frame smaller than the fitting window");
    ox = std::clamp(static_cast<int>(std::lround(cx)) - half, 0, frame.width - size);
    oy = std::clamp(static_cast<int>(std::lround(cy)) - half, 0, frame.height - size);
    Frame patch(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) patch.at(x, y) = frame.at(ox + x, oy + y);
    return patch;
}

GaussianFit fit_dot(const Frame& frame, double cx, double cy, int half) {
    int ox = 0, oy = 0;
    const Frame patch = extract_patch(frame, cx, cy, half, ox, oy);
    GaussianFit fit = fit_gaussian2d(patch, moment_init(patch));
    fit.cx += ox;
    fit.cy += oy;
    return fit;
}

void mean_remove(std::vector<double>& xs, std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    for (double& v : xs) v -= mx;
    for (double& v : ys) v -= my;
}

}  // namespace

std::vector<Vec2> snake_order(std::span<const Vec2> row_major_centers, int rows, int cols) {
    if (row_major_centers.size() != static_cast<std::size_t>(rows) * cols)
        throw ConfigError("center count does not match the grid");
    std::vector<Vec2> out;
    out.reserve(row_major_centers.size());
    for (int r = 0; r < rows; ++r) {
        if (r % 2 == 0)
            for (int c = 0; c < cols; ++c) out.push_back(row_major_centers[r * cols + c]);
        else
            for (int c = cols - 1; c >= 0; --c) out.push_back(row_major_centers[r * cols + c]);
    }
    return out;
}

std::vector<GaussianFit> fit_reference(const FrameSequence& clean,
                                       std::span<const Vec2> nominal_centers, int roi_half) {
    clean.validate();
    if (clean.frames.empty()) throw DataError("empty reference recording");
    // Temporal mean frame suppresses any residual noise in the reference.
    Frame mean(clean.frames[0].width, clean.frames[0].height);
    for (const Frame& f : clean.frames)
        for (std::size_t i = 0; i < mean.pixels.size(); ++i) mean.pixels[i] += f.pixels[i];
    for (double& v : mean.pixels) v /= static_cast<double>(clean.frames.size());

    std::vector<GaussianFit> fits;
    fits.reserve(nominal_centers.size());
    for (const Vec2& c : nominal_centers) fits.push_back(fit_dot(mean, c.x, c.y, roi_half));
    return fits;
}

DotTrack track_dots(const FrameSequence& recording, std::span<const Vec2> ref_centers,
                    int roi_half) {
    recording.validate();
    if (ref_centers.empty()) throw DataError("missing reference centers");

    DotTrack track;
    track.ref_centers.assign(ref_centers.begin(), ref_centers.end());
    track.fits.resize(recording.frames.size());

    const int n_frames = static_cast<int>(recording.frames.size());
    std::vector<std::exception_ptr> errors(n_frames);
    parallel_for_index(n_frames, [&](int k) {
        try {
            auto& frame_fits = track.fits[k];
            frame_fits.reserve(ref_centers.size());
            for (const Vec2& c : ref_centers)
                frame_fits.push_back(fit_dot(recording.frames[k], c.x, c.y, roi_half));
        } catch (...) {
            errors[k] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return track;
}

std::vector<std::vector<TiltVector>> tilt_series(const DotTrack& track) {
    if (track.ref_centers.empty()) throw DataError("missing reference centers");
    const std::size_t n_dots = track.ref_centers.size();
    std::vector<std::vector<TiltVector>> series(n_dots);
    for (auto& s : series) s.reserve(track.fits.size());
    for (const auto& frame_fits : track.fits) {
        if (frame_fits.size() != n_dots) throw DataError("incomplete dot grid in track");
        for (std::size_t d = 0; d < n_dots; ++d)
            series[d].push_back({frame_fits[d].cx - track.ref_centers[d].x,
                                 frame_fits[d].cy - track.ref_centers[d].y});
    }
    return series;
}

std::vector<double> tilt_autocorrelation(std::span<const TiltVector> series, int max_lag) {
    const std::size_t n = series.size();
    if (max_lag < 0 || n <= static_cast<std::size_t>(max_lag))
        throw ConfigError("series length must exceed max_lag");

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = series[i].x;
        ys[i] = series[i].y;
    }
    mean_remove(xs, ys);

    const auto lag_product = [n](const std::vector<double>& v, int tau) {
        double acc = 0.0;
        for (std::size_t t = 0; t + tau < n; ++t) acc += v[t] * v[t + tau];
        return acc / static_cast<double>(n - tau);
    };
    const double var_x = lag_product(xs, 0);
    const double var_y = lag_product(ys, 0);
    if (var_x <= 0.0 || var_y <= 0.0) throw NumericError("zero-variance tilt axis");

    std::vector<double> curve(max_lag + 1);
    for (int tau = 0; tau <= max_lag; ++tau) {
        const double c =
            0.5 * (lag_product(xs, tau) / var_x + lag_product(ys, tau) / var_y);
        curve[tau] = std::clamp(c, -1.0, 1.0);
    }
    return curve;
}

CorrMatrix tilt_spatial_correlation(const std::vector<std::vector<TiltVector>>& series_per_unit) {
    const int m = static_cast<int>(series_per_unit.size());
    if (m == 0) throw DataError("no tilt series");
    const std::size_t n = series_per_unit[0].size();
    for (const auto& s : series_per_unit)
        if (s.size() != n || n == 0) throw DataError("tilt series length mismatch");

    std::vector<std::vector<double>> xs(m), ys(m);
    for (int i = 0; i < m; ++i) {
        xs[i].resize(n);
        ys[i].resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            xs[i][t] = series_per_unit[i][t].x;
            ys[i][t] = series_per_unit[i][t].y;
        }
        mean_remove(xs[i], ys[i]);
    }

    const auto dot = [&](int i, int j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) acc += xs[i][t] * xs[j][t] + ys[i][t] * ys[j][t];
        return acc / static_cast<double>(n);
    };

    std::vector<double> norms(m);
    for (int i = 0; i < m; ++i) {
        norms[i] = dot(i, i);
        if (norms[i] <= 0.0) throw NumericError("zero-norm tilt series");
    }

    CorrMatrix out;
    out.n = m;
    out.values.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        out.values[static_cast<std::size_t>(i) * m + i] = 1.0;
        for (int j = i + 1; j < m; ++j) {
            const double c = std::clamp(dot(i, j) / std::sqrt(norms[i] * norms[j]), -1.0, 1.0);
            out.values[static_cast<std::size_t>(i) * m + j] = c;
            out.values[static_cast<std::size_t>(j) * m + i] = c;
        }
    }
    return out;
}

double mean_spread(const GaussianFit& fit) { return 0.5 * (fit.sigma_x + fit.sigma_y); }

std::vector<double> blur_series(const DotTrack& track) {
    std::vector<double> out;
    out.reserve(track.fits.size());
    for (const auto& frame_fits : track.fits) {
        if (frame_fits.empty()) throw DataError("missing fits in track");
        double acc = 0.0;
        for (const GaussianFit& f : frame_fits) acc += mean_spread(f);
        out.push_back(acc / static_cast<double>(frame_fits.size()));
    }
    return out;
}

double scintillation_index(std::span<const double> intensity) {
    if (intensity.empty()) throw DataError("empty intensity series");
    // Welford accumulator; single pass, numerically stable.
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (double v : intensity) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    if (mean <= 0.0) throw NumericError("scintillation index needs a positive mean intensity");
    const double variance = m2 / static_cast<double>(n);
    return variance / (mean * mean);
}

ContrastEstimate estimate_contrast_threshold(const EventStream& observed,
                                             const FrameSequence& clean_frames, double c_min,
                                             double c_max, int grid_points,
                                             const EventSimConfig& base_config) {
    if (grid_points < 2) throw ConfigError("contrast grid needs at least 2 points");
    if (!(c_min > 0) || c_max <= c_min)
        throw ConfigError("contrast range must satisfy 0 < c_min < c_max");
    clean_frames.validate();
    if (observed.width != clean_frames.frames.at(0).width ||
        observed.height != clean_frames.frames.at(0).height)
        throw DataError("observed stream resolution does not match the clean frames");

    ContrastEstimate est;
    est.observed_rate = event_rate(observed);
    est.grid_c.resize(grid_points);
    est.grid_rates.resize(grid_points);
    for (int i = 0; i < grid_points; ++i)
        est.grid_c[i] = c_min + (c_max - c_min) * i / (grid_points - 1);

    const int n = grid_points;
    std::vector<std::exception_ptr> errors(n);
    parallel_for_index(n, [&](int i) {
        try {
            EventSimConfig config = base_config;
            config.contrast = est.grid_c[i];
            est.grid_rates[i] = event_rate(frames_to_events(clean_frames, config));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    // The rate is non-increasing in C; invert by bracketing.
    if (est.observed_rate > est.grid_rates.front())
        throw DataError("observed event rate above the simulated range");
    if (est.observed_rate < est.grid_rates.back())
        throw DataError("observed event rate below the simulated range");

    for (int i = 0; i + 1 < n; ++i) {
        const double hi = est.grid_rates[i];
        const double lo = est.grid_rates[i + 1];
        if (est.observed_rate <= hi && est.observed_rate >= lo) {
            const double f = hi > lo ? (hi - est.observed_rate) / (hi - lo) : 0.0;
            est.c = est.grid_c[i] + f * (est.grid_c[i + 1] - est.grid_c[i]);
            est.bracket_lo = est.grid_c[i];
            est.bracket_hi = est.grid_c[i + 1];
            return est;
        }
    }
    // Non-monotone rate curve with the observation inside a local bump.
    throw NumericError("could not bracket the observed event rate");
}

void write_stats_report(const StatsReport& report, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);

    const auto open = [&](const char* name) {
        std::ofstream out(directory / name);
        if (!out) throw DataError(std::string("cannot write ") + name);
        out.precision(12);
        return out;
    };

    {
        auto out = open("autocorrelation.csv");
        out << "lag,c_tilt\n";
        for (std::size_t tau = 0; tau < report.autocorrelation.size(); ++tau)
            out << tau << ',' << report.autocorrelation[tau] << '\n';
    }
    const auto write_matrix = [&](const char* name, const CorrMatrix& mat) {
        auto out = open(name);
        for (int i = 0; i < mat.n; ++i)
            for (int j = 0; j < mat.n; ++j) out << mat.at(i, j) << (j == mat.n - 1 ? '\n' : ',');
    };
    write_matrix("within_view_corr.csv", report.within_view);
    write_matrix("cross_view_corr.csv", report.cross_view);
    {
        auto out = open("blur_series.csv");
        out << "frame,mean_sigma\n";
        for (std::size_t k = 0; k < report.blur.size(); ++k)
            out << k << ',' << report.blur[k] << '\n';
    }
    {
        auto out = open("stats_report.txt");
        out << "frames = " << report.blur.size() << '\n';
        out << "blur_reference_sigma = " << report.blur_reference << '\n';
        for (std::size_t v = 0; v < report.scintillation.size(); ++v)
            out << "scintillation_index_view_" << v << " = " << report.scintillation[v] << '\n';
        if (report.contrast_estimate >= 0)
            out << "contrast_estimate = " << report.contrast_estimate << '\n';
    }
}

}  // namespace evlf
