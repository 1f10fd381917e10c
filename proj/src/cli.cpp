#include "evlf/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "evlf/config.hpp"
#include "evlf/eventio.hpp"
#include "evlf/evsim.hpp"
#include "evlf/lfgeom.hpp"
#include "evlf/parallel.hpp"
#include "evlf/recon.hpp"
#include "evlf/rng.hpp"
#include "evlf/synth.hpp"
#include "evlf/turbsim.hpp"
#include "evlf/turbstats.hpp"
#include "evlf/voxel.hpp"

namespace fs = std::filesystem;

namespace evlf {
namespace {

constexpr std::uint64_t kStreamClip = 0x434c4950u;

std::string view_dir_name(int view) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "view_%02d", view);
    return buf;
}

std::string clip_dir_name(int clip) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "clip_%04d", clip);
    return buf;
}

std::vector<std::uint64_t> timestamps_from_fps(std::uint64_t duration_us, double fps) {
    if (!(fps > 0)) throw ConfigError("fps must be > 0");
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 0;; ++k) {
        const std::uint64_t t = static_cast<std::uint64_t>(std::llround(k * 1e6 / fps));
        if (t > duration_us) break;
        out.push_back(t);
    }
    return out;
}

/// Resolves a recording root to one frame directory per view: either the
/// root itself (single view) or its view_* subdirectories, optionally with a
/// nested frames/ directory.
std::vector<fs::path> resolve_view_frame_dirs(const fs::path& root) {
    const auto frames_dir = [](const fs::path& p) -> fs::path {
        if (fs::exists(p / "timestamps.txt")) return p;
        if (fs::exists(p / "frames" / "timestamps.txt")) return p / "frames";
        throw DataError("no frame directory under " + p.string());
    };
    std::vector<fs::path> views;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && entry.path().filename().string().starts_with("view_"))
            views.push_back(entry.path());
    }
    if (views.empty()) return {frames_dir(root)};
    std::sort(views.begin(), views.end());
    std::vector<fs::path> out;
    out.reserve(views.size());
    for (const auto& v : views) out.push_back(frames_dir(v));
    return out;
}

TurbulenceParams turbulence_from_config(const KeyValueConfig& cfg, TurbulenceStrength strength,
                                        std::uint64_t clip_seed) {
    TurbulenceParams p = turbulence_preset(strength, clip_seed);
    p.tilt_std = cfg.get_double("tilt_std", p.tilt_std);
    p.coherence_length = cfg.get_double("coherence_length", p.coherence_length);
    p.blur_sigma_min = cfg.get_double("blur_sigma_min", p.blur_sigma_min);
    p.blur_sigma_max = cfg.get_double("blur_sigma_max", p.blur_sigma_max);
    p.scint_log_std = cfg.get_double("scint_log_std", p.scint_log_std);
    p.ar_coeff = cfg.get_double("ar_coeff", p.ar_coeff);
    p.grid_res = static_cast<int>(cfg.get_int("grid_res", p.grid_res));
    p.validate();
    return p;
}

void write_manifest_turbulence(KeyValueConfig& manifest, const std::string& prefix,
                               const TurbulenceParams& p) {
    manifest.set_double(prefix + "tilt_std", p.tilt_std);
    manifest.set_double(prefix + "coherence_length", p.coherence_length);
    manifest.set_double(prefix + "blur_sigma_min", p.blur_sigma_min);
    manifest.set_double(prefix + "blur_sigma_max", p.blur_sigma_max);
    manifest.set_double(prefix + "scint_log_std", p.scint_log_std);
    manifest.set_double(prefix + "ar_coeff", p.ar_coeff);
    manifest.set_int(prefix + "grid_res", p.grid_res);
    manifest.set_u64(prefix + "seed", p.seed);
}

FrameSequence apply_working_size(FrameSequence clip, int working_size) {
    if (working_size <= 0) return clip;
    for (Frame& f : clip.frames) {
        const int side = std::min(f.width, f.height);
        f = resize_bilinear(center_crop(f, side, side), working_size, working_size);
    }
    return clip;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const KeyValueConfig& cfg) {
    const fs::path out_dir = cfg.get_string("output");
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const int n_views = static_cast<int>(cfg.get_int("views", 9));
    const int working_size = static_cast<int>(cfg.get_int("working_size", 0));
    const bool keep_frames = cfg.get_bool("keep_frames", false);
    const bool dump_turb_fields = cfg.get_bool("dump_fields", false);
    const int bit_depth = static_cast<int>(cfg.get_int("bit_depth", 16));
    const std::string strength_cfg = cfg.get_string("strength", "mixed");

    const bool sample_contrast = cfg.get_bool("sample_contrast", true);
    const double contrast_min = cfg.get_double("contrast_min", 0.1);
    const double contrast_max = cfg.get_double("contrast_max", 0.7);
    const double fixed_contrast = cfg.get_double("contrast", 0.3);
    EventSimConfig ev_base;
    ev_base.refractory_us = cfg.get_u64("refractory_us", 5000);
    ev_base.log_eps = cfg.get_double("log_eps", 1e-3);

    const double split_train = cfg.get_double("split_train", 0.8);
    const double split_val = cfg.get_double("split_val", 0.1);
    const double split_test = cfg.get_double("split_test", 0.1);
    if (std::abs(split_train + split_val + split_test - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");

    // Input clips: a directory of clips (or one clip), else synthetic scenes.
    std::vector<FrameSequence> clips;
    std::vector<std::string> scene_names;
    if (cfg.has("input")) {
        const fs::path input = cfg.get_string("input");
        if (!fs::exists(input)) throw DataError("input directory does not exist: " + input.string());
        std::vector<fs::path> clip_dirs;
        if (fs::exists(input / "timestamps.txt")) {
            clip_dirs.push_back(input);
        } else {
            for (const auto& entry : fs::directory_iterator(input))
                if (entry.is_directory() && fs::exists(entry.path() / "timestamps.txt"))
                    clip_dirs.push_back(entry.path());
            std::sort(clip_dirs.begin(), clip_dirs.end());
        }
        if (clip_dirs.empty()) throw DataError("no clips found under " + input.string());
        for (const auto& dir : clip_dirs) {
            clips.push_back(apply_working_size(read_frames(dir), working_size));
            scene_names.push_back(dir.filename().string());
        }
    } else {
        const int n_clips = static_cast<int>(cfg.get_int("clips", 1));
        const int frames = static_cast<int>(cfg.get_int("frames", 480));
        const double fps = cfg.get_double("fps", 120.0);
        const int size = static_cast<int>(cfg.get_int("size", 256));
        const std::string scene_cfg = cfg.get_string("synthetic", "mix");
        static const SceneKind kMix[] = {SceneKind::bouncing_blobs, SceneKind::moving_bar,
                                         SceneKind::drifting_grating};
        for (int c = 0; c < n_clips; ++c) {
            const SceneKind kind =
                scene_cfg == "mix" ? kMix[c % 3] : scene_from_name(scene_cfg);
            clips.push_back(make_clip(kind, size, size, frames, fps, seed,
                                      static_cast<std::uint64_t>(c)));
            scene_names.push_back(scene_cfg == "mix"
                                      ? std::string(kMix[c % 3] == SceneKind::bouncing_blobs
                                                        ? "bouncing_blobs"
                                                        : kMix[c % 3] == SceneKind::moving_bar
                                                              ? "moving_bar"
                                                              : "drifting_grating")
                                      : scene_cfg);
        }
    }

    fs::create_directories(out_dir);
    KeyValueConfig manifest;
    manifest.set_int("clips", static_cast<std::int64_t>(clips.size()));
    manifest.set_int("views", n_views);
    manifest.set_u64("seed", seed);
    manifest.set_int("keep_frames", keep_frames ? 1 : 0);
    manifest.set("strength_mode", strength_cfg);

    const int n_clips = static_cast<int>(clips.size());
    const int n_train = static_cast<int>(std::lround(split_train * n_clips));
    const int n_val = static_cast<int>(std::lround(split_val * n_clips));

    for (int c = 0; c < n_clips; ++c) {
        const std::string clip_name = clip_dir_name(c);
        const fs::path clip_dir = out_dir / clip_name;
        const std::uint64_t clip_seed = derive_seed(seed, kStreamClip, c);

        const TurbulenceStrength strength =
            strength_cfg == "mixed" ? sample_strength(seed, c) : strength_from_name(strength_cfg);
        const TurbulenceParams params = turbulence_from_config(cfg, strength, clip_seed);

        write_frames(clips[c], clip_dir / "clean", bit_depth);

        const auto views = simulate_lightfield(clips[c], params, n_views);
        std::vector<double> contrasts =
            sample_contrast
                ? sample_view_contrasts(n_views, contrast_min, contrast_max, clip_seed)
                : std::vector<double>(n_views, fixed_contrast);
        std::vector<EventSimConfig> ev_configs(n_views, ev_base);
        for (int v = 0; v < n_views; ++v) ev_configs[v].contrast = contrasts[v];
        const auto streams = simulate_lightfield_events(views, ev_configs);

        for (int v = 0; v < n_views; ++v) {
            const fs::path view_dir = clip_dir / view_dir_name(v);
            fs::create_directories(view_dir);
            write_events(streams[v], view_dir / "events.evlf");
            if (keep_frames) write_frames(views[v], view_dir / "frames", bit_depth);
        }
        if (dump_turb_fields) {
            // One illustrative realization per clip (view 0, frame 0).
            Rng rng0(derive_seed(clip_seed, kStreamTurbulence, 0, 0));
            const auto latent =
                LatentGrid::draw(params.effective_grid_res(clips[c].frames[0].width), rng0);
            dump_fields(realize_fields(params, latent), clip_dir / "fields", 0);
        }

        const std::string prefix = "clip." + clip_name.substr(5) + ".";
        manifest.set(prefix + "name", clip_name);
        manifest.set(prefix + "scene", scene_names[c]);
        manifest.set(prefix + "split", c < n_train ? "train" : (c < n_train + n_val ? "val" : "test"));
        manifest.set(prefix + "strength", strength_name(strength));
        write_manifest_turbulence(manifest, prefix + "turb.", params);
        for (int v = 0; v < n_views; ++v) {
            manifest.set_double(prefix + "view." + std::to_string(v) + ".contrast", contrasts[v]);
            manifest.set_u64(prefix + "view." + std::to_string(v) + ".refractory_us",
                             ev_base.refractory_us);
        }
        std::cout << clip_name << ": " << n_views << " views, "
                  << clips[c].frames.size() << " frames, strength "
                  << strength_name(strength) << "\n";
    }

    manifest.save(out_dir / "manifest.txt");
    return 0;
}

// ------------------------------------------------------------------ events

int cmd_events(const KeyValueConfig& cfg) {
    const FrameSequence frames = read_frames(cfg.get_string("input"));
    EventSimConfig config;
    config.contrast = cfg.get_double("contrast", 0.3);
    config.refractory_us = cfg.get_u64("refractory_us", 5000);
    config.log_eps = cfg.get_double("log_eps", 1e-3);
    const EventStream stream = frames_to_events(frames, config);
    const fs::path out = cfg.get_string("output");
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_events(stream, out);
    std::cout << stream.events.size() << " events, rate " << event_rate(stream)
              << " ev/px/s -> " << out.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------ encode

int cmd_encode(const KeyValueConfig& cfg) {
    std::vector<fs::path> event_files;
    if (cfg.has("events")) {
        std::string list = cfg.get_string("events");
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream in(list);
        std::string item;
        while (in >> item) event_files.emplace_back(item);
    } else {
        const fs::path clip = cfg.get_string("input");
        for (const auto& entry : fs::directory_iterator(clip))
            if (entry.is_directory() && entry.path().filename().string().starts_with("view_"))
                event_files.push_back(entry.path() / "events.evlf");
        std::sort(event_files.begin(), event_files.end());
    }
    if (event_files.empty()) throw DataError("no event streams to encode");

    std::vector<EventStream> streams;
    for (const auto& p : event_files) streams.push_back(read_events(p));
    const int bins = static_cast<int>(cfg.get_int("bins", 5));

    std::vector<std::pair<std::uint64_t, std::uint64_t>> windows;
    if (cfg.has("t0") || cfg.has("t1")) {
        windows.emplace_back(cfg.get_u64("t0"), cfg.get_u64("t1"));
    } else {
        const std::uint64_t window_us = cfg.get_u64("window_us", 8333);
        std::uint64_t duration = 0;
        for (const auto& s : streams) duration = std::max(duration, s.duration);
        for (std::uint64_t t0 = 0; t0 < duration; t0 += window_us)
            windows.emplace_back(t0, std::min(t0 + window_us, duration));
    }

    const fs::path out_dir = cfg.get_string("output");
    fs::create_directories(out_dir);
    for (std::size_t w = 0; w < windows.size(); ++w) {
        std::vector<VoxelGrid> grids;
        grids.reserve(streams.size());
        for (const auto& s : streams)
            grids.push_back(encode_voxel_grid(s, windows[w].first, windows[w].second, bins));
        char name[32];
        std::snprintf(name, sizeof(name), "window_%06zu.vxg", w);
        write_voxel(stack_views(grids), out_dir / name);
    }
    std::cout << windows.size() << " voxel grids (" << streams.size() * bins
              << " channels) -> " << out_dir.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- stats

int cmd_stats(const KeyValueConfig& cfg) {
    const fs::path recording_root = cfg.get_string("recording");
    const fs::path reference_root = cfg.get_string("reference");
    const fs::path out_dir = cfg.get_string("output");

    DotGridSpec spec;
    spec.rows = static_cast<int>(cfg.get_int("dot_rows", 3));
    spec.cols = static_cast<int>(cfg.get_int("dot_cols", 3));
    spec.margin_frac = cfg.get_double("dot_margin", 0.25);
    spec.dot_sigma = cfg.get_double("dot_sigma", 2.0);
    const int roi_half = static_cast<int>(cfg.get_int("dot_roi", 9));
    const int max_lag = static_cast<int>(cfg.get_int("max_lag", 30));

    const auto rec_dirs = resolve_view_frame_dirs(recording_root);
    const auto ref_dirs = resolve_view_frame_dirs(reference_root);
    if (rec_dirs.size() != ref_dirs.size())
        throw DataError("recording and reference view counts differ");
    const int n_views = static_cast<int>(rec_dirs.size());
    const int center_view = n_views / 2;

    StatsReport report;
    std::vector<std::vector<std::vector<TiltVector>>> tilts(n_views);  // [view][dot][frame]
    for (int v = 0; v < n_views; ++v) {
        const FrameSequence reference = read_frames(ref_dirs[v]);
        const FrameSequence recording = read_frames(rec_dirs[v]);
        const Frame& f0 = reference.frames.at(0);
        const auto nominal =
            snake_order(dot_grid_centers(spec, f0.width, f0.height), spec.rows, spec.cols);
        const auto ref_fits = fit_reference(reference, nominal, roi_half);
        std::vector<Vec2> ref_centers(ref_fits.size());
        for (std::size_t d = 0; d < ref_fits.size(); ++d)
            ref_centers[d] = {ref_fits[d].cx, ref_fits[d].cy};

        DotTrack track = track_dots(recording, ref_centers, roi_half);
        track.reference = ref_fits;
        tilts[v] = tilt_series(track);

        if (v == center_view) {
            const int center_dot = static_cast<int>(ref_centers.size()) / 2;
            report.autocorrelation = tilt_autocorrelation(tilts[v][center_dot], max_lag);
            report.within_view = tilt_spatial_correlation(tilts[v]);
            report.blur = blur_series(track);
            double ref_spread = 0;
            for (const auto& f : ref_fits) ref_spread += mean_spread(f);
            report.blur_reference = ref_spread / static_cast<double>(ref_fits.size());
        }

        // Scintillation probe: mean intensity over the center dot window.
        const int center_dot = static_cast<int>(ref_centers.size()) / 2;
        std::vector<double> intensity;
        intensity.reserve(recording.frames.size());
        for (const Frame& frame : recording.frames) {
            double acc = 0.0;
            int count = 0;
            const int cx = static_cast<int>(std::lround(ref_centers[center_dot].x));
            const int cy = static_cast<int>(std::lround(ref_centers[center_dot].y));
            for (int y = std::max(0, cy - roi_half); y <= std::min(frame.height - 1, cy + roi_half); ++y)
                for (int x = std::max(0, cx - roi_half); x <= std::min(frame.width - 1, cx + roi_half); ++x) {
                    acc += frame.at(x, y);
                    ++count;
                }
            intensity.push_back(acc / count);
        }
        report.scintillation.push_back(scintillation_index(intensity));
    }

    if (n_views > 1) {
        const int center_dot = static_cast<int>(tilts[0].size()) / 2;
        std::vector<std::vector<TiltVector>> per_view;
        per_view.reserve(n_views);
        for (int v = 0; v < n_views; ++v) per_view.push_back(tilts[v][center_dot]);
        report.cross_view = tilt_spatial_correlation(per_view);
    }

    if (cfg.has("events") && cfg.has("clean")) {
        const EventStream observed = read_events(fs::path(cfg.get_string("events")));
        const FrameSequence clean = read_frames(cfg.get_string("clean"));
        EventSimConfig base;
        base.refractory_us = cfg.get_u64("refractory_us", 5000);
        base.log_eps = cfg.get_double("log_eps", 1e-3);
        const auto estimate = estimate_contrast_threshold(
            observed, clean, cfg.get_double("c_min", 0.1), cfg.get_double("c_max", 0.7),
            static_cast<int>(cfg.get_int("c_grid", 13)), base);
        report.contrast_estimate = estimate.c;
    }

    write_stats_report(report, out_dir);
    std::cout << "stats report (" << n_views << " views) -> " << out_dir.string() << "\n";
    return 0;
}

// ------------------------------------------------------------- recon / eval

std::vector<fs::path> clip_event_files(const KeyValueConfig& cfg) {
    std::vector<fs::path> files;
    if (cfg.has("events")) {
        std::string list = cfg.get_string("events");
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream in(list);
        std::string item;
        while (in >> item) files.emplace_back(item);
    } else {
        const fs::path clip = cfg.get_string("input");
        for (const auto& entry : fs::directory_iterator(clip))
            if (entry.is_directory() && entry.path().filename().string().starts_with("view_"))
                files.push_back(entry.path() / "events.evlf");
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw DataError("no event streams for reconstruction");
    return files;
}

int cmd_recon(const KeyValueConfig& cfg) {
    const auto event_files = clip_event_files(cfg);
    const fs::path out_dir = cfg.get_string("output");
    const int n_views = static_cast<int>(event_files.size());
    const int center = n_views / 2;

    std::vector<EventStream> streams;
    streams.reserve(event_files.size());
    for (const auto& p : event_files) streams.push_back(read_events(p));

    std::vector<Homography> to_center(n_views, Homography::identity());
    const std::string homographies = cfg.get_string("homographies", "identity");
    if (homographies != "identity") {
        for (int v = 0; v < n_views; ++v) {
            char name[32];
            std::snprintf(name, sizeof(name), "h_view_%02d.txt", v);
            const fs::path file = fs::path(homographies) / name;
            if (!fs::exists(file))
                throw DataError("missing homography for fusion: " + file.string());
            to_center[v] = read_homography(file);
        }
    }

    ReconConfig recon;
    recon.contrast = cfg.get_double("recon_contrast", 0.3);
    recon.leak_rate = cfg.get_double("leak_rate", 0.0);
    recon.fusion = fusion_from_name(cfg.get_string("fusion", "median"));
    recon.trim = static_cast<int>(cfg.get_int("trim", 1));

    std::uint64_t duration = 0;
    for (const auto& s : streams) duration = std::max(duration, s.duration);
    recon.timestamps = timestamps_from_fps(duration, cfg.get_double("out_fps", 120.0));

    // The center view pins the display range for every view so fused and
    // single-view outputs are directly comparable.
    FrameSequence center_recon = integrate_events(streams[center], recon);
    {
        ReconConfig probe = recon;
        probe.normalize = true;
        const auto raw = integrate_events_raw(streams[center], probe);
        std::vector<double> pool;
        const std::uint64_t cutoff = recon.timestamps.front() + 1'000'000;
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (k > 0 && recon.timestamps[k] > cutoff) break;
            pool.insert(pool.end(), raw[k].begin(), raw[k].end());
        }
        std::sort(pool.begin(), pool.end());
        const auto pick = [&](double pct) {
            const std::size_t idx = static_cast<std::size_t>(
                std::clamp(std::floor(pct / 100.0 * static_cast<double>(pool.size() - 1)), 0.0,
                           static_cast<double>(pool.size() - 1)));
            return pool[idx];
        };
        recon.has_fixed_range = true;
        recon.range_lo = pick(recon.norm_lo_pct);
        recon.range_hi = pick(recon.norm_hi_pct);
    }

    std::vector<FrameSequence> view_recons(n_views);
    for (int v = 0; v < n_views; ++v) view_recons[v] = integrate_events(streams[v], recon);
    const FrameSequence fused = fuse_views(view_recons, to_center, recon.fusion, recon.trim);

    write_frames(view_recons[center], out_dir / "recon_center");
    write_frames(fused, out_dir / "recon_fused");

    fs::path truth_dir;
    if (cfg.has("truth")) {
        truth_dir = cfg.get_string("truth");
    } else if (cfg.has("input") && fs::exists(fs::path(cfg.get_string("input")) / "clean")) {
        truth_dir = fs::path(cfg.get_string("input")) / "clean";
    }
    if (truth_dir.empty() || !fs::exists(truth_dir)) {
        std::cout << "warning: no ground truth available, skipping evaluation\n";
        return 0;
    }

    const FrameSequence truth = read_frames(truth_dir);
    const MetricsReport center_metrics = evaluate_clip(view_recons[center], truth);
    const MetricsReport fused_metrics = evaluate_clip(fused, truth);
    write_metrics_csv(center_metrics, out_dir / "metrics_center.csv");
    write_metrics_csv(fused_metrics, out_dir / "metrics_fused.csv");
    std::cout << "center view: PSNR " << center_metrics.mean_psnr << " dB, SSIM "
              << center_metrics.mean_ssim << "\n";
    std::cout << "light field: PSNR " << fused_metrics.mean_psnr << " dB, SSIM "
              << fused_metrics.mean_ssim << " (delta "
              << fused_metrics.mean_psnr - center_metrics.mean_psnr << " dB)\n";
    return 0;
}

int cmd_eval(const KeyValueConfig& cfg) {
    const FrameSequence recon = read_frames(cfg.get_string("recon"));
    const FrameSequence truth = read_frames(cfg.get_string("truth"));
    const MetricsReport metrics = evaluate_clip(recon, truth);
    const fs::path out = cfg.get_string("output", "metrics.csv");
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_metrics_csv(metrics, out);
    std::cout << "PSNR " << metrics.mean_psnr << " dB, SSIM " << metrics.mean_ssim << " over "
              << metrics.timestamps.size() << " frames -> " << out.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- slice

int cmd_slice(const KeyValueConfig& cfg) {
    const FrameSequence frames = read_frames(cfg.get_string("input"));
    std::vector<Vec2> path;
    if (cfg.has("points")) {
        std::ifstream in(cfg.get_string("points"));
        if (!in) throw DataError("cannot open points file");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream f(line);
            Vec2 p;
            if (!(f >> p.x >> p.y)) throw FormatError("bad point line: " + line);
            path.push_back(p);
        }
    } else {
        path = row_path(frames.frames.at(0).width, cfg.get_double("row"));
    }
    const fs::path out_path = cfg.get_string("output");
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write " + out_path.string());
    export_xt_slice(frames, path, out);
    std::cout << frames.frames.size() << " rows -> " << out_path.string() << "\n";
    return 0;
}

// ----------------------------------------------------------------- dispatch

void add_keys(CLI::App* cmd, KeyValueConfig& overrides,
              std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        cmd->add_option_function<std::string>(
            "--" + std::string(key),
            [&overrides, key = std::string(key)](const std::string& v) {
                overrides.set(key, v);
            });
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"event-based light-field turbulence toolkit"};
    app.require_subcommand(1);

    struct Command {
        CLI::App* sub = nullptr;
        std::string config_path;
        KeyValueConfig overrides;
        int (*handler)(const KeyValueConfig&) = nullptr;
    };
    std::vector<Command> commands(7);

    const auto setup = [&](Command& c, const char* name, const char* help,
                           int (*handler)(const KeyValueConfig&),
                           std::initializer_list<const char*> keys) {
        c.sub = app.add_subcommand(name, help);
        c.handler = handler;
        c.sub->add_option("--config", c.config_path, "key = value config file");
        add_keys(c.sub, c.overrides, {"threads"});
        add_keys(c.sub, c.overrides, keys);
    };

    setup(commands[0], "simulate", "generate a turbulent light-field event dataset",
          cmd_simulate,
          {"input", "output", "synthetic", "clips", "frames", "fps", "size", "working_size",
           "views", "seed", "strength", "tilt_std", "coherence_length", "blur_sigma_min",
           "blur_sigma_max", "scint_log_std", "ar_coeff", "grid_res", "sample_contrast",
           "contrast", "contrast_min", "contrast_max", "refractory_us", "log_eps",
           "split_train", "split_val", "split_test", "keep_frames", "dump_fields",
           "bit_depth"});
    setup(commands[1], "events", "convert a frame sequence to an event stream", cmd_events,
          {"input", "output", "contrast", "refractory_us", "log_eps"});
    setup(commands[2], "encode", "encode event streams into multi-view voxel grids",
          cmd_encode, {"input", "events", "output", "bins", "t0", "t1", "window_us"});
    setup(commands[3], "stats", "turbulence characterization from dot-grid recordings",
          cmd_stats,
          {"recording", "reference", "output", "dot_rows", "dot_cols", "dot_margin",
           "dot_sigma", "dot_roi", "max_lag", "events", "clean", "c_min", "c_max", "c_grid",
           "refractory_us", "log_eps"});
    setup(commands[4], "recon", "reconstruct video per view and fuse across views", cmd_recon,
          {"input", "events", "output", "recon_contrast", "leak_rate", "fusion", "trim",
           "out_fps", "homographies", "truth"});
    setup(commands[5], "eval", "PSNR/SSIM of a reconstruction against ground truth", cmd_eval,
          {"recon", "truth", "output"});
    setup(commands[6], "slice", "export an x-t slice CSV from a frame sequence", cmd_slice,
          {"input", "output", "row", "points"});

    try {
        std::vector<std::string> argv_like(args.rbegin(), args.rend());
        app.parse(argv_like);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (Command& c : commands) {
            if (!c.sub->parsed()) continue;
            KeyValueConfig cfg;
            if (!c.config_path.empty()) cfg = KeyValueConfig::load(c.config_path);
            cfg.merge(c.overrides);
            set_worker_count(static_cast<int>(cfg.get_int("threads", 0)));
            return c.handler(cfg);
        }
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace evlf
