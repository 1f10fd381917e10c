#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/rng.hpp"

namespace evlf {

/// Parametric anisoplanatic turbulence model: per-frame correlated tilt,
/// blur and scintillation fields applied as warp -> spatially varying
/// Gaussian blur -> multiplicative gain.
struct TurbulenceParams {
    double tilt_std = 1.0;          // pixels, per-axis std of the tilt field
    double coherence_length = 0.0;  // pixels; > 0 derives the coarse grid, 0 uses grid_res
    double blur_sigma_min = 0.3;    // pixels
    double blur_sigma_max = 1.5;    // pixels
    double scint_log_std = 0.0;     // std of the log-gain field; 0 disables scintillation
    double ar_coeff = 0.8;          // temporal correlation coefficient, in [0, 1)
    int grid_res = 4;               // coarse field resolution, points per axis (>= 2)
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError

    /// Coarse grid resolution actually used for a given sensor width:
    /// derived from coherence_length when set so that node spacing matches,
    /// otherwise grid_res. Node spacing is (width-1)/(res-1) pixels.
    int effective_grid_res(int sensor_width) const;
};

// Latent AR(1) state: res x res nodes x 4 channels (tilt x, tilt y, blur,
// gain), each channel marginally standard normal. One chain drives all
// three realized fields.
struct LatentGrid {
    int res = 0;
    std::vector<double> values;  // res*res*4, node-major

    static LatentGrid draw(int res, Rng& rng);
};

/// One AR(1) step: alpha * state + sqrt(1 - alpha^2) * fresh noise.
/// Preserves the unit marginal variance for any alpha in [0, 1).
LatentGrid advance_state(const LatentGrid& state, double alpha, Rng& rng);

/// Coarse realized fields for one frame, all at grid resolution.
struct FieldFrame {
    int res = 0;
    std::vector<double> tilt_x;    // pixels
    std::vector<double> tilt_y;    // pixels
    std::vector<double> blur_sigma;  // pixels, inside [blur_sigma_min, blur_sigma_max]
    std::vector<double> log_gain;  // mean gain is 1 by construction
};

/// Maps the latent grid through the fixed transforms:
///   tilt     = tilt_std * latent
///   blur     = sigma_min + (sigma_max - sigma_min) * Phi(latent)
///   log gain = s * latent - s^2/2
FieldFrame realize_fields(const TurbulenceParams& params, const LatentGrid& state);

/// Fields bilinearly upsampled to sensor resolution (gain exponentiated
/// after upsampling the log field).
struct SensorFields {
    int width = 0;
    int height = 0;
    std::vector<double> tilt_x, tilt_y, blur_sigma, gain;
};

SensorFields upsample_fields(const FieldFrame& coarse, int width, int height);

// Number of precomputed blur levels blended per pixel.
inline constexpr int kBlurLevels = 5;

/// Separable Gaussian blur, replicate edges, kernel truncated at 3 sigma.
Frame gaussian_blur(const Frame& frame, double sigma);

/// Warp by the tilt field (backward sampling, clamp-to-edge), blend
/// precomputed Gaussian blur levels by per-pixel sigma, multiply by gain,
/// clamp to [0, 1]. Tilt is the apparent displacement of image content.
Frame apply_turbulence(const Frame& frame, const SensorFields& fields,
                       const TurbulenceParams& params);

/// Degrades one view: deterministic function of (params.seed, view_index).
/// Latent noise for frame k comes from substream (seed, view, k), so views
/// can be generated independently and in parallel.
FrameSequence simulate_view(const FrameSequence& clean, const TurbulenceParams& params,
                            int view_index);

/// N independent realizations of the same clean sequence (one per view).
std::vector<FrameSequence> simulate_lightfield(const FrameSequence& clean,
                                               const TurbulenceParams& params, int n_views);

// --- presets and optics scaling -------------------------------------------

enum class TurbulenceStrength { weak, medium, strong };

/// Approximate strength presets for a 256 px working resolution.
TurbulenceParams turbulence_preset(TurbulenceStrength strength, std::uint64_t seed);

/// Per-clip strength draw with weights 0.1 weak / 0.3 medium / 0.6 strong.
TurbulenceStrength sample_strength(std::uint64_t seed, std::uint64_t clip_index);

TurbulenceStrength strength_from_name(const std::string& name);
std::string strength_name(TurbulenceStrength s);

/// Imaging geometry used to convert angular turbulence scales to pixels.
struct OpticsGeometry {
    double focal_length_m = 0.8;
    double scene_width_m = 1.0;
    double distance_m = 10.0;
    int sensor_width_px = 256;
};

/// Pixel pitch implied by the geometry: the scene width focused at distance
/// D spans f*W/D meters on the sensor across sensor_width_px pixels.
double pixel_pitch_m(const OpticsGeometry& geometry);

/// Angular displacement (radians) to sensor pixels: angle * f / pitch.
double angle_to_pixels(double angle_rad, const OpticsGeometry& geometry);

/// Converts angular tilt/blur scales into a pixel-domain parameter set.
TurbulenceParams scaled_params(const OpticsGeometry& geometry, double tilt_rms_rad,
                               double blur_min_rad, double blur_max_rad,
                               const TurbulenceParams& base);

/// Optional inspection dump: per-frame coarse fields as raw little-endian
/// f64 arrays plus a small text descriptor.
void dump_fields(const FieldFrame& fields, const std::filesystem::path& directory,
                 int frame_index);

}  // namespace evlf
