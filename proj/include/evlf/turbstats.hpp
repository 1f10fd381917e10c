#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/evsim.hpp"
#include "evlf/lfgeom.hpp"

namespace evlf {

/// Parameters of I(x,y) = A exp(-(x-cx)^2/2sx^2 - (y-cy)^2/2sy^2) + B fitted
/// to a dot patch. Centroids are in patch coordinates, sub-pixel.
struct GaussianFit {
    double amplitude = 0.0;
    double offset = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double rms_residual = 0.0;
    int iterations = 0;
};

double gaussian2d_value(const GaussianFit& p, double x, double y);

/// Analytic Jacobian row of the model at (x, y) in parameter order
/// (A, B, cx, cy, sigma_x, sigma_y). Exposed for the finite-difference check.
void gaussian2d_jacobian(const GaussianFit& p, double x, double y, double out[6]);

/// Initial guess from background-subtracted moments. Throws NumericError for
/// patches with no usable contrast.
GaussianFit moment_init(const Frame& patch);

/// Levenberg-Marquardt least squares over all six parameters. Converges when
/// the relative cost change drops below 1e-10 (or at 200 iterations); throws
/// NumericError on divergence or sigma collapse below 0.1 px.
GaussianFit fit_gaussian2d(const Frame& patch, const GaussianFit& init);

/// Centroid deviation from the no-turbulence reference, in pixels.
struct TiltVector {
    double x = 0.0;
    double y = 0.0;
};

/// Per-dot Gaussian fits over one recording, plus the reference fits the
/// tilts are measured against. Dots are indexed in row-alternating (snake)
/// order over the dot grid.
struct DotTrack {
    std::vector<Vec2> ref_centers;               // frame coordinates, per dot
    std::vector<GaussianFit> reference;          // per dot
    std::vector<std::vector<GaussianFit>> fits;  // [frame][dot], frame coordinates
};

/// Row-alternating (snake) ordering of a rows x cols dot grid given its
/// row-major centers.
std::vector<Vec2> snake_order(std::span<const Vec2> row_major_centers, int rows, int cols);

/// Fits every dot in every frame around the reference centers. roi_half is
/// the half-width of the square fitting window.
DotTrack track_dots(const FrameSequence& recording, std::span<const Vec2> ref_centers,
                    int roi_half);

/// Reference fits from a turbulence-free recording (fits on the temporal
/// mean frame around the nominal centers).
std::vector<GaussianFit> fit_reference(const FrameSequence& clean,
                                       std::span<const Vec2> nominal_centers, int roi_half);

/// tilt[dot][frame] = fitted centroid - reference centroid.
std::vector<std::vector<TiltVector>> tilt_series(const DotTrack& track);

/// Two-axis averaged, mean-removed autocorrelation:
///   C(tau) = 1/2 [ <ax(t)ax(t+tau)>/<ax^2> + <ay(t)ay(t+tau)>/<ay^2> ]
/// C(0) == 1 exactly; values clamped to [-1, 1].
std::vector<double> tilt_autocorrelation(std::span<const TiltVector> series, int max_lag);

struct CorrMatrix {
    int n = 0;
    std::vector<double> values;  // n*n, symmetric, unit diagonal

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
};

/// Pairwise vector correlation <ai . aj> / sqrt(<|ai|^2><|aj|^2>) over
/// mean-removed series; serves both within-view (units = dots) and
/// cross-view (units = views, fixed dot).
CorrMatrix tilt_spatial_correlation(const std::vector<std::vector<TiltVector>>& series_per_unit);

double mean_spread(const GaussianFit& fit);  // (sigma_x + sigma_y) / 2

/// Per-frame mean isotropic spread over all dots.
std::vector<double> blur_series(const DotTrack& track);

/// Scintillation index <I^2>/<I>^2 - 1 via a single-pass Welford
/// accumulator. Throws NumericError on zero mean.
double scintillation_index(std::span<const double> intensity);

struct ContrastEstimate {
    double c = 0.0;              // interpolated estimate
    double bracket_lo = 0.0;     // grid neighbors whose rates bracket the observation
    double bracket_hi = 0.0;
    double observed_rate = 0.0;  // events / pixel / second
    std::vector<double> grid_c;      // evaluated thresholds
    std::vector<double> grid_rates;  // simulated rate per threshold
};

/// Event-rate matching: simulates the clean frames over a threshold grid in
/// [c_min, c_max] and inverts the (non-increasing) rate curve at the
/// observed rate by linear interpolation. Throws DataError when the observed
/// rate falls outside the simulated range; ConfigError for a degenerate
/// (< 2 point) grid.
ContrastEstimate estimate_contrast_threshold(const EventStream& observed,
                                             const FrameSequence& clean_frames, double c_min,
                                             double c_max, int grid_points,
                                             const EventSimConfig& base_config);

/// Full characterization report (the CLI writes one per recording set).
struct StatsReport {
    std::vector<double> autocorrelation;  // center dot, center view
    CorrMatrix within_view;               // over dots, center view
    CorrMatrix cross_view;                // over views, center dot
    std::vector<double> blur;             // per frame, center view
    double blur_reference = 0.0;          // mean spread of the reference fits
    std::vector<double> scintillation;    // per view
    double contrast_estimate = -1.0;      // < 0 when not estimated
};

void write_stats_report(const StatsReport& report, const std::filesystem::path& directory);

}  // namespace evlf
