#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/lfgeom.hpp"

namespace evlf {

/// Dot grid rendered for turbulence characterization (the measurement
/// target): rows x cols Gaussian dots on a uniform background.
struct DotGridSpec {
    int rows = 3;
    int cols = 3;
    double margin_frac = 0.25;   // first/last dot position as a fraction of the image
    double dot_sigma = 2.0;      // pixels
    double amplitude = 0.8;
    double background = 0.05;
};

/// Row-major dot centers for the given image size.
std::vector<Vec2> dot_grid_centers(const DotGridSpec& spec, int width, int height);

Frame render_dot_grid(const DotGridSpec& spec, int width, int height);

/// Same grid with every dot displaced by (dx, dy).
Frame render_dot_grid_shifted(const DotGridSpec& spec, int width, int height, double dx,
                              double dy);

enum class SceneKind { dot_grid, drifting_grating, bouncing_blobs, moving_bar };

SceneKind scene_from_name(const std::string& name);

/// Deterministic synthetic clip: `frames` frames at `fps`, content derived
/// from (seed, clip) only.
FrameSequence make_clip(SceneKind kind, int width, int height, int frames, double fps,
                        std::uint64_t seed, std::uint64_t clip_index = 0);

/// Bilinear resampling to a new size (used for the working-resolution
/// resize of input clips).
Frame resize_bilinear(const Frame& frame, int width, int height);

Frame center_crop(const Frame& frame, int width, int height);

}  // namespace evlf
