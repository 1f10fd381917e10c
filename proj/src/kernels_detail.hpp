#pragma once

#include <cstdint>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/evsim.hpp"
#include "evlf/recon.hpp"
#include "evlf/turbsim.hpp"

// Per-element kernel bodies shared by the OpenMP drivers and the serial
// reference drivers, so the two differ only in scheduling.
namespace evlf::detail {

// voxel.cpp
void splat_event(const Event& e, std::uint64_t t0, std::uint64_t t1, int bins, int width,
                 int height, double* values);

// turbsim.cpp
void upsample_field_row(const double* coarse, int res, int width, int height, int y,
                        double* out_row);
void warp_tilt_row(const Frame& src, const SensorFields& fields, int y, double* out_row);
std::vector<double> gaussian_kernel(double sigma);
void blur_h_row(const Frame& src, const std::vector<double>& kernel, int y, double* out_row);
void blur_v_row(const Frame& src, const std::vector<double>& kernel, int y, double* out_row);
std::vector<double> blur_level_sigmas(const TurbulenceParams& params);
void blend_gain_row(const std::vector<Frame>& levels, const std::vector<double>& sigmas,
                    const SensorFields& fields, int y, Frame& out);

// evsim.cpp: full crossing scan of one pixel's trajectory.
void pixel_events(const FrameSequence& frames, const EventSimConfig& config, int x, int y,
                  std::vector<Event>& out);

// recon.cpp: integrates one pixel across one output interval.
struct IntegratorState {
    double level = 0.0;
    double last_t_us = 0.0;
};
void integrate_pixel_interval(const Event* events, std::size_t begin, std::size_t end,
                              double t_sample_us, double contrast, double leak_rate,
                              double mean_level, IntegratorState& state);
double fuse_values(double* values, int n, FusionMode mode, int trim);

}  // namespace evlf::detail
