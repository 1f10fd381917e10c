#pragma once

#include <span>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/evsim.hpp"
#include "evlf/recon.hpp"
#include "evlf/turbsim.hpp"

// Serial reference implementations of the parallel kernels. Same per-element
// arithmetic, plain loops, no scheduling; the test suite asserts bitwise
// equality against the OpenMP versions and the benchmark compares timings.
namespace evlf::ref {

Frame apply_turbulence(const Frame& frame, const SensorFields& fields,
                       const TurbulenceParams& params);

VoxelGrid encode_voxel_grid(const EventStream& stream, std::uint64_t t0, std::uint64_t t1,
                            int bins);

EventStream frames_to_events(const FrameSequence& frames, const EventSimConfig& config);

std::vector<std::vector<double>> integrate_events_raw(const EventStream& stream,
                                                      const ReconConfig& config);

FrameSequence fuse_views(std::span<const FrameSequence> views,
                         std::span<const Homography> to_center, FusionMode mode, int trim = 1);

Frame gaussian_blur(const Frame& frame, double sigma);

}  // namespace evlf::ref
