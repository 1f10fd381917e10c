#pragma once

#include <span>
#include <vector>

#include "evlf/core.hpp"

namespace evlf {

/// Bilinear temporal splatting: each event with t in [t0, t1) lands at
/// normalized bin coordinate t* = (B-1)(t-t0)/(t1-t0) and contributes
/// p*(1-|t*-b|) to the two adjacent bins (partition of unity, so the summed
/// contribution of one event is exactly its polarity).
VoxelGrid encode_voxel_grid(const EventStream& stream, std::uint64_t t0, std::uint64_t t1,
                            int bins);

/// Stacks per-view grids along the channel axis; channel c = view*B + bin.
/// `order[i]` names the grid placed in view slot i (row-major over the
/// sub-aperture layout); empty order means identity.
MultiViewVoxelGrid stack_views(std::span<const VoxelGrid> grids, std::span<const int> order = {});

std::vector<VoxelGrid> unstack_views(const MultiViewVoxelGrid& grid);

/// Mean event rate in events / pixel / second over the stream duration.
double event_rate(const EventStream& stream);

}  // namespace evlf
