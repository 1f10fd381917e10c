#include "evlf/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evlf/parallel.hpp"
#include "kernels_detail.hpp"

namespace evlf {
namespace detail {

// Splats one event into the two temporally adjacent bins. The second weight
// is computed as 1 - w0 so the per-event bin mass is exactly the polarity.
void splat_event(const Event& e, std::uint64_t t0, std::uint64_t t1, int bins, int width,
                 int height, double* values) {
    double tstar = bins == 1 ? 0.0
                             : (bins - 1) * (static_cast<double>(e.t - t0) /
                                             static_cast<double>(t1 - t0));
    tstar = std::clamp(tstar, 0.0, static_cast<double>(bins - 1));
    int b0 = static_cast<int>(tstar);
    if (b0 > bins - 2) b0 = bins - 2;
    if (b0 < 0) b0 = 0;
    const double frac = tstar - b0;
    const double w0 = 1.0 - frac;
    const double w1 = 1.0 - w0;
    const std::size_t cell = static_cast<std::size_t>(e.y) * width + e.x;
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    values[static_cast<std::size_t>(b0) * plane + cell] += e.p * w0;
    if (b0 + 1 < bins) values[static_cast<std::size_t>(b0 + 1) * plane + cell] += e.p * w1;
}

}  // namespace detail

VoxelGrid encode_voxel_grid(const EventStream& stream, std::uint64_t t0, std::uint64_t t1,
                            int bins) {
    if (t1 <= t0) throw ConfigError("voxel window must satisfy t_end > t_start");
    if (bins < 1) throw ConfigError("voxel grid needs at least one bin");
    if (stream.width == 0 || stream.height == 0) throw DataError("empty sensor geometry");

    VoxelGrid grid(bins, stream.height, stream.width, t0, t1);

    // Select in-window events, then bucket them by row (stable), so each row
    // accumulates its cells in original event order no matter how many
    // threads run. Cells are only ever touched by their own row's bucket.
    std::vector<const Event*> in_window;
    in_window.reserve(stream.events.size());
    for (const Event& e : stream.events)
        if (e.t >= t0 && e.t < t1) in_window.push_back(&e);

    const int height = stream.height;
    std::vector<std::size_t> row_count(static_cast<std::size_t>(height) + 1, 0);
    for (const Event* e : in_window) ++row_count[e->y + 1];
    std::partial_sum(row_count.begin(), row_count.end(), row_count.begin());
    std::vector<const Event*> by_row(in_window.size());
    {
        std::vector<std::size_t> cursor(row_count.begin(), row_count.end() - 1);
        for (const Event* e : in_window) by_row[cursor[e->y]++] = e;
    }

    parallel_for_index(height, [&](int y) {
        for (std::size_t i = row_count[y]; i < row_count[y + 1]; ++i)
            detail::splat_event(*by_row[i], t0, t1, bins, grid.width, grid.height,
                                grid.values.data());
    });
    return grid;
}

MultiViewVoxelGrid stack_views(std::span<const VoxelGrid> grids, std::span<const int> order) {
    if (grids.empty()) throw DataError("stack_views needs at least one grid");
    const VoxelGrid& first = grids.front();
    for (const VoxelGrid& g : grids) {
        if (g.bins != first.bins || g.height != first.height || g.width != first.width)
            throw DataError("stack_views: grid shape mismatch");
        if (g.t_start != first.t_start || g.t_end != first.t_end)
            throw DataError("stack_views: grid window mismatch");
    }
    if (!order.empty() && order.size() != grids.size())
        throw DataError("stack_views: order length mismatch");

    MultiViewVoxelGrid out;
    out.views = static_cast<int>(grids.size());
    out.bins = first.bins;
    out.height = first.height;
    out.width = first.width;
    out.t_start = first.t_start;
    out.t_end = first.t_end;
    out.values.resize(grids.size() * first.values.size());

    const std::size_t block = first.values.size();
    for (std::size_t slot = 0; slot < grids.size(); ++slot) {
        const std::size_t src = order.empty() ? slot : static_cast<std::size_t>(order[slot]);
        if (src >= grids.size()) throw DataError("stack_views: order index out of range");
        std::copy(grids[src].values.begin(), grids[src].values.end(),
                  out.values.begin() + static_cast<std::ptrdiff_t>(slot * block));
    }
    return out;
}

std::vector<VoxelGrid> unstack_views(const MultiViewVoxelGrid& grid) {
    std::vector<VoxelGrid> out;
    const std::size_t block = static_cast<std::size_t>(grid.bins) * grid.height * grid.width;
    for (int v = 0; v < grid.views; ++v) {
        VoxelGrid g(grid.bins, grid.height, grid.width, grid.t_start, grid.t_end);
        std::copy_n(grid.values.begin() + static_cast<std::ptrdiff_t>(v * block), block,
                    g.values.begin());
        out.push_back(std::move(g));
    }
    return out;
}

double event_rate(const EventStream& stream) {
    if (stream.duration == 0) throw DataError("event rate needs a nonzero duration");
    if (stream.width == 0 || stream.height == 0) throw DataError("empty sensor geometry");
    const double seconds = static_cast<double>(stream.duration) * 1e-6;
    const double pixels = static_cast<double>(stream.width) * stream.height;
    return static_cast<double>(stream.events.size()) / (pixels * seconds);
}

}  // namespace evlf
