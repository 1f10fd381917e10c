// Timing comparison between the OpenMP kernels and their serial reference
// implementations. Build target only; not part of the test suite.

#include <chrono>
#include <cstdio>
#include <functional>

#include "evlf/evsim.hpp"
#include "evlf/parallel.hpp"
#include "evlf/recon.hpp"
#include "evlf/ref.hpp"
#include "evlf/rng.hpp"
#include "evlf/synth.hpp"
#include "evlf/turbsim.hpp"
#include "evlf/voxel.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
    fn();  // warm up
    const auto start = Clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    const auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-24s serial %8.2f ms   openmp %8.2f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    using namespace evlf;
    std::printf("workers: %d\n", worker_count());

    const int size = 256;
    const FrameSequence clip =
        make_clip(SceneKind::bouncing_blobs, size, size, 48, 120.0, 7);

    TurbulenceParams params = turbulence_preset(TurbulenceStrength::strong, 7);
    Rng rng(derive_seed(7, kStreamTurbulence, 0, 0));
    const LatentGrid latent = LatentGrid::draw(params.effective_grid_res(size), rng);
    const SensorFields fields = upsample_fields(realize_fields(params, latent), size, size);

    report("apply_turbulence",
           time_ms([&] { ref::apply_turbulence(clip.frames[0], fields, params); }, 5),
           time_ms([&] { apply_turbulence(clip.frames[0], fields, params); }, 5));

    report("gaussian_blur(2.0)", time_ms([&] { ref::gaussian_blur(clip.frames[0], 2.0); }, 10),
           time_ms([&] { gaussian_blur(clip.frames[0], 2.0); }, 10));

    EventSimConfig ev;
    ev.contrast = 0.2;
    report("frames_to_events", time_ms([&] { ref::frames_to_events(clip, ev); }, 3),
           time_ms([&] { frames_to_events(clip, ev); }, 3));

    const EventStream stream = frames_to_events(clip, ev);
    std::printf("  (stream: %zu events)\n", stream.events.size());

    report("encode_voxel_grid",
           time_ms([&] { ref::encode_voxel_grid(stream, 0, stream.duration, 5); }, 10),
           time_ms([&] { encode_voxel_grid(stream, 0, stream.duration, 5); }, 10));

    ReconConfig recon;
    recon.contrast = ev.contrast;
    recon.timestamps = clip.timestamps;
    report("integrate_events", time_ms([&] { ref::integrate_events_raw(stream, recon); }, 5),
           time_ms([&] { integrate_events_raw(stream, recon); }, 5));

    std::vector<FrameSequence> views(9, clip);
    std::vector<Homography> identity(9, Homography::identity());
    report("fuse_views(median)",
           time_ms([&] { ref::fuse_views(views, identity, FusionMode::median); }, 3),
           time_ms([&] { fuse_views(views, identity, FusionMode::median); }, 3));

    return 0;
}
