#include "evlf/evsim.hpp"

#include <algorithm>
#include <cmath>

#include "evlf/parallel.hpp"
#include "evlf/rng.hpp"
#include "kernels_detail.hpp"

namespace evlf {

void EventSimConfig::validate() const {
    if (!(contrast > 0)) throw ConfigError("contrast threshold must be > 0");
    if (!(log_eps > 0)) throw ConfigError("log_eps must be > 0");
}

namespace detail {

void pixel_events(const FrameSequence& frames, const EventSimConfig& config, int x, int y,
                  std::vector<Event>& out) {
    const double threshold = config.contrast;
    const double refractory = static_cast<double>(config.refractory_us);
    const auto log_of = [&](double v) { return std::log(std::max(v, config.log_eps)); };

    // Level latching: the latch moves to each crossed level; refractory
    // suppression drops the event but still advances the latch. Suppression
    // is decided on continuous crossing times; stored timestamps are rounded
    // to the nearest microsecond.
    double latch = log_of(frames.frames[0].at(x, y));
    double prev_level = latch;
    double last_emit = 0.0;
    bool has_emitted = false;

    for (std::size_t k = 1; k < frames.frames.size(); ++k) {
        const double t_a = static_cast<double>(frames.timestamps[k - 1]);
        const double t_b = static_cast<double>(frames.timestamps[k]);
        const double level_a = prev_level;
        const double level_b = log_of(frames.frames[k].at(x, y));
        if (level_b != level_a) {
            const double dir = level_b > level_a ? 1.0 : -1.0;
            while ((level_b - latch) * dir >= threshold) {
                const double crossed = latch + dir * threshold;
                const double t_cross =
                    t_a + (crossed - level_a) / (level_b - level_a) * (t_b - t_a);
                if (!has_emitted || t_cross - last_emit >= refractory) {
                    Event e;
                    e.x = static_cast<std::uint16_t>(x);
                    e.y = static_cast<std::uint16_t>(y);
                    e.t = static_cast<std::uint64_t>(std::llround(t_cross));
                    e.p = dir > 0 ? 1 : -1;
                    out.push_back(e);
                    last_emit = t_cross;
                    has_emitted = true;
                }
                latch = crossed;
            }
        }
        prev_level = level_b;
    }
}

}  // namespace detail

EventStream frames_to_events(const FrameSequence& frames, const EventSimConfig& config) {
    config.validate();
    frames.validate();
    if (frames.frames.size() < 2) throw DataError("event simulation needs at least two frames");

    const int width = frames.frames[0].width;
    const int height = frames.frames[0].height;

    // Pixels are independent; collect per row and merge in fixed row order so
    // the result does not depend on the worker count.
    std::vector<std::vector<Event>> rows(height);
    parallel_for_index(height, [&](int y) {
        for (int x = 0; x < width; ++x) detail::pixel_events(frames, config, x, y, rows[y]);
    });

    EventStream stream;
    stream.width = static_cast<std::uint16_t>(width);
    stream.height = static_cast<std::uint16_t>(height);
    stream.duration = frames.timestamps.back();
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    stream.events.reserve(total);
    for (const auto& r : rows) stream.events.insert(stream.events.end(), r.begin(), r.end());
    std::stable_sort(stream.events.begin(), stream.events.end(), event_order_less);
    return stream;
}

std::vector<EventStream> simulate_lightfield_events(const std::vector<FrameSequence>& views,
                                                    const std::vector<EventSimConfig>& configs) {
    if (views.empty()) throw DataError("empty view list");
    if (configs.size() != views.size())
        throw ConfigError("need one event-sim config per view");
    std::vector<EventStream> streams(views.size());
    parallel_for_index(static_cast<int>(views.size()),
                       [&](int i) { streams[i] = frames_to_events(views[i], configs[i]); });
    return streams;
}

std::vector<EventStream> simulate_lightfield_events(const std::vector<FrameSequence>& views,
                                                    const EventSimConfig& config) {
    return simulate_lightfield_events(views,
                                      std::vector<EventSimConfig>(views.size(), config));
}

std::vector<double> sample_view_contrasts(int n_views, double lo, double hi,
                                          std::uint64_t seed) {
    if (n_views < 1) throw ConfigError("need at least one view");
    if (!(lo > 0) || hi < lo) throw ConfigError("contrast range must satisfy 0 < lo <= hi");
    std::vector<double> out(n_views);
    for (int i = 0; i < n_views; ++i) {
        Rng rng(derive_seed(seed, kStreamContrast, static_cast<std::uint64_t>(i)));
        out[i] = rng.uniform(lo, hi);
    }
    return out;
}

}  // namespace evlf
