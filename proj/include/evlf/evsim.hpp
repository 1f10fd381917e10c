#pragma once

#include <cstdint>
#include <vector>

#include "evlf/core.hpp"

namespace evlf {

/// Log-intensity threshold event model with refractory suppression.
struct EventSimConfig {
    double contrast = 0.3;            // log-intensity threshold C, > 0
    std::uint64_t refractory_us = 5000;  // per-pixel dead time after an emitted event
    double log_eps = 1e-3;            // intensity floor before the log

    void validate() const;  // throws ConfigError
};

/// Converts frames to events. Per pixel, log intensity is interpolated
/// linearly between frames; every crossing of the latched level +/- C emits
/// an event at the crossing time (polarity = sign of the change) and moves
/// the latch to the crossed level. Crossings inside the refractory window of
/// the pixel's previous emitted event are dropped, but the latch still
/// updates. Output is sorted by (t, y, x, p).
EventStream frames_to_events(const FrameSequence& frames, const EventSimConfig& config);

/// Applies frames_to_events independently per view with per-view configs.
std::vector<EventStream> simulate_lightfield_events(const std::vector<FrameSequence>& views,
                                                    const std::vector<EventSimConfig>& configs);

/// Shared-config overload.
std::vector<EventStream> simulate_lightfield_events(const std::vector<FrameSequence>& views,
                                                    const EventSimConfig& config);

/// Deterministic per-view contrast draws, uniform in [lo, hi], from the
/// (seed, view) substream.
std::vector<double> sample_view_contrasts(int n_views, double lo, double hi,
                                          std::uint64_t seed);

}  // namespace evlf
