#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evlf {

// Error taxonomy. The CLI maps these onto exit codes: ConfigError -> 2,
// DataError (and subtypes) -> 3, NumericError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
// Structurally invalid input (bad magic, bad version, malformed field).
struct FormatError : DataError {
    using DataError::DataError;
};
// Input ends mid-record.
struct TruncatedError : DataError {
    using DataError::DataError;
};
// Timestamps out of order.
struct OrderError : DataError {
    using DataError::DataError;
};
struct NumericError : Error {
    using Error::Error;
};

/// One sensor event: pixel location, microsecond timestamp, polarity (+1/-1).
struct Event {
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint64_t t = 0;
    std::int8_t p = 1;

    bool operator==(const Event&) const = default;
};

// Canonical event ordering: (t, y, x, p). Used as the deterministic
// tie-break whenever events are merged or re-sorted.
inline bool event_order_less(const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.p < b.p;
}

/// Time-ordered event record for a single view.
struct EventStream {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint64_t duration = 0;  // microseconds; all timestamps <= duration
    std::vector<Event> events;

    bool operator==(const EventStream&) const = default;

    /// Throws DataError/OrderError when an invariant is violated.
    void validate() const;
};

/// Single grayscale frame, linear intensity in [0, 1], row-major.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Frame() = default;
    Frame(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const Frame&) const = default;

    void validate() const;
};

/// Ordered frames with strictly increasing microsecond timestamps.
struct FrameSequence {
    std::vector<Frame> frames;
    std::vector<std::uint64_t> timestamps;

    std::size_t size() const { return frames.size(); }

    void validate() const;
};

/// B x H x W temporally-splatted polarity tensor over a half-open window.
struct VoxelGrid {
    int bins = 5;
    int height = 0;
    int width = 0;
    std::uint64_t t_start = 0;
    std::uint64_t t_end = 0;
    std::vector<double> values;  // bins * height * width, bin-major

    VoxelGrid() = default;
    VoxelGrid(int b, int h, int w, std::uint64_t t0, std::uint64_t t1)
        : bins(b),
          height(h),
          width(w),
          t_start(t0),
          t_end(t1),
          values(static_cast<std::size_t>(b) * h * w, 0.0) {}

    double& at(int b, int y, int x) {
        return values[(static_cast<std::size_t>(b) * height + y) * width + x];
    }
    double at(int b, int y, int x) const {
        return values[(static_cast<std::size_t>(b) * height + y) * width + x];
    }

    bool operator==(const VoxelGrid&) const = default;
};

/// N views stacked along the channel axis: channel c = view * bins + bin.
struct MultiViewVoxelGrid {
    int views = 0;
    int bins = 0;
    int height = 0;
    int width = 0;
    std::uint64_t t_start = 0;
    std::uint64_t t_end = 0;
    std::vector<double> values;  // (views*bins) * height * width

    double at(int c, int y, int x) const {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

}  // namespace evlf
