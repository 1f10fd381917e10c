#include "evlf/core.hpp"

#include <cmath>

namespace evlf {

void EventStream::validate() const {
    std::uint64_t prev_t = 0;
    for (const Event& e : events) {
        if (e.x >= width || e.y >= height)
            throw DataError("event coordinates outside stream bounds");
        if (e.p != 1 && e.p != -1) throw DataError("event polarity must be +1 or -1");
        if (e.t < prev_t) throw OrderError("event timestamps must be non-decreasing");
        if (e.t > duration) throw DataError("event timestamp exceeds stream duration");
        prev_t = e.t;
    }
}

void Frame::validate() const {
    if (width <= 0 || height <= 0) throw DataError("frame dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw DataError("frame pixel count does not match dimensions");
    for (double v : pixels) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw DataError("frame intensities must be finite and within [0, 1]");
    }
}

void FrameSequence::validate() const {
    if (frames.size() != timestamps.size())
        throw DataError("frame count does not match timestamp count");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].width != frames[0].width || frames[i].height != frames[0].height)
            throw DataError("frames must share one resolution");
        if (i > 0 && timestamps[i] <= timestamps[i - 1])
            throw OrderError("frame timestamps must be strictly increasing");
    }
}

}  // namespace evlf
