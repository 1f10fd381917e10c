#pragma once

#include <algorithm>
#include <cmath>

#include "evlf/core.hpp"

namespace evlf {

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Bilinear sample with clamp-to-edge; (x, y) in pixel coordinates.
inline double bilinear_sample(const Frame& frame, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(frame.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(frame.height - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    if (x0 > frame.width - 2) x0 = std::max(0, frame.width - 2);
    if (y0 > frame.height - 2) y0 = std::max(0, frame.height - 2);
    const int x1 = std::min(x0 + 1, frame.width - 1);
    const int y1 = std::min(y0 + 1, frame.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = frame.at(x0, y0) * (1.0 - fx) + frame.at(x1, y0) * fx;
    const double bot = frame.at(x0, y1) * (1.0 - fx) + frame.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

}  // namespace evlf
