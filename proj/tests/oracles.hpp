#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "evlf/core.hpp"
#include "evlf/evsim.hpp"
#include "evlf/rng.hpp"

namespace oracles {

/// Unique scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("evlf_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline evlf::EventStream random_stream(std::uint64_t seed, int width = 64, int height = 48,
                                       int count = 500, std::uint64_t duration = 1'000'000) {
    evlf::Rng rng(seed);
    evlf::EventStream s;
    s.width = static_cast<std::uint16_t>(width);
    s.height = static_cast<std::uint16_t>(height);
    s.duration = duration;
    std::vector<std::uint64_t> times(count);
    for (auto& t : times) t = static_cast<std::uint64_t>(rng.uniform() * duration);
    std::sort(times.begin(), times.end());
    for (int i = 0; i < count; ++i) {
        evlf::Event e;
        e.x = static_cast<std::uint16_t>(rng.uniform() * width);
        e.y = static_cast<std::uint16_t>(rng.uniform() * height);
        e.t = times[i];
        e.p = rng.uniform() < 0.5 ? 1 : -1;
        s.events.push_back(e);
    }
    return s;
}

/// Scalar reference for the event model: marches the piecewise-linear log
/// trajectory of one pixel in small time steps and emits on every threshold
/// crossing found between samples. Independent of the per-interval level
/// stepping in the implementation.
struct OracleEvent {
    double t_us;
    int polarity;
};

inline std::vector<OracleEvent> pixel_crossing_oracle(const std::vector<double>& intensities,
                                                      const std::vector<std::uint64_t>& times_us,
                                                      double contrast, double refractory_us,
                                                      double log_eps, int steps_per_interval = 4096) {
    std::vector<OracleEvent> events;
    const auto log_of = [&](double v) { return std::log(std::max(v, log_eps)); };
    double latch = log_of(intensities.at(0));
    double last_emit = 0.0;
    bool emitted = false;

    for (std::size_t k = 1; k < intensities.size(); ++k) {
        const double t0 = static_cast<double>(times_us[k - 1]);
        const double t1 = static_cast<double>(times_us[k]);
        const double l0 = log_of(intensities[k - 1]);
        const double l1 = log_of(intensities[k]);
        double prev_t = t0;
        double prev_l = l0;
        for (int s = 1; s <= steps_per_interval; ++s) {
            const double frac = static_cast<double>(s) / steps_per_interval;
            const double t = t0 + frac * (t1 - t0);
            const double l = l0 + frac * (l1 - l0);
            // Several thresholds can fall inside one step; emit all of them.
            while (std::abs(l - latch) >= contrast) {
                const double target = latch + (l > latch ? contrast : -contrast);
                const double tc =
                    prev_l == l ? t : prev_t + (target - prev_l) / (l - prev_l) * (t - prev_t);
                if (!emitted || tc - last_emit >= refractory_us) {
                    events.push_back({tc, l > latch ? 1 : -1});
                    last_emit = tc;
                    emitted = true;
                }
                latch = target;
            }
            prev_t = t;
            prev_l = l;
        }
    }
    return events;
}

/// Integer pixel shift with edge clamping (reference for warp tests);
/// content moves by (+dx, +dy).
inline evlf::Frame shift_frame(const evlf::Frame& f, int dx, int dy) {
    evlf::Frame out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const int sx = std::clamp(x - dx, 0, f.width - 1);
            const int sy = std::clamp(y - dy, 0, f.height - 1);
            out.at(x, y) = f.at(sx, sy);
        }
    return out;
}

/// Plain AR(1) scalar chain with std:: facilities (not the library RNG).
inline std::vector<double> ar1_chain(double alpha, std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> chain(n);
    chain[0] = normal(gen);
    const double fresh = std::sqrt(1.0 - alpha * alpha);
    for (std::size_t i = 1; i < n; ++i) chain[i] = alpha * chain[i - 1] + fresh * normal(gen);
    return chain;
}

inline std::vector<std::filesystem::path> sorted_tree(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
        if (entry.is_regular_file()) files.push_back(std::filesystem::relative(entry.path(), root));
    std::sort(files.begin(), files.end());
    return files;
}

inline std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Byte-level directory equality; returns a description of the first
/// difference, empty when identical.
inline std::string compare_trees(const std::filesystem::path& a,
                                 const std::filesystem::path& b) {
    const auto fa = sorted_tree(a);
    const auto fb = sorted_tree(b);
    if (fa != fb) return "file lists differ";
    for (const auto& rel : fa)
        if (read_bytes(a / rel) != read_bytes(b / rel)) return "content differs: " + rel.string();
    return "";
}

}  // namespace oracles
