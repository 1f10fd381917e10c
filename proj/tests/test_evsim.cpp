#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evlf/evsim.hpp"
#include "evlf/ref.hpp"
#include "evlf/synth.hpp"
#include "oracles.hpp"

using namespace evlf;

namespace {

FrameSequence single_pixel(const std::vector<double>& intensities,
                           const std::vector<std::uint64_t>& times) {
    FrameSequence seq;
    for (double v : intensities) seq.frames.push_back(Frame(1, 1, v));
    seq.timestamps = times;
    return seq;
}

}  // namespace

TEST_CASE("constant sequence emits no events") {
    const FrameSequence seq = single_pixel({0.4, 0.4, 0.4, 0.4}, {0, 1000, 2000, 3000});
    EventSimConfig config;
    config.contrast = 0.2;
    CHECK(frames_to_events(seq, config).events.empty());
}

TEST_CASE("a 3.2 C log step crosses three levels at interpolated times") {
    EventSimConfig config;
    config.contrast = 0.2;
    config.refractory_us = 0;
    const double i0 = 0.2;
    const double i1 = i0 * std::exp(3.2 * config.contrast);
    const FrameSequence seq = single_pixel({i0, i1}, {0, 10000});
    const EventStream stream = frames_to_events(seq, config);
    REQUIRE(stream.events.size() == 3);
    // Crossings at t0 + (k/3.2) dt, k = 1..3.
    CHECK(stream.events[0].t == 3125);
    CHECK(stream.events[1].t == 6250);
    CHECK(stream.events[2].t == 9375);
    for (const Event& e : stream.events) CHECK(e.p == 1);

    SUBCASE("refractory longer than the interval keeps only the first") {
        config.refractory_us = 20000;
        const EventStream suppressed = frames_to_events(seq, config);
        REQUIRE(suppressed.events.size() == 1);
        CHECK(suppressed.events[0].t == 3125);
        CHECK(suppressed.events[0].p == 1);
    }
}

TEST_CASE("falling intensity emits negative polarity") {
    EventSimConfig config;
    config.contrast = 0.3;
    config.refractory_us = 0;
    const double i0 = 0.8;
    const double i1 = i0 * std::exp(-2.5 * config.contrast);
    const FrameSequence seq = single_pixel({i0, i1}, {0, 8000});
    const EventStream stream = frames_to_events(seq, config);
    REQUIRE(stream.events.size() == 2);
    for (const Event& e : stream.events) CHECK(e.p == -1);
}

TEST_CASE("event count is non-increasing in the threshold") {
    const FrameSequence clip = make_clip(SceneKind::bouncing_blobs, 24, 24, 12, 120.0, 19);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double c : {0.1, 0.15, 0.2, 0.3, 0.4, 0.55, 0.7}) {
        EventSimConfig config;
        config.contrast = c;
        const std::size_t count = frames_to_events(clip, config).events.size();
        CHECK(count <= prev);
        prev = count;
    }
}

TEST_CASE("integrated polarity tracks the log excursion within C") {
    // With zero refractory the latched level ends within C of the true log
    // intensity, so L0 + C * sum(p) does too.
    const FrameSequence clip = make_clip(SceneKind::moving_bar, 16, 16, 20, 120.0, 23);
    EventSimConfig config;
    config.contrast = 0.25;
    config.refractory_us = 0;
    const EventStream stream = frames_to_events(clip, config);

    std::vector<double> net(16 * 16, 0.0);
    for (const Event& e : stream.events) net[e.y * 16 + e.x] += config.contrast * e.p;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double l0 =
                std::log(std::max(clip.frames.front().at(x, y), config.log_eps));
            const double l1 = std::log(std::max(clip.frames.back().at(x, y), config.log_eps));
            CHECK(std::abs(l0 + net[y * 16 + x] - l1) < config.contrast);
        }
}

TEST_CASE("timestamps stay within the clip and are sorted") {
    const FrameSequence clip = make_clip(SceneKind::drifting_grating, 20, 20, 10, 120.0, 29);
    EventSimConfig config;
    config.contrast = 0.15;
    const EventStream stream = frames_to_events(clip, config);
    CHECK_FALSE(stream.events.empty());
    std::uint64_t prev = 0;
    for (const Event& e : stream.events) {
        CHECK(e.t >= clip.timestamps.front());
        CHECK(e.t <= clip.timestamps.back());
        CHECK(e.t >= prev);
        prev = e.t;
    }
    stream.validate();
}

TEST_CASE("agreement with the sampling oracle on random trajectories") {
    Rng rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 6 + static_cast<int>(rng.uniform() * 6);
        std::vector<double> intensities(n);
        std::vector<std::uint64_t> times(n);
        for (int k = 0; k < n; ++k) {
            intensities[k] = 0.02 + 0.96 * rng.uniform();
            times[k] = 8000ull * k + static_cast<std::uint64_t>(rng.uniform() * 4000);
        }
        EventSimConfig config;
        config.contrast = 0.1 + 0.6 * rng.uniform();
        config.refractory_us = trial % 2 == 0 ? 0 : 5000;

        const EventStream stream = frames_to_events(single_pixel(intensities, times), config);
        const auto expected = oracles::pixel_crossing_oracle(
            intensities, times, config.contrast, static_cast<double>(config.refractory_us),
            config.log_eps);
        REQUIRE(stream.events.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(std::abs(static_cast<double>(stream.events[i].t) - expected[i].t_us) <= 1.0);
            CHECK(stream.events[i].p == expected[i].polarity);
        }
    }
}

TEST_CASE("light-field event simulation") {
    const FrameSequence clip = make_clip(SceneKind::bouncing_blobs, 16, 16, 8, 120.0, 31);
    EventSimConfig config;
    config.contrast = 0.2;

    SUBCASE("identical views and config give identical streams") {
        const std::vector<FrameSequence> views(3, clip);
        const auto streams = simulate_lightfield_events(views, config);
        REQUIRE(streams.size() == 3);
        CHECK(streams[0] == streams[1]);
        CHECK(streams[1] == streams[2]);
    }
    SUBCASE("static views give empty streams") {
        const FrameSequence still = make_clip(SceneKind::dot_grid, 16, 16, 8, 120.0, 31);
        const std::vector<FrameSequence> views(9, still);
        for (const auto& s : simulate_lightfield_events(views, config))
            CHECK(s.events.empty());
    }
    SUBCASE("per-view configs apply per view") {
        const std::vector<FrameSequence> views(2, clip);
        std::vector<EventSimConfig> configs(2, config);
        configs[1].contrast = 0.6;
        const auto streams = simulate_lightfield_events(views, configs);
        CHECK(streams[0].events.size() >= streams[1].events.size());
    }
    SUBCASE("empty view list is rejected") {
        CHECK_THROWS_AS(simulate_lightfield_events({}, config), DataError);
    }
}

TEST_CASE("sampled per-view contrasts are deterministic and in range") {
    const auto a = sample_view_contrasts(9, 0.1, 0.7, 99);
    const auto b = sample_view_contrasts(9, 0.1, 0.7, 99);
    CHECK(a == b);
    for (double c : a) {
        CHECK(c >= 0.1);
        CHECK(c <= 0.7);
    }
    const auto other = sample_view_contrasts(9, 0.1, 0.7, 100);
    CHECK_FALSE(a == other);
}

TEST_CASE("input validation") {
    EventSimConfig config;
    SUBCASE("fewer than two frames") {
        const FrameSequence seq = single_pixel({0.5}, {0});
        CHECK_THROWS_AS(frames_to_events(seq, config), DataError);
    }
    SUBCASE("non-increasing timestamps") {
        const FrameSequence seq = single_pixel({0.5, 0.6, 0.7}, {0, 1000, 1000});
        CHECK_THROWS_AS(frames_to_events(seq, config), OrderError);
    }
    SUBCASE("bad contrast") {
        config.contrast = 0.0;
        const FrameSequence seq = single_pixel({0.5, 0.6}, {0, 1000});
        CHECK_THROWS_AS(frames_to_events(seq, config), ConfigError);
    }
}

TEST_CASE("parallel event simulation matches the serial reference bitwise") {
    const FrameSequence clip = make_clip(SceneKind::bouncing_blobs, 48, 36, 16, 120.0, 37);
    EventSimConfig config;
    config.contrast = 0.18;
    const EventStream a = frames_to_events(clip, config);
    const EventStream b = ref::frames_to_events(clip, config);
    CHECK(a == b);
}
