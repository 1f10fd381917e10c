#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evlf/ref.hpp"
#include "evlf/voxel.hpp"
#include "oracles.hpp"

using namespace evlf;

namespace {

EventStream one_event_stream(std::uint64_t t, std::int8_t p, std::uint64_t duration = 1000) {
    EventStream s;
    s.width = 8;
    s.height = 8;
    s.duration = duration;
    s.events.push_back({2, 3, t, p});
    return s;
}

}  // namespace

TEST_CASE("event landing exactly on a bin") {
    // B=5 over [0,1000): t* = 4t/1000, so t=500 -> t* = 2.
    const EventStream s = one_event_stream(500, 1);
    const VoxelGrid g = encode_voxel_grid(s, 0, 1000, 5);
    for (int b = 0; b < 5; ++b) CHECK(g.at(b, 3, 2) == (b == 2 ? 1.0 : 0.0));
}

TEST_CASE("event between bins splits bilinearly") {
    // t* = 1.5 -> -0.5 into bins 1 and 2 for p = -1.
    const EventStream s = one_event_stream(375, -1);
    const VoxelGrid g = encode_voxel_grid(s, 0, 1000, 5);
    CHECK(g.at(1, 3, 2) == doctest::Approx(-0.5));
    CHECK(g.at(2, 3, 2) == doctest::Approx(-0.5));
    CHECK(g.at(0, 3, 2) == 0.0);
    CHECK(g.at(3, 3, 2) == 0.0);
}

TEST_CASE("empty stream gives an all-zero grid") {
    EventStream s;
    s.width = 4;
    s.height = 4;
    s.duration = 100;
    const VoxelGrid g = encode_voxel_grid(s, 0, 100, 5);
    for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("window boundaries are half-open") {
    EventStream s;
    s.width = 4;
    s.height = 4;
    s.duration = 2000;
    s.events.push_back({0, 0, 1000, 1});  // == t1: excluded
    s.events.push_back({1, 1, 999, 1});   // < t1: included
    std::sort(s.events.begin(), s.events.end(), event_order_less);
    const VoxelGrid g = encode_voxel_grid(s, 0, 1000, 3);
    double total = 0;
    for (double v : g.values) total += v;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("per-event bin mass is exactly the polarity") {
    const EventStream s = oracles::random_stream(17, 32, 32, 5000, 100000);
    const int bins = 5;
    for (const Event& e : s.events) {
        EventStream single;
        single.width = s.width;
        single.height = s.height;
        single.duration = s.duration;
        single.events.push_back(e);
        const VoxelGrid g = encode_voxel_grid(single, 0, s.duration + 1, bins);
        double mass = 0.0;
        for (int b = 0; b < bins; ++b) mass += g.at(b, e.y, e.x);
        CHECK(mass == static_cast<double>(e.p));  // exact, not approximate
    }
}

TEST_CASE("encoding is linear over stream splits") {
    const EventStream s = oracles::random_stream(23, 16, 16, 600);
    EventStream even = s, odd = s;
    even.events.clear();
    odd.events.clear();
    for (std::size_t i = 0; i < s.events.size(); ++i)
        (i % 2 == 0 ? even : odd).events.push_back(s.events[i]);
    const VoxelGrid all = encode_voxel_grid(s, 0, s.duration, 5);
    const VoxelGrid ge = encode_voxel_grid(even, 0, s.duration, 5);
    const VoxelGrid go = encode_voxel_grid(odd, 0, s.duration, 5);
    for (std::size_t i = 0; i < all.values.size(); ++i)
        CHECK(all.values[i] == doctest::Approx(ge.values[i] + go.values[i]).epsilon(1e-12));
}

TEST_CASE("parallel encoder matches the serial reference bitwise") {
    const EventStream s = oracles::random_stream(31, 64, 64, 20000);
    const VoxelGrid parallel = encode_voxel_grid(s, 0, s.duration, 5);
    const VoxelGrid serial = ref::encode_voxel_grid(s, 0, s.duration, 5);
    CHECK(parallel.values == serial.values);
}

TEST_CASE("encode rejects bad windows and bins") {
    const EventStream s = oracles::random_stream(1);
    CHECK_THROWS_AS(encode_voxel_grid(s, 100, 100, 5), ConfigError);
    CHECK_THROWS_AS(encode_voxel_grid(s, 200, 100, 5), ConfigError);
    CHECK_THROWS_AS(encode_voxel_grid(s, 0, 100, 0), ConfigError);
}

TEST_CASE("stack_views channel indexing") {
    std::vector<VoxelGrid> grids;
    for (int v = 0; v < 9; ++v) {
        VoxelGrid g(5, 2, 2, 0, 100);
        for (int b = 0; b < 5; ++b) g.at(b, 0, 0) = 10.0 * v + b;
        grids.push_back(g);
    }
    const MultiViewVoxelGrid stacked = stack_views(grids);
    CHECK(stacked.views == 9);
    CHECK(stacked.bins == 5);
    // channel c = view*B + bin: channel 12 is view 2, bin 2
    CHECK(stacked.at(12, 0, 0) == 22.0);
    for (int v = 0; v < 9; ++v)
        for (int b = 0; b < 5; ++b) CHECK(stacked.at(v * 5 + b, 0, 0) == 10.0 * v + b);
}

TEST_CASE("stack of one view equals the input") {
    const EventStream s = oracles::random_stream(5, 16, 16, 100);
    const VoxelGrid g = encode_voxel_grid(s, 0, s.duration, 5);
    const MultiViewVoxelGrid stacked = stack_views(std::span(&g, 1));
    CHECK(stacked.values == g.values);
}

TEST_CASE("stack then unstack is the identity on channel blocks") {
    std::vector<VoxelGrid> grids;
    for (int v = 0; v < 4; ++v) {
        const EventStream s = oracles::random_stream(100 + v, 8, 8, 50, 1000);
        grids.push_back(encode_voxel_grid(s, 0, 1000, 3));
    }
    const auto back = unstack_views(stack_views(grids));
    REQUIRE(back.size() == grids.size());
    for (std::size_t v = 0; v < grids.size(); ++v) CHECK(back[v] == grids[v]);
}

TEST_CASE("stack_views rejects mismatched windows") {
    VoxelGrid a(5, 2, 2, 0, 100);
    VoxelGrid b(5, 2, 2, 0, 200);
    std::vector<VoxelGrid> grids{a, b};
    CHECK_THROWS_AS(stack_views(grids), DataError);
}

TEST_CASE("event rate arithmetic") {
    EventStream s;
    s.width = 100;
    s.height = 100;
    s.duration = 2'000'000;
    SUBCASE("zero events") { CHECK(event_rate(s) == 0.0); }
    SUBCASE("64000 events over 2 s at 100x100") {
        s.events.resize(64000);
        for (std::size_t i = 0; i < s.events.size(); ++i)
            s.events[i] = {static_cast<std::uint16_t>(i % 100), 0,
                           static_cast<std::uint64_t>(i * 31 % s.duration), 1};
        std::sort(s.events.begin(), s.events.end(), event_order_less);
        CHECK(event_rate(s) == doctest::Approx(3.2));
    }
    SUBCASE("zero duration is an error") {
        s.duration = 0;
        CHECK_THROWS_AS(event_rate(s), DataError);
    }
}
