#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "evlf/eventio.hpp"
#include "oracles.hpp"

using namespace evlf;

TEST_CASE("evlf header layout is fixed") {
    EventStream s;
    s.width = 640;
    s.height = 480;
    s.duration = 0;
    std::ostringstream sink(std::ios::binary);
    CHECK(write_events(s, sink) == kEvlfHeaderBytes);
    const std::string bytes = sink.str();
    REQUIRE(bytes.size() == kEvlfHeaderBytes);
    CHECK(bytes.substr(0, 4) == "EVLF");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version lo
    CHECK(static_cast<unsigned char>(bytes[5]) == 0);  // version hi
    // width 640 = 0x0280, height 480 = 0x01e0, little-endian
    CHECK(static_cast<unsigned char>(bytes[6]) == 0x80);
    CHECK(static_cast<unsigned char>(bytes[7]) == 0x02);
    CHECK(static_cast<unsigned char>(bytes[8]) == 0xe0);
    CHECK(static_cast<unsigned char>(bytes[9]) == 0x01);
}

TEST_CASE("single event record bytes match the packed layout") {
    EventStream s;
    s.width = 640;
    s.height = 480;
    s.duration = 2000;
    s.events.push_back({3, 4, 1000, 1});
    std::ostringstream sink(std::ios::binary);
    CHECK(write_events(s, sink) == kEvlfHeaderBytes + kEvlfRecordBytes);
    const std::string bytes = sink.str();
    REQUIRE(bytes.size() == kEvlfHeaderBytes + kEvlfRecordBytes);
    // Hand-packed record: x=3 u16, y=4 u16, t=1000=0x3e8 u64, p=+1, pad.
    const unsigned char expected[kEvlfRecordBytes] = {3, 0, 4, 0, 0xe8, 0x03, 0, 0,
                                                      0, 0, 0, 0, 1,    0};
    for (std::size_t i = 0; i < kEvlfRecordBytes; ++i)
        CHECK(static_cast<unsigned char>(bytes[kEvlfHeaderBytes + i]) == expected[i]);
}

TEST_CASE("round-trip identity over random streams") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const EventStream s = oracles::random_stream(seed, 64, 48, 200 + 40 * (seed % 5));
        std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
        write_events(s, buffer);
        CHECK(read_events(buffer) == s);
    }
}

TEST_CASE("empty stream round-trips with its duration") {
    EventStream s;
    s.width = 10;
    s.height = 10;
    s.duration = 123456;
    std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
    write_events(s, buffer);
    CHECK(read_events(buffer) == s);
}

TEST_CASE("read errors are distinct") {
    const EventStream s = oracles::random_stream(3);
    std::ostringstream sink(std::ios::binary);
    write_events(s, sink);
    const std::string good = sink.str();

    SUBCASE("corrupted magic") {
        std::string bad = good;
        bad[0] = 'X';
        std::istringstream in(bad, std::ios::binary);
        CHECK_THROWS_AS(read_events(in), FormatError);
    }
    SUBCASE("bad version") {
        std::string bad = good;
        bad[4] = 9;
        std::istringstream in(bad, std::ios::binary);
        CHECK_THROWS_AS(read_events(in), FormatError);
    }
    SUBCASE("truncated record") {
        std::istringstream in(good.substr(0, good.size() - 5), std::ios::binary);
        CHECK_THROWS_AS(read_events(in), TruncatedError);
    }
    SUBCASE("decreasing timestamps") {
        EventStream bad = s;
        std::swap(bad.events.front().t, bad.events.back().t);
        // Bypass write-side validation by patching bytes directly.
        std::string raw = good;
        auto put_u64 = [&](std::size_t off, std::uint64_t v) {
            for (int i = 0; i < 8; ++i) raw[off + i] = static_cast<char>((v >> (8 * i)) & 0xff);
        };
        put_u64(kEvlfHeaderBytes + 4, s.events.back().t);
        std::istringstream in(raw, std::ios::binary);
        CHECK_THROWS_AS(read_events(in), OrderError);
    }
}

TEST_CASE("write rejects invalid streams") {
    EventStream s;
    s.width = 4;
    s.height = 4;
    s.duration = 10;
    s.events.push_back({9, 0, 5, 1});  // x out of bounds
    std::ostringstream sink(std::ios::binary);
    CHECK_THROWS_AS(write_events(s, sink), DataError);
}

TEST_CASE("csv interchange round-trips") {
    const EventStream s = oracles::random_stream(11);
    std::stringstream buffer;
    write_events_csv(s, buffer);
    CHECK(read_events_csv(buffer, s.width, s.height, s.duration) == s);
}

TEST_CASE("pgm round-trip at 16-bit depth") {
    oracles::TempDir tmp("pgm");
    Frame f(17, 13);
    Rng rng(5);
    for (double& v : f.pixels) v = rng.uniform();

    SUBCASE("constant half frame") {
        Frame c(8, 8, 0.5);
        write_pgm(c, tmp.path() / "c.pgm");
        const Frame back = read_pgm(tmp.path() / "c.pgm");
        for (double v : back.pixels) CHECK(std::abs(v - 0.5) <= 1.0 / 65535);
    }
    SUBCASE("random frame within quantization error") {
        write_pgm(f, tmp.path() / "f.pgm");
        const Frame back = read_pgm(tmp.path() / "f.pgm");
        for (std::size_t i = 0; i < f.pixels.size(); ++i)
            CHECK(std::abs(back.pixels[i] - f.pixels[i]) <= 0.5 / 65535 + 1e-12);
    }
    SUBCASE("all-zero frame stays zero") {
        Frame z(9, 4, 0.0);
        write_pgm(z, tmp.path() / "z.pgm");
        const Frame back = read_pgm(tmp.path() / "z.pgm");
        for (double v : back.pixels) CHECK(v == 0.0);
    }
    SUBCASE("8-bit depth") {
        write_pgm(f, tmp.path() / "f8.pgm", 8);
        const Frame back = read_pgm(tmp.path() / "f8.pgm");
        for (std::size_t i = 0; i < f.pixels.size(); ++i)
            CHECK(std::abs(back.pixels[i] - f.pixels[i]) <= 0.5 / 255 + 1e-12);
    }
}

TEST_CASE("frame directory io") {
    oracles::TempDir tmp("frames");
    FrameSequence seq;
    seq.frames.assign(3, Frame(6, 5, 0.25));
    seq.frames[1].at(2, 2) = 0.75;
    seq.timestamps = {0, 8333, 16667};
    write_frames(seq, tmp.path() / "seq");
    const FrameSequence back = read_frames(tmp.path() / "seq");
    REQUIRE(back.frames.size() == 3);
    CHECK(back.timestamps == seq.timestamps);
    CHECK(std::abs(back.frames[1].at(2, 2) - 0.75) <= 1.0 / 65535);

    SUBCASE("timestamp count mismatch is rejected") {
        std::ofstream ts(tmp.path() / "seq" / "timestamps.txt");
        ts << "0\n8333\n";  // 3 frames, 2 timestamps
        ts.close();
        CHECK_THROWS_AS(read_frames(tmp.path() / "seq"), DataError);
    }
    SUBCASE("non-uniform dimensions are rejected") {
        write_pgm(Frame(4, 4, 0.1), tmp.path() / "seq" / "frame_000001.pgm");
        CHECK_THROWS_AS(read_frames(tmp.path() / "seq"), DataError);
    }
}

TEST_CASE("voxel grid file round-trip") {
    oracles::TempDir tmp("vxg");
    MultiViewVoxelGrid g;
    g.views = 2;
    g.bins = 3;
    g.height = 4;
    g.width = 5;
    g.t_start = 100;
    g.t_end = 900;
    g.values.resize(2 * 3 * 4 * 5);
    Rng rng(2);
    for (double& v : g.values) v = rng.normal();
    write_voxel(g, tmp.path() / "g.vxg");
    const MultiViewVoxelGrid back = read_voxel(tmp.path() / "g.vxg");
    CHECK(back.views == g.views);
    CHECK(back.bins == g.bins);
    CHECK(back.t_start == g.t_start);
    CHECK(back.t_end == g.t_end);
    CHECK(back.values == g.values);
}
