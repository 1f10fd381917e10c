#include "evlf/eventio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace evlf {
namespace {

constexpr char kMagic[4] = {'E', 'V', 'L', 'F'};
constexpr char kVoxelMagic[4] = {'V', 'X', 'L', 'G'};

// Explicit little-endian packing keeps the formats platform-independent.
void put_u16(unsigned char* out, std::uint16_t v) {
    out[0] = static_cast<unsigned char>(v & 0xff);
    out[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

void put_u64(unsigned char* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

std::uint16_t get_u16(const unsigned char* in) {
    return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

std::uint32_t get_u32(const unsigned char* in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

void put_f64(unsigned char* out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

double get_f64(const unsigned char* in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

void read_exact(std::istream& in, unsigned char* buf, std::size_t n, const char* what) {
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw TruncatedError(std::string("truncated ") + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

std::size_t write_events(const EventStream& stream, std::ostream& sink) {
    stream.validate();
    unsigned char header[kEvlfHeaderBytes];
    std::memcpy(header, kMagic, 4);
    put_u16(header + 4, kEvlfVersion);
    put_u16(header + 6, stream.width);
    put_u16(header + 8, stream.height);
    put_u64(header + 10, stream.events.size());
    put_u64(header + 18, stream.duration);
    sink.write(reinterpret_cast<const char*>(header), sizeof(header));

    unsigned char rec[kEvlfRecordBytes];
    for (const Event& e : stream.events) {
        put_u16(rec + 0, e.x);
        put_u16(rec + 2, e.y);
        put_u64(rec + 4, e.t);
        rec[12] = static_cast<unsigned char>(e.p);
        rec[13] = 0;
        sink.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    }
    if (!sink) throw DataError("event sink write failure");
    return kEvlfHeaderBytes + kEvlfRecordBytes * stream.events.size();
}

std::size_t write_events(const EventStream& stream, const std::filesystem::path& path) {
    auto out = open_output(path);
    return write_events(stream, out);
}

EventStream read_events(std::istream& source) {
    unsigned char header[kEvlfHeaderBytes];
    read_exact(source, header, sizeof(header), "header");
    if (std::memcmp(header, kMagic, 4) != 0) throw FormatError("bad EVLF magic");
    const std::uint16_t version = get_u16(header + 4);
    if (version != kEvlfVersion) throw FormatError("unsupported EVLF version");

    EventStream stream;
    stream.width = get_u16(header + 6);
    stream.height = get_u16(header + 8);
    const std::uint64_t count = get_u64(header + 10);
    stream.duration = get_u64(header + 18);

    stream.events.reserve(count);
    unsigned char rec[kEvlfRecordBytes];
    std::uint64_t prev_t = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        read_exact(source, rec, sizeof(rec), "record");
        Event e;
        e.x = get_u16(rec + 0);
        e.y = get_u16(rec + 2);
        e.t = get_u64(rec + 4);
        e.p = static_cast<std::int8_t>(rec[12]);
        if (e.t < prev_t) throw OrderError("event timestamps decrease");
        prev_t = e.t;
        if (e.x >= stream.width || e.y >= stream.height)
            throw DataError("event outside sensor bounds");
        if (e.p != 1 && e.p != -1) throw DataError("bad event polarity");
        if (e.t > stream.duration) throw DataError("event timestamp exceeds duration");
        stream.events.push_back(e);
    }
    return stream;
}

EventStream read_events(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_events(in);
}

void write_events_csv(const EventStream& stream, std::ostream& sink) {
    stream.validate();
    for (const Event& e : stream.events)
        sink << e.x << ',' << e.y << ',' << e.t << ',' << int(e.p) << '\n';
    if (!sink) throw DataError("event csv write failure");
}

EventStream read_events_csv(std::istream& source, std::uint16_t width, std::uint16_t height,
                            std::uint64_t duration) {
    EventStream stream;
    stream.width = width;
    stream.height = height;
    stream.duration = duration;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        long long x, y, p;
        unsigned long long t;
        if (!(fields >> x >> y >> t >> p))
            throw FormatError("bad csv event at line " + std::to_string(line_no));
        Event e;
        e.x = static_cast<std::uint16_t>(x);
        e.y = static_cast<std::uint16_t>(y);
        e.t = t;
        e.p = static_cast<std::int8_t>(p);
        stream.events.push_back(e);
    }
    stream.validate();
    return stream;
}

void write_pgm(const Frame& frame, const std::filesystem::path& path, int bit_depth) {
    frame.validate();
    if (bit_depth != 8 && bit_depth != 16) throw ConfigError("pgm depth must be 8 or 16");
    const int maxval = bit_depth == 8 ? 255 : 65535;
    auto out = open_output(path);
    out << "P5\n" << frame.width << ' ' << frame.height << "\n" << maxval << "\n";
    for (double v : frame.pixels) {
        const long q = std::lround(v * maxval);
        if (bit_depth == 8) {
            const unsigned char b = static_cast<unsigned char>(q);
            out.write(reinterpret_cast<const char*>(&b), 1);
        } else {
            // 16-bit PGM samples are most-significant byte first.
            const unsigned char b[2] = {static_cast<unsigned char>(q >> 8),
                                        static_cast<unsigned char>(q & 0xff)};
            out.write(reinterpret_cast<const char*>(b), 2);
        }
    }
    if (!out) throw DataError("pgm write failure: " + path.string());
}

namespace {

int next_pgm_token(std::istream& in) {
    // Skips whitespace and '#' comment lines between header tokens.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF) throw TruncatedError("truncated pgm header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

Frame read_pgm(const std::filesystem::path& path) {
    auto in = open_input(path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw FormatError("not a binary pgm: " + path.string());
    const int width = next_pgm_token(in);
    const int height = next_pgm_token(in);
    const int maxval = next_pgm_token(in);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw FormatError("bad pgm header: " + path.string());

    Frame frame(width, height);
    const std::size_t n = frame.pixels.size();
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    read_exact(in, raw.data(), raw.size(), "pgm raster");
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned value = bytes == 1
                                   ? raw[i]
                                   : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        frame.pixels[i] = static_cast<double>(value) / maxval;
    }
    return frame;
}

void write_frames(const FrameSequence& sequence, const std::filesystem::path& directory,
                  int bit_depth) {
    sequence.validate();
    std::filesystem::create_directories(directory);
    char name[32];
    for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%06zu.pgm", i);
        write_pgm(sequence.frames[i], directory / name, bit_depth);
    }
    auto ts = open_output(directory / "timestamps.txt");
    for (std::uint64_t t : sequence.timestamps) ts << t << '\n';
}

FrameSequence read_frames(const std::filesystem::path& directory) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (entry.path().extension() == ".pgm") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());

    FrameSequence sequence;
    for (const auto& p : paths) sequence.frames.push_back(read_pgm(p));

    auto ts = open_input(directory / "timestamps.txt");
    std::uint64_t t;
    while (ts >> t) sequence.timestamps.push_back(t);

    sequence.validate();
    return sequence;
}

void write_voxel(const MultiViewVoxelGrid& grid, const std::filesystem::path& path) {
    auto out = open_output(path);
    unsigned char header[4 + 2 + 4 * 4 + 2 * 8];
    std::memcpy(header, kVoxelMagic, 4);
    put_u16(header + 4, kEvlfVersion);
    put_u32(header + 6, static_cast<std::uint32_t>(grid.views));
    put_u32(header + 10, static_cast<std::uint32_t>(grid.bins));
    put_u32(header + 14, static_cast<std::uint32_t>(grid.height));
    put_u32(header + 18, static_cast<std::uint32_t>(grid.width));
    put_u64(header + 22, grid.t_start);
    put_u64(header + 30, grid.t_end);
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    std::vector<unsigned char> raw(grid.values.size() * 8);
    for (std::size_t i = 0; i < grid.values.size(); ++i) put_f64(raw.data() + 8 * i, grid.values[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("voxel write failure: " + path.string());
}

MultiViewVoxelGrid read_voxel(const std::filesystem::path& path) {
    auto in = open_input(path);
    unsigned char header[4 + 2 + 4 * 4 + 2 * 8];
    read_exact(in, header, sizeof(header), "voxel header");
    if (std::memcmp(header, kVoxelMagic, 4) != 0) throw FormatError("bad voxel magic");
    if (get_u16(header + 4) != kEvlfVersion) throw FormatError("unsupported voxel version");
    MultiViewVoxelGrid grid;
    grid.views = static_cast<int>(get_u32(header + 6));
    grid.bins = static_cast<int>(get_u32(header + 10));
    grid.height = static_cast<int>(get_u32(header + 14));
    grid.width = static_cast<int>(get_u32(header + 18));
    grid.t_start = get_u64(header + 22);
    grid.t_end = get_u64(header + 30);
    const std::size_t n = static_cast<std::size_t>(grid.views) * grid.bins * grid.height *
                          grid.width;
    std::vector<unsigned char> raw(n * 8);
    read_exact(in, raw.data(), raw.size(), "voxel values");
    grid.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) grid.values[i] = get_f64(raw.data() + 8 * i);
    return grid;
}

}  // namespace evlf
