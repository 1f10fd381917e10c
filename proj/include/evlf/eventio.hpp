#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "evlf/core.hpp"

namespace evlf {

// EVLF binary container, version 1. Little-endian throughout.
//
//   header (26 bytes): magic "EVLF", version u16, width u16, height u16,
//                      event count u64, duration u64 (microseconds)
//   record (14 bytes): x u16, y u16, t u64, p i8, 1 pad byte
//
// Records must be sorted by timestamp (non-decreasing).
inline constexpr std::size_t kEvlfHeaderBytes = 26;
inline constexpr std::size_t kEvlfRecordBytes = 14;
inline constexpr std::uint16_t kEvlfVersion = 1;

/// Writes a validated stream; returns the number of bytes emitted.
std::size_t write_events(const EventStream& stream, std::ostream& sink);
std::size_t write_events(const EventStream& stream, const std::filesystem::path& path);

/// Inverse of write_events. Throws FormatError (bad magic/version),
/// TruncatedError (short read), OrderError (timestamps decrease), or
/// DataError (out-of-bounds coordinates, bad polarity).
EventStream read_events(std::istream& source);
EventStream read_events(const std::filesystem::path& path);

// CSV interchange: one "x,y,t,p" record per line, p in {1,-1}.
void write_events_csv(const EventStream& stream, std::ostream& sink);
EventStream read_events_csv(std::istream& source, std::uint16_t width, std::uint16_t height,
                            std::uint64_t duration);

// Binary PGM (P5), 8- or 16-bit. 16-bit samples are big-endian per the
// format; intensities map linearly to [0, 1].
void write_pgm(const Frame& frame, const std::filesystem::path& path, int bit_depth = 16);
Frame read_pgm(const std::filesystem::path& path);

/// Writes frames as frame_%06d.pgm plus a timestamps.txt sidecar (one
/// integer microsecond value per line).
void write_frames(const FrameSequence& sequence, const std::filesystem::path& directory,
                  int bit_depth = 16);

/// Reads a directory written by write_frames (any *.pgm set named in
/// lexicographic frame order plus timestamps.txt).
FrameSequence read_frames(const std::filesystem::path& directory);

// Voxel-grid container "VXLG": version u16, views u32, bins u32, height u32,
// width u32, t_start u64, t_end u64, then values as f64 little-endian.
void write_voxel(const MultiViewVoxelGrid& grid, const std::filesystem::path& path);
MultiViewVoxelGrid read_voxel(const std::filesystem::path& path);

}  // namespace evlf
