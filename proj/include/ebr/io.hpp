#pragma once

#include <iosfwd>
#include <string>

#include "ebr/core.hpp"

namespace ebr {

// Event stream file formats.
//
// CSV (text):
//   line 1:  width,height
//   line 2+: t,x,y,p        t in microseconds, p in {0,1} or {-1,1}
// Polarity 0 is normalized to -1 on ingestion.
//
// Binary (little-endian):
//   header:  u32 width, u32 height, u64 count
//   records: u64 t, u16 x, u16 y, i8 p   (packed, no padding)
//
// Both loaders stable-sort by timestamp, so non-monotonic input is accepted.
// Malformed rows raise MalformedRecord, coordinates outside the sensor raise
// OutOfBounds.

enum class EventFormat { Csv, Binary };

EventStream parse_event_csv(std::istream& in);
EventStream parse_event_binary(std::istream& in);
EventStream parse_event_file(const std::string& path, EventFormat format);

// Format inferred from extension: ".csv" is text, anything else binary.
EventStream parse_event_file(const std::string& path);

void write_event_csv(const EventStream& stream, std::ostream& out);
void write_event_binary(const EventStream& stream, std::ostream& out);
void write_event_file(const EventStream& stream, const std::string& path, EventFormat format);

// Frames are 8-bit binary PGM (P5, maxval 255). Any other magic or maxval
// raises UnsupportedFormat. Exposure metadata is not part of PGM; loaded
// frames carry t_s = 0 and exposure_us = 0 until the caller fills them in.
IntensityFrame read_frame(const std::string& path);
void write_frame(const IntensityFrame& frame, const std::string& path);

// BinaryFrame pixels are stored as {0, 255}.
void write_frame(const BinaryFrame& frame, const std::string& path);

// Maps a grayscale frame to bits: pixel > 127 becomes 1. Round-trips frames
// written by the BinaryFrame writer.
BinaryFrame to_binary(const IntensityFrame& frame);

}  // namespace ebr
