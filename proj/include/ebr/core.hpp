#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebr {

// Error hierarchy. InputError maps to CLI exit code 2, InternalError to 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputError : Error {
    using Error::Error;
};
struct MalformedRecord : InputError {
    MalformedRecord(std::size_t line, const std::string& what)
        : InputError("malformed record at line " + std::to_string(line) + ": " + what),
          line(line) {}
    std::size_t line;
};
struct OutOfBounds : InputError {
    using InputError::InputError;
};
struct UnsupportedFormat : InputError {
    using InputError::InputError;
};
struct DimensionMismatch : InputError {
    using InputError::InputError;
};
struct EmptyDomain : InputError {
    using InputError::InputError;
};
struct EmptyHistogram : InputError {
    using InputError::InputError;
};
struct InternalError : Error {
    using Error::Error;
};

// One polarity spike. Timestamps are integer microseconds, polarity is
// strictly +1 or -1 after ingestion.
struct Event {
    std::uint64_t t = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t p = 0;
};

// Time-sorted event sequence with sensor resolution. Sorting is stable:
// events with equal timestamps keep their ingestion order.
struct EventStream {
    int width = 0;
    int height = 0;
    std::vector<Event> events;

    bool empty() const { return events.empty(); }
    std::size_t size() const { return events.size(); }
};

// 8-bit grayscale frame with exposure interval metadata. exposure_us is the
// duration T of the half-open window [t_s, t_s + T).
struct IntensityFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    std::uint64_t t_s = 0;
    std::uint64_t exposure_us = 0;

    std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

// Per-pixel {0,1} image with a reference timestamp.
struct BinaryFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;
    std::uint64_t t = 0;

    std::uint8_t at(int x, int y) const { return bits[std::size_t(y) * width + x]; }
    void set(int x, int y, std::uint8_t b) { bits[std::size_t(y) * width + x] = b; }
};

// Intermediate dual-stage result. Undefined marks pixels not yet classified;
// merged frames contain none.
enum class TriState : std::uint8_t { Zero = 0, One = 1, Undefined = 2 };

struct TriStateImage {
    int width = 0;
    int height = 0;
    std::vector<TriState> values;

    TriState at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

// Real-valued per-pixel plane (edge images, latents, normalized images).
struct RealImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

// Signed first-integration-edge magnitudes E(x) in log-intensity units.
using EdgeImage = RealImage;

inline TriStateImage make_tristate(int width, int height, TriState fill = TriState::Undefined) {
    return TriStateImage{width, height,
                         std::vector<TriState>(std::size_t(width) * height, fill)};
}

inline BinaryFrame make_binary(int width, int height, std::uint8_t fill = 0,
                               std::uint64_t t = 0) {
    return BinaryFrame{width, height, std::vector<std::uint8_t>(std::size_t(width) * height, fill),
                       t};
}

// Events with t_s <= t < t_s + exposure_us, order preserved.
EventStream slice_exposure(const EventStream& stream, std::uint64_t t_s,
                           std::uint64_t exposure_us);

// Stable time sort plus bounds/polarity validation; shared by the parsers
// and the simulator.
void finalize_stream(EventStream& stream);

}  // namespace ebr
