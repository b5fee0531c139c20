#include "ebr/io.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <type_traits>
#include <vector>

namespace ebr {
namespace {

// Splits a comma-separated row into unsigned fields. Tolerates surrounding
// whitespace and a trailing carriage return.
bool split_row(const std::string& line, std::vector<long long>& out, int expected) {
    out.clear();
    std::size_t pos = 0;
    for (int field = 0; field < expected; ++field) {
        std::size_t end = line.find(',', pos);
        if (field == expected - 1) {
            if (end != std::string::npos) return false;
            end = line.size();
        } else if (end == std::string::npos) {
            return false;
        }
        std::string token = line.substr(pos, end - pos);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
            token.pop_back();
        std::size_t lead = 0;
        while (lead < token.size() && std::isspace(static_cast<unsigned char>(token[lead])))
            ++lead;
        token.erase(0, lead);
        if (token.empty()) return false;
        try {
            std::size_t used = 0;
            long long v = std::stoll(token, &used);
            if (used != token.size()) return false;
            out.push_back(v);
        } catch (const std::exception&) {
            return false;
        }
        pos = end + 1;
    }
    return true;
}

std::int8_t normalize_polarity(long long raw, std::size_t line) {
    if (raw == 1) return 1;
    if (raw == 0 || raw == -1) return -1;
    throw MalformedRecord(line, "polarity must be one of {-1, 0, 1}");
}

bool blank(const std::string& line) {
    for (char ch : line)
        if (!std::isspace(static_cast<unsigned char>(ch))) return false;
    return true;
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) acc |= std::uint64_t(buf[i]) << (8 * i);
    return static_cast<T>(acc);
}

template <typename T>
void write_le(std::ostream& out, T value) {
    auto acc = static_cast<std::uint64_t>(
        static_cast<typename std::make_unsigned<T>::type>(value));
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = (acc >> (8 * i)) & 0xff;
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

}  // namespace

EventStream parse_event_csv(std::istream& in) {
    EventStream stream;
    std::string line;
    std::size_t lineno = 0;
    std::vector<long long> fields;

    if (!std::getline(in, line)) throw MalformedRecord(1, "missing width,height header");
    ++lineno;
    if (!split_row(line, fields, 2) || fields[0] <= 0 || fields[1] <= 0 ||
        fields[0] > std::numeric_limits<std::uint16_t>::max() + 1 ||
        fields[1] > std::numeric_limits<std::uint16_t>::max() + 1) {
        throw MalformedRecord(lineno, "header must be width,height");
    }
    stream.width = int(fields[0]);
    stream.height = int(fields[1]);

    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        if (!split_row(line, fields, 4)) throw MalformedRecord(lineno, "expected t,x,y,p");
        if (fields[0] < 0) throw MalformedRecord(lineno, "timestamp must be non-negative");
        if (fields[1] < 0 || fields[2] < 0)
            throw MalformedRecord(lineno, "coordinates must be non-negative");
        if (fields[1] >= stream.width || fields[2] >= stream.height) {
            throw OutOfBounds("line " + std::to_string(lineno) + ": pixel (" +
                              std::to_string(fields[1]) + "," + std::to_string(fields[2]) +
                              ") outside " + std::to_string(stream.width) + "x" +
                              std::to_string(stream.height));
        }
        Event e;
        e.t = std::uint64_t(fields[0]);
        e.x = std::uint16_t(fields[1]);
        e.y = std::uint16_t(fields[2]);
        e.p = normalize_polarity(fields[3], lineno);
        stream.events.push_back(e);
    }
    finalize_stream(stream);
    return stream;
}

EventStream parse_event_binary(std::istream& in) {
    EventStream stream;
    auto width = read_le<std::uint32_t>(in);
    auto height = read_le<std::uint32_t>(in);
    auto count = read_le<std::uint64_t>(in);
    if (!in) throw MalformedRecord(0, "truncated binary header");
    if (width == 0 || height == 0 || width > 65536 || height > 65536)
        throw MalformedRecord(0, "implausible sensor size in binary header");
    stream.width = int(width);
    stream.height = int(height);
    stream.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Event e;
        e.t = read_le<std::uint64_t>(in);
        e.x = read_le<std::uint16_t>(in);
        e.y = read_le<std::uint16_t>(in);
        auto p = static_cast<std::int8_t>(read_le<std::uint8_t>(in));
        if (!in) throw MalformedRecord(i + 1, "truncated binary record");
        if (e.x >= stream.width || e.y >= stream.height) {
            throw OutOfBounds("record " + std::to_string(i + 1) + ": pixel (" +
                              std::to_string(e.x) + "," + std::to_string(e.y) + ") outside " +
                              std::to_string(stream.width) + "x" + std::to_string(stream.height));
        }
        e.p = normalize_polarity(p, i + 1);
        stream.events.push_back(e);
    }
    finalize_stream(stream);
    return stream;
}

EventStream parse_event_file(const std::string& path, EventFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open event file: " + path);
    return format == EventFormat::Csv ? parse_event_csv(in) : parse_event_binary(in);
}

EventStream parse_event_file(const std::string& path) {
    bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    return parse_event_file(path, csv ? EventFormat::Csv : EventFormat::Binary);
}

void write_event_csv(const EventStream& stream, std::ostream& out) {
    out << stream.width << ',' << stream.height << '\n';
    for (const Event& e : stream.events) {
        out << e.t << ',' << e.x << ',' << e.y << ',' << (e.p > 0 ? 1 : -1) << '\n';
    }
}

void write_event_binary(const EventStream& stream, std::ostream& out) {
    write_le<std::uint32_t>(out, std::uint32_t(stream.width));
    write_le<std::uint32_t>(out, std::uint32_t(stream.height));
    write_le<std::uint64_t>(out, stream.events.size());
    for (const Event& e : stream.events) {
        write_le<std::uint64_t>(out, e.t);
        write_le<std::uint16_t>(out, e.x);
        write_le<std::uint16_t>(out, e.y);
        write_le<std::uint8_t>(out, std::uint8_t(e.p));
    }
}

void write_event_file(const EventStream& stream, const std::string& path, EventFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write event file: " + path);
    if (format == EventFormat::Csv)
        write_event_csv(stream, out);
    else
        write_event_binary(stream, out);
}

namespace {

// Next PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(char(ch));
    }
    return tok;
}

}  // namespace

IntensityFrame read_frame(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open frame: " + path);
    std::string magic = pnm_token(in);
    if (magic != "P5") throw UnsupportedFormat("expected binary PGM (P5), got \"" + magic + "\"");
    std::string ws = pnm_token(in), hs = pnm_token(in), ms = pnm_token(in);
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(ws);
        height = std::stoi(hs);
        maxval = std::stoi(ms);
    } catch (const std::exception&) {
        throw UnsupportedFormat("unreadable PGM header in " + path);
    }
    if (width <= 0 || height <= 0) throw UnsupportedFormat("non-positive PGM dimensions");
    if (maxval != 255) throw UnsupportedFormat("PGM maxval must be 255");
    IntensityFrame frame;
    frame.width = width;
    frame.height = height;
    frame.pixels.resize(std::size_t(width) * height);
    in.read(reinterpret_cast<char*>(frame.pixels.data()),
            std::streamsize(frame.pixels.size()));
    if (std::size_t(in.gcount()) != frame.pixels.size())
        throw UnsupportedFormat("truncated PGM payload in " + path);
    return frame;
}

void write_frame(const IntensityFrame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write frame: " + path);
    out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              std::streamsize(frame.pixels.size()));
}

void write_frame(const BinaryFrame& frame, const std::string& path) {
    IntensityFrame gray;
    gray.width = frame.width;
    gray.height = frame.height;
    gray.pixels.resize(frame.bits.size());
    for (std::size_t i = 0; i < frame.bits.size(); ++i)
        gray.pixels[i] = frame.bits[i] ? 255 : 0;
    write_frame(gray, path);
}

BinaryFrame to_binary(const IntensityFrame& frame) {
    BinaryFrame out = make_binary(frame.width, frame.height, 0, frame.t_s);
    for (std::size_t i = 0; i < frame.pixels.size(); ++i)
        out.bits[i] = frame.pixels[i] > 127 ? 1 : 0;
    return out;
}

}  // namespace ebr
