#include "ebr/core.hpp"

#include <algorithm>

namespace ebr {

EventStream slice_exposure(const EventStream& stream, std::uint64_t t_s,
                           std::uint64_t exposure_us) {
    if (exposure_us == 0) throw InputError("exposure duration must be positive");
    EventStream out;
    out.width = stream.width;
    out.height = stream.height;
    const std::uint64_t t_end = t_s + exposure_us;
    for (const Event& e : stream.events) {
        if (e.t >= t_s && e.t < t_end) out.events.push_back(e);
    }
    return out;
}

void finalize_stream(EventStream& stream) {
    for (const Event& e : stream.events) {
        if (e.x >= stream.width || e.y >= stream.height) {
            throw OutOfBounds("event at t=" + std::to_string(e.t) + " hits pixel (" +
                              std::to_string(e.x) + "," + std::to_string(e.y) +
                              ") outside " + std::to_string(stream.width) + "x" +
                              std::to_string(stream.height));
        }
        if (e.p != 1 && e.p != -1) {
            throw InternalError("unnormalized polarity " + std::to_string(int(e.p)));
        }
    }
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
}

}  // namespace ebr
