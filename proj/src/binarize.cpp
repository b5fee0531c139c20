#include "ebr/binarize.hpp"

namespace ebr {

TriStateImage classify_event_space(const EventStream& events, std::uint64_t t_s,
                                   std::uint64_t exposure_us, double contrast, double theta_e,
                                   ClassifyStats* stats) {
    if (contrast <= 0.0) throw InputError("contrast must be positive");
    if (theta_e <= 0.0) throw InputError("theta_e must be positive");
    const std::size_t n = std::size_t(events.width) * events.height;
    // Accumulators are event counts; the crossing test scales by the
    // contrast once, so repeated addition cannot drift.
    std::vector<std::uint32_t> pos(n, 0), neg(n, 0);
    TriStateImage out = make_tristate(events.width, events.height);
    const std::uint64_t t_end = t_s + exposure_us;
    for (const Event& e : events.events) {
        if (e.t < t_s || e.t >= t_end) continue;
        const std::size_t i = std::size_t(e.y) * events.width + e.x;
        if (out.values[i] != TriState::Undefined) {
            if (stats) ++stats->decided_skips;
            continue;
        }
        if (stats) ++stats->active_visits;
        if (e.p > 0) {
            ++pos[i];
            if (contrast * double(pos[i]) > theta_e) out.values[i] = TriState::Zero;
        } else {
            ++neg[i];
            if (contrast * double(neg[i]) > theta_e) out.values[i] = TriState::One;
        }
    }
    return out;
}

TriStateImage classify_image_space(const IntensityFrame& frame, double theta_I,
                                   const std::vector<std::uint8_t>& undefined_mask) {
    if (undefined_mask.size() != frame.pixels.size())
        throw DimensionMismatch("undefined mask does not match frame");
    TriStateImage out = make_tristate(frame.width, frame.height);
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        if (!undefined_mask[i]) continue;
        out.values[i] = double(frame.pixels[i]) <= theta_I ? TriState::Zero : TriState::One;
    }
    return out;
}

std::vector<std::uint8_t> undefined_mask(const TriStateImage& image) {
    std::vector<std::uint8_t> mask(image.values.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = image.values[i] == TriState::Undefined ? 1 : 0;
    return mask;
}

BinaryFrame merge_stages(const TriStateImage& event_result, const TriStateImage& image_result,
                         std::uint64_t t_s) {
    if (event_result.width != image_result.width || event_result.height != image_result.height)
        throw DimensionMismatch("stage results differ in shape");
    BinaryFrame out = make_binary(event_result.width, event_result.height, 0, t_s);
    for (std::size_t i = 0; i < out.bits.size(); ++i) {
        const bool ev = event_result.values[i] != TriState::Undefined;
        const bool im = image_result.values[i] != TriState::Undefined;
        if (ev && im) throw InternalError("stage domains overlap");
        if (!ev && !im) throw InternalError("stage domains leave a gap");
        out.bits[i] = std::uint8_t(ev ? event_result.values[i] : image_result.values[i]);
    }
    return out;
}

BinaryFrame binarize_frame(const IntensityFrame& frame, const EventStream& events,
                           const ThresholdSet& thresholds, ClassifyStats* stats) {
    if (frame.width != events.width || frame.height != events.height)
        throw DimensionMismatch("frame and event stream differ in resolution");
    if (frame.exposure_us == 0) throw InputError("frame exposure must be positive");
    TriStateImage by_events =
        classify_event_space(events, frame.t_s, frame.exposure_us, thresholds.contrast,
                             thresholds.theta_e, stats);
    TriStateImage by_image =
        classify_image_space(frame, thresholds.theta_I, undefined_mask(by_events));
    return merge_stages(by_events, by_image, frame.t_s);
}

}  // namespace ebr
