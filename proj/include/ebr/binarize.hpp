#pragma once

#include "ebr/core.hpp"
#include "ebr/fusion.hpp"

namespace ebr {

// Work counters for the event-space pass. Every event in the window lands in
// exactly one bucket, so active_visits + decided_skips equals the windowed
// event count.
struct ClassifyStats {
    std::uint64_t active_visits = 0;  // events applied to an undecided pixel
    std::uint64_t decided_skips = 0;  // events ignored after the pixel crossed
};

// Event-space stage. Per pixel, two accumulators start at zero and each event
// adds `contrast` to the accumulator of its polarity; the first accumulator
// to strictly exceed theta_e decides the pixel (rising wins: Zero, falling
// wins: One). Pixels where neither accumulator crosses stay Undefined.
// Events after the decision are skipped in O(1).
TriStateImage classify_event_space(const EventStream& events, std::uint64_t t_s,
                                   std::uint64_t exposure_us, double contrast, double theta_e,
                                   ClassifyStats* stats = nullptr);

// Image-space stage: pixels flagged in undefined_mask (entries 0/1) are set
// to Zero when frame(x) <= theta_I and One otherwise; all other pixels are
// left Undefined so the two stages partition the domain for merging.
TriStateImage classify_image_space(const IntensityFrame& frame, double theta_I,
                                   const std::vector<std::uint8_t>& undefined_mask);

std::vector<std::uint8_t> undefined_mask(const TriStateImage& image);

// Logical union of the two disjoint stages. Each pixel must be defined in
// exactly one input; an overlap or a gap is an internal invariant violation.
BinaryFrame merge_stages(const TriStateImage& event_result, const TriStateImage& image_result,
                         std::uint64_t t_s);

// Full dual-stage binarization of one exposure.
BinaryFrame binarize_frame(const IntensityFrame& frame, const EventStream& events,
                           const ThresholdSet& thresholds, ClassifyStats* stats = nullptr);

}  // namespace ebr
