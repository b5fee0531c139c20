#pragma once

#include <functional>

#include "ebr/core.hpp"

namespace ebr {

// One pixel flip in the reconstructed video.
struct PixelUpdate {
    std::uint64_t t = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint8_t bit = 0;
};

struct PropagateStats {
    std::uint64_t events_processed = 0;
    std::uint64_t raw_flips = 0;
    std::uint64_t window_recomputes = 0;  // at most 9 per raw flip
};

// Rolling count-median smoother over the clipped 3x3 neighborhood. denoised(x)
// is 1 iff ones/window_size > 1/2 strictly; border windows hold 4 or 6 cells.
// Raw flips feed the filter, the filter never feeds back into raw.
class MedianState {
public:
    MedianState() = default;
    explicit MedianState(const BinaryFrame& init);

    // Writes `bit` into raw(x,y) and refreshes the at most nine windows that
    // contain the pixel. Appends a PixelUpdate for every denoised pixel that
    // changed, all stamped with time t.
    void apply(int x, int y, std::uint8_t bit, std::uint64_t t,
               std::vector<PixelUpdate>& out, PropagateStats* stats = nullptr);

    const BinaryFrame& raw() const { return raw_; }
    const BinaryFrame& denoised() const { return denoised_; }

private:
    BinaryFrame raw_;
    BinaryFrame denoised_;
    std::vector<std::uint8_t> ones_;   // ones in each pixel's clipped window
    std::vector<std::uint8_t> size_;   // window cell count: 4, 6 or 9
};

// Unidirectional integration of one event stream on top of an initial sharp
// frame. Per pixel, only events of the polarity that can flip the current
// bit are integrated (a zero pixel integrates positives, a one pixel
// negatives); the accumulator resets on each flip and opposite-polarity
// events leave all state untouched. With filter=true the emitted updates are
// the denoised flips, otherwise the raw flips.
struct PropagationResult {
    BinaryFrame initial;       // state at the start: denoised(init) when filtered
    BinaryFrame final_raw;
    BinaryFrame final_denoised;  // equals final_raw when filter=false
    std::vector<PixelUpdate> updates;
    PropagateStats stats;
};

PropagationResult propagate(const BinaryFrame& init, const EventStream& events, double contrast,
                            double theta_e, bool filter);

// Samples the update log at fps over [t0, t1]: frame i is the state at
// t0 + i/fps with every update of t <= sample time applied to init. Emits
// floor((t1-t0)*fps/1e6) + 1 frames.
std::vector<BinaryFrame> render_video(const std::vector<PixelUpdate>& updates,
                                      const BinaryFrame& init, double fps, std::uint64_t t0,
                                      std::uint64_t t1);

// Streaming form; frames are emitted in order and not retained.
void render_video_foreach(const std::vector<PixelUpdate>& updates, const BinaryFrame& init,
                          double fps, std::uint64_t t0, std::uint64_t t1,
                          const std::function<void(std::size_t, const BinaryFrame&)>& sink);

}  // namespace ebr
