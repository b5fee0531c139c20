#include "ebr/video.hpp"

#include <algorithm>
#include <cmath>

namespace ebr {

MedianState::MedianState(const BinaryFrame& init) : raw_(init), denoised_(init) {
    const int w = init.width, h = init.height;
    ones_.assign(std::size_t(w) * h, 0);
    size_.assign(std::size_t(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t ones = 0, cells = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    ++cells;
                    ones += init.at(nx, ny);
                }
            }
            const std::size_t i = std::size_t(y) * w + x;
            ones_[i] = ones;
            size_[i] = cells;
            denoised_.bits[i] = std::uint8_t(2 * ones > cells ? 1 : 0);
        }
    }
}

void MedianState::apply(int x, int y, std::uint8_t bit, std::uint64_t t,
                        std::vector<PixelUpdate>& out, PropagateStats* stats) {
    const int w = raw_.width, h = raw_.height;
    const std::size_t i = std::size_t(y) * w + x;
    if (raw_.bits[i] == bit) return;
    const int delta = bit ? 1 : -1;
    raw_.bits[i] = bit;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t j = std::size_t(ny) * w + nx;
            ones_[j] = std::uint8_t(int(ones_[j]) + delta);
            if (stats) ++stats->window_recomputes;
            const std::uint8_t nd = std::uint8_t(2 * ones_[j] > size_[j] ? 1 : 0);
            if (nd != denoised_.bits[j]) {
                denoised_.bits[j] = nd;
                out.push_back(PixelUpdate{t, std::uint16_t(nx), std::uint16_t(ny), nd});
            }
        }
    }
}

PropagationResult propagate(const BinaryFrame& init, const EventStream& events, double contrast,
                            double theta_e, bool filter) {
    if (init.width != events.width || init.height != events.height)
        throw DimensionMismatch("initial frame and event stream differ in resolution");
    if (contrast <= 0.0) throw InputError("contrast must be positive");
    if (theta_e <= 0.0) throw InputError("theta_e must be positive");

    PropagationResult res;
    const std::size_t n = init.bits.size();
    BinaryFrame raw = init;
    // Counts of integrated events since the last flip; the armed polarity is
    // the one able to move the pixel away from its current bit.
    std::vector<std::uint32_t> pending(n, 0);
    MedianState median;
    if (filter) {
        median = MedianState(init);
        res.initial = median.denoised();
    } else {
        res.initial = init;
    }

    for (const Event& e : events.events) {
        ++res.stats.events_processed;
        const std::size_t i = std::size_t(e.y) * events.width + e.x;
        const std::uint8_t cur = filter ? median.raw().bits[i] : raw.bits[i];
        if (cur == 0 && e.p > 0) {
            ++pending[i];
            if (contrast * double(pending[i]) > theta_e) {
                pending[i] = 0;
                ++res.stats.raw_flips;
                if (filter) {
                    median.apply(e.x, e.y, 1, e.t, res.updates, &res.stats);
                } else {
                    raw.bits[i] = 1;
                    res.updates.push_back(PixelUpdate{e.t, e.x, e.y, 1});
                }
            }
        } else if (cur == 1 && e.p < 0) {
            ++pending[i];
            if (contrast * double(pending[i]) > theta_e) {
                pending[i] = 0;
                ++res.stats.raw_flips;
                if (filter) {
                    median.apply(e.x, e.y, 0, e.t, res.updates, &res.stats);
                } else {
                    raw.bits[i] = 0;
                    res.updates.push_back(PixelUpdate{e.t, e.x, e.y, 0});
                }
            }
        }
        // Opposite-polarity events fall through without touching any state.
    }

    if (filter) {
        res.final_raw = median.raw();
        res.final_denoised = median.denoised();
    } else {
        res.final_raw = raw;
        res.final_denoised = raw;
    }
    return res;
}

void render_video_foreach(const std::vector<PixelUpdate>& updates, const BinaryFrame& init,
                          double fps, std::uint64_t t0, std::uint64_t t1,
                          const std::function<void(std::size_t, const BinaryFrame&)>& sink) {
    if (fps <= 0.0) throw InputError("fps must be positive");
    if (t1 < t0) throw InputError("frame span must not be negative");
    const double step_us = 1e6 / fps;
    const std::size_t frames = std::size_t(std::floor(double(t1 - t0) * fps / 1e6)) + 1;
    BinaryFrame state = init;
    std::size_t next = 0;
    for (std::size_t f = 0; f < frames; ++f) {
        const double sample = double(t0) + double(f) * step_us;
        while (next < updates.size() && double(updates[next].t) <= sample) {
            const PixelUpdate& u = updates[next];
            state.bits[std::size_t(u.y) * state.width + u.x] = u.bit;
            ++next;
        }
        state.t = std::uint64_t(std::llround(sample));
        sink(f, state);
    }
}

std::vector<BinaryFrame> render_video(const std::vector<PixelUpdate>& updates,
                                      const BinaryFrame& init, double fps, std::uint64_t t0,
                                      std::uint64_t t1) {
    std::vector<BinaryFrame> frames;
    render_video_foreach(updates, init, fps, t0, t1,
                         [&](std::size_t, const BinaryFrame& frame) { frames.push_back(frame); });
    return frames;
}

}  // namespace ebr
