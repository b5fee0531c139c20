#pragma once

#include <array>
#include <cstdint>

#include "ebr/core.hpp"

namespace ebr {

// Unsupervised threshold estimation.
//
// The event threshold theta_e (log-intensity units) and the image threshold
// theta_I (gray levels) are picked jointly: a latent image reconstructed from
// the first integration edges is fused with the blurry frame, and a single
// Fisher-discriminant level split of the fused histogram is mapped back into
// both domains.

struct Histogram256 {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;
};

enum class ThresholdSource : std::uint8_t { Auto, Manual, Fallback };

struct ThresholdSet {
    double contrast = 0.35;
    // Discriminant level in [1,255]. Bin b of the histogram participates as
    // level b+1, so a split at theta_star puts bins 0..theta_star-1 in the
    // dark class.
    int theta_star = 0;
    double theta_I = 0.0;  // gray levels, [0,255]
    double theta_e = 0.0;  // log-intensity units, > 0
    ThresholdSource source = ThresholdSource::Auto;
};

// Per-pixel signed sum c*p_k over the exposure window, accumulated in time
// order and stopped at the first event whose polarity differs from the
// pixel's first event. Pixels without events are 0. Insensitive to global
// time shifts applied to both the stream and the window.
EdgeImage first_edge_image(const EventStream& events, double contrast, std::uint64_t t_s,
                           std::uint64_t exposure_us);

// Zeroes pixels farther than three standard deviations from the mean, both
// statistics taken over the nonzero pixels only (population form). Images
// with fewer than two nonzero pixels pass through unchanged.
EdgeImage suppress_outliers(EdgeImage edges);

// exp(E_max - E) per polarity: for rising pixels E_max is the largest
// positive edge, for falling pixels it is the negative edge closest to zero.
// Pixels with E = 0 stay 0. Deeper falling edges map brighter.
RealImage latent_from_edges(const EdgeImage& edges);

// (v - min)/(max - min) over the masked pixels; unmasked pixels become 0.
// A constant masked population maps to all zeros. mask entries are 0/1 and
// an all-zero mask raises EmptyDomain.
RealImage minmax_normalize(const RealImage& image, const std::vector<std::uint8_t>& mask);

// Masked by the whole domain.
RealImage minmax_normalize(const RealImage& image);

// out(x) = latent(x) where latent(x) > 0, else blurry(x). Shapes must match.
RealImage fuse(const RealImage& latent_norm, const RealImage& blurry_norm);

// level = floor(v * 255), clamped to [0,255].
Histogram256 quantize_histogram(const RealImage& image);

// Smallest level theta in [1,255] maximizing the between-class variance
// sigma_B^2(theta); levels with a one-sided split (omega 0 or 1) are skipped.
// A single-level histogram returns that level. Empty input raises
// EmptyHistogram.
int otsu_threshold(const Histogram256& histogram);

// Full pipeline: edges -> outlier suppression -> latent -> normalization ->
// fusion with the normalized frame -> quantization -> level split. theta_I
// is mapped back to raw gray units via theta_star*(I_max-I_min)/255 + I_min,
// theta_e via (theta_star/256)*max|E|. Streams with no event in the exposure
// window (or fully suppressed edges) fall back to theta_e = 2*contrast.
ThresholdSet estimate_thresholds(const IntensityFrame& frame, const EventStream& events,
                                 double contrast);

}  // namespace ebr
