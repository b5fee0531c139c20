#include "ebr/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ebr {

EdgeImage first_edge_image(const EventStream& events, double contrast, std::uint64_t t_s,
                           std::uint64_t exposure_us) {
    if (contrast <= 0.0) throw InputError("contrast must be positive");
    const std::size_t n = std::size_t(events.width) * events.height;
    // Signed count of the leading same-polarity run per pixel; a pixel stops
    // accumulating once an opposite-polarity event arrives.
    std::vector<std::int32_t> lead(n, 0);
    std::vector<std::uint8_t> stopped(n, 0);
    const std::uint64_t t_end = t_s + exposure_us;
    for (const Event& e : events.events) {
        if (e.t < t_s || e.t >= t_end) continue;
        const std::size_t i = std::size_t(e.y) * events.width + e.x;
        if (stopped[i]) continue;
        if (lead[i] == 0)
            lead[i] = e.p;
        else if ((lead[i] > 0) == (e.p > 0))
            lead[i] += e.p;
        else
            stopped[i] = 1;
    }
    EdgeImage out;
    out.width = events.width;
    out.height = events.height;
    out.values.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = contrast * double(lead[i]);
    return out;
}

EdgeImage suppress_outliers(EdgeImage edges) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : edges.values) {
        if (v != 0.0) {
            sum += v;
            ++n;
        }
    }
    if (n < 2) return edges;
    const double mean = sum / double(n);
    double var = 0.0;
    for (double v : edges.values) {
        if (v != 0.0) var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / double(n));
    for (double& v : edges.values) {
        if (v != 0.0 && std::abs(v - mean) > 3.0 * sd) v = 0.0;
    }
    return edges;
}

RealImage latent_from_edges(const EdgeImage& edges) {
    double pos_max = -std::numeric_limits<double>::infinity();
    double neg_max = -std::numeric_limits<double>::infinity();  // closest to zero
    for (double v : edges.values) {
        if (v > 0.0) pos_max = std::max(pos_max, v);
        if (v < 0.0) neg_max = std::max(neg_max, v);
    }
    RealImage out;
    out.width = edges.width;
    out.height = edges.height;
    out.values.resize(edges.values.size(), 0.0);
    for (std::size_t i = 0; i < edges.values.size(); ++i) {
        const double v = edges.values[i];
        if (v > 0.0)
            out.values[i] = std::exp(pos_max - v);
        else if (v < 0.0)
            out.values[i] = std::exp(neg_max - v);
    }
    return out;
}

RealImage minmax_normalize(const RealImage& image, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != image.values.size())
        throw DimensionMismatch("normalization mask does not match image");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        any = true;
        lo = std::min(lo, image.values[i]);
        hi = std::max(hi, image.values[i]);
    }
    if (!any) throw EmptyDomain("empty normalization domain");
    RealImage out;
    out.width = image.width;
    out.height = image.height;
    out.values.assign(image.values.size(), 0.0);
    if (hi > lo) {
        const double scale = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) out.values[i] = (image.values[i] - lo) * scale;
        }
    }
    return out;
}

RealImage minmax_normalize(const RealImage& image) {
    return minmax_normalize(image, std::vector<std::uint8_t>(image.values.size(), 1));
}

RealImage fuse(const RealImage& latent_norm, const RealImage& blurry_norm) {
    if (latent_norm.width != blurry_norm.width || latent_norm.height != blurry_norm.height)
        throw DimensionMismatch("fusion inputs differ in shape");
    RealImage out;
    out.width = latent_norm.width;
    out.height = latent_norm.height;
    out.values.resize(latent_norm.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] =
            latent_norm.values[i] > 0.0 ? latent_norm.values[i] : blurry_norm.values[i];
    }
    return out;
}

Histogram256 quantize_histogram(const RealImage& image) {
    Histogram256 h;
    for (double v : image.values) {
        int level = int(std::floor(v * 255.0));
        level = std::clamp(level, 0, 255);
        ++h.counts[std::size_t(level)];
        ++h.total;
    }
    return h;
}

int otsu_threshold(const Histogram256& histogram) {
    if (histogram.total == 0) throw EmptyHistogram("histogram holds no samples");
    const double n = double(histogram.total);
    // Bin b participates as level b+1.
    double mu_total = 0.0;
    for (int b = 0; b < 256; ++b) mu_total += double(b + 1) * double(histogram.counts[b]) / n;

    int best = -1;
    double best_sigma = -1.0;
    double omega = 0.0, mu = 0.0;
    for (int theta = 1; theta <= 255; ++theta) {
        const double p = double(histogram.counts[theta - 1]) / n;
        omega += p;
        mu += double(theta) * p;
        if (omega <= 0.0 || omega >= 1.0) continue;
        const double d = mu_total * omega - mu;
        const double sigma_b = d * d / (omega * (1.0 - omega));
        if (sigma_b > best_sigma) {
            best_sigma = sigma_b;
            best = theta;
        }
    }
    if (best < 0) {
        // Single occupied bin: every split is one-sided. Report that level.
        for (int b = 0; b < 256; ++b)
            if (histogram.counts[b] > 0) return b + 1;
        throw InternalError("histogram total/count mismatch");
    }
    return best;
}

ThresholdSet estimate_thresholds(const IntensityFrame& frame, const EventStream& events,
                                 double contrast) {
    if (contrast <= 0.0) throw InputError("contrast must be positive");
    if (frame.width != events.width || frame.height != events.height)
        throw DimensionMismatch("frame and event stream differ in resolution");

    ThresholdSet out;
    out.contrast = contrast;

    const std::size_t n = frame.pixels.size();
    if (n == 0) {
        otsu_threshold(Histogram256{});  // raises EmptyHistogram
    }

    EdgeImage edges = suppress_outliers(
        first_edge_image(events, contrast, frame.t_s, frame.exposure_us));

    double max_abs_edge = 0.0;
    for (double v : edges.values) max_abs_edge = std::max(max_abs_edge, std::abs(v));

    RealImage latent = latent_from_edges(edges);
    std::vector<std::uint8_t> latent_mask(n, 0);
    bool any_latent = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (latent.values[i] > 0.0) {
            latent_mask[i] = 1;
            any_latent = true;
        }
    }
    RealImage latent_norm;
    if (any_latent) {
        latent_norm = minmax_normalize(latent, latent_mask);
    } else {
        // No usable edges: the fusion degenerates to the frame histogram.
        latent_norm.width = frame.width;
        latent_norm.height = frame.height;
        latent_norm.values.assign(n, 0.0);
    }

    RealImage gray;
    gray.width = frame.width;
    gray.height = frame.height;
    gray.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) gray.values[i] = double(frame.pixels[i]);
    RealImage blurry_norm = minmax_normalize(gray);

    const Histogram256 h = quantize_histogram(fuse(latent_norm, blurry_norm));
    out.theta_star = otsu_threshold(h);

    std::uint8_t lo = 255, hi = 0;
    for (std::uint8_t v : frame.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out.theta_I = double(out.theta_star) * (double(hi) - double(lo)) / 255.0 + double(lo);

    if (max_abs_edge > 0.0) {
        out.theta_e = double(out.theta_star) / 256.0 * max_abs_edge;
        out.source = ThresholdSource::Auto;
    } else {
        out.theta_e = 2.0 * contrast;
        out.source = ThresholdSource::Fallback;
    }
    return out;
}

}  // namespace ebr
