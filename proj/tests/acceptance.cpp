// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line and the
// process exits nonzero if any failed. Tolerances are pinned next to the
// checks they guard.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ebr/binarize.hpp"
#include "ebr/core.hpp"
#include "ebr/fusion.hpp"
#include "ebr/metrics.hpp"
#include "ebr/sim.hpp"
#include "ebr/video.hpp"

using namespace ebr;

namespace {

struct check_failure {
    std::string msg;
};

// Always-on requirement: never compiled out in Release.
#define REQUIRE(cond, msg)                                        \
    do {                                                          \
        if (!(cond)) {                                            \
            std::ostringstream os_;                               \
            os_ << msg << "  (line " << __LINE__ << ")";          \
            throw check_failure{os_.str()};                       \
        }                                                         \
    } while (0)

int failures = 0;

void criterion(int index, const char* label, const std::function<void()>& body) {
    try {
        body();
        std::printf("[PASS] %d. %s\n", index, label);
    } catch (const check_failure& f) {
        std::printf("[FAIL] %d. %s: %s\n", index, label, f.msg.c_str());
        ++failures;
    } catch (const std::exception& e) {
        std::printf("[FAIL] %d. %s: unexpected exception: %s\n", index, label, e.what());
        ++failures;
    }
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- shared scene helpers ----

SceneSpec base_scene() {
    SceneSpec s;
    s.width = 64;
    s.height = 64;
    s.pattern_size = 16;
    s.duration_s = 0.1;
    s.exposure_s = 0.02;  // centered window [0.04, 0.06)
    return s;
}

SceneSpec linear_scene(PatternKind pat, double displacement_px) {
    SceneSpec s = base_scene();
    s.pattern = pat;
    s.trajectory = TrajectoryKind::Linear;
    s.vx = displacement_px / s.exposure_s;
    return s;
}

SceneSpec sine_scene(PatternKind pat, double amplitude) {
    SceneSpec s = base_scene();
    s.pattern = pat;
    s.trajectory = TrajectoryKind::Sinusoidal;
    s.amplitude = amplitude;
    s.period = 0.1;
    return s;
}

// Net pattern displacement across the exposure window.
double window_displacement(const SceneSpec& s) {
    const double t0 = exposure_start(s), t1 = t0 + s.exposure_s;
    if (s.trajectory == TrajectoryKind::Linear)
        return std::hypot(s.vx, s.vy) * s.exposure_s;
    const double two_pi = 2.0 * 3.14159265358979323846;
    return std::abs(s.amplitude *
                    (std::sin(two_pi * t1 / s.period) - std::sin(two_pi * t0 / s.period)));
}

struct scene_score {
    double mcc_v;
    double nrm_v;
};

scene_score reconstruct_and_score(const SceneSpec& spec, double assumed_contrast) {
    const double t_s = exposure_start(spec);
    const EventStream ev = emit_events(spec, 0.0, spec.duration_s);
    const IntensityFrame blurry = make_blurry(spec, t_s);
    const ThresholdSet th = estimate_thresholds(blurry, ev, assumed_contrast);
    const BinaryFrame rec = binarize_frame(blurry, ev, th);
    const ConfusionCounts c = confusion(rec, render_latent(spec, t_s).binary);
    return {mcc(c), nrm(c)};
}

// ---- level-split reference, a different algebraic route than the library ----

struct split_score {
    double sigma_b = 0.0;
    double sigma_w = 0.0;
    bool valid = false;
};

split_score score_split(const Histogram256& h, int theta) {
    split_score s;
    const double n = double(h.total);
    double w_f = 0, w_b = 0, m_f = 0, m_b = 0;
    for (int b = 0; b < 256; ++b) {
        const double p = double(h.counts[std::size_t(b)]) / n;
        if (b + 1 <= theta) {
            w_f += p;
            m_f += (b + 1) * p;
        } else {
            w_b += p;
            m_b += (b + 1) * p;
        }
    }
    if (w_f <= 0.0 || w_b <= 0.0) return s;
    m_f /= w_f;
    m_b /= w_b;
    double v = 0;
    for (int b = 0; b < 256; ++b) {
        const double p = double(h.counts[std::size_t(b)]) / n;
        if (p == 0.0) continue;
        const double mean = (b + 1 <= theta) ? m_f : m_b;
        v += p * (b + 1 - mean) * (b + 1 - mean);
    }
    s.valid = true;
    s.sigma_b = w_f * w_b * (m_f - m_b) * (m_f - m_b);
    s.sigma_w = v;
    return s;
}

int single_level_of(const Histogram256& h) {
    for (int b = 0; b < 256; ++b)
        if (h.counts[std::size_t(b)] > 0) return b + 1;
    return -1;
}

Histogram256 random_histogram(std::mt19937& rng, int style) {
    Histogram256 h;
    if (style == 0) {
        for (auto& c : h.counts) c = rng() % 64;
    } else if (style == 1) {
        const int spikes = 1 + int(rng() % 6);
        for (int i = 0; i < spikes; ++i) h.counts[rng() % 256] += 1 + rng() % 3000;
    } else if (style == 2) {
        const int c1 = 20 + int(rng() % 80), c2 = 150 + int(rng() % 80);
        for (int b = 0; b < 256; ++b) {
            const double d1 = (b - c1) / 10.0, d2 = (b - c2) / 25.0;
            h.counts[std::size_t(b)] =
                std::uint64_t(400.0 * std::exp(-d1 * d1) + 250.0 * std::exp(-d2 * d2));
        }
    } else {
        h.counts[rng() % 256] = 1 + rng() % 1000;  // single occupied level
    }
    for (auto c : h.counts) h.total += c;
    return h;
}

// ---- single-pixel propagation reference ----

struct flip_rec {
    std::uint64_t t;
    std::uint8_t bit;
};

std::vector<flip_rec> oracle_flips(std::uint8_t init, const std::vector<Event>& ev, double c,
                                   double theta_e) {
    double a_pos = 0.0, a_neg = 0.0;
    std::uint8_t cur = init;
    std::vector<flip_rec> out;
    for (const Event& e : ev) {
        if (cur == 0 && e.p > 0) {
            a_pos += c;
            if (a_pos > theta_e) {
                cur = 1;
                a_pos = a_neg = 0.0;
                out.push_back({e.t, 1});
            }
        } else if (cur == 1 && e.p < 0) {
            a_neg += c;
            if (a_neg > theta_e) {
                cur = 0;
                a_pos = a_neg = 0.0;
                out.push_back({e.t, 0});
            }
        }
    }
    return out;
}

EventStream stream_of(int w, int h, std::vector<Event> events) {
    EventStream s;
    s.width = w;
    s.height = h;
    s.events = std::move(events);
    finalize_stream(s);
    return s;
}

EventStream tail_from(const EventStream& events, std::uint64_t t_s) {
    EventStream out;
    out.width = events.width;
    out.height = events.height;
    for (const Event& e : events.events)
        if (e.t >= t_s) out.events.push_back(e);
    return out;
}

// Mean per-frame MCC of a rendered update log against the scene's latents.
double video_mean_mcc(const SceneSpec& spec, const PropagationResult& prop, double fps,
                      std::uint64_t t0, std::uint64_t t1, std::size_t* frame_count = nullptr) {
    double sum = 0.0;
    std::size_t n = 0;
    render_video_foreach(prop.updates, prop.initial, fps, t0, t1,
                         [&](std::size_t, const BinaryFrame& f) {
                             const BinaryFrame gt =
                                 render_latent(spec, double(f.t) / 1e6).binary;
                             sum += mcc(confusion(f, gt));
                             ++n;
                         });
    if (frame_count) *frame_count = n;
    return n ? sum / double(n) : 0.0;
}

}  // namespace

int main() {
    // 1. Sharp binary reconstruction across patterns, trajectories and blur
    //    magnitudes, with unsupervised thresholds.
    criterion(1, "reconstruction: MCC >= 0.95 and NRM <= 0.05 on ten blurred scenes", [] {
        const auto start = std::chrono::steady_clock::now();
        std::vector<SceneSpec> scenes = {
            linear_scene(PatternKind::Checkerboard, 2.0),
            linear_scene(PatternKind::Checkerboard, 6.0),
            linear_scene(PatternKind::Checkerboard, 10.0),
            linear_scene(PatternKind::Bar, 4.0),
            linear_scene(PatternKind::Bar, 8.0),
            sine_scene(PatternKind::Checkerboard, 1.8),
            sine_scene(PatternKind::Checkerboard, 4.0),
            sine_scene(PatternKind::Checkerboard, 8.4),
            sine_scene(PatternKind::Bar, 2.6),
            sine_scene(PatternKind::Bar, 6.0),
        };
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            scenes[i].seed = 100 + i;
            const double d = window_displacement(scenes[i]);
            REQUIRE(d >= 2.0 && d <= 10.6,
                    "scene " << i << " displacement " << d << " px out of range");
            const scene_score s = reconstruct_and_score(scenes[i], 0.35);
            REQUIRE(s.mcc_v >= 0.95, "scene " << i << " mcc " << s.mcc_v << " < 0.95");
            REQUIRE(s.nrm_v <= 0.05, "scene " << i << " nrm " << s.nrm_v << " > 0.05");
        }
        const double elapsed = seconds_since(start);
        REQUIRE(elapsed < 30.0, "ten scenes took " << elapsed << " s, budget is 30");
    });

    // 2. The reconstruction barely moves when the assumed per-event contrast
    //    is wrong by a factor of up to ~3.
    criterion(2, "contrast robustness: MCC spread <= 0.05 across assumed c", [] {
        const SceneSpec spec = linear_scene(PatternKind::Checkerboard, 6.0);
        const double assumed[] = {0.25, 0.35, 0.5, 0.75, 1.0};
        double lo = 2.0, hi = -2.0;
        for (double c : assumed) {
            const double m = reconstruct_and_score(spec, c).mcc_v;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        REQUIRE(hi - lo <= 0.05, "mcc spread " << (hi - lo) << " > 0.05 (range " << lo
                                               << ".." << hi << ")");
        REQUIRE(lo >= 0.95, "weakest assumed-contrast mcc " << lo << " < 0.95");
    });

    // 3. Kilohertz video over one long exposure, clean and under event noise;
    //    the median filter must strictly improve the noisy rendering.
    criterion(3, "video: mean MCC >= 0.9 at 1000 fps; filtering beats raw under noise", [] {
        SceneSpec v;
        v.width = 64;
        v.height = 64;
        v.pattern = PatternKind::Bar;
        v.pattern_size = 16;
        v.trajectory = TrajectoryKind::Linear;
        v.vx = 2.0;
        v.duration_s = 4.4;
        v.exposure_s = 4.0;
        v.exposure_start_s = 0.2;

        const std::uint64_t t0 = 200000, t1 = 4200000;

        const EventStream clean = emit_events(v, 0.0, v.duration_s);
        const IntensityFrame blurry = make_blurry(v, 0.2);
        const ThresholdSet th = estimate_thresholds(blurry, clean, 0.35);
        const BinaryFrame init = binarize_frame(blurry, clean, th);
        const PropagationResult prop =
            propagate(init, tail_from(clean, t0), th.contrast, th.theta_e, false);
        std::size_t frames = 0;
        const double mean_clean = video_mean_mcc(v, prop, 1000.0, t0, t1, &frames);
        REQUIRE(frames == 4001, "expected 4001 frames, rendered " << frames);
        REQUIRE(mean_clean >= 0.9, "clean mean mcc " << mean_clean << " < 0.9");

        SceneSpec noisy = v;
        noisy.spurious_rate = 2.0;
        noisy.seed = 2025;
        const EventStream ne = emit_events(noisy, 0.0, noisy.duration_s);
        const ThresholdSet th_n = estimate_thresholds(blurry, ne, 0.35);
        const BinaryFrame init_n = binarize_frame(blurry, ne, th_n);
        const EventStream tail_n = tail_from(ne, t0);
        const PropagationResult raw_prop =
            propagate(init_n, tail_n, th_n.contrast, th_n.theta_e, false);
        const PropagationResult filt_prop =
            propagate(init_n, tail_n, th_n.contrast, th_n.theta_e, true);
        REQUIRE(raw_prop.stats.raw_flips > prop.stats.raw_flips,
                "noise injected no extra flips to filter away");
        const double mean_raw = video_mean_mcc(noisy, raw_prop, 1000.0, t0, t1);
        const double mean_filt = video_mean_mcc(noisy, filt_prop, 1000.0, t0, t1);
        REQUIRE(mean_filt > mean_raw, "filtered mean mcc " << mean_filt
                                                           << " does not beat raw " << mean_raw);
        REQUIRE(mean_filt >= 0.9, "filtered mean mcc " << mean_filt << " < 0.9");
    });

    // 4. The incremental median state never drifts from a from-scratch
    //    recount of the final raw frame.
    criterion(4, "filter equivalence: incremental median == batch median, 100 runs", [] {
        std::mt19937 rng(404);
        for (int round = 0; round < 100; ++round) {
            BinaryFrame init = make_binary(32, 32, 0);
            for (auto& b : init.bits) b = std::uint8_t(rng() & 1);
            const std::size_t count = 2000 + rng() % 3000;
            std::vector<Event> ev(count);
            for (std::size_t i = 0; i < count; ++i)
                ev[i] = Event{std::uint64_t(i), std::uint16_t(rng() % 32),
                              std::uint16_t(rng() % 32),
                              (rng() & 1) ? std::int8_t(1) : std::int8_t(-1)};
            EventStream s = stream_of(32, 32, std::move(ev));
            // theta_e < c so nearly every armed event flips
            const PropagationResult filt = propagate(init, s, 0.35, 0.2, true);
            const PropagationResult plain = propagate(init, s, 0.35, 0.2, false);
            REQUIRE(filt.final_raw.bits == plain.final_raw.bits,
                    "round " << round << ": filtering disturbed the raw trajectory");
            const MedianState batch(filt.final_raw);
            REQUIRE(filt.final_denoised.bits == batch.denoised().bits,
                    "round " << round << ": incremental median diverged from recount");
        }
    });

    // 5. The histogram level split agrees with brute-force maximization of
    //    the between-class variance and of the Fisher ratio, and the variance
    //    decomposition holds at every admissible split.
    criterion(5, "level split: argmax agreement and variance identity, 1000 histograms", [] {
        std::mt19937 rng(505);
        for (int round = 0; round < 1000; ++round) {
            const Histogram256 h = random_histogram(rng, round % 4);
            if (h.total == 0) continue;
            const int got = otsu_threshold(h);

            int best_b = -1, best_l = -1;
            double top_b = -1.0, top_l = -1.0;
            const double n = double(h.total);
            double mu_total = 0.0;
            for (int b = 0; b < 256; ++b)
                mu_total += double(b + 1) * double(h.counts[std::size_t(b)]) / n;
            double sigma_total = 0.0;
            for (int b = 0; b < 256; ++b)
                sigma_total += (double(b + 1) - mu_total) * (double(b + 1) - mu_total) *
                               double(h.counts[std::size_t(b)]) / n;

            for (int theta = 1; theta <= 255; ++theta) {
                const split_score s = score_split(h, theta);
                if (!s.valid) continue;
                if (s.sigma_b > top_b) {
                    top_b = s.sigma_b;
                    best_b = theta;
                }
                const double lambda = s.sigma_w > 0.0
                                          ? s.sigma_b / s.sigma_w
                                          : std::numeric_limits<double>::infinity();
                if (lambda > top_l) {
                    top_l = lambda;
                    best_l = theta;
                }
                const double recomposed = s.sigma_b + s.sigma_w;
                REQUIRE(std::abs(recomposed - sigma_total) <=
                            1e-9 * std::max(1.0, sigma_total),
                        "round " << round << " theta " << theta
                                 << ": sigma_b + sigma_w = " << recomposed
                                 << " != sigma_total " << sigma_total);
            }
            if (best_b < 0) {
                REQUIRE(got == single_level_of(h),
                        "round " << round << ": single-level histogram split at " << got);
                continue;
            }
            REQUIRE(got == best_b, "round " << round << ": split " << got
                                            << " != variance argmax " << best_b);
            REQUIRE(got == best_l, "round " << round << ": split " << got
                                            << " != Fisher argmax " << best_l);
        }
    });

    // 6. Event-domain propagation is exactly the two-accumulator integrator.
    criterion(6, "propagation equivalence: 1000 random single-pixel replays", [] {
        std::mt19937 rng(606);
        std::uniform_real_distribution<double> c_dist(0.05, 1.5);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int round = 0; round < 1000; ++round) {
            const double c = c_dist(rng);
            const double theta_e = c * (0.5 + 7.5 * u01(rng));
            const std::uint8_t init_bit = std::uint8_t(rng() & 1);
            const std::size_t count = 1 + rng() % 200;
            std::vector<Event> ev(count);
            for (std::size_t i = 0; i < count; ++i)
                ev[i] = Event{std::uint64_t(10 + i), 0, 0,
                              (rng() & 1) ? std::int8_t(1) : std::int8_t(-1)};

            const std::vector<flip_rec> want = oracle_flips(init_bit, ev, c, theta_e);
            const PropagationResult got =
                propagate(make_binary(1, 1, init_bit), stream_of(1, 1, ev), c, theta_e, false);
            REQUIRE(got.updates.size() == want.size(),
                    "round " << round << ": " << got.updates.size() << " flips, oracle "
                             << want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                REQUIRE(got.updates[i].t == want[i].t && got.updates[i].bit == want[i].bit,
                        "round " << round << ": flip " << i << " mismatch");
            }

            // A prefix the pixel cannot integrate must be invisible.
            const std::size_t prefix = 1 + rng() % 5;
            std::vector<Event> padded;
            for (std::size_t i = 0; i < prefix; ++i)
                padded.push_back(Event{i, 0, 0, init_bit ? std::int8_t(1) : std::int8_t(-1)});
            padded.insert(padded.end(), ev.begin(), ev.end());
            const PropagationResult shifted = propagate(
                make_binary(1, 1, init_bit), stream_of(1, 1, padded), c, theta_e, false);
            REQUIRE(shifted.updates.size() == want.size(),
                    "round " << round << ": opposite-polarity prefix changed the flip count");
            for (std::size_t i = 0; i < want.size(); ++i)
                REQUIRE(shifted.updates[i].t == want[i].t,
                        "round " << round << ": prefix shifted flip " << i);
        }
    });

    // 7. Metric closed forms.
    criterion(7, "metrics: closed-form values within 1e-12", [] {
        const double tol = 1e-12;
        REQUIRE(std::abs(mcc(ConfusionCounts{50, 50, 0, 0}) - 1.0) <= tol, "perfect mcc");
        REQUIRE(std::isinf(psnr(ConfusionCounts{50, 50, 0, 0})), "perfect psnr");
        REQUIRE(nrm(ConfusionCounts{50, 50, 0, 0}) == 0.0, "perfect nrm");
        REQUIRE(std::abs(mcc(ConfusionCounts{0, 0, 30, 70}) + 1.0) <= tol, "inverted mcc");
        REQUIRE(mcc(ConfusionCounts{10, 0, 5, 0}) == 0.0, "constant prediction mcc");
        REQUIRE(std::abs(psnr(ConfusionCounts{4950, 4950, 50, 50}) - 20.0) <= tol,
                "1% error must be 20 dB, got " << psnr(ConfusionCounts{4950, 4950, 50, 50}));
        REQUIRE(std::abs(psnr(ConfusionCounts{25, 25, 25, 25}) - 10.0 * std::log10(2.0)) <= tol,
                "half-wrong psnr");
        REQUIRE(std::abs(nrm(ConfusionCounts{90, 100, 0, 10}) - 0.05) <= tol, "nrm 0.05 case");
    });

    // 8. Simulated event rate hits the documented regime and reconstruction
    //    keeps up with it.
    criterion(8, "throughput: ~2.3M ev/s generated; propagation over 1M ev/s, RTF > 1", [] {
        SceneSpec s;
        s.width = 128;
        s.height = 128;
        s.pattern = PatternKind::Bar;
        s.pattern_size = 8;
        s.trajectory = TrajectoryKind::Linear;
        s.vx = 200.0;
        s.duration_s = 0.5;
        s.exposure_s = 0.02;

        const EventStream ev = emit_events(s, 0.0, s.duration_s);
        const double span_s = 0.5;
        const double rate = double(ev.size()) / span_s;
        REQUIRE(rate >= 0.7 * 2.3e6 && rate <= 1.3 * 2.3e6,
                "generated " << rate << " ev/s, target 2.3e6 +-30%");

        const BinaryFrame init = render_latent(s, 0.0).binary;
        for (const bool filter : {false, true}) {
            const auto start = std::chrono::steady_clock::now();
            const PropagationResult prop = propagate(init, ev, 0.35, 0.7, filter);
            const double t = seconds_since(start);
            REQUIRE(prop.stats.events_processed == ev.size(), "event count drift");
            const double processed = double(ev.size()) / t;
            REQUIRE(processed >= 1e6, (filter ? "filtered" : "plain")
                                          << " propagation ran at " << processed << " ev/s");
            REQUIRE(span_s / t > 1.0, (filter ? "filtered" : "plain")
                                          << " real-time factor " << (span_s / t) << " <= 1");
        }
    });

    // 9. Work counters: every event is visited exactly once, decided pixels
    //    cost O(1), and filter maintenance is bounded by raw flips.
    criterion(9, "complexity counters: visits partition events, recomputes <= 9 per flip", [] {
        std::mt19937 rng(909);
        std::vector<Event> ev;
        for (int i = 0; i < 5000; ++i)
            ev.push_back(Event{std::uint64_t(i), std::uint16_t(rng() % 16),
                               std::uint16_t(rng() % 16),
                               (rng() & 1) ? std::int8_t(1) : std::int8_t(-1)});
        EventStream s = stream_of(16, 16, ev);

        ClassifyStats mid;
        classify_event_space(s, 0, 6000, 0.35, 0.7, &mid);
        REQUIRE(mid.active_visits + mid.decided_skips == 5000,
                "visits " << mid.active_visits << " + skips " << mid.decided_skips
                          << " != 5000");

        // With theta_e < c the first event decides each pixel, so the active
        // count equals the number of touched pixels and appending events can
        // only grow the skip side.
        ClassifyStats low;
        classify_event_space(s, 0, 6000, 0.35, 0.2, &low);
        std::vector<std::uint8_t> touched(256, 0);
        for (const Event& e : s.events) touched[std::size_t(e.y) * 16 + e.x] = 1;
        std::uint64_t distinct = 0;
        for (auto b : touched) distinct += b;
        REQUIRE(low.active_visits == distinct,
                "active " << low.active_visits << " != touched pixels " << distinct);

        std::vector<Event> extended = ev;
        for (int i = 0; i < 2000; ++i)
            extended.push_back(Event{std::uint64_t(5000 + i), std::uint16_t(rng() % 16),
                                     std::uint16_t(rng() % 16),
                                     (rng() & 1) ? std::int8_t(1) : std::int8_t(-1)});
        ClassifyStats ext;
        classify_event_space(stream_of(16, 16, extended), 0, 8000, 0.35, 0.2, &ext);
        REQUIRE(ext.active_visits == low.active_visits,
                "post-decision events changed active visits: " << ext.active_visits << " vs "
                                                               << low.active_visits);
        REQUIRE(ext.active_visits + ext.decided_skips == 7000, "extended partition broke");

        const PropagationResult plain =
            propagate(make_binary(16, 16, 0), s, 0.35, 0.7, false);
        REQUIRE(plain.stats.events_processed == 5000, "propagation missed events");
        REQUIRE(plain.stats.window_recomputes == 0, "plain propagation touched windows");
        const PropagationResult filt = propagate(make_binary(16, 16, 0), s, 0.35, 0.7, true);
        REQUIRE(filt.stats.raw_flips == plain.stats.raw_flips, "filter changed raw flips");
        REQUIRE(filt.stats.window_recomputes <= 9 * filt.stats.raw_flips,
                "recomputes " << filt.stats.window_recomputes << " exceed 9 * "
                              << filt.stats.raw_flips);
    });

    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
