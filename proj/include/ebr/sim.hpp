#pragma once

#include <string>

#include "ebr/core.hpp"

namespace ebr {

enum class PatternKind : std::uint8_t { Checkerboard, Bar, Tag };
enum class TrajectoryKind : std::uint8_t { Linear, Sinusoidal };

// Deterministic synthetic scene: a binary planar pattern translated over the
// sensor, rendered with nearest-neighbor sampling so every latent frame is
// exactly two-leveled.
struct SceneSpec {
    int width = 64;
    int height = 64;

    PatternKind pattern = PatternKind::Checkerboard;
    int pattern_size = 16;  // cell / bar / tag block edge, pixels

    int dark = 20;
    int bright = 220;

    TrajectoryKind trajectory = TrajectoryKind::Linear;
    double vx = 0.0;         // px/s, linear
    double vy = 0.0;
    double amplitude = 0.0;  // px, sinusoidal (x axis)
    double period = 1.0;     // s, sinusoidal

    double duration_s = 0.1;
    double contrast = 0.35;
    double exposure_s = 0.02;

    double drop_prob = 0.0;             // per-event Bernoulli loss
    double spurious_rate = 0.0;         // events / pixel / s, random polarity
    std::uint64_t jitter_us = 0;        // uniform +-jitter on timestamps

    std::uint64_t seed = 0;

    double exposure_start_s = -1.0;  // <0 selects the centered default
    int blur_samples = 64;
    double gt_fps = 0.0;  // extra ground-truth frames in the CLI; 0 = only t_s
};

SceneSpec scene_from_json(const std::string& text);
SceneSpec scene_from_json_file(const std::string& path);
std::string scene_to_json(const SceneSpec& spec);

// Resolved exposure start: the explicit value, or centered in the sequence.
double exposure_start(const SceneSpec& spec);

struct LatentFrame {
    IntensityFrame intensity;
    BinaryFrame binary;  // pattern membership; bright cells are 1
};

LatentFrame render_latent(const SceneSpec& spec, double t);

// Mean of blur_samples latents at t_s + i*T/K for i in [0,K), rounded to
// 8 bits. With K=1 this is the latent at t_s.
IntensityFrame make_blurry(const SceneSpec& spec, double t_s);

// Ideal level-crossing events over [t0, t1) seconds. Each pixel tracks
// r = log(max(L,1)) against a reference ladder anchored at r(t0) with rung
// spacing `contrast`; an instantaneous level step of log-gap g emits
// floor(g/contrast) events. Noise (drop, spurious, jitter) is applied from
// the scene seed; the result is stably time-sorted.
EventStream emit_events(const SceneSpec& spec, double t0, double t1);

}  // namespace ebr
