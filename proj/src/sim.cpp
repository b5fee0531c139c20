#include "ebr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace ebr {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stateless tag-cell bit so every render of the same scene agrees.
bool tag_bit(std::uint64_t seed, std::int64_t bx, std::int64_t by) {
    std::uint64_t h = splitmix64(seed ^ 0x7461672d63656c6cull);
    h = splitmix64(h ^ std::uint64_t(bx));
    h = splitmix64(h ^ std::uint64_t(by));
    return (h & 1) != 0;
}

struct Offset {
    double dx;
    double dy;
};

Offset trajectory_offset(const SceneSpec& spec, double t) {
    if (spec.trajectory == TrajectoryKind::Linear) return {spec.vx * t, spec.vy * t};
    const double phase = 2.0 * M_PI * t / spec.period;
    return {spec.amplitude * std::sin(phase), 0.0};
}

double max_speed(const SceneSpec& spec) {
    if (spec.trajectory == TrajectoryKind::Linear) return std::hypot(spec.vx, spec.vy);
    return 2.0 * M_PI * spec.amplitude / spec.period;
}

// Pattern membership at one pixel center, nearest-neighbor.
bool bright_at(const SceneSpec& spec, int x, int y, double t) {
    const Offset d = trajectory_offset(spec, t);
    const double u = double(x) + 0.5 - d.dx;
    const double v = double(y) + 0.5 - d.dy;
    const double s = double(spec.pattern_size);
    switch (spec.pattern) {
        case PatternKind::Checkerboard: {
            const auto cu = std::int64_t(std::floor(u / s));
            const auto cv = std::int64_t(std::floor(v / s));
            return ((cu + cv) & 1) == 0;
        }
        case PatternKind::Bar: {
            const auto cu = std::int64_t(std::floor(u / s));
            return (cu & 1) == 0;
        }
        case PatternKind::Tag:
        default: {
            const auto cu = std::int64_t(std::floor(u / s));
            const auto cv = std::int64_t(std::floor(v / s));
            return tag_bit(spec.seed, cu, cv);
        }
    }
}

void validate(const SceneSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) throw InputError("scene size must be positive");
    if (spec.width > 65535 || spec.height > 65535)
        throw InputError("scene size exceeds the event coordinate range");
    if (spec.pattern_size < 2) throw InputError("pattern size must be at least 2 px");
    if (spec.dark < 0 || spec.bright > 255 || spec.dark >= spec.bright)
        throw InputError("levels must satisfy 0 <= dark < bright <= 255");
    if (spec.duration_s <= 0.0) throw InputError("duration must be positive");
    if (spec.exposure_s <= 0.0) throw InputError("exposure must be positive");
    if (spec.exposure_s > spec.duration_s)
        throw InputError("exposure cannot exceed the sequence duration");
    if (spec.contrast <= 0.0) throw InputError("contrast must be positive");
    if (spec.drop_prob < 0.0 || spec.drop_prob > 1.0)
        throw InputError("drop probability must lie in [0,1]");
    if (spec.spurious_rate < 0.0) throw InputError("spurious rate must be non-negative");
    if (spec.blur_samples < 1) throw InputError("blur sample count must be at least 1");
    if (spec.trajectory == TrajectoryKind::Sinusoidal && spec.period <= 0.0)
        throw InputError("sinusoidal period must be positive");
    const double t_s = spec.exposure_start_s;
    if (t_s >= 0.0 && t_s + spec.exposure_s > spec.duration_s + 1e-12)
        throw InputError("exposure window must lie inside the sequence");
}

double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

// Knuth's product method; rates here stay small.
std::uint64_t poisson_draw(std::mt19937_64& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double prod = uniform01(rng);
    while (prod > limit) {
        ++k;
        prod *= uniform01(rng);
    }
    return k;
}

}  // namespace

double exposure_start(const SceneSpec& spec) {
    if (spec.exposure_start_s >= 0.0) return spec.exposure_start_s;
    return 0.5 * (spec.duration_s - spec.exposure_s);
}

SceneSpec scene_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("scene JSON does not parse: ") + e.what());
    }
    SceneSpec spec;
    try {
        spec.width = j.at("width").get<int>();
        spec.height = j.at("height").get<int>();

        const json& p = j.at("pattern");
        const std::string kind = p.at("type").get<std::string>();
        if (kind == "checkerboard")
            spec.pattern = PatternKind::Checkerboard;
        else if (kind == "bar")
            spec.pattern = PatternKind::Bar;
        else if (kind == "tag")
            spec.pattern = PatternKind::Tag;
        else
            throw InputError("unknown pattern type: " + kind);
        spec.pattern_size = p.at("size").get<int>();

        const json& lv = j.at("levels");
        spec.dark = lv.at("dark").get<int>();
        spec.bright = lv.at("bright").get<int>();

        const json& tr = j.at("trajectory");
        const std::string traj = tr.at("type").get<std::string>();
        if (traj == "linear") {
            spec.trajectory = TrajectoryKind::Linear;
            spec.vx = tr.at("vx").get<double>();
            spec.vy = tr.at("vy").get<double>();
        } else if (traj == "sinusoidal") {
            spec.trajectory = TrajectoryKind::Sinusoidal;
            spec.amplitude = tr.at("amplitude").get<double>();
            spec.period = tr.at("period").get<double>();
        } else {
            throw InputError("unknown trajectory type: " + traj);
        }

        spec.duration_s = j.at("duration").get<double>();
        spec.contrast = j.value("contrast", 0.35);
        spec.exposure_s = j.at("exposure").get<double>();

        if (j.contains("noise")) {
            const json& nz = j.at("noise");
            spec.drop_prob = nz.value("drop_prob", 0.0);
            spec.spurious_rate = nz.value("spurious_rate", 0.0);
            spec.jitter_us = nz.value("jitter_us", std::uint64_t(0));
        }

        spec.seed = j.value("seed", std::uint64_t(0));
        spec.exposure_start_s = j.value("exposure_start", -1.0);
        spec.blur_samples = j.value("blur_samples", 64);
        spec.gt_fps = j.value("gt_fps", 0.0);
    } catch (const json::exception& e) {
        throw InputError(std::string("scene JSON is missing fields: ") + e.what());
    }
    validate(spec);
    return spec;
}

SceneSpec scene_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scene spec: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scene_from_json(buf.str());
}

std::string scene_to_json(const SceneSpec& spec) {
    json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    json p;
    p["type"] = spec.pattern == PatternKind::Checkerboard ? "checkerboard"
                : spec.pattern == PatternKind::Bar        ? "bar"
                                                          : "tag";
    p["size"] = spec.pattern_size;
    j["pattern"] = p;
    j["levels"] = {{"dark", spec.dark}, {"bright", spec.bright}};
    json tr;
    if (spec.trajectory == TrajectoryKind::Linear) {
        tr["type"] = "linear";
        tr["vx"] = spec.vx;
        tr["vy"] = spec.vy;
    } else {
        tr["type"] = "sinusoidal";
        tr["amplitude"] = spec.amplitude;
        tr["period"] = spec.period;
    }
    j["trajectory"] = tr;
    j["duration"] = spec.duration_s;
    j["contrast"] = spec.contrast;
    j["exposure"] = spec.exposure_s;
    j["noise"] = {{"drop_prob", spec.drop_prob},
                  {"spurious_rate", spec.spurious_rate},
                  {"jitter_us", spec.jitter_us}};
    j["seed"] = spec.seed;
    j["exposure_start"] = exposure_start(spec);
    j["blur_samples"] = spec.blur_samples;
    j["gt_fps"] = spec.gt_fps;
    return j.dump(2) + "\n";
}

LatentFrame render_latent(const SceneSpec& spec, double t) {
    validate(spec);
    LatentFrame out;
    out.intensity.width = out.binary.width = spec.width;
    out.intensity.height = out.binary.height = spec.height;
    const std::size_t n = std::size_t(spec.width) * spec.height;
    out.intensity.pixels.resize(n);
    out.binary.bits.resize(n);
    const auto t_us = std::uint64_t(std::llround(t * 1e6));
    out.intensity.t_s = out.binary.t = t_us;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const bool bright = bright_at(spec, x, y, t);
            const std::size_t i = std::size_t(y) * spec.width + x;
            out.intensity.pixels[i] = std::uint8_t(bright ? spec.bright : spec.dark);
            out.binary.bits[i] = bright ? 1 : 0;
        }
    }
    return out;
}

IntensityFrame make_blurry(const SceneSpec& spec, double t_s) {
    validate(spec);
    const std::size_t n = std::size_t(spec.width) * spec.height;
    std::vector<std::uint32_t> sum(n, 0);
    const int k = spec.blur_samples;
    for (int i = 0; i < k; ++i) {
        const double t = t_s + double(i) * spec.exposure_s / double(k);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                sum[std::size_t(y) * spec.width + x] +=
                    bright_at(spec, x, y, t) ? std::uint32_t(spec.bright)
                                             : std::uint32_t(spec.dark);
            }
        }
    }
    IntensityFrame frame;
    frame.width = spec.width;
    frame.height = spec.height;
    frame.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        frame.pixels[i] = std::uint8_t(std::llround(double(sum[i]) / double(k)));
    frame.t_s = std::uint64_t(std::llround(t_s * 1e6));
    frame.exposure_us = std::uint64_t(std::llround(spec.exposure_s * 1e6));
    return frame;
}

EventStream emit_events(const SceneSpec& spec, double t0, double t1) {
    validate(spec);
    if (t0 < 0.0 || t1 < t0) throw InputError("event window must be non-negative and ordered");
    EventStream stream;
    stream.width = spec.width;
    stream.height = spec.height;

    const double r_dark = std::log(std::max(double(spec.dark), 1.0));
    const double r_bright = std::log(std::max(double(spec.bright), 1.0));
    const double span = t1 - t0;
    const auto t1_us = std::uint64_t(std::llround(t1 * 1e6));

    const double speed = max_speed(spec);
    std::size_t steps = 0;
    if (speed > 0.0 && span > 0.0) {
        // At most 0.1 px of motion per step keeps boundary crossings one per
        // step (pattern cells are >= 2 px wide); sub-step double crossings at
        // a sinusoid turnaround are sub-0.1 px slivers and are dropped.
        steps = std::size_t(std::ceil(span * speed / 0.1));
        steps = std::max<std::size_t>(steps, 8);
    }
    const double dt = steps ? span / double(steps) : 0.0;

    std::mt19937_64 rng(spec.seed);
    std::vector<Event> pixel_events;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            pixel_events.clear();
            bool cur = bright_at(spec, x, y, t0);
            const double anchor = cur ? r_bright : r_dark;
            std::int64_t rung = 0;  // reference level index over the anchor
            double t_prev = t0;
            for (std::size_t s = 1; s <= steps; ++s) {
                const double t_next = s == steps ? t1 : t0 + double(s) * dt;
                const bool v = bright_at(spec, x, y, t_next);
                if (v != cur) {
                    // Earliest change lies in (t_prev, t_next]; refine to
                    // microsecond resolution.
                    double lo = t_prev, hi = t_next;
                    while (hi - lo > 0.25e-6) {
                        const double mid = 0.5 * (lo + hi);
                        if (bright_at(spec, x, y, mid) != cur)
                            hi = mid;
                        else
                            lo = mid;
                    }
                    const double delta = (v ? r_bright : r_dark) - anchor;
                    const auto target = v ? std::int64_t(std::floor(delta / spec.contrast))
                                          : std::int64_t(std::ceil(delta / spec.contrast));
                    const auto t_us = std::uint64_t(std::llround(hi * 1e6));
                    if (t_us < t1_us) {
                        while (rung < target) {
                            pixel_events.push_back(
                                Event{t_us, std::uint16_t(x), std::uint16_t(y), 1});
                            ++rung;
                        }
                        while (rung > target) {
                            pixel_events.push_back(
                                Event{t_us, std::uint16_t(x), std::uint16_t(y), -1});
                            --rung;
                        }
                    } else {
                        rung = target;
                    }
                    cur = v;
                }
                t_prev = t_next;
            }

            if (spec.drop_prob > 0.0) {
                std::size_t kept = 0;
                for (std::size_t i = 0; i < pixel_events.size(); ++i) {
                    if (uniform01(rng) >= spec.drop_prob)
                        pixel_events[kept++] = pixel_events[i];
                }
                pixel_events.resize(kept);
            }

            if (spec.spurious_rate > 0.0 && span > 0.0) {
                const std::uint64_t extra = poisson_draw(rng, spec.spurious_rate * span);
                for (std::uint64_t i = 0; i < extra; ++i) {
                    const double t = t0 + uniform01(rng) * span;
                    const std::int8_t p = (rng() & 1) ? std::int8_t(1) : std::int8_t(-1);
                    pixel_events.push_back(Event{std::uint64_t(std::llround(t * 1e6)),
                                                 std::uint16_t(x), std::uint16_t(y), p});
                }
            }

            if (spec.jitter_us > 0) {
                const auto j = std::int64_t(spec.jitter_us);
                for (Event& e : pixel_events) {
                    const std::int64_t shift = std::int64_t(rng() % (2 * j + 1)) - j;
                    const auto t = std::int64_t(e.t) + shift;
                    e.t = std::uint64_t(std::max<std::int64_t>(t, 0));
                }
            }

            stream.events.insert(stream.events.end(), pixel_events.begin(),
                                 pixel_events.end());
        }
    }
    finalize_stream(stream);
    return stream;
}

}  // namespace ebr
