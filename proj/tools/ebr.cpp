// Command-line front end: threshold estimation, dual-stage binarization,
// video reconstruction, scene simulation, metrics, and a small benchmark.
//
// Exit codes: 0 success, 2 bad input, 3 internal invariant violation.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ebr/binarize.hpp"
#include "ebr/core.hpp"
#include "ebr/fusion.hpp"
#include "ebr/io.hpp"
#include "ebr/metrics.hpp"
#include "ebr/sim.hpp"
#include "ebr/video.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ExposureArgs {
    std::int64_t t_start = -1;     // microseconds; <0 = derive from the stream
    std::int64_t exposure_us = -1; // microseconds; <0 = derive from the stream
};

// PGM frames carry no exposure metadata, so the window defaults to the full
// event-stream span unless overridden.
void resolve_exposure(ebr::IntensityFrame& frame, const ebr::EventStream& events,
                      const ExposureArgs& args) {
    if (args.t_start >= 0) {
        frame.t_s = std::uint64_t(args.t_start);
    } else {
        frame.t_s = events.empty() ? 0 : events.events.front().t;
    }
    if (args.exposure_us >= 0) {
        if (args.exposure_us == 0) throw ebr::InputError("exposure must be positive");
        frame.exposure_us = std::uint64_t(args.exposure_us);
    } else if (events.empty() || events.events.back().t < frame.t_s) {
        frame.exposure_us = 1;
    } else {
        frame.exposure_us = events.events.back().t - frame.t_s + 1;
    }
}

json threshold_json(const ebr::ThresholdSet& th) {
    return json{{"c", th.contrast},
                {"theta_star", th.theta_star},
                {"theta_I", th.theta_I},
                {"theta_e", th.theta_e}};
}

ebr::ThresholdSet resolve_thresholds(const ebr::IntensityFrame& frame,
                                     const ebr::EventStream& events, double contrast,
                                     double theta_e, double theta_i) {
    const bool manual_e = theta_e > 0.0;
    const bool manual_i = theta_i >= 0.0;
    if (manual_e != manual_i)
        throw ebr::InputError("--theta-e and --theta-i must be given together");
    if (manual_e) {
        ebr::ThresholdSet th;
        th.contrast = contrast;
        th.theta_star = 0;
        th.theta_e = theta_e;
        th.theta_I = theta_i;
        th.source = ebr::ThresholdSource::Manual;
        return th;
    }
    return ebr::estimate_thresholds(frame, events, contrast);
}

json metrics_json(const ebr::ConfusionCounts& c) {
    json out;
    out["mcc"] = ebr::mcc(c);
    const double p = ebr::psnr(c);
    if (std::isinf(p))
        out["psnr"] = "inf";
    else
        out["psnr"] = p;
    out["nrm"] = ebr::nrm(c);
    return out;
}

std::vector<fs::path> sorted_pgms(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string frame_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06zu.pgm", index);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run(int argc, char** argv) {
    CLI::App app{"Binary image and video reconstruction from events"};
    app.require_subcommand(1);

    std::string events_path, frame_path, pred_path, gt_path, pred_dir, gt_dir, spec_path,
        updates_path;
    std::string out_path = "B.pgm";
    double contrast = 0.35;
    double theta_e = -1.0, theta_i = -1.0;
    double fps = 1000.0;
    bool filter = false;
    int reps = 3;
    ExposureArgs exposure;

    auto add_exposure_flags = [&exposure](CLI::App* cmd) {
        cmd->add_option("--t-start", exposure.t_start,
                        "Exposure start in microseconds (default: first event)");
        cmd->add_option("--exposure-us", exposure.exposure_us,
                        "Exposure duration in microseconds (default: stream span)");
    };

    CLI::App* c_threshold = app.add_subcommand("threshold", "Estimate thresholds, print JSON");
    c_threshold->add_option("--events", events_path, "Event file (.csv or binary)")->required();
    c_threshold->add_option("--frame", frame_path, "Blurry frame (PGM)")->required();
    c_threshold->add_option("--contrast", contrast, "Event contrast")->capture_default_str();
    add_exposure_flags(c_threshold);

    CLI::App* c_binarize = app.add_subcommand("binarize", "Reconstruct one sharp binary frame");
    c_binarize->add_option("--events", events_path, "Event file")->required();
    c_binarize->add_option("--frame", frame_path, "Blurry frame (PGM)")->required();
    c_binarize->add_option("--contrast", contrast, "Event contrast")->capture_default_str();
    c_binarize->add_option("--theta-e", theta_e, "Manual event threshold");
    c_binarize->add_option("--theta-i", theta_i, "Manual image threshold");
    c_binarize->add_option("--out", out_path, "Output PGM path")->capture_default_str();
    add_exposure_flags(c_binarize);

    CLI::App* c_video = app.add_subcommand("video", "Reconstruct a binary video");
    c_video->add_option("--events", events_path, "Event file")->required();
    c_video->add_option("--frame", frame_path, "Blurry frame (PGM)")->required();
    c_video->add_option("--fps", fps, "Output frame rate")->capture_default_str();
    c_video->add_flag("--filter", filter, "Apply the asynchronous median filter");
    c_video->add_option("--contrast", contrast, "Event contrast")->capture_default_str();
    c_video->add_option("--theta-e", theta_e, "Manual event threshold");
    c_video->add_option("--theta-i", theta_i, "Manual image threshold");
    c_video->add_option("--out", out_path, "Output directory")->required();
    c_video->add_option("--updates", updates_path, "Also dump the update log as t,x,y,bit");
    add_exposure_flags(c_video);

    CLI::App* c_simulate = app.add_subcommand("simulate", "Render a synthetic scene");
    c_simulate->add_option("--spec", spec_path, "Scene spec JSON")->required();
    c_simulate->add_option("--out", out_path, "Output directory")->required();

    CLI::App* c_metrics = app.add_subcommand("metrics", "Compare binary frames");
    c_metrics->add_option("--pred", pred_path, "Predicted frame (PGM)");
    c_metrics->add_option("--gt", gt_path, "Ground-truth frame (PGM)");
    c_metrics->add_option("--pred-dir", pred_dir, "Directory of predicted frames");
    c_metrics->add_option("--gt-dir", gt_dir, "Directory of ground-truth frames");

    CLI::App* c_bench = app.add_subcommand("bench", "Measure reconstruction throughput");
    c_bench->add_option("--events", events_path, "Event file")->required();
    c_bench->add_option("--frame", frame_path, "Blurry frame (PGM)")->required();
    c_bench->add_option("--contrast", contrast, "Event contrast")->capture_default_str();
    c_bench->add_option("--reps", reps, "Timing repetitions")->capture_default_str();
    add_exposure_flags(c_bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (c_threshold->parsed() || c_binarize->parsed() || c_video->parsed() ||
        c_bench->parsed()) {
        ebr::EventStream events = ebr::parse_event_file(events_path);
        ebr::IntensityFrame frame = ebr::read_frame(frame_path);
        if (frame.width != events.width || frame.height != events.height)
            throw ebr::DimensionMismatch("frame and event stream differ in resolution");
        resolve_exposure(frame, events, exposure);

        if (c_threshold->parsed()) {
            const ebr::ThresholdSet th = ebr::estimate_thresholds(frame, events, contrast);
            std::cout << threshold_json(th).dump(2) << '\n';
            return 0;
        }

        if (c_binarize->parsed()) {
            const ebr::ThresholdSet th =
                resolve_thresholds(frame, events, contrast, theta_e, theta_i);
            const ebr::BinaryFrame result = ebr::binarize_frame(frame, events, th);
            ebr::write_frame(result, out_path);
            return 0;
        }

        if (c_video->parsed()) {
            const ebr::ThresholdSet th =
                resolve_thresholds(frame, events, contrast, theta_e, theta_i);
            const ebr::BinaryFrame init = ebr::binarize_frame(frame, events, th);
            const std::uint64_t t0 = frame.t_s;
            const std::uint64_t t1 = frame.t_s + frame.exposure_us;
            ebr::EventStream tail;
            tail.width = events.width;
            tail.height = events.height;
            for (const ebr::Event& e : events.events)
                if (e.t >= t0 && e.t < t1) tail.events.push_back(e);
            const ebr::PropagationResult prop =
                ebr::propagate(init, tail, th.contrast, th.theta_e, filter);
            fs::create_directories(out_path);
            std::size_t count = 0;
            ebr::render_video_foreach(
                prop.updates, prop.initial, fps, t0, t1,
                [&](std::size_t index, const ebr::BinaryFrame& f) {
                    ebr::write_frame(f, (fs::path(out_path) / frame_name(index)).string());
                    ++count;
                });

            json manifest;
            manifest["fps"] = fps;
            manifest["t0"] = t0;
            manifest["t1"] = t1;
            manifest["count"] = count;
            manifest["thresholds"] = threshold_json(th);
            std::ofstream mf(fs::path(out_path) / "manifest.json");
            mf << manifest.dump(2) << '\n';

            if (!updates_path.empty()) {
                std::ofstream uf(updates_path);
                for (const ebr::PixelUpdate& u : prop.updates)
                    uf << u.t << ',' << u.x << ',' << u.y << ',' << int(u.bit) << '\n';
            }
            return 0;
        }

        // bench
        if (reps < 1) throw ebr::InputError("--reps must be at least 1");
        const double span_s =
            events.empty() ? 0.0
                           : double(events.events.back().t - events.events.front().t) / 1e6;
        const double n_events = double(events.size());

        double image_time = 0.0;
        ebr::BinaryFrame init;
        for (int r = 0; r < reps; ++r) {
            const auto start = std::chrono::steady_clock::now();
            const ebr::ThresholdSet th = ebr::estimate_thresholds(frame, events, contrast);
            init = ebr::binarize_frame(frame, events, th);
            image_time += seconds_since(start);
        }
        image_time /= reps;

        const ebr::ThresholdSet th = ebr::estimate_thresholds(frame, events, contrast);
        double plain_time = 0.0, filtered_time = 0.0;
        for (int r = 0; r < reps; ++r) {
            const auto start = std::chrono::steady_clock::now();
            ebr::propagate(init, events, th.contrast, th.theta_e, false);
            plain_time += seconds_since(start);
        }
        plain_time /= reps;
        for (int r = 0; r < reps; ++r) {
            const auto start = std::chrono::steady_clock::now();
            ebr::propagate(init, events, th.contrast, th.theta_e, true);
            filtered_time += seconds_since(start);
        }
        filtered_time /= reps;

        auto phase = [&](double t) {
            return json{{"runtime_s", t},
                        {"events_per_s", t > 0.0 ? n_events / t : 0.0},
                        {"real_time_factor", t > 0.0 ? span_s / t : 0.0}};
        };
        json report;
        report["events"] = events.size();
        report["span_s"] = span_s;
        report["reps"] = reps;
        report["image_total"] = phase(image_time);
        report["video"] = phase(plain_time);
        report["video_filtered"] = phase(filtered_time);
        std::cout << report.dump(2) << '\n';
        return 0;
    }

    if (c_simulate->parsed()) {
        const ebr::SceneSpec spec = ebr::scene_from_json_file(spec_path);
        fs::create_directories(out_path);
        const double t_s = ebr::exposure_start(spec);

        const ebr::EventStream events = ebr::emit_events(spec, 0.0, spec.duration_s);
        std::ofstream ef(fs::path(out_path) / "events.csv");
        ebr::write_event_csv(events, ef);

        ebr::write_frame(ebr::make_blurry(spec, t_s),
                         (fs::path(out_path) / "blurry.pgm").string());

        std::size_t gt_count = 0;
        if (spec.gt_fps > 0.0) {
            const double step = 1.0 / spec.gt_fps;
            for (double t = t_s; t <= t_s + spec.exposure_s + 1e-12; t += step) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "gt_%06zu.pgm", gt_count++);
                ebr::write_frame(ebr::render_latent(spec, t).binary,
                                 (fs::path(out_path) / buf).string());
            }
        } else {
            ebr::write_frame(ebr::render_latent(spec, t_s).binary,
                             (fs::path(out_path) / "gt_000000.pgm").string());
            gt_count = 1;
        }

        std::ofstream sf(fs::path(out_path) / "spec-echo.json");
        sf << ebr::scene_to_json(spec);
        return 0;
    }

    if (!c_metrics->parsed()) throw ebr::InternalError("unhandled subcommand");
    const bool single = !pred_path.empty() || !gt_path.empty();
    const bool batch = !pred_dir.empty() || !gt_dir.empty();
    if (single == batch)
        throw ebr::InputError("metrics needs either --pred/--gt or --pred-dir/--gt-dir");
    if (single) {
        if (pred_path.empty() || gt_path.empty())
            throw ebr::InputError("--pred and --gt must be given together");
        const ebr::ConfusionCounts c = ebr::confusion(
            ebr::to_binary(ebr::read_frame(pred_path)), ebr::to_binary(ebr::read_frame(gt_path)));
        std::cout << metrics_json(c).dump(2) << '\n';
        return 0;
    }
    if (pred_dir.empty() || gt_dir.empty())
        throw ebr::InputError("--pred-dir and --gt-dir must be given together");
    const std::vector<fs::path> preds = sorted_pgms(pred_dir);
    const std::vector<fs::path> gts = sorted_pgms(gt_dir);
    if (preds.empty()) throw ebr::InputError("no .pgm frames in " + pred_dir);
    if (preds.size() != gts.size())
        throw ebr::InputError("prediction and ground-truth directories differ in frame count");
    double sum_mcc = 0.0, sum_psnr = 0.0, sum_nrm = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const ebr::ConfusionCounts c =
            ebr::confusion(ebr::to_binary(ebr::read_frame(preds[i].string())),
                           ebr::to_binary(ebr::read_frame(gts[i].string())));
        sum_mcc += ebr::mcc(c);
        sum_psnr += ebr::psnr(c);
        sum_nrm += ebr::nrm(c);
    }
    const double n = double(preds.size());
    json out;
    out["frames"] = preds.size();
    out["mcc"] = sum_mcc / n;
    if (std::isinf(sum_psnr))
        out["psnr"] = "inf";
    else
        out["psnr"] = sum_psnr / n;
    out["nrm"] = sum_nrm / n;
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ebr::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const ebr::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
