#include "cinephase/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cinephase/errors.hpp"

namespace cinephase {

namespace {

using json = nlohmann::json;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* mode_name(DistanceMode mode) {
    return mode == DistanceMode::Origin ? "origin" : "anchored";
}

}  // namespace

void RunConfig::validate() const {
    if (fps && *fps <= 0.0) {
        throw config_error("fps must be > 0, got " + std::to_string(*fps));
    }
    if (start_frame < 0) {
        throw config_error("start frame must be >= 0, got " + std::to_string(start_frame));
    }
    detector.validate();
    flow.validate();
    phase.validate();
}

PhasesResult run_phases(const FrameSequence& seq, const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.roi) {
        throw config_error("a roi is required (x0,y0,w,h)");
    }
    validate_sequence(seq);
    if (cfg.start_frame > seq.num_frames() - 2) {
        throw config_error("start frame " + std::to_string(cfg.start_frame) +
                           " leaves fewer than 2 frames of a " + std::to_string(seq.num_frames()) +
                           "-frame sequence");
    }

    const auto t_total = std::chrono::steady_clock::now();
    PhasesResult result;
    result.source_id = seq.source_id;
    result.fps = seq.fps;
    result.start_frame = cfg.start_frame;
    result.distance_mode = cfg.distance_mode;

    const FrameSequence* work = &seq;
    FrameSequence sliced;
    if (cfg.start_frame > 0) {
        sliced.frames.assign(seq.frames.begin() + cfg.start_frame, seq.frames.end());
        sliced.fps = seq.fps;
        sliced.source_id = seq.source_id;
        work = &sliced;
    }
    result.roi = validate_roi(*cfg.roi, work->frames.front());

    auto t_stage = std::chrono::steady_clock::now();
    const CornerResponseMap rmap = corner_response(work->frames.front(), result.roi, cfg.detector);
    result.keypoints = select_key_points(rmap, cfg.detector);
    result.timings.push_back({"detect", seconds_since(t_stage)});

    t_stage = std::chrono::steady_clock::now();
    result.bundle = track_sequence(*work, result.keypoints, cfg.flow);
    result.timings.push_back({"track", seconds_since(t_stage)});

    t_stage = std::chrono::steady_clock::now();
    const DistanceSeries series = distance_series(result.bundle, cfg.distance_mode);
    result.report = detect_phase_events(series, work->fps, cfg.phase);
    for (PhaseEvent& e : result.report.events) {
        e.frame += cfg.start_frame;
    }
    result.timings.push_back({"analyze", seconds_since(t_stage)});
    result.timings.push_back({"total", seconds_since(t_total)});
    return result;
}

PhasesResult run_phases_from_dir(const RunConfig& cfg) {
    cfg.validate();
    const auto t_total = std::chrono::steady_clock::now();
    const auto t_load = std::chrono::steady_clock::now();
    const FrameSequence seq = load_sequence(cfg.frames_dir, cfg.fps);
    const double load_seconds = seconds_since(t_load);

    PhasesResult result = run_phases(seq, cfg);
    result.timings.pop_back();  // replace the inner total with one that covers the load
    result.timings.insert(result.timings.begin(), {"load", load_seconds});
    result.timings.push_back({"total", seconds_since(t_total)});
    return result;
}

std::string phase_report_to_json(const PhasesResult& result) {
    json j;
    j["source_id"] = result.source_id;
    j["fps"] = result.fps;
    j["start_frame"] = result.start_frame;
    j["ed_frames"] = result.report.frames_of(Phase::ED);
    j["es_frames"] = result.report.frames_of(Phase::ES);
    j["d_series"] = result.report.series.d;
    j["active_counts"] = result.report.series.active_counts;
    std::vector<std::string> warnings = result.report.series.warnings;
    warnings.insert(warnings.end(), result.report.warnings.begin(), result.report.warnings.end());
    warnings.insert(warnings.end(), result.bundle.warnings.begin(), result.bundle.warnings.end());
    j["warnings"] = warnings;
    j["config"] = {
        {"roi", {result.roi.x0, result.roi.y0, result.roi.w, result.roi.h}},
        {"min_spacing", result.report.min_spacing},
        {"smooth_window", result.report.smooth_window},
        {"distance_mode", mode_name(result.distance_mode)},
        {"num_keypoints", static_cast<int>(result.keypoints.size())},
    };
    return j.dump(2) + "\n";
}

void write_phase_report(const PhasesResult& result, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) {
        throw io_error("failed to write " + file.string());
    }
    out << phase_report_to_json(result);
}

void write_trajectory_csv(const TrajectoryBundle& bundle, int start_frame,
                          const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) {
        throw io_error("failed to write " + file.string());
    }
    out << "frame,point_id,x,y,status\n";
    out << std::fixed << std::setprecision(3);
    for (int f = 0; f < bundle.num_frames; ++f) {
        for (int p = 0; p < bundle.num_points(); ++p) {
            if (!bundle.tracked_at(p, f)) continue;  // lost points emit no rows
            const Vec2 pos = bundle.positions[p][f];
            out << (f + start_frame) << ',' << p << ',' << pos.x << ',' << pos.y << ','
                << to_string(TrackState::Tracked) << '\n';
        }
    }
}

void write_keypoints_csv(const KeyPointSet& points, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) {
        throw io_error("failed to write " + file.string());
    }
    out << "id,x,y,response\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << i << ',' << points[i].x << ',' << points[i].y << ',' << points[i].response << '\n';
    }
}

void write_series_csv(const DistanceSeries& series, int start_frame,
                      const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) {
        throw io_error("failed to write " + file.string());
    }
    out << "frame,d,active\n";
    for (int f = 0; f < series.size(); ++f) {
        out << (f + start_frame) << ',' << series.d[f] << ',' << series.active_counts[f] << '\n';
    }
}

AnnotationSet load_phase_report_events(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw io_error("failed to read " + file.string() + ": cannot open file");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error("failed to read " + file.string() + ": " + e.what());
    }
    AnnotationSet set;
    try {
        const std::string source_id = j.at("source_id").get<std::string>();
        for (const auto& f : j.at("ed_frames")) {
            set.push_back({source_id, Phase::ED, f.get<int>(), "auto"});
        }
        for (const auto& f : j.at("es_frames")) {
            set.push_back({source_id, Phase::ES, f.get<int>(), "auto"});
        }
    } catch (const json::exception& e) {
        throw io_error("failed to read " + file.string() + ": " + e.what());
    }
    return set;
}

}  // namespace cinephase
