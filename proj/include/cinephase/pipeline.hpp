#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cinephase/corners.hpp"
#include "cinephase/evaluation.hpp"
#include "cinephase/frame_io.hpp"
#include "cinephase/pyramid_flow.hpp"
#include "cinephase/trajectory_phase.hpp"

namespace cinephase {

/// Aggregated configuration for one end-to-end phase-detection run.
struct RunConfig {
    std::filesystem::path frames_dir;
    std::optional<double> fps;
    std::optional<Roi> roi;
    int start_frame = 0;  ///< detection frame; earlier frames are ignored
    DetectorConfig detector;
    FlowConfig flow;
    PhaseConfig phase;
    DistanceMode distance_mode = DistanceMode::Origin;

    /// Config-level checks that need no input data.
    void validate() const;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PhasesResult {
    std::string source_id;
    double fps = 15.0;
    int start_frame = 0;
    Roi roi;
    DistanceMode distance_mode = DistanceMode::Origin;
    KeyPointSet keypoints;
    TrajectoryBundle bundle;
    PhaseReport report;  ///< event frames are absolute sequence indices
    std::vector<StageTiming> timings;  ///< always ends with "total"
};

/// Runs detection, tracking, and phase analysis on an already-loaded sequence.
PhasesResult run_phases(const FrameSequence& seq, const RunConfig& cfg);

/// Loads the frame directory first; timings then include the load stage.
PhasesResult run_phases_from_dir(const RunConfig& cfg);

std::string phase_report_to_json(const PhasesResult& result);

void write_phase_report(const PhasesResult& result, const std::filesystem::path& file);
void write_trajectory_csv(const TrajectoryBundle& bundle, int start_frame,
                          const std::filesystem::path& file);
void write_keypoints_csv(const KeyPointSet& points, const std::filesystem::path& file);
void write_series_csv(const DistanceSeries& series, int start_frame,
                      const std::filesystem::path& file);

/// Reads a phases report back as an annotation set (reader label "auto").
AnnotationSet load_phase_report_events(const std::filesystem::path& file);

}  // namespace cinephase
