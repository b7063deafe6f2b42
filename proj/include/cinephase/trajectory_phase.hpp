#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cinephase/pyramid_flow.hpp"

namespace cinephase {

enum class Phase { ED, ES };

const char* to_string(Phase p);

enum class DistanceMode {
    Origin,    ///< distance of the mean tracked coordinate to the image origin
    Anchored,  ///< displacement of the mean coordinate from its frame-0 value
};

/// Scalar series derived from the tracked mean coordinate, one value per frame.
struct DistanceSeries {
    std::vector<double> d;
    std::vector<int> active_counts;  ///< points contributing per frame, non-increasing
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(d.size()); }
};

struct PhaseEvent {
    Phase phase = Phase::ED;
    int frame = 0;
    double value = 0.0;  ///< raw series value at the event frame
};

struct PhaseConfig {
    /// Minimum frame separation between same-phase events; defaults to
    /// ceil(0.35 * fps) when unset.
    std::optional<int> min_spacing;
    /// Centered moving-average width used for detection only; 1 disables it.
    int smooth_window = 1;

    void validate() const;
    int resolved_min_spacing(double fps) const;
};

struct PhaseReport {
    DistanceSeries series;
    std::vector<PhaseEvent> events;  ///< sorted by frame, alternating unless warned
    double fps = 15.0;
    int min_spacing = 0;
    int smooth_window = 1;
    std::vector<std::string> warnings;

    std::vector<int> frames_of(Phase p) const;
};

/// Mean-coordinate distance per frame over still-tracked points. Frames with no
/// surviving point carry the last defined value and record a warning.
DistanceSeries distance_series(const TrajectoryBundle& bundle,
                               DistanceMode mode = DistanceMode::Origin);

/// Labels local maxima of the series as ED and local minima as ES. Plateaus
/// resolve to their first frame, endpoints are never events, and same-phase
/// candidates closer than the refractory spacing keep only the more extreme one.
PhaseReport detect_phase_events(const DistanceSeries& series, double fps, const PhaseConfig& cfg);

}  // namespace cinephase
