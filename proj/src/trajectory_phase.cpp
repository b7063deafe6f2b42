#include "cinephase/trajectory_phase.hpp"

#include <algorithm>
#include <cmath>

#include "cinephase/errors.hpp"

namespace cinephase {

const char* to_string(Phase p) { return p == Phase::ED ? "ED" : "ES"; }

void PhaseConfig::validate() const {
    if (min_spacing && *min_spacing < 0) {
        throw config_error("min_spacing must be >= 0, got " + std::to_string(*min_spacing));
    }
    if (smooth_window < 1 || smooth_window % 2 == 0) {
        throw config_error("smooth window must be an odd count >= 1, got " +
                           std::to_string(smooth_window));
    }
}

int PhaseConfig::resolved_min_spacing(double fps) const {
    if (min_spacing) return *min_spacing;
    return static_cast<int>(std::ceil(0.35 * fps));
}

std::vector<int> PhaseReport::frames_of(Phase p) const {
    std::vector<int> out;
    for (const PhaseEvent& e : events) {
        if (e.phase == p) out.push_back(e.frame);
    }
    return out;
}

DistanceSeries distance_series(const TrajectoryBundle& bundle, DistanceMode mode) {
    if (bundle.num_points() == 0 || bundle.num_frames < 1) {
        throw pipeline_error("no tracked points at frame 0");
    }
    bool any_at_zero = false;
    for (int p = 0; p < bundle.num_points(); ++p) {
        if (bundle.tracked_at(p, 0)) any_at_zero = true;
    }
    if (!any_at_zero) {
        throw pipeline_error("no tracked points at frame 0");
    }

    DistanceSeries out;
    out.d.resize(bundle.num_frames, 0.0);
    out.active_counts.resize(bundle.num_frames, 0);

    Vec2 anchor{0.0, 0.0};
    int first_empty = -1;
    for (int f = 0; f < bundle.num_frames; ++f) {
        double sx = 0.0, sy = 0.0;
        int count = 0;
        for (int p = 0; p < bundle.num_points(); ++p) {
            if (bundle.tracked_at(p, f)) {
                sx += bundle.positions[p][f].x;
                sy += bundle.positions[p][f].y;
                ++count;
            }
        }
        out.active_counts[f] = count;
        if (count == 0) {
            out.d[f] = out.d[f - 1];  // f >= 1 here; frame 0 was checked above
            if (first_empty < 0) first_empty = f;
            continue;
        }
        const double mx = sx / count;
        const double my = sy / count;
        if (f == 0 && mode == DistanceMode::Anchored) {
            anchor = {mx, my};
        }
        out.d[f] = std::hypot(mx - anchor.x, my - anchor.y);
    }
    if (first_empty >= 0) {
        out.warnings.push_back("no tracked points from frame " + std::to_string(first_empty) +
                               "; carrying the last distance value forward");
    }
    return out;
}

namespace {

std::vector<double> moving_average(const std::vector<double>& d, int window) {
    const int half = window / 2;
    const int n = static_cast<int>(d.size());
    std::vector<double> out(d.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += d[j];
        out[i] = acc / (hi - lo + 1);
    }
    return out;
}

struct Candidate {
    Phase phase;
    int frame;
    double det_value;  ///< value in the detection (possibly smoothed) series
};

// Runs of equal values are treated as one sample; a run is an extremum when the
// series strictly rises into it and strictly falls out of it (or vice versa),
// and the event lands on the run's first frame. Runs touching either endpoint
// are never events.
std::vector<Candidate> extrema_candidates(const std::vector<double>& s) {
    std::vector<Candidate> cands;
    const int n = static_cast<int>(s.size());
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j;
        if (i > 0 && j < n - 1) {
            if (s[i - 1] < s[i] && s[j] > s[j + 1]) {
                cands.push_back({Phase::ED, i, s[i]});
            } else if (s[i - 1] > s[i] && s[j] < s[j + 1]) {
                cands.push_back({Phase::ES, i, s[i]});
            }
        }
        i = j + 1;
    }
    return cands;
}

// Same-phase candidates closer than min_spacing keep only the more extreme one
// (tie -> the earlier frame); every suppression is warned about.
std::vector<Candidate> suppress_close(const std::vector<Candidate>& cands, Phase phase,
                                      int min_spacing, std::vector<std::string>& warnings) {
    std::vector<Candidate> kept;
    for (const Candidate& c : cands) {
        if (c.phase != phase) continue;
        if (!kept.empty() && c.frame - kept.back().frame < min_spacing) {
            const bool replace = (phase == Phase::ED) ? (c.det_value > kept.back().det_value)
                                                      : (c.det_value < kept.back().det_value);
            const int dropped = replace ? kept.back().frame : c.frame;
            warnings.push_back(std::string(to_string(phase)) + " candidates at frames " +
                               std::to_string(kept.back().frame) + " and " + std::to_string(c.frame) +
                               " are closer than " + std::to_string(min_spacing) +
                               " frames; dropped frame " + std::to_string(dropped));
            if (replace) kept.back() = c;
        } else {
            kept.push_back(c);
        }
    }
    return kept;
}

}  // namespace

PhaseReport detect_phase_events(const DistanceSeries& series, double fps, const PhaseConfig& cfg) {
    cfg.validate();
    if (fps <= 0.0) {
        throw config_error("fps must be > 0");
    }
    if (series.size() < 3) {
        throw pipeline_error("phase detection requires a series of at least 3 samples, got " +
                             std::to_string(series.size()));
    }

    PhaseReport report;
    report.series = series;
    report.fps = fps;
    report.min_spacing = cfg.resolved_min_spacing(fps);
    report.smooth_window = cfg.smooth_window;

    const std::vector<double> det =
        cfg.smooth_window > 1 ? moving_average(series.d, cfg.smooth_window) : series.d;

    const std::vector<Candidate> cands = extrema_candidates(det);
    std::vector<Candidate> eds = suppress_close(cands, Phase::ED, report.min_spacing, report.warnings);
    std::vector<Candidate> ess = suppress_close(cands, Phase::ES, report.min_spacing, report.warnings);

    std::vector<Candidate> merged;
    merged.reserve(eds.size() + ess.size());
    merged.insert(merged.end(), eds.begin(), eds.end());
    merged.insert(merged.end(), ess.begin(), ess.end());
    std::sort(merged.begin(), merged.end(),
              [](const Candidate& a, const Candidate& b) { return a.frame < b.frame; });

    for (const Candidate& c : merged) {
        report.events.push_back({c.phase, c.frame, series.d[c.frame]});
    }
    if (report.events.empty()) {
        report.warnings.push_back("no phase events detected");
    }
    return report;
}

}  // namespace cinephase
