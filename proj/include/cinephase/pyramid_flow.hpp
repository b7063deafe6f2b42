#pragma once

#include <string>
#include <vector>

#include "cinephase/corners.hpp"
#include "cinephase/image.hpp"

namespace cinephase {

/// Multi-resolution stack: level 0 is the source frame, each higher level is
/// the previous one low-pass filtered and decimated by 2.
struct ImagePyramid {
    std::vector<Frame> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Displacement in pixels at level-0 scale (or at the level it was solved on).
struct FlowVector {
    double dx = 0.0;
    double dy = 0.0;
};

enum class TrackState {
    Tracked,
    LostOutOfBounds,
    LostIllConditioned,
    LostDiverged,
};

const char* to_string(TrackState s);

struct FlowConfig {
    int omega = 10;                   ///< half-window; the kernel is (2*omega+1)^2 = 21x21
    int num_levels = 3;               ///< hard cap 4
    int max_iterations = 30;          ///< per-level refinement limit
    double min_step = 0.01;           ///< convergence threshold on |increment| in px
    double min_eig_threshold = 1e-4;  ///< on min-eig(G) normalized by window area

    void validate() const;
};

/// Coordinate of a level-0 point at pyramid level L: p / 2^L.
inline Vec2 pyramid_coordinate(const Vec2& p, int level) {
    const double s = static_cast<double>(1 << level);
    return {p.x / s, p.y / s};
}

/// Coarse-to-fine propagation of the flow guess: g_{L-1} = 2 (g_L + d_L).
inline FlowVector propagate_flow(const FlowVector& g, const FlowVector& d) {
    return {2.0 * (g.dx + d.dx), 2.0 * (g.dy + d.dy)};
}

/// Final flow after the level-0 solve: d = g_0 + d_0.
inline FlowVector final_flow(const FlowVector& g, const FlowVector& d) {
    return {g.dx + d.dx, g.dy + d.dy};
}

/// Effective level count after the small-frame reduction rule: level L requires
/// the frame to span at least 2^(L-1) * (2*omega + 3) pixels in each dimension.
int effective_num_levels(const Frame& frame, int requested, int omega);

/// Builds the pyramid with the 5-tap [1,4,6,4,1]/16 anti-alias kernel
/// (replicated edges) and decimation by 2. Levels auto-reduce to fit small frames.
ImagePyramid build_pyramid(const Frame& frame, int num_levels, int omega = 10);

struct LevelSolve {
    FlowVector d;
    TrackState status = TrackState::Tracked;
    bool converged = false;
};

/// Iterative single-level solve: builds the spatial-gradient matrix G on frame
/// `a` around (px, py) and refines d by Newton steps against frame `b` sampled
/// at the guess g plus the current d. Returns the lowest-residual iterate.
LevelSolve lk_level_solve(const Frame& a, const Frame& b, double px, double py, FlowVector g,
                          const FlowConfig& cfg);

/// Residual of the tracking error function at displacement g + d: the sum of
/// squared differences between the window of `a` at (px, py) and the window of
/// `b` shifted by g + d. Exposed for tests.
double window_residual(const Frame& a, const Frame& b, double px, double py, FlowVector g,
                       FlowVector d, int omega);

struct TrackResult {
    double x = 0.0;
    double y = 0.0;
    TrackState status = TrackState::Tracked;
};

/// Coarse-to-fine track of one point between two pyramids.
TrackResult track_point(const ImagePyramid& pyr_a, const ImagePyramid& pyr_b, double px, double py,
                        const FlowConfig& cfg);

/// Per-point, per-frame tracked positions. A point tracked through frame f has
/// positions[p].size() > f; once lost it never re-enters (liveness is monotone).
struct TrajectoryBundle {
    int num_frames = 0;
    std::vector<std::vector<Vec2>> positions;
    std::vector<TrackState> final_status;  ///< Tracked when the point survived to the end
    std::vector<std::string> warnings;

    int num_points() const { return static_cast<int>(positions.size()); }
    bool tracked_at(int p, int f) const {
        return f >= 0 && f < static_cast<int>(positions[p].size());
    }
    /// First frame with no position, num_frames when never lost.
    int lost_frame(int p) const { return static_cast<int>(positions[p].size()); }
    TrackState status_at(int p, int f) const {
        return tracked_at(p, f) ? TrackState::Tracked : final_status[p];
    }
};

/// Tracks every key point across consecutive frames; a lost point keeps its
/// loss status and records no further positions.
TrajectoryBundle track_sequence(const FrameSequence& seq, const KeyPointSet& points,
                                const FlowConfig& cfg);

}  // namespace cinephase
