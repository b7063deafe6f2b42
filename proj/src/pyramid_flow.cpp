#include "cinephase/pyramid_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cinephase/errors.hpp"

namespace cinephase {

const char* to_string(TrackState s) {
    switch (s) {
        case TrackState::Tracked: return "tracked";
        case TrackState::LostOutOfBounds: return "lost_out_of_bounds";
        case TrackState::LostIllConditioned: return "lost_ill_conditioned";
        case TrackState::LostDiverged: return "lost_diverged";
    }
    return "unknown";
}

void FlowConfig::validate() const {
    if (omega < 1) {
        throw config_error("flow omega must be >= 1, got " + std::to_string(omega));
    }
    if (num_levels < 1 || num_levels > 4) {
        throw config_error("flow num_levels must be in 1..4, got " + std::to_string(num_levels));
    }
    if (max_iterations < 1) {
        throw config_error("flow max_iterations must be >= 1, got " +
                           std::to_string(max_iterations));
    }
    if (!(min_step > 0.0)) {
        throw config_error("flow min_step must be > 0");
    }
    if (min_eig_threshold < 0.0) {
        throw config_error("flow min_eig_threshold must be >= 0");
    }
}

int effective_num_levels(const Frame& frame, int requested, int omega) {
    int levels = std::clamp(requested, 1, 4);
    while (levels > 1) {
        const int need = (1 << (levels - 1)) * (2 * omega + 3);
        if (frame.width >= need && frame.height >= need) break;
        --levels;
    }
    return levels;
}

namespace {

// One pass of the separable [1,4,6,4,1]/16 kernel along x, replicated edges.
Frame blur_horizontal(const Frame& src) {
    Frame dst(src.width, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            const double acc = 1.0 * src.at_clamped(x - 2, y) + 4.0 * src.at_clamped(x - 1, y) +
                               6.0 * src.at_clamped(x, y) + 4.0 * src.at_clamped(x + 1, y) +
                               1.0 * src.at_clamped(x + 2, y);
            dst.at(x, y) = static_cast<float>(acc / 16.0);
        }
    }
    return dst;
}

Frame blur_vertical(const Frame& src) {
    Frame dst(src.width, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            const double acc = 1.0 * src.at_clamped(x, y - 2) + 4.0 * src.at_clamped(x, y - 1) +
                               6.0 * src.at_clamped(x, y) + 4.0 * src.at_clamped(x, y + 1) +
                               1.0 * src.at_clamped(x, y + 2);
            dst.at(x, y) = static_cast<float>(acc / 16.0);
        }
    }
    return dst;
}

Frame downsample(const Frame& src) {
    const Frame blurred = blur_vertical(blur_horizontal(src));
    const int nw = (src.width + 1) / 2;
    const int nh = (src.height + 1) / 2;
    Frame dst(nw, nh);
    for (int y = 0; y < nh; ++y) {
        for (int x = 0; x < nw; ++x) {
            dst.at(x, y) = blurred.at(2 * x, 2 * y);
        }
    }
    return dst;
}

}  // namespace

ImagePyramid build_pyramid(const Frame& frame, int num_levels, int omega) {
    const int levels = effective_num_levels(frame, num_levels, omega);
    ImagePyramid pyr;
    pyr.levels.reserve(static_cast<std::size_t>(levels));
    pyr.levels.push_back(frame);
    for (int k = 1; k < levels; ++k) {
        pyr.levels.push_back(downsample(pyr.levels.back()));
    }
    return pyr;
}

double window_residual(const Frame& a, const Frame& b, double px, double py, FlowVector g,
                       FlowVector d, int omega) {
    double eps = 0.0;
    for (int j = -omega; j <= omega; ++j) {
        for (int i = -omega; i <= omega; ++i) {
            const double av = sample_bilinear(a, px + i, py + j);
            const double bv = sample_bilinear(b, px + i + g.dx + d.dx, py + j + g.dy + d.dy);
            const double diff = av - bv;
            eps += diff * diff;
        }
    }
    return eps;
}

LevelSolve lk_level_solve(const Frame& a, const Frame& b, double px, double py, FlowVector g,
                          const FlowConfig& cfg) {
    const int w = cfg.omega;
    const int n = 2 * w + 1;
    const double win_area = static_cast<double>(n) * n;

    // Template values and spatial gradients are fixed over the iterations.
    std::vector<double> av(static_cast<std::size_t>(n) * n);
    std::vector<double> gx(av.size());
    std::vector<double> gy(av.size());
    double gxx = 0.0, gxy = 0.0, gyy = 0.0;
    std::size_t k = 0;
    for (int j = -w; j <= w; ++j) {
        for (int i = -w; i <= w; ++i, ++k) {
            const double x = px + i;
            const double y = py + j;
            av[k] = sample_bilinear(a, x, y);
            gx[k] = 0.5 * (sample_bilinear(a, x + 1, y) - sample_bilinear(a, x - 1, y));
            gy[k] = 0.5 * (sample_bilinear(a, x, y + 1) - sample_bilinear(a, x, y - 1));
            gxx += gx[k] * gx[k];
            gxy += gx[k] * gy[k];
            gyy += gy[k] * gy[k];
        }
    }
    const double disc = std::sqrt((gxx - gyy) * (gxx - gyy) + 4.0 * gxy * gxy);
    const double min_eig = 0.5 * ((gxx + gyy) - disc);
    const double det = gxx * gyy - gxy * gxy;
    if (min_eig / win_area < cfg.min_eig_threshold || det <= 0.0) {
        return {FlowVector{}, TrackState::LostIllConditioned, false};
    }

    FlowVector d;
    FlowVector best_d;
    double best_eps = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const double cx = px + g.dx + d.dx;
        const double cy = py + g.dy + d.dy;
        if (!b.in_bounds(cx, cy)) {
            return {d, TrackState::LostOutOfBounds, false};
        }
        double eps = 0.0, mis_x = 0.0, mis_y = 0.0;
        k = 0;
        for (int j = -w; j <= w; ++j) {
            for (int i = -w; i <= w; ++i, ++k) {
                const double bv = sample_bilinear(b, px + i + g.dx + d.dx, py + j + g.dy + d.dy);
                const double diff = av[k] - bv;
                eps += diff * diff;
                mis_x += diff * gx[k];
                mis_y += diff * gy[k];
            }
        }
        if (eps < best_eps) {
            best_eps = eps;
            best_d = d;
        }
        const double step_x = (gyy * mis_x - gxy * mis_y) / det;
        const double step_y = (gxx * mis_y - gxy * mis_x) / det;
        d.dx += step_x;
        d.dy += step_y;
        if (std::hypot(step_x, step_y) < cfg.min_step) {
            converged = true;
            break;
        }
    }

    // Fold the post-loop iterate into the best-so-far so the returned
    // displacement never has a larger residual than the initial guess.
    const double fx = px + g.dx + d.dx;
    const double fy = py + g.dy + d.dy;
    if (!b.in_bounds(fx, fy)) {
        return {best_d, TrackState::LostOutOfBounds, false};
    }
    const double eps_final = window_residual(a, b, px, py, g, d, w);
    if (eps_final < best_eps) {
        best_d = d;
    }
    return {best_d, TrackState::Tracked, converged};
}

TrackResult track_point(const ImagePyramid& pyr_a, const ImagePyramid& pyr_b, double px, double py,
                        const FlowConfig& cfg) {
    if (pyr_a.levels.empty() || pyr_b.levels.empty()) {
        throw config_error("track_point requires non-empty pyramids");
    }
    if (!pyr_a.levels[0].in_bounds(px, py)) {
        return {px, py, TrackState::LostOutOfBounds};
    }
    const int levels = std::min(pyr_a.num_levels(), pyr_b.num_levels());

    FlowVector g;  // zero-initialized guess at the top level
    FlowVector d;
    bool converged = true;
    for (int lev = levels - 1; lev >= 0; --lev) {
        const Vec2 pl = pyramid_coordinate({px, py}, lev);
        const LevelSolve s = lk_level_solve(pyr_a.levels[lev], pyr_b.levels[lev], pl.x, pl.y, g, cfg);
        if (s.status != TrackState::Tracked) {
            return {px, py, s.status};
        }
        d = s.d;
        converged = s.converged;
        if (lev > 0) {
            g = propagate_flow(g, d);
        }
    }
    if (!converged && std::hypot(d.dx, d.dy) > cfg.omega) {
        return {px, py, TrackState::LostDiverged};
    }
    const FlowVector flow = final_flow(g, d);
    const double nx = px + flow.dx;
    const double ny = py + flow.dy;
    if (!pyr_b.levels[0].in_bounds(nx, ny)) {
        return {px, py, TrackState::LostOutOfBounds};
    }
    return {nx, ny, TrackState::Tracked};
}

TrajectoryBundle track_sequence(const FrameSequence& seq, const KeyPointSet& points,
                                const FlowConfig& cfg) {
    cfg.validate();
    if (seq.num_frames() < 2) {
        throw pipeline_error("tracking requires at least 2 frames");
    }
    if (points.empty()) {
        throw pipeline_error("no key points to track");
    }

    const int n = seq.num_frames();
    TrajectoryBundle bundle;
    bundle.num_frames = n;
    bundle.positions.resize(points.size());
    bundle.final_status.assign(points.size(), TrackState::Tracked);
    for (std::size_t p = 0; p < points.size(); ++p) {
        bundle.positions[p].push_back({points[p].x, points[p].y});
    }

    int alive = static_cast<int>(points.size());
    ImagePyramid prev = build_pyramid(seq.frames[0], cfg.num_levels, cfg.omega);
    for (int f = 1; f < n && alive > 0; ++f) {
        ImagePyramid cur = build_pyramid(seq.frames[f], cfg.num_levels, cfg.omega);
        for (std::size_t p = 0; p < points.size(); ++p) {
            if (bundle.final_status[p] != TrackState::Tracked) continue;
            const Vec2 last = bundle.positions[p].back();
            const TrackResult r = track_point(prev, cur, last.x, last.y, cfg);
            if (r.status == TrackState::Tracked) {
                bundle.positions[p].push_back({r.x, r.y});
            } else {
                bundle.final_status[p] = r.status;
                --alive;
            }
        }
        prev = std::move(cur);
    }

    if (alive == 0) {
        int last_lost = 0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            last_lost = std::max(last_lost, bundle.lost_frame(p));
        }
        bundle.warnings.push_back("all key points lost by frame " + std::to_string(last_lost) +
                                  " of " + std::to_string(n));
    }
    return bundle;
}

}  // namespace cinephase
