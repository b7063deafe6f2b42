#include "cinephase/corners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cinephase/errors.hpp"
#include "cinephase/frame_io.hpp"

namespace cinephase {

void DetectorConfig::validate() const {
    if (!(quality_threshold > 0.0 && quality_threshold <= 1.0)) {
        throw config_error("detector threshold must be in (0, 1], got " +
                           std::to_string(quality_threshold));
    }
    if (max_points < 1) {
        throw config_error("detector max_points must be >= 1, got " + std::to_string(max_points));
    }
    if (min_distance < 0.0) {
        throw config_error("detector min_distance must be >= 0, got " +
                           std::to_string(min_distance));
    }
    if (window_radius < 0) {
        throw config_error("detector window_radius must be >= 0, got " +
                           std::to_string(window_radius));
    }
}

GradientField sobel_gradients(const Frame& frame) {
    GradientField g;
    g.width = frame.width;
    g.height = frame.height;
    g.ix.assign(frame.data.size(), 0.0);
    g.iy.assign(frame.data.size(), 0.0);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const double tl = frame.at_clamped(x - 1, y - 1);
            const double tc = frame.at_clamped(x, y - 1);
            const double tr = frame.at_clamped(x + 1, y - 1);
            const double ml = frame.at_clamped(x - 1, y);
            const double mr = frame.at_clamped(x + 1, y);
            const double bl = frame.at_clamped(x - 1, y + 1);
            const double bc = frame.at_clamped(x, y + 1);
            const double br = frame.at_clamped(x + 1, y + 1);
            const std::size_t i = static_cast<std::size_t>(y) * frame.width + x;
            g.ix[i] = ((tr - tl) + 2.0 * (mr - ml) + (br - bl)) / 8.0;
            g.iy[i] = ((bl - tl) + 2.0 * (bc - tc) + (br - tr)) / 8.0;
        }
    }
    return g;
}

CornerResponseMap corner_response(const Frame& frame, const Roi& roi, const DetectorConfig& cfg) {
    cfg.validate();
    validate_roi(roi, frame);
    const int wr = cfg.window_radius;
    if (roi.w < 2 * wr + 1 || roi.h < 2 * wr + 1) {
        throw config_error("roi " + std::to_string(roi.w) + "x" + std::to_string(roi.h) +
                           " is smaller than the " + std::to_string(2 * wr + 1) + "x" +
                           std::to_string(2 * wr + 1) + " summation window");
    }

    const GradientField g = sobel_gradients(frame);
    CornerResponseMap out;
    out.width = frame.width;
    out.height = frame.height;
    out.window_radius = wr;
    out.r.assign(frame.data.size(), 0.0);

    for (int y = roi.y0 + wr; y < roi.y0 + roi.h - wr; ++y) {
        for (int x = roi.x0 + wr; x < roi.x0 + roi.w - wr; ++x) {
            double a = 0.0, b = 0.0, c = 0.0;
            for (int dy = -wr; dy <= wr; ++dy) {
                for (int dx = -wr; dx <= wr; ++dx) {
                    const double gx = g.gx(x + dx, y + dy);
                    const double gy = g.gy(x + dx, y + dy);
                    a += gx * gx;
                    b += gx * gy;
                    c += gy * gy;
                }
            }
            const double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
            const double min_eig = 0.5 * ((a + c) - disc);
            out.r[static_cast<std::size_t>(y) * out.width + x] = std::max(min_eig, 0.0);
        }
    }
    return out;
}

KeyPointSet select_key_points(const CornerResponseMap& rmap, const DetectorConfig& cfg) {
    cfg.validate();
    const double rmax = rmap.r.empty() ? 0.0 : *std::max_element(rmap.r.begin(), rmap.r.end());
    if (rmax <= 0.0) {
        throw pipeline_error("no key points: the corner response is zero everywhere in the roi");
    }

    struct Candidate {
        int x;
        int y;
        double r;
    };
    std::vector<Candidate> cands;
    const double cutoff = cfg.quality_threshold * rmax;
    for (int y = 0; y < rmap.height; ++y) {
        for (int x = 0; x < rmap.width; ++x) {
            const double r = rmap.at(x, y);
            if (r >= cutoff && r > 0.0) {
                cands.push_back({x, y, r});
            }
        }
    }
    // Descending response; ties resolved by row-major pixel order (already the
    // collection order, so a stable sort keeps it).
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.r > b.r; });

    KeyPointSet selected;
    const double min_d2 = cfg.min_distance * cfg.min_distance;
    for (const Candidate& c : cands) {
        if (static_cast<int>(selected.size()) >= cfg.max_points) break;
        bool ok = true;
        for (const KeyPoint& k : selected) {
            const double dx = k.x - c.x;
            const double dy = k.y - c.y;
            if (dx * dx + dy * dy < min_d2) {
                ok = false;
                break;
            }
        }
        if (ok) {
            selected.push_back({static_cast<double>(c.x), static_cast<double>(c.y), c.r});
        }
    }
    return selected;
}

}  // namespace cinephase
