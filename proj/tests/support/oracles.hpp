// Brute-force reference implementations kept deliberately independent of the
// library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "cinephase/image.hpp"

namespace oracles {

// Literal 3x3 kernel correlation with replicated edges.
inline std::pair<std::vector<double>, std::vector<double>> sobel(const cinephase::Frame& f) {
    static const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static const double ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    std::vector<double> ix(f.data.size(), 0.0), iy(f.data.size(), 0.0);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            double gx = 0.0, gy = 0.0;
            for (int j = 0; j < 3; ++j) {
                for (int i = 0; i < 3; ++i) {
                    const double v = f.at_clamped(x + i - 1, y + j - 1);
                    gx += kx[j][i] * v;
                    gy += ky[j][i] * v;
                }
            }
            ix[static_cast<std::size_t>(y) * f.width + x] = gx / 8.0;
            iy[static_cast<std::size_t>(y) * f.width + x] = gy / 8.0;
        }
    }
    return {ix, iy};
}

// Explicit structure-tensor accumulation and quadratic min-eigenvalue.
inline std::vector<double> corner_response(const cinephase::Frame& f, const cinephase::Roi& roi,
                                           int wr) {
    const auto [ix, iy] = sobel(f);
    std::vector<double> r(f.data.size(), 0.0);
    for (int y = roi.y0 + wr; y < roi.y0 + roi.h - wr; ++y) {
        for (int x = roi.x0 + wr; x < roi.x0 + roi.w - wr; ++x) {
            double a = 0.0, b = 0.0, c = 0.0;
            for (int dy = -wr; dy <= wr; ++dy) {
                for (int dx = -wr; dx <= wr; ++dx) {
                    const std::size_t i = static_cast<std::size_t>(y + dy) * f.width + (x + dx);
                    a += ix[i] * ix[i];
                    b += ix[i] * iy[i];
                    c += iy[i] * iy[i];
                }
            }
            const double min_eig = 0.5 * ((a + c) - std::sqrt((a - c) * (a - c) + 4.0 * b * b));
            r[static_cast<std::size_t>(y) * f.width + x] = std::max(min_eig, 0.0);
        }
    }
    return r;
}

struct SelectedPoint {
    int x;
    int y;
    double r;
};

// Threshold relative to the peak, sort by response (row-major tie-break), then
// greedy spacing.
inline std::vector<SelectedPoint> select_points(const std::vector<double>& r, int width, int height,
                                                double quality, double min_distance,
                                                int max_points) {
    double rmax = 0.0;
    for (const double v : r) rmax = std::max(rmax, v);
    std::vector<SelectedPoint> cands;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double v = r[static_cast<std::size_t>(y) * width + x];
            if (v > 0.0 && v >= quality * rmax) cands.push_back({x, y, v});
        }
    }
    std::sort(cands.begin(), cands.end(), [width](const SelectedPoint& a, const SelectedPoint& b) {
        if (a.r != b.r) return a.r > b.r;
        return static_cast<long>(a.y) * width + a.x < static_cast<long>(b.y) * width + b.x;
    });
    std::vector<SelectedPoint> out;
    for (const SelectedPoint& c : cands) {
        if (static_cast<int>(out.size()) >= max_points) break;
        bool ok = true;
        for (const SelectedPoint& s : out) {
            const double dx = s.x - c.x, dy = s.y - c.y;
            if (std::sqrt(dx * dx + dy * dy) < min_distance) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(c);
    }
    return out;
}

// Strict discrete local extrema with the first-of-plateau rule, formulated via
// the nearest differing neighbours rather than run scanning.
struct Extremum {
    bool is_max;
    int frame;
};

inline std::vector<Extremum> extrema(const std::vector<double>& d) {
    std::vector<Extremum> out;
    const int n = static_cast<int>(d.size());
    for (int i = 0; i < n; ++i) {
        int left = i - 1;
        while (left >= 0 && d[left] == d[i]) --left;
        if (left != i - 1) continue;  // not the first sample of its run
        int right = i + 1;
        while (right < n && d[right] == d[i]) ++right;
        if (left < 0 || right >= n) continue;  // the run touches an endpoint
        if (d[left] < d[i] && d[right] < d[i]) out.push_back({true, i});
        if (d[left] > d[i] && d[right] > d[i]) out.push_back({false, i});
    }
    return out;
}

// Exhaustive integer minimizer of the window SSD between a at (px, py) and b
// shifted by (dx, dy), searched over |dx|,|dy| <= range.
inline std::pair<int, int> integer_shift_ssd(const cinephase::Frame& a, const cinephase::Frame& b,
                                             int px, int py, int omega, int range) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_shift{0, 0};
    for (int dy = -range; dy <= range; ++dy) {
        for (int dx = -range; dx <= range; ++dx) {
            if (px - omega + dx < 0 || px + omega + dx >= b.width || py - omega + dy < 0 ||
                py + omega + dy >= b.height) {
                continue;
            }
            double ssd = 0.0;
            for (int j = -omega; j <= omega; ++j) {
                for (int i = -omega; i <= omega; ++i) {
                    const double diff = static_cast<double>(a.at(px + i, py + j)) -
                                        static_cast<double>(b.at(px + i + dx, py + j + dy));
                    ssd += diff * diff;
                }
            }
            if (ssd < best) {
                best = ssd;
                best_shift = {dx, dy};
            }
        }
    }
    return best_shift;
}

}  // namespace oracles
