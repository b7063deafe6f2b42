#pragma once

#include <vector>

#include "cinephase/image.hpp"

namespace cinephase {

/// Horizontal and vertical intensity derivatives, same dimensions as the source frame.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> ix;
    std::vector<double> iy;

    double gx(int x, int y) const { return ix[static_cast<std::size_t>(y) * width + x]; }
    double gy(int x, int y) const { return iy[static_cast<std::size_t>(y) * width + x]; }
};

/// Minimum-eigenvalue response of the windowed structure tensor, zero outside the ROI.
struct CornerResponseMap {
    int width = 0;
    int height = 0;
    int window_radius = 1;
    std::vector<double> r;

    double at(int x, int y) const { return r[static_cast<std::size_t>(y) * width + x]; }
};

struct KeyPoint {
    double x = 0.0;
    double y = 0.0;
    double response = 0.0;
};

using KeyPointSet = std::vector<KeyPoint>;

struct DetectorConfig {
    double quality_threshold = 0.8;  ///< keep pixels with r >= quality_threshold * max(r)
    int max_points = 100;
    double min_distance = 10.0;      ///< Euclidean spacing enforced greedily by response
    int window_radius = 1;           ///< 3x3 summation window by default

    void validate() const;
};

/// 3x3 Sobel derivatives normalized by 1/8, replicated edges.
GradientField sobel_gradients(const Frame& frame);

/// Min-eigenvalue corner response over the ROI eroded by the window radius.
CornerResponseMap corner_response(const Frame& frame, const Roi& roi, const DetectorConfig& cfg);

/// Thresholds relative to the peak response, then greedily picks well-spaced
/// points in descending response order. Throws pipeline_error when the ROI has
/// no texture (max response is zero).
KeyPointSet select_key_points(const CornerResponseMap& rmap, const DetectorConfig& cfg);

}  // namespace cinephase
