#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cinephase {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Single grayscale frame. Intensities are row-major in [0, 1].
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    Frame() = default;
    Frame(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    /// Replicated-edge access for border handling in convolutions.
    float at_clamped(int x, int y) const;

    /// True when (x, y) lies inside the usable pixel rectangle [0, w-1] x [0, h-1].
    bool in_bounds(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x <= width - 1.0 && y <= height - 1.0;
    }
};

/// Bilinear sub-pixel sample; coordinates are clamped to the pixel rectangle.
double sample_bilinear(const Frame& f, double x, double y);

/// Ordered frames plus acquisition metadata.
struct FrameSequence {
    std::vector<Frame> frames;
    double fps = 15.0;
    std::string source_id;

    int num_frames() const { return static_cast<int>(frames.size()); }
    int width() const { return frames.empty() ? 0 : frames.front().width; }
    int height() const { return frames.empty() ? 0 : frames.front().height; }
};

/// Enforces the sequence invariants: at least 2 frames, uniform dimensions of
/// at least 16x16, every intensity inside [0, 1]. Throws io_error otherwise.
void validate_sequence(const FrameSequence& seq);

/// Operator-chosen rectangle restricting detection to the arterial territory.
struct Roi {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;
};

}  // namespace cinephase
