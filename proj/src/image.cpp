#include "cinephase/image.hpp"

#include <algorithm>
#include <cmath>

#include "cinephase/errors.hpp"

namespace cinephase {

float Frame::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

double sample_bilinear(const Frame& f, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(f.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(f.height - 1));
    int x0 = std::min(static_cast<int>(x), f.width - 2);
    int y0 = std::min(static_cast<int>(y), f.height - 2);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    const double fx = x - x0;
    const double fy = y - y0;
    const int x1 = std::min(x0 + 1, f.width - 1);
    const int y1 = std::min(y0 + 1, f.height - 1);
    const double v00 = f.at(x0, y0);
    const double v10 = f.at(x1, y0);
    const double v01 = f.at(x0, y1);
    const double v11 = f.at(x1, y1);
    return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

void validate_sequence(const FrameSequence& seq) {
    if (seq.frames.size() < 2) {
        throw io_error("invalid sequence: at least 2 frames required");
    }
    const int w = seq.frames.front().width;
    const int h = seq.frames.front().height;
    if (w < 16 || h < 16) {
        throw io_error("invalid sequence: frames must be at least 16x16, got " + std::to_string(w) +
                       "x" + std::to_string(h));
    }
    if (seq.fps <= 0.0) {
        throw io_error("invalid sequence: fps must be > 0");
    }
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const Frame& fr = seq.frames[i];
        if (fr.width != w || fr.height != h) {
            throw io_error("invalid sequence: frame " + std::to_string(i) + " is " +
                           std::to_string(fr.width) + "x" + std::to_string(fr.height) +
                           ", expected " + std::to_string(w) + "x" + std::to_string(h));
        }
        if (fr.data.size() != static_cast<std::size_t>(w) * h) {
            throw io_error("invalid sequence: frame " + std::to_string(i) + " has wrong buffer size");
        }
        for (float v : fr.data) {
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw io_error("invalid sequence: frame " + std::to_string(i) +
                               " has an intensity outside [0, 1]");
            }
        }
    }
}

}  // namespace cinephase
