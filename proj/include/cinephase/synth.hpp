#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cinephase/image.hpp"

namespace cinephase {

/// Synthetic cine: Gaussian blobs translated along the diagonal by a sinusoid,
/// so the mean-to-origin distance series is analytically known per frame.
struct SynthConfig {
    int width = 192;
    int height = 192;
    int num_frames = 45;
    double fps = 15.0;
    double period_frames = 15.0;  ///< one beat per second at 15 fps
    double amplitude = 5.0;       ///< px; 0 means a static scene with no events
    std::vector<Vec2> blob_positions;  ///< empty selects the built-in 10-blob layout
    double blob_sigma = 2.5;
    double noise_sigma = 0.0;
    std::uint32_t seed = 1;
    bool distractor = false;  ///< static bright rectangle outside the suggested ROI

    void validate() const;
};

struct GroundTruth {
    std::vector<int> ed_frames;
    std::vector<int> es_frames;
    std::vector<Vec2> analytic_path;  ///< per-frame true offset of every blob
};

/// Blob base positions after defaulting (the built-in layout scales with the frame).
std::vector<Vec2> resolved_blob_positions(const SynthConfig& cfg);

/// Rectangle covering the blobs plus their motion extent, for use as the ROI.
Roi suggested_roi(const SynthConfig& cfg);

/// Renders the cine and derives the ground-truth ED/ES frames directly from the
/// configured sinusoid (never through the tracking pipeline). Deterministic by seed.
std::pair<FrameSequence, GroundTruth> generate_cine(const SynthConfig& cfg);

}  // namespace cinephase
