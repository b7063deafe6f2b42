#include "cinephase/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cinephase/errors.hpp"

namespace cinephase {

namespace {

constexpr double kDiag = 0.70710678118654752440;  // 1/sqrt(2)
constexpr double kBlobPeak = 0.85;
constexpr double kDistractorValue = 0.95;
constexpr double kRenderRadiusSigmas = 5.0;

// Engine-independent zero-mean unit Gaussian (Box-Muller on raw mt19937 words),
// so seeded output is identical across standard libraries.
class GaussianRng {
public:
    explicit GaussianRng(std::uint32_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(eng_()) + 0.5) / 4294967296.0;
        const double u2 = (static_cast<double>(eng_()) + 0.5) / 4294967296.0;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

Vec2 offset_at(const SynthConfig& cfg, int n) {
    const double s = cfg.amplitude * std::sin(2.0 * std::numbers::pi * n / cfg.period_frames);
    return {s * kDiag, s * kDiag};
}

// Discrete argmax/argmin of sin(2*pi*n/T) per period, evaluated directly from
// the sinusoid's peak/trough locations. Endpoints are excluded.
void analytic_extrema(const SynthConfig& cfg, std::vector<int>& ed, std::vector<int>& es) {
    if (cfg.amplitude <= 0.0) return;
    const double T = cfg.period_frames;
    const int last = cfg.num_frames - 1;
    auto phase_value = [&](int n) { return std::sin(2.0 * std::numbers::pi * n / T); };
    for (int k = 0;; ++k) {
        const double peak = T * (k + 0.25);
        if (peak >= last) break;
        const int lo = static_cast<int>(std::floor(peak));
        const int hi = static_cast<int>(std::ceil(peak));
        const int n = (phase_value(lo) >= phase_value(hi)) ? lo : hi;  // tie -> earlier
        if (n > 0 && n < last) ed.push_back(n);
    }
    for (int k = 0;; ++k) {
        const double trough = T * (k + 0.75);
        if (trough >= last) break;
        const int lo = static_cast<int>(std::floor(trough));
        const int hi = static_cast<int>(std::ceil(trough));
        const int n = (phase_value(lo) <= phase_value(hi)) ? lo : hi;
        if (n > 0 && n < last) es.push_back(n);
    }
}

Roi distractor_rect(const SynthConfig& cfg) {
    const int side = std::max(8, cfg.width / 16);
    return {2, 2, side, side};
}

}  // namespace

std::vector<Vec2> resolved_blob_positions(const SynthConfig& cfg) {
    if (!cfg.blob_positions.empty()) return cfg.blob_positions;
    static constexpr std::array<std::pair<double, double>, 10> layout = {{
        {0.28, 0.32}, {0.46, 0.24}, {0.64, 0.30}, {0.74, 0.44}, {0.68, 0.62},
        {0.52, 0.72}, {0.34, 0.68}, {0.24, 0.52}, {0.42, 0.46}, {0.58, 0.50},
    }};
    std::vector<Vec2> out;
    out.reserve(layout.size());
    for (const auto& [fx, fy] : layout) {
        out.push_back({fx * (cfg.width - 1), fy * (cfg.height - 1)});
    }
    return out;
}

void SynthConfig::validate() const {
    if (width < 16 || height < 16) {
        throw config_error("synth frame must be at least 16x16");
    }
    if (num_frames < 2) {
        throw config_error("synth needs at least 2 frames");
    }
    if (fps <= 0.0) {
        throw config_error("synth fps must be > 0");
    }
    if (amplitude != 0.0 && amplitude < 1.0) {
        throw config_error("synth amplitude must be 0 (static) or >= 1 px");
    }
    if (period_frames < 6.0) {
        throw config_error("synth period must be >= 6 frames");
    }
    if (blob_sigma <= 0.0) {
        throw config_error("synth blob sigma must be > 0");
    }
    if (noise_sigma < 0.0) {
        throw config_error("synth noise sigma must be >= 0");
    }
    const std::vector<Vec2> blobs = resolved_blob_positions(*this);
    if (blobs.size() < 4) {
        throw config_error("synth needs at least 4 blobs, got " + std::to_string(blobs.size()));
    }
    const double margin = amplitude * kDiag + 3.0 * blob_sigma;
    for (const Vec2& b : blobs) {
        if (b.x - margin < 0.0 || b.x + margin > width - 1 || b.y - margin < 0.0 ||
            b.y + margin > height - 1) {
            throw config_error("blob at (" + std::to_string(b.x) + ", " + std::to_string(b.y) +
                               ") would exit the frame at peak amplitude");
        }
    }
}

Roi suggested_roi(const SynthConfig& cfg) {
    const std::vector<Vec2> blobs = resolved_blob_positions(cfg);
    double min_x = blobs[0].x, max_x = blobs[0].x;
    double min_y = blobs[0].y, max_y = blobs[0].y;
    for (const Vec2& b : blobs) {
        min_x = std::min(min_x, b.x);
        max_x = std::max(max_x, b.x);
        min_y = std::min(min_y, b.y);
        max_y = std::max(max_y, b.y);
    }
    const double pad = cfg.amplitude * kDiag + 3.0 * cfg.blob_sigma + 2.0;
    int x0 = std::max(0, static_cast<int>(std::floor(min_x - pad)));
    int y0 = std::max(0, static_cast<int>(std::floor(min_y - pad)));
    int x1 = std::min(cfg.width, static_cast<int>(std::ceil(max_x + pad)) + 1);
    int y1 = std::min(cfg.height, static_cast<int>(std::ceil(max_y + pad)) + 1);
    return {x0, y0, std::max(8, x1 - x0), std::max(8, y1 - y0)};
}

std::pair<FrameSequence, GroundTruth> generate_cine(const SynthConfig& cfg) {
    cfg.validate();
    const std::vector<Vec2> blobs = resolved_blob_positions(cfg);
    const double two_sigma_sq = 2.0 * cfg.blob_sigma * cfg.blob_sigma;
    const int support = static_cast<int>(std::ceil(kRenderRadiusSigmas * cfg.blob_sigma));

    GaussianRng noise(cfg.seed);
    FrameSequence seq;
    seq.fps = cfg.fps;
    seq.source_id = "synth-seed-" + std::to_string(cfg.seed);
    seq.frames.reserve(static_cast<std::size_t>(cfg.num_frames));

    std::vector<double> acc(static_cast<std::size_t>(cfg.width) * cfg.height);
    for (int n = 0; n < cfg.num_frames; ++n) {
        const Vec2 off = offset_at(cfg, n);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const Vec2& b : blobs) {
            const double cx = b.x + off.x;
            const double cy = b.y + off.y;
            const int x_lo = std::max(0, static_cast<int>(std::floor(cx)) - support);
            const int x_hi = std::min(cfg.width - 1, static_cast<int>(std::ceil(cx)) + support);
            const int y_lo = std::max(0, static_cast<int>(std::floor(cy)) - support);
            const int y_hi = std::min(cfg.height - 1, static_cast<int>(std::ceil(cy)) + support);
            for (int y = y_lo; y <= y_hi; ++y) {
                for (int x = x_lo; x <= x_hi; ++x) {
                    const double dx = x - cx;
                    const double dy = y - cy;
                    acc[static_cast<std::size_t>(y) * cfg.width + x] +=
                        kBlobPeak * std::exp(-(dx * dx + dy * dy) / two_sigma_sq);
                }
            }
        }
        if (cfg.distractor) {
            const Roi rect = distractor_rect(cfg);
            for (int y = rect.y0; y < rect.y0 + rect.h; ++y) {
                for (int x = rect.x0; x < rect.x0 + rect.w; ++x) {
                    acc[static_cast<std::size_t>(y) * cfg.width + x] = kDistractorValue;
                }
            }
        }
        Frame frame(cfg.width, cfg.height);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            double v = acc[i];
            if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * noise.next();
            frame.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
        seq.frames.push_back(std::move(frame));
    }

    GroundTruth gt;
    gt.analytic_path.reserve(static_cast<std::size_t>(cfg.num_frames));
    for (int n = 0; n < cfg.num_frames; ++n) {
        gt.analytic_path.push_back(offset_at(cfg, n));
    }
    analytic_extrema(cfg, gt.ed_frames, gt.es_frames);
    return {std::move(seq), std::move(gt)};
}

}  // namespace cinephase
