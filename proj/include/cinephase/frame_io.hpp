#pragma once

#include <filesystem>
#include <optional>

#include "cinephase/image.hpp"

namespace cinephase {

/// Reads one grayscale image, dispatching on the file extension.
/// Supported: binary PGM (P5, maxval 255 or 65535) and 8/16-bit single-channel PNG.
Frame read_gray_image(const std::filesystem::path& file);

Frame read_pgm(const std::filesystem::path& file);
Frame read_png_gray(const std::filesystem::path& file);

/// Writes an 8-bit binary PGM (maxval 255); intensity v maps to round(v * 255).
void write_pgm(const Frame& frame, const std::filesystem::path& file);

/// Loads a directory of frames named `<digits>.<pgm|png>`, ordered by numeric
/// filename value (frame "2" precedes frame "10"). fps defaults to 15 when absent.
FrameSequence load_sequence(const std::filesystem::path& dir,
                            std::optional<double> fps = std::nullopt);

/// Writes the first frame as an 8-bit PGM so an operator can pick the ROI.
void export_preview(const FrameSequence& seq, const std::filesystem::path& out);

/// Returns roi unchanged when it is at least 8x8 and fully inside the frame;
/// throws io_error describing the violated bound otherwise.
Roi validate_roi(const Roi& roi, const Frame& frame);

}  // namespace cinephase
