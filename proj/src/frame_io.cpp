#include "cinephase/frame_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <regex>
#include <vector>

#include "cinephase/errors.hpp"

namespace fs = std::filesystem;

namespace cinephase {

namespace {

// --- PGM -------------------------------------------------------------------

// Skips whitespace and '#' comment lines, then reads one header token.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

int parse_header_int(std::istream& in, const fs::path& file, const char* what) {
    const std::string tok = next_pgm_token(in);
    if (tok.empty() || tok.size() > 9 || tok.find_first_not_of("0123456789") != std::string::npos) {
        throw io_error("failed to read " + file.string() + ": bad PGM header (" + what + ")");
    }
    return std::stoi(tok);
}

// --- PNG -------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;

    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace

Frame read_pgm(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw io_error("failed to read " + file.string() + ": cannot open file");
    }
    const std::string magic = next_pgm_token(in);
    if (magic != "P5") {
        throw io_error("failed to read " + file.string() + ": unsupported PGM magic \"" + magic +
                       "\" (binary P5 required)");
    }
    const int width = parse_header_int(in, file, "width");
    const int height = parse_header_int(in, file, "height");
    const int maxval = parse_header_int(in, file, "maxval");
    if (width <= 0 || height <= 0) {
        throw io_error("failed to read " + file.string() + ": bad PGM dimensions");
    }
    if (maxval != 255 && maxval != 65535) {
        throw io_error("failed to read " + file.string() + ": unsupported PGM maxval " +
                       std::to_string(maxval) + " (255 or 65535 required)");
    }
    // Header ends with exactly one whitespace byte, already consumed by the tokenizer.
    const std::size_t npix = static_cast<std::size_t>(width) * height;
    Frame frame(width, height);
    if (maxval == 255) {
        std::vector<std::uint8_t> raw(npix);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(npix));
        if (static_cast<std::size_t>(in.gcount()) != npix) {
            throw io_error("failed to read " + file.string() + ": truncated PGM pixel data");
        }
        for (std::size_t i = 0; i < npix; ++i) {
            frame.data[i] = static_cast<float>(raw[i] / 255.0);
        }
    } else {
        // 16-bit PGM stores the most significant byte first.
        std::vector<std::uint8_t> raw(npix * 2);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(npix * 2));
        if (static_cast<std::size_t>(in.gcount()) != npix * 2) {
            throw io_error("failed to read " + file.string() + ": truncated PGM pixel data");
        }
        for (std::size_t i = 0; i < npix; ++i) {
            const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            frame.data[i] = static_cast<float>(v / 65535.0);
        }
    }
    return frame;
}

Frame read_png_gray(const fs::path& file) {
    PngReader r;
    r.fp = std::fopen(file.string().c_str(), "rb");
    if (!r.fp) {
        throw io_error("failed to read " + file.string() + ": cannot open file");
    }
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw io_error("failed to read " + file.string() + ": png init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw io_error("failed to read " + file.string() + ": png init failed");
    if (setjmp(png_jmpbuf(r.png))) {
        throw io_error("failed to read " + file.string() + ": corrupt PNG data");
    }
    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    const int width = static_cast<int>(png_get_image_width(r.png, r.info));
    const int height = static_cast<int>(png_get_image_height(r.png, r.info));
    const int color_type = png_get_color_type(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);
    if (color_type != PNG_COLOR_TYPE_GRAY) {
        throw io_error("failed to read " + file.string() +
                       ": unsupported PNG color type (single-channel grayscale required)");
    }
    if (bit_depth != 8 && bit_depth != 16) {
        throw io_error("failed to read " + file.string() + ": unsupported PNG bit depth " +
                       std::to_string(bit_depth) + " (8 or 16 required)");
    }
    png_set_interlace_handling(r.png);
    png_read_update_info(r.png, r.info);

    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
    std::vector<std::uint8_t> pixels(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = pixels.data() + rowbytes * y;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    Frame frame(width, height);
    if (bit_depth == 8) {
        for (int y = 0; y < height; ++y) {
            const std::uint8_t* row = rows[y];
            for (int x = 0; x < width; ++x) {
                frame.at(x, y) = static_cast<float>(row[x] / 255.0);
            }
        }
    } else {
        // 16-bit PNG samples are big-endian.
        for (int y = 0; y < height; ++y) {
            const std::uint8_t* row = rows[y];
            for (int x = 0; x < width; ++x) {
                const unsigned v = (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
                frame.at(x, y) = static_cast<float>(v / 65535.0);
            }
        }
    }
    return frame;
}

Frame read_gray_image(const fs::path& file) {
    std::string ext = file.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".pgm") return read_pgm(file);
    if (ext == ".png") return read_png_gray(file);
    throw io_error("failed to read " + file.string() + ": unsupported image format \"" + ext + "\"");
}

void write_pgm(const Frame& frame, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw io_error("failed to write " + file.string() + ": cannot open destination");
    }
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    std::vector<std::uint8_t> raw(frame.data.size());
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        const long q = std::lround(static_cast<double>(frame.data[i]) * 255.0);
        raw[i] = static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) {
        throw io_error("failed to write " + file.string() + ": write error");
    }
}

FrameSequence load_sequence(const fs::path& dir, std::optional<double> fps) {
    if (fps && *fps <= 0.0) {
        throw config_error("fps must be > 0, got " + std::to_string(*fps));
    }
    if (!fs::is_directory(dir)) {
        throw io_error("failed to load " + dir.string() + ": not a directory");
    }
    static const std::regex frame_name(R"(^([0-9]+)\.(pgm|png)$)", std::regex::icase);
    std::vector<std::pair<long long, fs::path>> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::smatch m;
        const std::string name = e.path().filename().string();
        if (std::regex_match(name, m, frame_name)) {
            std::string digits = m[1].str();
            digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
            if (digits.size() > 18) {
                throw io_error("failed to load " + dir.string() + ": frame number in " + name +
                               " is out of range");
            }
            entries.emplace_back(std::stoll(digits), e.path());
        }
    }
    if (entries.empty()) {
        throw io_error("failed to load " + dir.string() + ": no frame files matching <digits>.<pgm|png>");
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.filename().string() < b.second.filename().string();
    });
    if (entries.size() < 2) {
        throw io_error("failed to load " + dir.string() + ": at least 2 frames required, found 1");
    }

    FrameSequence seq;
    seq.fps = fps.value_or(15.0);
    seq.source_id = dir.filename().string();
    if (seq.source_id.empty()) seq.source_id = dir.parent_path().filename().string();
    seq.frames.reserve(entries.size());
    for (const auto& [num, path] : entries) {
        Frame f = read_gray_image(path);
        if (!seq.frames.empty() &&
            (f.width != seq.width() || f.height != seq.height())) {
            throw io_error("failed to load " + dir.string() + ": frame " + path.filename().string() +
                           " is " + std::to_string(f.width) + "x" + std::to_string(f.height) +
                           ", expected " + std::to_string(seq.width()) + "x" +
                           std::to_string(seq.height()));
        }
        seq.frames.push_back(std::move(f));
    }
    validate_sequence(seq);
    return seq;
}

void export_preview(const FrameSequence& seq, const fs::path& out) {
    if (seq.frames.empty()) {
        throw io_error("cannot export preview: sequence has no frames");
    }
    write_pgm(seq.frames.front(), out);
}

Roi validate_roi(const Roi& roi, const Frame& frame) {
    if (roi.w < 8) {
        throw io_error("invalid roi: width must be >= 8, got " + std::to_string(roi.w));
    }
    if (roi.h < 8) {
        throw io_error("invalid roi: height must be >= 8, got " + std::to_string(roi.h));
    }
    if (roi.x0 < 0 || roi.y0 < 0) {
        throw io_error("invalid roi: top-left corner must be non-negative, got (" +
                       std::to_string(roi.x0) + ", " + std::to_string(roi.y0) + ")");
    }
    if (roi.x0 + roi.w > frame.width) {
        throw io_error("invalid roi: x0+w=" + std::to_string(roi.x0 + roi.w) + " exceeds frame width " +
                       std::to_string(frame.width));
    }
    if (roi.y0 + roi.h > frame.height) {
        throw io_error("invalid roi: y0+h=" + std::to_string(roi.y0 + roi.h) +
                       " exceeds frame height " + std::to_string(frame.height));
    }
    return roi;
}

}  // namespace cinephase
