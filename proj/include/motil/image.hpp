#ifndef MOTIL_IMAGE_HPP
#define MOTIL_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace motil {

// Row-major 2-D image. Pixel (x, y) is column x of row y; coordinates used
// throughout the library place the centre of pixel (x, y) at (x, y).
template <typename T>
struct ImageT {
    int width = 0;
    int height = 0;
    std::vector<T> pixels;

    ImageT() = default;
    ImageT(int w, int h, T fill = T{})
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    T& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    bool same_geometry(const ImageT& other) const {
        return width == other.width && height == other.height;
    }
};

using Image8 = ImageT<std::uint8_t>;
using ImageF = ImageT<float>;

ImageF to_float(const Image8& img);

// Ordered grayscale frames with capture metadata.
struct FrameSequence {
    std::string video_id;
    double fps = 0.0;
    int width = 0;
    int height = 0;
    std::vector<Image8> frames;
};

// Background-subtracted, noise-smoothed frame; all pixels >= 0.
struct FilteredFrame {
    int frame_index = 0;
    ImageF pixels;
};

// Binary PGM (P5, maxval 255) reader/writer.
Image8 read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image8& img);

} // namespace motil

#endif
