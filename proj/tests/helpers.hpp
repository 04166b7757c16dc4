#ifndef MOTIL_TEST_HELPERS_HPP
#define MOTIL_TEST_HELPERS_HPP

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>

#include "motil/image.hpp"

namespace motil::test {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("motil_" + tag + "_" + std::to_string(counter++) + "_" +
                 std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Adds a Gaussian blob with subpixel centre onto a float image.
inline void add_blob(ImageF& img, double cx, double cy, double sigma,
                     double amplitude) {
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            img.at(x, y) += static_cast<float>(
                amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)));
        }
    }
}

inline Image8 quantize(const ImageF& img) {
    Image8 out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const long v = std::lround(static_cast<double>(img.pixels[i]));
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
    }
    return out;
}

} // namespace motil::test

#endif
