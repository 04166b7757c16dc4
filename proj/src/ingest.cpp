#include "motil/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "motil/errors.hpp"

namespace motil {

namespace fs = std::filesystem;

namespace {

FrameSequence load_from_directory(const fs::path& dir, double fps) {
    static const std::regex pattern(R"(frame_(\d+)\.pgm)");
    std::map<long, fs::path> indexed;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (!std::regex_match(name, m, pattern)) continue;
        const long idx = std::stol(m[1].str());
        if (!indexed.emplace(idx, entry.path()).second)
            throw IngestError(dir.string() + ": duplicate frame index " +
                              std::to_string(idx));
    }
    if (indexed.empty())
        throw IngestError(dir.string() + ": no frame_*.pgm files found");

    const long first = indexed.begin()->first;
    const long last = indexed.rbegin()->first;
    if (last - first + 1 != static_cast<long>(indexed.size()))
        throw IngestError(dir.string() + ": frame indices are not contiguous (" +
                          std::to_string(indexed.size()) + " files spanning " +
                          std::to_string(first) + ".." + std::to_string(last) + ")");

    FrameSequence seq;
    seq.video_id = dir.filename().string();
    seq.fps = fps;
    for (const auto& [idx, path] : indexed) {
        Image8 img = read_pgm(path);
        if (seq.frames.empty()) {
            seq.width = img.width;
            seq.height = img.height;
        } else if (img.width != seq.width || img.height != seq.height) {
            throw IngestError(path.string() + ": geometry " +
                              std::to_string(img.width) + "x" +
                              std::to_string(img.height) + " differs from " +
                              std::to_string(seq.width) + "x" +
                              std::to_string(seq.height));
        }
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

FrameSequence load_from_container(const fs::path& path, double fps_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::string header;
    if (!std::getline(in, header)) throw IngestError(path.string() + ": empty file");
    std::istringstream hs(header);
    std::string magic;
    int width = 0, height = 0;
    double fps = 0.0;
    long count = 0;
    hs >> magic >> width >> height >> fps >> count;
    if (!hs || magic != "MTRK1")
        throw IngestError(path.string() + ": not an MTRK1 container");
    if (width <= 0 || height <= 0 || count < 1 || fps <= 0.0)
        throw IngestError(path.string() + ": invalid container header");

    FrameSequence seq;
    seq.video_id = path.stem().string();
    seq.fps = fps_override > 0.0 ? fps_override : fps;
    seq.width = width;
    seq.height = height;
    seq.frames.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        Image8 img(width, height);
        in.read(reinterpret_cast<char*>(img.pixels.data()),
                static_cast<std::streamsize>(img.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
            throw IngestError(path.string() + ": truncated at frame " +
                              std::to_string(i));
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

} // namespace

FrameSequence load_sequence(const fs::path& path, double fps) {
    if (fs::is_directory(path)) {
        if (fps <= 0.0) throw ParamError("fps must be positive");
        return load_from_directory(path, fps);
    }
    if (fs::is_regular_file(path)) return load_from_container(path, fps);
    throw IngestError(path.string() + ": no such file or directory");
}

void write_sequence(const fs::path& dir, const FrameSequence& seq) {
    fs::create_directories(dir);
    char name[32];
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%06zu.pgm", i);
        write_pgm(dir / name, seq.frames[i]);
    }
}

void write_container(const fs::path& path, const FrameSequence& seq) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "MTRK1 " << seq.width << " " << seq.height << " " << seq.fps << " "
        << seq.frames.size() << "\n";
    for (const auto& frame : seq.frames) {
        out.write(reinterpret_cast<const char*>(frame.pixels.data()),
                  static_cast<std::streamsize>(frame.pixels.size()));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Separable 1-D convolution along x then y with edge replication.
ImageF convolve_separable(const ImageF& img, const std::vector<float>& kernel) {
    const int radius = static_cast<int>(kernel.size()) / 2;
    ImageF tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = std::clamp(x + k, 0, img.width - 1);
                acc += static_cast<double>(kernel[static_cast<std::size_t>(k + radius)]) *
                       img.at(xx, y);
            }
            tmp.at(x, y) = static_cast<float>(acc);
        }
    }
    ImageF out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = std::clamp(y + k, 0, img.height - 1);
                acc += static_cast<double>(kernel[static_cast<std::size_t>(k + radius)]) *
                       tmp.at(x, yy);
            }
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

} // namespace

ImageF gaussian_blur(const ImageF& img, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<float> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-0.5 * (k * k) / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = static_cast<float>(w);
        sum += w;
    }
    for (auto& w : kernel) w = static_cast<float>(w / sum);
    return convolve_separable(img, kernel);
}

ImageF boxcar_mean(const ImageF& img, int side) {
    std::vector<float> kernel(static_cast<std::size_t>(side),
                              1.0f / static_cast<float>(side));
    return convolve_separable(img, kernel);
}

FilteredFrame bandpass(const ImageF& frame, int frame_index, int feature_diameter,
                       double noise_sigma) {
    if (feature_diameter < 3 || feature_diameter % 2 == 0)
        throw ParamError("feature_diameter must be odd and >= 3, got " +
                         std::to_string(feature_diameter));
    if (noise_sigma <= 0.0) throw ParamError("noise_sigma must be positive");

    const ImageF smooth = gaussian_blur(frame, noise_sigma);
    const ImageF background = boxcar_mean(frame, feature_diameter);

    FilteredFrame out;
    out.frame_index = frame_index;
    out.pixels = ImageF(frame.width, frame.height);
    for (std::size_t i = 0; i < out.pixels.pixels.size(); ++i) {
        out.pixels.pixels[i] = std::max(0.0f, smooth.pixels[i] - background.pixels[i]);
    }
    return out;
}

FilteredFrame bandpass(const Image8& frame, int frame_index, int feature_diameter,
                       double noise_sigma) {
    return bandpass(to_float(frame), frame_index, feature_diameter, noise_sigma);
}

} // namespace motil
