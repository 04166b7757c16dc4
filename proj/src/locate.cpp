#include "motil/locate.hpp"

#include <algorithm>
#include <cmath>

#include "motil/errors.hpp"
#include "motil/ingest.hpp"
#include "motil/parallel.hpp"

namespace motil {

namespace {

// Grayscale dilation with a square structuring element, separable max filter.
ImageF dilate(const ImageF& img, int radius) {
    ImageF tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            float m = img.at(x, y);
            const int lo = std::max(0, x - radius);
            const int hi = std::min(img.width - 1, x + radius);
            for (int xx = lo; xx <= hi; ++xx) m = std::max(m, img.at(xx, y));
            tmp.at(x, y) = m;
        }
    }
    ImageF out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const int lo = std::max(0, y - radius);
        const int hi = std::min(img.height - 1, y + radius);
        for (int x = 0; x < img.width; ++x) {
            float m = tmp.at(x, y);
            for (int yy = lo; yy <= hi; ++yy) m = std::max(m, tmp.at(x, yy));
            out.at(x, y) = m;
        }
    }
    return out;
}

// Lower-interpolation quantile of the positive pixel values; positive pixels
// only, so the clamped-to-zero background does not drag the threshold down.
float positive_brightness_quantile(const ImageF& img, double q) {
    std::vector<float> values;
    values.reserve(img.pixels.size() / 8);
    for (float v : img.pixels) {
        if (v > 0.0f) values.push_back(v);
    }
    if (values.empty()) return 0.0f;
    const auto idx = static_cast<std::size_t>(
        std::floor(q * static_cast<double>(values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx),
                     values.end());
    return values[idx];
}

} // namespace

std::vector<std::pair<int, int>> find_maxima(const ImageF& frame, int diameter,
                                             double percentile) {
    if (diameter < 3 || diameter % 2 == 0)
        throw ParamError("diameter must be odd and >= 3, got " +
                         std::to_string(diameter));
    if (percentile <= 0.0 || percentile >= 1.0)
        throw ParamError("percentile must be in (0, 1)");

    const int radius = diameter / 2;
    const ImageF dilated = dilate(frame, radius);
    const float threshold = positive_brightness_quantile(frame, 1.0 - percentile);

    struct Candidate {
        int x, y;
        float value;
    };
    std::vector<Candidate> candidates;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const float v = frame.at(x, y);
            if (v > 0.0f && v >= threshold && v == dilated.at(x, y))
                candidates.push_back({x, y, v});
        }
    }

    // Brighter candidate wins within `diameter`; ties to the lower (y, x).
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                  if (a.value != b.value) return a.value > b.value;
                  if (a.y != b.y) return a.y < b.y;
                  return a.x < b.x;
              });
    const double min_sep_sq = static_cast<double>(diameter) * diameter;
    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
        bool clashes = false;
        for (const auto& k : kept) {
            const double dx = c.x - k.x;
            const double dy = c.y - k.y;
            if (dx * dx + dy * dy < min_sep_sq) {
                clashes = true;
                break;
            }
        }
        if (!clashes) kept.push_back(c);
    }

    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    std::vector<std::pair<int, int>> out;
    out.reserve(kept.size());
    for (const auto& c : kept) out.emplace_back(c.x, c.y);
    return out;
}

std::optional<Spot> refine(const ImageF& frame, int frame_index, int cx, int cy,
                           int diameter) {
    const int radius = diameter / 2;
    if (cx < radius || cy < radius || cx >= frame.width - radius ||
        cy >= frame.height - radius)
        return std::nullopt;

    // Circular mask offsets, fixed per call.
    std::vector<std::pair<int, int>> mask;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy <= radius * radius) mask.emplace_back(dx, dy);
        }
    }

    double off_x = 0.0, off_y = 0.0, mass = 0.0;
    for (int iter = 0; iter < 10; ++iter) {
        mass = 0.0;
        double mx = 0.0, my = 0.0;
        for (const auto& [dx, dy] : mask) {
            const double v = frame.at(cx + dx, cy + dy);
            mass += v;
            mx += v * dx;
            my += v * dy;
        }
        if (mass <= 0.0) return std::nullopt;
        off_x = mx / mass;
        off_y = my / mass;
        if (std::abs(off_x) <= 0.5 && std::abs(off_y) <= 0.5) break;

        // Shift the integer window at most one pixel per axis and retry.
        if (off_x > 0.5) ++cx;
        if (off_x < -0.5) --cx;
        if (off_y > 0.5) ++cy;
        if (off_y < -0.5) --cy;
        if (cx < radius || cy < radius || cx >= frame.width - radius ||
            cy >= frame.height - radius)
            return std::nullopt;
    }

    Spot spot;
    spot.frame = frame_index;
    spot.x = cx + off_x;
    spot.y = cy + off_y;
    spot.mass = mass;
    double gyr = 0.0;
    for (const auto& [dx, dy] : mask) {
        const double v = frame.at(cx + dx, cy + dy);
        const double rx = (cx + dx) - spot.x;
        const double ry = (cy + dy) - spot.y;
        gyr += v * (rx * rx + ry * ry);
    }
    spot.size = std::sqrt(gyr / mass);
    return spot;
}

std::vector<Spot> locate_frame(const FilteredFrame& frame, const LocateParams& params) {
    if (params.minmass < 0.0) throw ParamError("minmass must be >= 0");
    const auto candidates =
        find_maxima(frame.pixels, params.diameter, params.percentile);

    std::vector<Spot> spots;
    for (const auto& [cx, cy] : candidates) {
        auto spot = refine(frame.pixels, frame.frame_index, cx, cy, params.diameter);
        if (spot && spot->mass >= params.minmass) spots.push_back(*spot);
    }
    std::sort(spots.begin(), spots.end(), [](const Spot& a, const Spot& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return spots;
}

std::vector<Spot> locate_sequence(const FrameSequence& seq, const LocateParams& params,
                                  double noise_sigma, int threads) {
    std::vector<std::vector<Spot>> per_frame(seq.frames.size());
    parallel_for(seq.frames.size(), threads, [&](std::size_t i) {
        const FilteredFrame filtered =
            bandpass(seq.frames[i], static_cast<int>(i), params.diameter, noise_sigma);
        per_frame[i] = locate_frame(filtered, params);
    });
    std::vector<Spot> all;
    for (auto& spots : per_frame) {
        all.insert(all.end(), spots.begin(), spots.end());
    }
    return all;
}

} // namespace motil
