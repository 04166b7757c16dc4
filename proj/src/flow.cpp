#include "motil/flow.hpp"

#include <algorithm>
#include <cmath>

#include "motil/errors.hpp"
#include "motil/link.hpp"

namespace motil {

namespace {

// Bilinear sample with edge clamping.
double sample(const ImageF& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = std::min(static_cast<int>(x), img.width - 2 >= 0 ? img.width - 2 : 0);
    const int y0 = std::min(static_cast<int>(y), img.height - 2 >= 0 ? img.height - 2 : 0);
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = img.at(x0, y0);
    const double v10 = img.at(std::min(x0 + 1, img.width - 1), y0);
    const double v01 = img.at(x0, std::min(y0 + 1, img.height - 1));
    const double v11 = img.at(std::min(x0 + 1, img.width - 1), std::min(y0 + 1, img.height - 1));
    return v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
           v11 * fx * fy;
}

struct GradientImages {
    ImageF ix;
    ImageF iy;
};

// 3x3 Sobel, 1/8 normalised so gradients stay in intensity units per pixel.
GradientImages sobel(const ImageF& img) {
    GradientImages g{ImageF(img.width, img.height), ImageF(img.width, img.height)};
    auto px = [&](int x, int y) {
        return img.at(std::clamp(x, 0, img.width - 1), std::clamp(y, 0, img.height - 1));
    };
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            g.ix.at(x, y) = static_cast<float>(gx / 8.0);
            g.iy.at(x, y) = static_cast<float>(gy / 8.0);
        }
    }
    return g;
}

// 5-tap binomial smoothing then 2x decimation.
ImageF downsample(const ImageF& img) {
    static const double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    ImageF tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int d = -2; d <= 2; ++d)
                acc += k[d + 2] * img.at(std::clamp(x + d, 0, img.width - 1), y);
            tmp.at(x, y) = static_cast<float>(acc);
        }
    }
    ImageF smooth(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int d = -2; d <= 2; ++d)
                acc += k[d + 2] * tmp.at(x, std::clamp(y + d, 0, img.height - 1));
            smooth.at(x, y) = static_cast<float>(acc);
        }
    }
    ImageF out(img.width / 2, img.height / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = smooth.at(2 * x, 2 * y);
    return out;
}

std::vector<ImageF> build_pyramid(const ImageF& img, int levels) {
    std::vector<ImageF> pyr{img};
    for (int l = 1; l < levels; ++l) {
        const ImageF& prev = pyr.back();
        if (prev.width < 16 || prev.height < 16) break;
        pyr.push_back(downsample(prev));
    }
    return pyr;
}

// Single-level iterative LK around one point. Returns displacement or
// nullopt when the normal matrix is singular or the window leaves the image.
std::optional<Point2d> lk_at_level(const ImageF& prev, const ImageF& next, double px,
                                   double py, double vx, double vy, int window) {
    const int half = window / 2;
    const double border = half + 2.0;
    if (px < border || py < border || px > prev.width - 1 - border ||
        py > prev.height - 1 - border)
        return std::nullopt;

    // Patch gradients on the previous frame via central differences.
    const int n = window * window;
    std::vector<double> gx(static_cast<std::size_t>(n));
    std::vector<double> gy(static_cast<std::size_t>(n));
    std::vector<double> tpl(static_cast<std::size_t>(n));
    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    std::size_t idx = 0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx, ++idx) {
            const double x = px + dx;
            const double y = py + dy;
            tpl[idx] = sample(prev, x, y);
            gx[idx] = 0.5 * (sample(prev, x + 1, y) - sample(prev, x - 1, y));
            gy[idx] = 0.5 * (sample(prev, x, y + 1) - sample(prev, x, y - 1));
            g00 += gx[idx] * gx[idx];
            g01 += gx[idx] * gy[idx];
            g11 += gy[idx] * gy[idx];
        }
    }
    const double det = g00 * g11 - g01 * g01;
    // Per-pixel minimum eigenvalue gate, so flat patches drop the point.
    const double tr = g00 + g11;
    const double min_eig = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    if (det <= 0.0 || min_eig / n < 1e-3) return std::nullopt;

    for (int iter = 0; iter < 20; ++iter) {
        const double cx = px + vx;
        const double cy = py + vy;
        if (cx < border || cy < border || cx > next.width - 1 - border ||
            cy > next.height - 1 - border)
            return std::nullopt;
        double b0 = 0.0, b1 = 0.0;
        idx = 0;
        for (int dy = -half; dy <= half; ++dy) {
            for (int dx = -half; dx <= half; ++dx, ++idx) {
                const double diff = tpl[idx] - sample(next, cx + dx, cy + dy);
                b0 += diff * gx[idx];
                b1 += diff * gy[idx];
            }
        }
        const double dvx = (g11 * b0 - g01 * b1) / det;
        const double dvy = (g00 * b1 - g01 * b0) / det;
        vx += dvx;
        vy += dvy;
        if (dvx * dvx + dvy * dvy < 0.01 * 0.01) break;
    }
    return Point2d{vx, vy};
}

std::optional<Point2d> track_point(const std::vector<ImageF>& prev_pyr,
                                   const std::vector<ImageF>& next_pyr, Point2d p,
                                   const FlowParams& params) {
    const int levels = static_cast<int>(std::min(prev_pyr.size(), next_pyr.size()));
    double vx = 0.0, vy = 0.0;
    for (int l = levels - 1; l >= 0; --l) {
        const double scale = std::pow(2.0, l);
        const auto d = lk_at_level(prev_pyr[static_cast<std::size_t>(l)],
                                   next_pyr[static_cast<std::size_t>(l)], p.x / scale,
                                   p.y / scale, vx, vy, params.lk_window);
        if (!d) return std::nullopt;
        vx = d->x;
        vy = d->y;
        if (l > 0) {
            vx *= 2.0;
            vy *= 2.0;
        }
    }
    return Point2d{p.x + vx, p.y + vy};
}

} // namespace

std::vector<Point2d> detect_corners(const ImageF& frame, const FlowParams& params) {
    if (params.max_corners < 1) throw ParamError("max_corners must be >= 1");
    if (params.min_distance < 1.0) throw ParamError("min_distance must be >= 1");
    if (params.quality_level <= 0.0 || params.quality_level >= 1.0)
        throw ParamError("quality_level must be in (0, 1)");

    const GradientImages grad = sobel(frame);

    // Summed-area tables over the tensor products.
    const int w = frame.width, h = frame.height;
    std::vector<double> sxx(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    std::vector<double> sxy(sxx.size(), 0.0);
    std::vector<double> syy(sxx.size(), 0.0);
    auto at = [w](std::vector<double>& t, int x, int y) -> double& {
        return t[static_cast<std::size_t>(y) * (w + 1) + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double ix = grad.ix.at(x, y);
            const double iy = grad.iy.at(x, y);
            at(sxx, x + 1, y + 1) = ix * ix + at(sxx, x, y + 1) + at(sxx, x + 1, y) - at(sxx, x, y);
            at(sxy, x + 1, y + 1) = ix * iy + at(sxy, x, y + 1) + at(sxy, x + 1, y) - at(sxy, x, y);
            at(syy, x + 1, y + 1) = iy * iy + at(syy, x, y + 1) + at(syy, x + 1, y) - at(syy, x, y);
        }
    }
    auto box = [&](std::vector<double>& t, int x0, int y0, int x1, int y1) {
        return at(t, x1 + 1, y1 + 1) - at(t, x0, y1 + 1) - at(t, x1 + 1, y0) + at(t, x0, y0);
    };

    const int left = (params.block_size - 1) / 2;
    const int right = params.block_size / 2;
    struct Corner {
        int x, y;
        double response;
    };
    std::vector<Corner> corners;
    double max_response = 0.0;
    for (int y = left + 1; y < h - right - 1; ++y) {
        for (int x = left + 1; x < w - right - 1; ++x) {
            const double a = box(sxx, x - left, y - left, x + right, y + right);
            const double b = box(sxy, x - left, y - left, x + right, y + right);
            const double c = box(syy, x - left, y - left, x + right, y + right);
            const double tr = a + c;
            const double dt = std::sqrt(std::max(0.0, (a - c) * (a - c) + 4.0 * b * b));
            const double min_eig = 0.5 * (tr - dt);
            if (min_eig > 0.0) {
                corners.push_back({x, y, min_eig});
                max_response = std::max(max_response, min_eig);
            }
        }
    }

    const double threshold = params.quality_level * max_response;
    std::erase_if(corners, [threshold](const Corner& c) { return c.response < threshold; });
    std::sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    std::vector<Point2d> kept;
    const double min_dist_sq = params.min_distance * params.min_distance;
    for (const auto& c : corners) {
        if (static_cast<int>(kept.size()) >= params.max_corners) break;
        bool clashes = false;
        for (const auto& k : kept) {
            const double dx = c.x - k.x;
            const double dy = c.y - k.y;
            if (dx * dx + dy * dy < min_dist_sq) {
                clashes = true;
                break;
            }
        }
        if (!clashes) kept.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
    }
    return kept;
}

std::vector<Point2d> detect_corners(const Image8& frame, const FlowParams& params) {
    return detect_corners(to_float(frame), params);
}

std::vector<std::optional<Point2d>> lk_step(const ImageF& prev_frame,
                                            const ImageF& next_frame,
                                            const std::vector<Point2d>& points,
                                            const FlowParams& params) {
    const auto prev_pyr = build_pyramid(prev_frame, params.pyramid_levels);
    const auto next_pyr = build_pyramid(next_frame, params.pyramid_levels);

    std::vector<std::optional<Point2d>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto fwd = track_point(prev_pyr, next_pyr, points[i], params);
        if (!fwd) continue;
        // Forward-backward consistency gate.
        const auto back = track_point(next_pyr, prev_pyr, *fwd, params);
        if (!back) continue;
        const double ex = back->x - points[i].x;
        const double ey = back->y - points[i].y;
        if (ex * ex + ey * ey > params.fb_error_max * params.fb_error_max) continue;
        out[i] = fwd;
    }
    return out;
}

std::vector<Trajectory> track_lk(const FrameSequence& seq, const FlowParams& params,
                                 int redetect_interval, int min_track_length) {
    if (seq.frames.size() < 2) throw ParamError("track_lk needs at least 2 frames");
    if (redetect_interval < 1) throw ParamError("redetect_interval must be >= 1");

    struct Active {
        int id;
        Point2d pos;
        std::vector<TrackPoint> points;
    };
    std::vector<Active> active;
    std::vector<Trajectory> finished;
    int next_id = 0;

    auto retire = [&](Active& a) {
        Trajectory t;
        t.particle_id = a.id;
        t.points = std::move(a.points);
        t.source = TrackSource::lucas_kanade;
        finished.push_back(std::move(t));
    };
    auto add_corners = [&](const ImageF& frame, int frame_index) {
        const double min_dist_sq = params.min_distance * params.min_distance;
        for (const auto& c : detect_corners(frame, params)) {
            bool near_active = false;
            for (const auto& a : active) {
                const double dx = c.x - a.pos.x;
                const double dy = c.y - a.pos.y;
                if (dx * dx + dy * dy < min_dist_sq) {
                    near_active = true;
                    break;
                }
            }
            if (near_active) continue;
            Active a;
            a.id = next_id++;
            a.pos = c;
            a.points.push_back({frame_index, c.x, c.y});
            active.push_back(std::move(a));
        }
    };

    ImageF prev = to_float(seq.frames[0]);
    add_corners(prev, 0);
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        const ImageF next = to_float(seq.frames[t]);
        std::vector<Point2d> positions;
        positions.reserve(active.size());
        for (const auto& a : active) positions.push_back(a.pos);
        const auto moved = lk_step(prev, next, positions, params);

        std::vector<Active> still_active;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (moved[i]) {
                active[i].pos = *moved[i];
                active[i].points.push_back({static_cast<int>(t), moved[i]->x, moved[i]->y});
                still_active.push_back(std::move(active[i]));
            } else {
                retire(active[i]);
            }
        }
        active = std::move(still_active);

        if (static_cast<int>(t) % redetect_interval == 0)
            add_corners(next, static_cast<int>(t));
        prev = next;
    }
    for (auto& a : active) retire(a);

    finished = filter_tracks(std::move(finished), min_track_length);
    std::sort(finished.begin(), finished.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  return a.particle_id < b.particle_id;
              });
    return finished;
}

} // namespace motil
