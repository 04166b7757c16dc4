#include "motil/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motil/errors.hpp"

namespace motil {

namespace {

double dist(const TrackPoint& a, const TrackPoint& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

double sq_dist(const TrackPoint& a, const TrackPoint& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    return dx * dx + dy * dy;
}

} // namespace

CmsFeature cms(const Trajectory& track) {
    const auto& pts = track.points;
    const std::size_t n = pts.size();
    if (n < 2) throw ParamError("cms needs a track of at least 2 points");

    // Prefix path lengths: cum[i] = path length over points 0..i.
    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + dist(pts[i - 1], pts[i]);

    CmsFeature feature;
    feature.track_id = track.particle_id;
    std::size_t out = 0;
    for (int w : kCmsWindowSizes) {
        const std::size_t win = static_cast<std::size_t>(w);
        double path_sum = 0.0, path_max = -std::numeric_limits<double>::infinity();
        double path_min = std::numeric_limits<double>::infinity();
        double net_sum = 0.0, net_max = -std::numeric_limits<double>::infinity();
        double net_min = std::numeric_limits<double>::infinity();
        std::size_t count = 0;

        auto take = [&](std::size_t first, std::size_t last) {
            const double path = cum[last] - cum[first];
            const double net = dist(pts[first], pts[last]);
            path_sum += path;
            path_max = std::max(path_max, path);
            path_min = std::min(path_min, path);
            net_sum += net;
            net_max = std::max(net_max, net);
            net_min = std::min(net_min, net);
            ++count;
        };

        if (n < win) {
            take(0, n - 1); // short track: one window spanning everything
        } else {
            for (std::size_t start = 0; start + win <= n; ++start)
                take(start, start + win - 1);
        }

        feature.values[out++] = path_sum / static_cast<double>(count);
        feature.values[out++] = path_max;
        feature.values[out++] = path_min;
        feature.values[out++] = net_sum / static_cast<double>(count);
        feature.values[out++] = net_max;
        feature.values[out++] = net_min;
    }

    const double total = cum[n - 1];
    const int span = track.span();
    feature.values[out++] = total;
    feature.values[out++] = span > 0 ? total / span : 0.0;
    return feature;
}

MsdVector imsd(const Trajectory& track, double lag_max_seconds, double fps) {
    if (fps <= 0.0) throw ParamError("fps must be positive");
    const int max_lag = static_cast<int>(std::lround(lag_max_seconds * fps));
    if (max_lag < 1) throw ParamError("lag_max too small for the frame rate");

    const auto& pts = track.points;
    std::vector<double> sums(static_cast<std::size_t>(max_lag), 0.0);
    std::vector<long> counts(static_cast<std::size_t>(max_lag), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const int lag = pts[j].frame - pts[i].frame;
            if (lag > max_lag) break;
            sums[static_cast<std::size_t>(lag - 1)] += sq_dist(pts[i], pts[j]);
            counts[static_cast<std::size_t>(lag - 1)] += 1;
        }
    }

    MsdVector msd;
    msd.kind = MsdVector::Kind::imsd;
    msd.ref_id = track.particle_id;
    msd.fps = fps;
    msd.values.resize(static_cast<std::size_t>(max_lag), 0.0);
    double last = 0.0;
    for (int l = 0; l < max_lag; ++l) {
        if (counts[static_cast<std::size_t>(l)] > 0)
            last = sums[static_cast<std::size_t>(l)] /
                   static_cast<double>(counts[static_cast<std::size_t>(l)]);
        msd.values[static_cast<std::size_t>(l)] = last;
    }
    return msd;
}

std::vector<MsdVector> emsd(const std::vector<Trajectory>& tracks,
                            double window_seconds, double hop_seconds, double fps) {
    if (tracks.empty()) throw EmptySample("emsd: no tracks");
    if (fps <= 0.0) throw ParamError("fps must be positive");
    const int window_frames = static_cast<int>(std::lround(window_seconds * fps));
    const int hop_frames = static_cast<int>(std::lround(hop_seconds * fps));
    if (window_frames < 1 || hop_frames < 1)
        throw ParamError("window and hop must be at least one frame");

    int max_frame = 0;
    for (const auto& t : tracks) max_frame = std::max(max_frame, t.last_frame());

    std::vector<MsdVector> out;
    int window_index = 0;
    for (int start = 0; start + window_frames <= max_frame;
         start += hop_frames, ++window_index) {
        const int end = start + window_frames; // inclusive frame bound
        std::vector<double> mean_sums(static_cast<std::size_t>(window_frames), 0.0);
        std::vector<long> track_counts(static_cast<std::size_t>(window_frames), 0);
        bool any_track = false;

        for (const auto& t : tracks) {
            // Points inside [start, end].
            const auto lo = std::lower_bound(
                t.points.begin(), t.points.end(), start,
                [](const TrackPoint& p, int f) { return p.frame < f; });
            const auto hi = std::upper_bound(
                t.points.begin(), t.points.end(), end,
                [](int f, const TrackPoint& p) { return f < p.frame; });
            if (lo == hi) continue;
            any_track = true;

            std::vector<double> sums(static_cast<std::size_t>(window_frames), 0.0);
            std::vector<long> counts(static_cast<std::size_t>(window_frames), 0);
            for (auto i = lo; i != hi; ++i) {
                for (auto j = i + 1; j != hi; ++j) {
                    const int lag = j->frame - i->frame;
                    if (lag > window_frames) break;
                    sums[static_cast<std::size_t>(lag - 1)] += sq_dist(*i, *j);
                    counts[static_cast<std::size_t>(lag - 1)] += 1;
                }
            }
            for (int l = 0; l < window_frames; ++l) {
                if (counts[static_cast<std::size_t>(l)] > 0) {
                    mean_sums[static_cast<std::size_t>(l)] +=
                        sums[static_cast<std::size_t>(l)] /
                        static_cast<double>(counts[static_cast<std::size_t>(l)]);
                    track_counts[static_cast<std::size_t>(l)] += 1;
                }
            }
        }
        if (!any_track) continue; // logged by callers that care

        MsdVector msd;
        msd.kind = MsdVector::Kind::emsd;
        msd.ref_id = window_index;
        msd.window_start = start;
        msd.window_len = window_frames;
        msd.fps = fps;
        msd.values.resize(static_cast<std::size_t>(window_frames), 0.0);
        double last = 0.0;
        for (int l = 0; l < window_frames; ++l) {
            if (track_counts[static_cast<std::size_t>(l)] > 0)
                last = mean_sums[static_cast<std::size_t>(l)] /
                       static_cast<double>(track_counts[static_cast<std::size_t>(l)]);
            msd.values[static_cast<std::size_t>(l)] = last;
        }
        out.push_back(std::move(msd));
    }
    return out;
}

} // namespace motil
