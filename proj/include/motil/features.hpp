#ifndef MOTIL_FEATURES_HPP
#define MOTIL_FEATURES_HPP

#include <array>
#include <vector>

#include "motil/trajectory.hpp"

namespace motil {

// Sliding-window sizes for the custom movement statistics, in frames.
inline constexpr std::array<int, 14> kCmsWindowSizes = {
    5, 10, 20, 50, 80, 100, 150, 200, 250, 300, 400, 500, 750, 1000};

inline constexpr int kCmsDim = 14 * 2 * 3 + 2; // 86

// Per-track movement statistics. Layout: for each window size, the
// {mean, max, min} of path length then of net displacement; the final two
// entries are the full-track path length and the mean speed in px/frame.
struct CmsFeature {
    int track_id = 0;
    std::array<double, kCmsDim> values{};
};

// Lag-indexed mean squared displacement; values[l-1] is the MSD at a lag of
// l frames.
struct MsdVector {
    enum class Kind { imsd, emsd };
    Kind kind = Kind::imsd;
    int ref_id = 0;       // track id (imsd) or window index (emsd)
    int window_start = 0; // frame
    int window_len = 0;   // frames (emsd; 0 for whole-track imsd)
    double fps = 0.0;
    std::vector<double> values;
};

// Windows of each size slide over the track's points with a hop of one
// point; tracks shorter than a window size contribute a single whole-track
// window. Requires >= 2 points.
CmsFeature cms(const Trajectory& track);

// Time-averaged MSD per lag of 1..round(lag_max * fps) frames over all
// frame pairs present in the track. Gaps are respected: lags count frame
// indices, not list positions. Lags beyond the track span repeat the last
// computed value.
MsdVector imsd(const Trajectory& track, double lag_max_seconds, double fps);

// Ensemble MSD for sliding video windows aligned to frame 0. Each window
// covers frames [start, start + window_frames] so every lag of
// 1..window_frames is measurable; tracks are averaged with equal weight per
// track that has at least one pair at the lag. Windows with no tracks are
// skipped.
std::vector<MsdVector> emsd(const std::vector<Trajectory>& tracks,
                            double window_seconds, double hop_seconds, double fps);

} // namespace motil

#endif
