#ifndef MOTIL_TRAJECTORY_HPP
#define MOTIL_TRAJECTORY_HPP

#include <array>
#include <vector>

namespace motil {

struct TrackPoint {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
};

enum class TrackSource { crocker_grier, lucas_kanade };

// One particle's time-indexed subpixel positions. Frame indices are strictly
// increasing; gaps of up to the linker's memory parameter may occur.
struct Trajectory {
    int particle_id = 0;
    std::vector<TrackPoint> points;
    TrackSource source = TrackSource::crocker_grier;

    int first_frame() const { return points.front().frame; }
    int last_frame() const { return points.back().frame; }
    int span() const { return last_frame() - first_frame(); }
};

// Cumulative per-frame ensemble displacement; offsets[0] is (0, 0) at
// first_frame.
struct DriftSeries {
    int first_frame = 0;
    std::vector<std::array<double, 2>> offsets;

    const std::array<double, 2>& at_frame(int frame) const {
        return offsets[static_cast<std::size_t>(frame - first_frame)];
    }
};

} // namespace motil

#endif
