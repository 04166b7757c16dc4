#ifndef MOTIL_FLOW_HPP
#define MOTIL_FLOW_HPP

#include <optional>
#include <vector>

#include "motil/image.hpp"
#include "motil/trajectory.hpp"

namespace motil {

struct FlowParams {
    int max_corners = 100;
    double min_distance = 10.0;  // px, corner suppression radius
    int block_size = 10;         // px, structure-tensor window
    double quality_level = 0.01; // fraction of the max corner response
    int lk_window = 15;          // px, odd
    int pyramid_levels = 2;      // total levels including full resolution
    double fb_error_max = 1.0;   // px, forward-backward consistency gate
};

struct Point2d {
    double x = 0.0;
    double y = 0.0;
};

// Shi-Tomasi corners: minimum eigenvalue of the block-averaged structure
// tensor, thresholded at quality_level x max response, greedily suppressed
// within min_distance in descending response order, capped at max_corners.
std::vector<Point2d> detect_corners(const ImageF& frame, const FlowParams& params);
std::vector<Point2d> detect_corners(const Image8& frame, const FlowParams& params);

// One pyramidal Lucas-Kanade step per point; nullopt marks a lost point
// (singular gradient matrix, left interior, or failed forward-backward
// check).
std::vector<std::optional<Point2d>> lk_step(const ImageF& prev_frame,
                                            const ImageF& next_frame,
                                            const std::vector<Point2d>& points,
                                            const FlowParams& params);

// Full sparse-flow tracker: corners re-detected every redetect_interval
// frames; tracks shorter than min_track_length points are dropped.
std::vector<Trajectory> track_lk(const FrameSequence& seq, const FlowParams& params,
                                 int redetect_interval = 5, int min_track_length = 25);

} // namespace motil

#endif
