#ifndef MOTIL_LOCATE_HPP
#define MOTIL_LOCATE_HPP

#include <optional>
#include <vector>

#include "motil/image.hpp"

namespace motil {

// Subpixel particle detection in one frame.
struct Spot {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
    double mass = 0.0; // intensity sum over the refinement mask
    double size = 0.0; // radius of gyration, pixels
};

struct LocateParams {
    int diameter = 11;        // odd, >= 3
    double minmass = 900.0;   // minimum mass on the filtered image
    double percentile = 0.30; // keep maxima in the upper `percentile` of brightness
};

// Integer pixel candidates: local maxima under grayscale dilation with a
// square structuring element of side `diameter`, brighter than the
// (1 - percentile) quantile of positive pixel brightness, deduplicated so no
// two survive within `diameter` of each other (brighter wins; ties go to the
// lower (y, x)).
std::vector<std::pair<int, int>> find_maxima(const ImageF& frame, int diameter,
                                             double percentile);

// Iterative brightness-weighted centroid in a circular mask of radius
// diameter/2 around the candidate. Returns nothing when the mask has zero
// mass or the window would leave the frame.
std::optional<Spot> refine(const ImageF& frame, int frame_index, int cx, int cy,
                           int diameter);

// find_maxima -> drop border candidates -> refine -> mass filter; spots are
// sorted by (y, x).
std::vector<Spot> locate_frame(const FilteredFrame& frame, const LocateParams& params);

// Bandpass + locate over every frame, parallel over frames, merged in frame
// order. noise_sigma feeds the bandpass stage.
std::vector<Spot> locate_sequence(const FrameSequence& seq, const LocateParams& params,
                                  double noise_sigma = 1.0, int threads = 0);

} // namespace motil

#endif
