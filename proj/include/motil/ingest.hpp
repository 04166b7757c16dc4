#ifndef MOTIL_INGEST_HPP
#define MOTIL_INGEST_HPP

#include <filesystem>

#include "motil/image.hpp"

namespace motil {

// Loads a frame sequence from either a directory of frame_%06d.pgm files or
// a single MTRK1 raw container. Frame indices in a directory must form a
// contiguous run; any gap, duplicate or geometry mismatch is an IngestError.
FrameSequence load_sequence(const std::filesystem::path& path, double fps);

// Writes a sequence as frame_%06d.pgm files under dir (created if missing).
void write_sequence(const std::filesystem::path& dir, const FrameSequence& seq);

// Writes/reads the raw container: "MTRK1 <width> <height> <fps> <count>\n"
// followed by count row-major 8-bit frames.
void write_container(const std::filesystem::path& path, const FrameSequence& seq);

// Crocker-Grier preprocessing: Gaussian noise smoothing minus a boxcar
// background estimate of side feature_diameter, clamped at zero. Borders are
// handled by edge replication. feature_diameter must be odd and >= 3.
FilteredFrame bandpass(const ImageF& frame, int frame_index, int feature_diameter,
                       double noise_sigma);
FilteredFrame bandpass(const Image8& frame, int frame_index, int feature_diameter,
                       double noise_sigma);

// Separable building blocks, exposed for reuse by the flow module.
ImageF gaussian_blur(const ImageF& img, double sigma);
ImageF boxcar_mean(const ImageF& img, int side);

} // namespace motil

#endif
