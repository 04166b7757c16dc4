#ifndef MOTIL_SYNTH_HPP
#define MOTIL_SYNTH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "motil/image.hpp"
#include "motil/labels.hpp"
#include "motil/trajectory.hpp"

namespace motil {

enum class ParticleClass { progressive, non_progressive, immotile };

// Scene description for the synthetic-video oracle. Progressive particles
// move with a directed velocity plus heading noise, non-progressive ones
// diffuse with zero net velocity, immotile ones stay put. Drift is added on
// top of every position.
struct SceneSpec {
    int n_progressive = 0;
    int n_non_progressive = 0;
    int n_immotile = 0;
    double speed = 2.0;          // px/frame, progressive class
    double heading_noise = 0.05; // rad/frame angular perturbation
    double diffusion = 1.0;      // px^2/frame, non-progressive class
    double drift_x = 0.0;        // px/frame
    double drift_y = 0.0;
    double blink_prob = 0.0;     // per-frame probability of starting a blink
    int blink_max_gap = 0;       // longest blink, frames
    double blob_sigma = 2.0;     // Gaussian blob radius, pixels
    double blob_brightness = 200.0; // peak amplitude, 8-bit scale
    double noise_sigma = 0.0;    // additive pixel noise
    int width = 256;
    int height = 192;
    int frames = 100;
    double fps = 50.0;
    double margin = 12.0;        // keep-away distance from frame borders
    std::uint64_t seed = 1;
};

struct TruthParticle {
    int id = 0;
    ParticleClass cls = ParticleClass::immotile;
    std::vector<TrackPoint> positions; // one entry per frame, drift included
    std::vector<bool> visible;         // false while blinking
};

struct GroundTruth {
    std::vector<TruthParticle> particles;
    MotilityLabel label; // class fractions x 100

    const TruthParticle& particle(int id) const { return particles[static_cast<std::size_t>(id)]; }
};

// Integrates motion only; cheap oracle for linking and feature tests.
GroundTruth simulate_tracks(const SceneSpec& spec);

// Full simulation: motion plus Gaussian-blob rendering into 8-bit frames.
std::pair<FrameSequence, GroundTruth> simulate(const SceneSpec& spec);

// Tracking quality against ground truth. Each detected track is assigned to
// the truth particle with the smallest mean position error over the track's
// frames, if that error is within match_tol.
struct TrackScore {
    double track_recall = 0.0;     // matched true tracks / true tracks
    int id_switches = 0;           // extra detected tracks per true track
    double mean_position_error = 0.0; // px over matched (track, frame) pairs
};

TrackScore score_tracking(const std::vector<Trajectory>& tracks,
                          const GroundTruth& truth, double match_tol = 5.0);

} // namespace motil

#endif
