#include "motil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "motil/errors.hpp"
#include "motil/rng.hpp"

namespace motil {

namespace {

struct ParticleState {
    ParticleClass cls;
    double x, y;     // intrinsic position (drift excluded)
    double heading;  // progressive only
    int blink_left;  // frames of invisibility remaining
};

void validate(const SceneSpec& spec) {
    if (spec.n_progressive < 0 || spec.n_non_progressive < 0 || spec.n_immotile < 0)
        throw SpecError("particle counts must be >= 0");
    if (spec.n_progressive + spec.n_non_progressive + spec.n_immotile == 0)
        throw SpecError("scene has no particles");
    if (spec.frames < 1) throw SpecError("frames must be >= 1");
    if (spec.fps <= 0.0) throw SpecError("fps must be positive");
    if (spec.width < 8 || spec.height < 8) throw SpecError("frame geometry too small");
    if (spec.margin * 2.0 >= std::min(spec.width, spec.height))
        throw SpecError("margin leaves no interior");
    if (spec.blink_prob < 0.0 || spec.blink_prob > 1.0)
        throw SpecError("blink_prob must be in [0, 1]");
    if (spec.blink_prob > 0.0 && spec.blink_max_gap < 1)
        throw SpecError("blink_max_gap must be >= 1 when blinking is enabled");
}

// Reflect v into [lo, hi].
double reflect(double v, double lo, double hi) {
    while (v < lo || v > hi) {
        if (v < lo) v = 2.0 * lo - v;
        if (v > hi) v = 2.0 * hi - v;
    }
    return v;
}

} // namespace

GroundTruth simulate_tracks(const SceneSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);

    const int total = spec.n_progressive + spec.n_non_progressive + spec.n_immotile;
    const double lo_x = spec.margin, hi_x = spec.width - 1 - spec.margin;
    const double lo_y = spec.margin, hi_y = spec.height - 1 - spec.margin;

    // Initial placement with rejection sampling for separation; falls back to
    // accepting the candidate when the scene is too crowded to separate.
    const double min_sep = 4.0 * spec.blob_sigma + 4.0;
    std::vector<ParticleState> state;
    state.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        ParticleClass cls = i < spec.n_progressive ? ParticleClass::progressive
                            : i < spec.n_progressive + spec.n_non_progressive
                                ? ParticleClass::non_progressive
                                : ParticleClass::immotile;
        double px = 0.0, py = 0.0;
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            px = rng.uniform(lo_x, hi_x);
            py = rng.uniform(lo_y, hi_y);
            placed = true;
            for (const auto& other : state) {
                const double dx = px - other.x, dy = py - other.y;
                if (dx * dx + dy * dy < min_sep * min_sep) {
                    placed = false;
                    break;
                }
            }
        }
        state.push_back({cls, px, py, rng.uniform(0.0, 2.0 * std::numbers::pi), 0});
    }

    GroundTruth truth;
    truth.particles.resize(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        auto& p = truth.particles[static_cast<std::size_t>(i)];
        p.id = i;
        p.cls = state[static_cast<std::size_t>(i)].cls;
        p.positions.reserve(static_cast<std::size_t>(spec.frames));
        p.visible.reserve(static_cast<std::size_t>(spec.frames));
    }

    const double step_sd = std::sqrt(2.0 * spec.diffusion);
    for (int f = 0; f < spec.frames; ++f) {
        const double drift_x = spec.drift_x * f;
        const double drift_y = spec.drift_y * f;
        for (int i = 0; i < total; ++i) {
            auto& s = state[static_cast<std::size_t>(i)];
            if (f > 0) {
                switch (s.cls) {
                    case ParticleClass::progressive:
                        s.heading += rng.normal(0.0, spec.heading_noise);
                        s.x += spec.speed * std::cos(s.heading);
                        s.y += spec.speed * std::sin(s.heading);
                        break;
                    case ParticleClass::non_progressive:
                        s.x += rng.normal(0.0, step_sd);
                        s.y += rng.normal(0.0, step_sd);
                        break;
                    case ParticleClass::immotile:
                        break;
                }
                if (s.x < lo_x || s.x > hi_x) {
                    s.x = reflect(s.x, lo_x, hi_x);
                    if (s.cls == ParticleClass::progressive)
                        s.heading = std::numbers::pi - s.heading;
                }
                if (s.y < lo_y || s.y > hi_y) {
                    s.y = reflect(s.y, lo_y, hi_y);
                    if (s.cls == ParticleClass::progressive) s.heading = -s.heading;
                }
            }

            bool visible = true;
            if (s.blink_left > 0) {
                visible = false;
                --s.blink_left;
            } else if (spec.blink_prob > 0.0 && rng.uniform() < spec.blink_prob) {
                s.blink_left =
                    static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.blink_max_gap))) + 1;
                visible = false;
                --s.blink_left;
            }

            auto& p = truth.particles[static_cast<std::size_t>(i)];
            p.positions.push_back({f, s.x + drift_x, s.y + drift_y});
            p.visible.push_back(visible);
        }
    }

    truth.label.progressive = 100.0 * spec.n_progressive / total;
    truth.label.non_progressive = 100.0 * spec.n_non_progressive / total;
    truth.label.immotile = 100.0 * spec.n_immotile / total;
    return truth;
}

std::pair<FrameSequence, GroundTruth> simulate(const SceneSpec& spec) {
    GroundTruth truth = simulate_tracks(spec);

    // Noise drawn from an independent stream so motion is unaffected.
    Rng noise_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);

    FrameSequence seq;
    seq.video_id = "synthetic";
    seq.fps = spec.fps;
    seq.width = spec.width;
    seq.height = spec.height;
    seq.frames.reserve(static_cast<std::size_t>(spec.frames));

    const int reach = static_cast<int>(std::ceil(4.0 * spec.blob_sigma));
    const double inv_two_sigma_sq = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);

    for (int f = 0; f < spec.frames; ++f) {
        ImageF canvas(spec.width, spec.height, 0.0f);
        for (const auto& p : truth.particles) {
            if (!p.visible[static_cast<std::size_t>(f)]) continue;
            const auto& pos = p.positions[static_cast<std::size_t>(f)];
            if (pos.x < -reach || pos.x > spec.width - 1 + reach || pos.y < -reach ||
                pos.y > spec.height - 1 + reach)
                throw SpecError("particle left the frame during simulation");
            const int x0 = std::max(0, static_cast<int>(std::floor(pos.x)) - reach);
            const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(pos.x)) + reach);
            const int y0 = std::max(0, static_cast<int>(std::floor(pos.y)) - reach);
            const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(pos.y)) + reach);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - pos.x;
                    const double dy = y - pos.y;
                    canvas.at(x, y) += static_cast<float>(
                        spec.blob_brightness *
                        std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq));
                }
            }
        }

        Image8 frame(spec.width, spec.height);
        for (std::size_t i = 0; i < canvas.pixels.size(); ++i) {
            double v = canvas.pixels[i];
            if (spec.noise_sigma > 0.0) v += noise_rng.normal(0.0, spec.noise_sigma);
            frame.pixels[i] =
                static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
        seq.frames.push_back(std::move(frame));
    }
    return {std::move(seq), std::move(truth)};
}

TrackScore score_tracking(const std::vector<Trajectory>& tracks,
                          const GroundTruth& truth, double match_tol) {
    TrackScore score;
    if (truth.particles.empty()) return score;

    std::vector<int> tracks_per_truth(truth.particles.size(), 0);
    double error_sum = 0.0;
    std::size_t error_count = 0;

    for (const auto& track : tracks) {
        int best = -1;
        double best_err = std::numeric_limits<double>::infinity();
        for (const auto& p : truth.particles) {
            double sum = 0.0;
            int n = 0;
            for (const auto& pt : track.points) {
                if (pt.frame < 0 ||
                    pt.frame >= static_cast<int>(p.positions.size()))
                    continue;
                const auto& tp = p.positions[static_cast<std::size_t>(pt.frame)];
                sum += std::hypot(pt.x - tp.x, pt.y - tp.y);
                ++n;
            }
            if (n == 0) continue;
            const double mean = sum / n;
            if (mean < best_err) {
                best_err = mean;
                best = p.id;
            }
        }
        if (best >= 0 && best_err <= match_tol) {
            tracks_per_truth[static_cast<std::size_t>(best)] += 1;
            for (const auto& pt : track.points) {
                if (pt.frame < 0 ||
                    pt.frame >= static_cast<int>(
                                    truth.particles[static_cast<std::size_t>(best)].positions.size()))
                    continue;
                const auto& tp = truth.particles[static_cast<std::size_t>(best)]
                                     .positions[static_cast<std::size_t>(pt.frame)];
                error_sum += std::hypot(pt.x - tp.x, pt.y - tp.y);
                ++error_count;
            }
        }
    }

    int matched = 0;
    for (int n : tracks_per_truth) {
        if (n > 0) {
            ++matched;
            score.id_switches += n - 1;
        }
    }
    score.track_recall = static_cast<double>(matched) /
                         static_cast<double>(truth.particles.size());
    score.mean_position_error = error_count > 0 ? error_sum / error_count : 0.0;
    return score;
}

} // namespace motil
