#include <doctest.h>

#include <cmath>
#include <numbers>

#include "motil/errors.hpp"
#include "motil/synth.hpp"

using namespace motil;

TEST_CASE("immotile-only scenes have zero displacement everywhere") {
    SceneSpec spec;
    spec.n_immotile = 5;
    spec.frames = 40;
    spec.seed = 2;
    const auto truth = simulate_tracks(spec);
    for (const auto& p : truth.particles) {
        const auto& first = p.positions.front();
        for (const auto& pos : p.positions) {
            CHECK(pos.x == first.x);
            CHECK(pos.y == first.y);
        }
    }
}

TEST_CASE("brownian ground truth obeys the 4Dl law") {
    SceneSpec spec;
    spec.n_non_progressive = 100;
    spec.diffusion = 2.0;
    spec.frames = 200;
    spec.width = 4000; // generous interior so reflections never trigger
    spec.height = 4000;
    spec.margin = 1500.0;
    spec.seed = 5;
    const auto truth = simulate_tracks(spec);

    // Empirical MSD over all particles and pair starts at a few lags.
    for (int lag : {1, 5, 10, 20}) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : truth.particles) {
            for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < p.positions.size(); ++i) {
                const auto& a = p.positions[i];
                const auto& b = p.positions[i + static_cast<std::size_t>(lag)];
                sum += (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
                ++n;
            }
        }
        const double msd = sum / static_cast<double>(n);
        const double expected = 4.0 * spec.diffusion * lag;
        CHECK(std::abs(msd - expected) / expected < 0.10);
    }
}

TEST_CASE("class counts define the motility label") {
    SceneSpec spec;
    spec.n_progressive = 4;
    spec.n_non_progressive = 3;
    spec.n_immotile = 3;
    spec.frames = 5;
    const auto truth = simulate_tracks(spec);
    CHECK(truth.label.progressive == doctest::Approx(40.0));
    CHECK(truth.label.non_progressive == doctest::Approx(30.0));
    CHECK(truth.label.immotile == doctest::Approx(30.0));
    CHECK(truth.label.progressive + truth.label.non_progressive +
              truth.label.immotile ==
          doctest::Approx(100.0));
}

TEST_CASE("simulate is deterministic per seed and label ignores the seed") {
    SceneSpec spec;
    spec.n_progressive = 2;
    spec.n_non_progressive = 2;
    spec.n_immotile = 1;
    spec.frames = 12;
    spec.seed = 9;
    auto [seq_a, truth_a] = simulate(spec);
    auto [seq_b, truth_b] = simulate(spec);
    REQUIRE(seq_a.frames.size() == seq_b.frames.size());
    for (std::size_t f = 0; f < seq_a.frames.size(); ++f) {
        CHECK(seq_a.frames[f].pixels == seq_b.frames[f].pixels);
    }

    spec.seed = 10;
    const auto truth_c = simulate_tracks(spec);
    CHECK(truth_c.label.progressive == truth_a.label.progressive);
    CHECK(truth_c.label.immotile == truth_a.label.immotile);
}

TEST_CASE("rendered blob mass matches the analytic Gaussian integral") {
    SceneSpec spec;
    spec.n_immotile = 1;
    spec.frames = 1;
    spec.blob_sigma = 2.0;
    spec.blob_brightness = 200.0;
    spec.width = 64;
    spec.height = 64;
    spec.margin = 20.0;
    spec.seed = 4;
    auto [seq, truth] = simulate(spec);

    double mass = 0.0;
    for (auto v : seq.frames[0].pixels) mass += v;
    const double analytic =
        spec.blob_brightness * 2.0 * std::numbers::pi * spec.blob_sigma * spec.blob_sigma;
    CHECK(std::abs(mass - analytic) / analytic < 0.02);
}

TEST_CASE("blinking produces invisible stretches no longer than the max gap") {
    SceneSpec spec;
    spec.n_immotile = 10;
    spec.frames = 200;
    spec.blink_prob = 0.05;
    spec.blink_max_gap = 3;
    spec.seed = 21;
    const auto truth = simulate_tracks(spec);
    bool saw_blink = false;
    for (const auto& p : truth.particles) {
        int run = 0;
        for (bool v : p.visible) {
            if (!v) {
                ++run;
                saw_blink = true;
                CHECK(run <= 3);
            } else {
                run = 0;
            }
        }
    }
    CHECK(saw_blink);
}

TEST_CASE("scene validation") {
    SceneSpec spec;
    CHECK_THROWS_AS(simulate_tracks(spec), SpecError); // no particles
    spec.n_immotile = 1;
    spec.frames = 0;
    CHECK_THROWS_AS(simulate_tracks(spec), SpecError);
    spec.frames = 10;
    spec.margin = 200.0;
    CHECK_THROWS_AS(simulate_tracks(spec), SpecError);
}

TEST_CASE("score_tracking on perfect, empty, and split tracks") {
    SceneSpec spec;
    spec.n_immotile = 3;
    spec.frames = 50;
    spec.seed = 6;
    const auto truth = simulate_tracks(spec);

    std::vector<Trajectory> perfect;
    for (const auto& p : truth.particles) {
        Trajectory t;
        t.particle_id = p.id;
        t.points = p.positions;
        perfect.push_back(t);
    }
    auto s = score_tracking(perfect, truth);
    CHECK(s.track_recall == doctest::Approx(1.0));
    CHECK(s.id_switches == 0);
    CHECK(s.mean_position_error == doctest::Approx(0.0));

    CHECK(score_tracking({}, truth).track_recall == doctest::Approx(0.0));

    // One true track split into two detected halves.
    std::vector<Trajectory> split;
    for (const auto& p : truth.particles) {
        Trajectory a, b;
        a.particle_id = 2 * p.id;
        b.particle_id = 2 * p.id + 1;
        a.points.assign(p.positions.begin(), p.positions.begin() + 25);
        b.points.assign(p.positions.begin() + 25, p.positions.end());
        if (p.id == 0) {
            split.push_back(a);
            split.push_back(b);
        } else {
            Trajectory whole;
            whole.particle_id = 2 * p.id;
            whole.points = p.positions;
            split.push_back(whole);
        }
    }
    s = score_tracking(split, truth);
    CHECK(s.track_recall == doctest::Approx(1.0));
    CHECK(s.id_switches == 1);
}
