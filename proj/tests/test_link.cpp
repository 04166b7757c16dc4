#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "motil/errors.hpp"
#include "motil/link.hpp"
#include "motil/synth.hpp"

using namespace motil;

namespace {

Spot spot(int frame, double x, double y) {
    return Spot{frame, x, y, 1000.0, 2.0};
}

// Spots straight from ground truth, honouring blink visibility.
std::vector<Spot> spots_from_truth(const GroundTruth& truth) {
    std::vector<Spot> spots;
    std::size_t frames = truth.particles.front().positions.size();
    for (std::size_t f = 0; f < frames; ++f) {
        for (const auto& p : truth.particles) {
            if (!p.visible[f]) continue;
            const auto& pos = p.positions[f];
            spots.push_back(spot(pos.frame, pos.x, pos.y));
        }
    }
    return spots;
}

} // namespace

TEST_CASE("two stationary particles give two full-length trajectories") {
    SceneSpec spec;
    spec.n_immotile = 2;
    spec.frames = 100;
    spec.width = 128;
    spec.height = 96;
    spec.seed = 7;
    const GroundTruth truth = simulate_tracks(spec);
    const auto tracks = link_spots(spots_from_truth(truth));
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].points.size() == 100);
    CHECK(tracks[1].points.size() == 100);
}

TEST_CASE("a particle blinking off within memory stays one trajectory") {
    std::vector<Spot> spots;
    for (int f = 0; f < 30; ++f) {
        if (f >= 10 && f < 13) continue; // 3-frame gap
        spots.push_back(spot(f, 50.0, 50.0));
    }
    const auto tracks = link_spots(spots, {5.0, 3, 8, 200});
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].points.size() == 27);
    // The gap is preserved, not interpolated.
    bool has_gap = false;
    for (std::size_t i = 1; i < tracks[0].points.size(); ++i) {
        if (tracks[0].points[i].frame - tracks[0].points[i - 1].frame == 4)
            has_gap = true;
    }
    CHECK(has_gap);
}

TEST_CASE("a 4-frame gap with memory 3 splits the trajectory") {
    std::vector<Spot> spots;
    for (int f = 0; f < 30; ++f) {
        if (f >= 10 && f < 14) continue; // 4-frame gap
        spots.push_back(spot(f, 50.0, 50.0));
    }
    const auto tracks = link_spots(spots, {5.0, 3, 8, 200});
    CHECK(tracks.size() == 2);
}

TEST_CASE("relinking across a gap respects the scaled search radius") {
    // Particle moves 4.5 px/frame; after a 2-frame gap it has moved 13.5 px,
    // within 5 * 3 = 15.
    std::vector<Spot> spots;
    double x = 20.0;
    for (int f = 0; f < 20; ++f) {
        if (f != 8 && f != 9) spots.push_back(spot(f, x, 40.0));
        x += 4.5;
    }
    const auto tracks = link_spots(spots, {5.0, 3, 8, 200});
    CHECK(tracks.size() == 1);
}

TEST_CASE("crossing-free scene links every spot into exactly one trajectory") {
    SceneSpec spec;
    spec.n_progressive = 4;
    spec.n_non_progressive = 4;
    spec.n_immotile = 4;
    spec.speed = 2.0;
    spec.diffusion = 0.8;
    spec.frames = 120;
    spec.width = 360;
    spec.height = 280;
    spec.margin = 30.0;
    spec.seed = 11;
    const GroundTruth truth = simulate_tracks(spec);
    const auto spots = spots_from_truth(truth);
    const auto tracks = link_spots(spots);

    // Every spot is used at most once.
    std::size_t total_points = 0;
    for (const auto& t : tracks) total_points += t.points.size();
    CHECK(total_points == spots.size());

    const auto score = score_tracking(filter_tracks(tracks, 25), truth, 2.0);
    CHECK(score.track_recall == doctest::Approx(1.0));
    CHECK(score.mean_position_error == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("re-linking gap-free tracks reproduces the same partition") {
    SceneSpec spec;
    spec.n_progressive = 3;
    spec.n_immotile = 3;
    spec.frames = 60;
    spec.width = 300;
    spec.height = 220;
    spec.margin = 25.0;
    spec.seed = 3;
    const auto truth = simulate_tracks(spec);
    const auto first = link_spots(spots_from_truth(truth));

    std::vector<Spot> replay;
    for (const auto& t : first) {
        for (const auto& p : t.points) replay.push_back(spot(p.frame, p.x, p.y));
    }
    std::sort(replay.begin(), replay.end(), [](const Spot& a, const Spot& b) {
        if (a.frame != b.frame) return a.frame < b.frame;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    const auto second = link_spots(replay);
    REQUIRE(second.size() == first.size());

    // Same partition: each relinked track's point set equals some original's.
    auto key = [](const Trajectory& t) {
        std::set<std::tuple<int, double, double>> s;
        for (const auto& p : t.points) s.insert({p.frame, p.x, p.y});
        return s;
    };
    std::vector<std::set<std::tuple<int, double, double>>> orig;
    for (const auto& t : first) orig.push_back(key(t));
    for (const auto& t : second) {
        CHECK(std::find(orig.begin(), orig.end(), key(t)) != orig.end());
    }
}

TEST_CASE("raising memory never increases the number of trajectories") {
    SceneSpec spec;
    spec.n_non_progressive = 6;
    spec.diffusion = 1.0;
    spec.frames = 150;
    spec.width = 300;
    spec.height = 220;
    spec.margin = 25.0;
    spec.blink_prob = 0.03;
    spec.blink_max_gap = 5;
    spec.seed = 13;
    const auto spots = spots_from_truth(simulate_tracks(spec));
    std::size_t prev = SIZE_MAX;
    for (int memory : {0, 1, 2, 3, 5}) {
        const auto tracks = link_spots(spots, {5.0, memory, 8, 200});
        CHECK(tracks.size() <= prev);
        prev = tracks.size();
    }
}

TEST_CASE("oversize subnets raise LinkError naming the frame") {
    std::vector<Spot> spots;
    // A dense clump that exceeds the hard cap in one frame step.
    for (int f = 0; f < 2; ++f) {
        for (int i = 0; i < 12; ++i) {
            spots.push_back(spot(f, 50.0 + 0.3 * i, 50.0));
        }
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(link_spots(spots, {5.0, 3, 8, 10})),
                         doctest::Contains("frame 1"), LinkError);
}

TEST_CASE("filter_tracks boundary at 25 points") {
    std::vector<Spot> spots;
    for (int f = 0; f < 24; ++f) spots.push_back(spot(f, 10.0, 10.0));
    for (int f = 0; f < 25; ++f) spots.push_back(spot(f, 90.0, 90.0));
    auto tracks = link_spots(spots);
    REQUIRE(tracks.size() == 2);
    const auto kept = filter_tracks(tracks, 25);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].points.size() == 25);
    CHECK(filter_tracks({}, 25).empty());
}

TEST_CASE("subtract_drift restores stationary particles under injected drift") {
    const double dx = 0.3, dy = -0.1;
    std::vector<Spot> spots;
    const double px[3] = {30, 90, 150}, py[3] = {40, 80, 30};
    for (int f = 0; f < 50; ++f) {
        for (int i = 0; i < 3; ++i)
            spots.push_back(spot(f, px[i] + dx * f, py[i] + dy * f));
    }
    auto tracks = link_spots(spots);
    REQUIRE(tracks.size() == 3);
    auto [corrected, drift] = subtract_drift(tracks);

    for (const auto& t : corrected) {
        const double x0 = t.points.front().x;
        const double y0 = t.points.front().y;
        for (const auto& p : t.points) {
            CHECK(std::abs(p.x - x0) <= 1e-6);
            CHECK(std::abs(p.y - y0) <= 1e-6);
        }
    }
    CHECK(drift.offsets.front()[0] == 0.0);
    CHECK(drift.at_frame(49)[0] == doctest::Approx(dx * 49).epsilon(1e-9));

    // Second application is a no-op within 1e-9.
    auto [twice, drift2] = subtract_drift(corrected);
    for (std::size_t i = 0; i < twice.size(); ++i) {
        for (std::size_t k = 0; k < twice[i].points.size(); ++k) {
            CHECK(std::abs(twice[i].points[k].x - corrected[i].points[k].x) <= 1e-9);
            CHECK(std::abs(twice[i].points[k].y - corrected[i].points[k].y) <= 1e-9);
        }
    }
}

TEST_CASE("drift of a single particle subtracts its own motion") {
    std::vector<Spot> spots;
    for (int f = 0; f < 30; ++f) spots.push_back(spot(f, 10.0 + 2.0 * f, 20.0));
    auto tracks = link_spots(spots);
    auto [corrected, drift] = subtract_drift(tracks);
    REQUIRE(corrected.size() == 1);
    for (const auto& p : corrected[0].points) {
        CHECK(p.x == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(p.y == doctest::Approx(20.0).epsilon(1e-12));
    }
}

TEST_CASE("subtract_drift of nothing raises EmptySample") {
    CHECK_THROWS_AS(subtract_drift({}), EmptySample);
}
