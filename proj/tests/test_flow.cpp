#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "motil/flow.hpp"
#include "motil/synth.hpp"

using namespace motil;

namespace {

// Textured frame: grid of small bright squares, yields many strong corners.
ImageF checkerboard(int w, int h, int cell) {
    ImageF img(w, h, 10.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if ((x / cell + y / cell) % 2 == 0) img.at(x, y) = 200.0f;
        }
    }
    return img;
}

ImageF shift_image(const ImageF& img, int dx, int dy) {
    ImageF out(img.width, img.height, 0.0f);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const int sx = x - dx;
            const int sy = y - dy;
            if (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height)
                out.at(x, y) = img.at(sx, sy);
            else
                out.at(x, y) = img.at(std::clamp(sx, 0, img.width - 1),
                                      std::clamp(sy, 0, img.height - 1));
        }
    }
    return out;
}

} // namespace

TEST_CASE("uniform frames have no corners") {
    CHECK(detect_corners(ImageF(96, 72, 50.0f), FlowParams{}).empty());
}

TEST_CASE("a high-contrast blob yields a corner near its edge region") {
    ImageF img(96, 72, 0.0f);
    test::add_blob(img, 48.0, 36.0, 3.0, 200.0);
    FlowParams params;
    params.min_distance = 5.0;
    const auto corners = detect_corners(img, params);
    REQUIRE(!corners.empty());
    bool near_blob = false;
    for (const auto& c : corners) {
        if (std::hypot(c.x - 48.0, c.y - 36.0) <= 3.0 * 3.0 + 2.0) near_blob = true;
    }
    CHECK(near_blob);
}

TEST_CASE("max_corners caps the detection count exactly") {
    const ImageF img = checkerboard(320, 240, 12); // hundreds of corners
    FlowParams params;
    params.max_corners = 100;
    params.min_distance = 10.0;
    params.quality_level = 0.01;
    const auto corners = detect_corners(img, params);
    CHECK(corners.size() == 100);
}

TEST_CASE("corner suppression honours min_distance") {
    const ImageF img = checkerboard(200, 160, 10);
    FlowParams params;
    params.max_corners = 500;
    params.min_distance = 14.0;
    const auto corners = detect_corners(img, params);
    for (std::size_t i = 0; i < corners.size(); ++i) {
        for (std::size_t j = i + 1; j < corners.size(); ++j) {
            const double d = std::hypot(corners[i].x - corners[j].x,
                                        corners[i].y - corners[j].y);
            CHECK(d >= 14.0);
        }
    }
}

TEST_CASE("lk_step recovers an integer shift within 0.1 px") {
    const ImageF prev = checkerboard(160, 120, 16);
    const ImageF next = shift_image(prev, 3, 0);
    FlowParams params;
    params.min_distance = 12.0;
    auto corners = detect_corners(prev, params);
    REQUIRE(corners.size() >= 5);
    // Keep points away from the borders so replication artifacts stay out.
    std::erase_if(corners, [&](const Point2d& p) {
        return p.x < 25 || p.y < 25 || p.x > 135 || p.y > 95;
    });
    REQUIRE(!corners.empty());

    const auto moved = lk_step(prev, next, corners, params);
    int tracked = 0;
    for (std::size_t i = 0; i < corners.size(); ++i) {
        REQUIRE(moved[i].has_value());
        ++tracked;
        CHECK(std::abs(moved[i]->x - corners[i].x - 3.0) <= 0.1);
        CHECK(std::abs(moved[i]->y - corners[i].y - 0.0) <= 0.1);
    }
    CHECK(tracked == static_cast<int>(corners.size()));
}

TEST_CASE("static frames track with zero displacement") {
    const ImageF frame = checkerboard(160, 120, 16);
    FlowParams params;
    params.min_distance = 12.0;
    auto corners = detect_corners(frame, params);
    // lk_step requires interior points; border points count as lost.
    std::erase_if(corners, [&](const Point2d& p) {
        return p.x < 20 || p.y < 20 || p.x > 140 || p.y > 100;
    });
    REQUIRE(!corners.empty());
    const auto moved = lk_step(frame, frame, corners, params);
    for (std::size_t i = 0; i < corners.size(); ++i) {
        REQUIRE(moved[i].has_value());
        CHECK(std::abs(moved[i]->x - corners[i].x) <= 0.05);
        CHECK(std::abs(moved[i]->y - corners[i].y) <= 0.05);
    }
}

TEST_CASE("a point whose texture vanishes is lost") {
    ImageF prev(96, 72, 0.0f);
    test::add_blob(prev, 48.0, 36.0, 2.5, 220.0);
    ImageF next(96, 72, 0.0f); // blob removed
    const auto moved = lk_step(prev, next, {{48.0, 36.0}}, FlowParams{});
    CHECK(!moved[0].has_value());
}

TEST_CASE("raising fb_error_max never loses more points") {
    const ImageF prev = checkerboard(160, 120, 16);
    // Non-rigid distortion: second frame shifted more on the right half.
    ImageF next = shift_image(prev, 2, 1);
    for (int y = 0; y < next.height; ++y)
        for (int x = 100; x < next.width; ++x)
            next.at(x, y) = prev.at(std::clamp(x - 4, 0, 159), std::clamp(y - 2, 0, 119));

    FlowParams params;
    params.min_distance = 12.0;
    const auto corners = detect_corners(prev, params);
    std::size_t prev_survivors = 0;
    for (double fb : {0.05, 0.2, 1.0, 5.0}) {
        params.fb_error_max = fb;
        const auto moved = lk_step(prev, next, corners, params);
        std::size_t survivors = 0;
        for (const auto& m : moved)
            if (m) ++survivors;
        CHECK(survivors >= prev_survivors);
        prev_survivors = survivors;
    }
}

TEST_CASE("track_lk follows moving blobs over their lifetime") {
    // Ten blobs in separate lanes moving at distinct speeds: no crossings.
    const int frames = 300, width = 480, height = 300;
    std::vector<double> lane_y, speed;
    for (int i = 0; i < 10; ++i) {
        lane_y.push_back(28.0 + 25.0 * i);
        speed.push_back(0.9 + 0.05 * i);
    }
    FrameSequence seq;
    seq.fps = 50.0;
    seq.width = width;
    seq.height = height;
    std::vector<std::vector<Point2d>> truth_pos(10);
    for (int f = 0; f < frames; ++f) {
        ImageF canvas(width, height, 0.0f);
        for (int i = 0; i < 10; ++i) {
            const double x = 25.0 + speed[static_cast<std::size_t>(i)] * f;
            const double y = lane_y[static_cast<std::size_t>(i)];
            test::add_blob(canvas, x, y, 2.5, 220.0);
            truth_pos[static_cast<std::size_t>(i)].push_back({x, y});
        }
        seq.frames.push_back(test::quantize(canvas));
    }

    FlowParams params;
    params.max_corners = 100;
    params.min_distance = 10.0;
    params.block_size = 10;
    const auto tracks = track_lk(seq, params, 5, 25);

    // Count blobs covered >= 80% of their lifetime by some single track.
    int covered = 0;
    for (int i = 0; i < 10; ++i) {
        std::size_t best_cover = 0;
        for (const auto& t : tracks) {
            std::size_t frames_near = 0;
            for (const auto& pt : t.points) {
                const auto& tp =
                    truth_pos[static_cast<std::size_t>(i)][static_cast<std::size_t>(pt.frame)];
                if (std::hypot(pt.x - tp.x, pt.y - tp.y) <= 5.0) ++frames_near;
            }
            best_cover = std::max(best_cover, frames_near);
        }
        if (best_cover >= static_cast<std::size_t>(0.8 * frames)) ++covered;
    }
    CHECK(covered >= 9);
}

TEST_CASE("track_lk on empty frames yields no trajectories") {
    FrameSequence seq;
    seq.fps = 50.0;
    seq.width = 96;
    seq.height = 72;
    for (int i = 0; i < 40; ++i) seq.frames.emplace_back(96, 72);
    CHECK(track_lk(seq, FlowParams{}, 5, 25).empty());
}

TEST_CASE("a single stationary blob gives one nearly static trajectory") {
    SceneSpec spec;
    spec.n_immotile = 1;
    spec.frames = 60;
    spec.width = 128;
    spec.height = 96;
    spec.margin = 30.0;
    spec.blob_sigma = 2.5;
    spec.blob_brightness = 220.0;
    spec.seed = 23;
    auto [seq, truth] = simulate(spec);

    FlowParams params;
    params.min_distance = 10.0;
    const auto tracks = track_lk(seq, params, 5, 25);
    REQUIRE(tracks.size() >= 1);
    for (const auto& t : tracks) {
        const auto& a = t.points.front();
        const auto& b = t.points.back();
        CHECK(std::hypot(b.x - a.x, b.y - a.y) < 1.0);
    }
}

TEST_CASE("track_lk is deterministic") {
    SceneSpec spec;
    spec.n_progressive = 3;
    spec.frames = 40;
    spec.width = 160;
    spec.height = 120;
    spec.margin = 25.0;
    spec.seed = 31;
    auto [seq, truth] = simulate(spec);
    const auto a = track_lk(seq, FlowParams{}, 5, 10);
    const auto b = track_lk(seq, FlowParams{}, 5, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].points.size() == b[i].points.size());
        for (std::size_t k = 0; k < a[i].points.size(); ++k) {
            CHECK(a[i].points[k].x == b[i].points[k].x);
            CHECK(a[i].points[k].y == b[i].points[k].y);
        }
    }
}
