#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "motil/errors.hpp"
#include "motil/ingest.hpp"
#include "motil/locate.hpp"

using namespace motil;

namespace {

// Exhaustive-scan oracle: a pixel is a candidate when it is positive, equals
// the max of its d x d neighbourhood, and clears the same positive-pixel
// brightness quantile; dedup by brightness with the same tie rule.
std::vector<std::pair<int, int>> find_maxima_oracle(const ImageF& img, int d,
                                                    double percentile) {
    std::vector<float> positives;
    for (float v : img.pixels)
        if (v > 0.0f) positives.push_back(v);
    float threshold = 0.0f;
    if (!positives.empty()) {
        std::sort(positives.begin(), positives.end());
        const auto idx = static_cast<std::size_t>(std::floor(
            (1.0 - percentile) * static_cast<double>(positives.size() - 1)));
        threshold = positives[idx];
    }

    const int r = d / 2;
    struct C {
        int x, y;
        float v;
    };
    std::vector<C> cands;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float v = img.at(x, y);
            if (v <= 0.0f || v < threshold) continue;
            bool is_max = true;
            for (int dy = -r; dy <= r && is_max; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) continue;
                    if (img.at(xx, yy) > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) cands.push_back({x, y, v});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const C& a, const C& b) {
        if (a.v != b.v) return a.v > b.v;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    std::vector<C> kept;
    for (const auto& c : cands) {
        bool ok = true;
        for (const auto& k : kept) {
            const double dx = c.x - k.x, dy = c.y - k.y;
            if (dx * dx + dy * dy < static_cast<double>(d) * d) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const C& a, const C& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    std::vector<std::pair<int, int>> out;
    for (const auto& c : kept) out.emplace_back(c.x, c.y);
    return out;
}

FilteredFrame wrap(const ImageF& img, int frame = 0) {
    return FilteredFrame{frame, img};
}

} // namespace

TEST_CASE("find_maxima on an all-zero frame is empty") {
    CHECK(find_maxima(ImageF(64, 48, 0.0f), 11, 0.30).empty());
}

TEST_CASE("find_maxima finds a single blob peak, matching the oracle") {
    ImageF img(64, 48, 0.0f);
    test::add_blob(img, 30.0, 22.0, 2.0, 150.0);
    const auto got = find_maxima(img, 11, 0.30);
    REQUIRE(got.size() == 1);
    CHECK(got[0].first == 30);
    CHECK(got[0].second == 22);
    CHECK(got == find_maxima_oracle(img, 11, 0.30));
}

TEST_CASE("close maxima are deduplicated keeping the brighter") {
    ImageF img(64, 48, 0.0f);
    test::add_blob(img, 30.0, 22.0, 1.5, 150.0);
    test::add_blob(img, 34.0, 22.0, 1.5, 90.0); // 4 px apart, diameter 11
    const auto got = find_maxima(img, 11, 0.30);
    REQUIRE(got.size() == 1);
    CHECK(std::abs(got[0].first - 30) <= 1);
    CHECK(got[0].second == 22);
    CHECK(got == find_maxima_oracle(img, 11, 0.30));
}

TEST_CASE("find_maxima agrees with the oracle on random blob scenes") {
    std::uint32_t state = 12345;
    auto next = [&state]() {
        state = state * 1664525u + 1013904223u;
        return state;
    };
    for (int trial = 0; trial < 10; ++trial) {
        ImageF img(96, 72, 0.0f);
        const int blobs = 2 + static_cast<int>(next() % 6);
        for (int b = 0; b < blobs; ++b) {
            const double x = 8.0 + static_cast<double>(next() % 80);
            const double y = 8.0 + static_cast<double>(next() % 56);
            const double amp = 40.0 + static_cast<double>(next() % 180);
            test::add_blob(img, x, y, 1.8, amp);
        }
        CHECK(find_maxima(img, 9, 0.30) == find_maxima_oracle(img, 9, 0.30));
    }
}

TEST_CASE("refine recovers integer and subpixel blob centres") {
    ImageF img(200, 100, 0.0f);

    SUBCASE("integer centre") {
        test::add_blob(img, 100.0, 50.0, 2.0, 150.0);
        const auto spot = refine(img, 0, 100, 50, 11);
        REQUIRE(spot.has_value());
        CHECK(spot->x == doctest::Approx(100.0).epsilon(0.001));
        CHECK(std::abs(spot->x - 100.0) <= 0.1);
        CHECK(std::abs(spot->y - 50.0) <= 0.1);
    }
    SUBCASE("subpixel centre") {
        test::add_blob(img, 100.4, 50.0, 2.0, 150.0);
        const auto spot = refine(img, 0, 100, 50, 11);
        REQUIRE(spot.has_value());
        CHECK(std::abs(spot->x - 100.4) <= 0.1);
        CHECK(std::abs(spot->y - 50.0) <= 0.1);
    }
}

TEST_CASE("refine on a uniform disk reports the analytic radius of gyration") {
    ImageF img(64, 64, 0.0f);
    const double R = 4.0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double dx = x - 32.0, dy = y - 32.0;
            if (dx * dx + dy * dy <= R * R) img.at(x, y) = 100.0f;
        }
    }
    const auto spot = refine(img, 0, 32, 32, 11);
    REQUIRE(spot.has_value());
    CHECK(spot->x == doctest::Approx(32.0).epsilon(1e-6));
    CHECK(spot->y == doctest::Approx(32.0).epsilon(1e-6));
    // Uniform disk: Rg = R / sqrt(2); discrete sum over the mask.
    const double analytic = R / std::sqrt(2.0);
    CHECK(std::abs(spot->size - analytic) / analytic < 0.05);
}

TEST_CASE("locate_frame keeps only blobs above minmass") {
    ImageF img(220, 160, 0.0f);
    // Masses ~ amplitude * 2*pi*sigma^2: five at ~2010, three at ~302.
    const double sigma = 2.0;
    const double bright = 2000.0 / (2.0 * 3.14159265358979 * sigma * sigma);
    const double dim = 300.0 / (2.0 * 3.14159265358979 * sigma * sigma);
    const double bx[5] = {30, 80, 130, 180, 55}, by[5] = {30, 40, 50, 60, 110};
    const double dx[3] = {160, 110, 35}, dy[3] = {120, 100, 70};
    for (int i = 0; i < 5; ++i) test::add_blob(img, bx[i], by[i], sigma, bright);
    for (int i = 0; i < 3; ++i) test::add_blob(img, dx[i], dy[i], sigma, dim);

    LocateParams params;
    params.diameter = 11;
    params.minmass = 900.0;
    const auto spots = locate_frame(wrap(img), params);
    CHECK(spots.size() == 5);
    for (const auto& s : spots) CHECK(s.mass >= 900.0);
    // Sorted by (y, x).
    for (std::size_t i = 1; i < spots.size(); ++i) {
        CHECK((spots[i - 1].y < spots[i].y ||
               (spots[i - 1].y == spots[i].y && spots[i - 1].x <= spots[i].x)));
    }
}

TEST_CASE("locate_frame of an empty frame is empty") {
    CHECK(locate_frame(wrap(ImageF(64, 48, 0.0f)), LocateParams{}).empty());
}

TEST_CASE("mass threshold boundary is strict") {
    ImageF img(64, 48, 0.0f);
    test::add_blob(img, 30.0, 22.0, 2.0, 100.0);
    const auto probe = locate_frame(wrap(img), {11, 0.0, 0.30});
    REQUIRE(probe.size() == 1);
    const double mass = probe[0].mass;

    CHECK(locate_frame(wrap(img), {11, mass + 1.0, 0.30}).empty());
    CHECK(locate_frame(wrap(img), {11, mass, 0.30}).size() == 1);
}

TEST_CASE("locate_frame is deterministic") {
    ImageF img(96, 72, 0.0f);
    test::add_blob(img, 30.2, 22.7, 2.0, 150.0);
    test::add_blob(img, 70.8, 50.1, 2.0, 120.0);
    const auto a = locate_frame(wrap(img), {11, 100.0, 0.30});
    const auto b = locate_frame(wrap(img), {11, 100.0, 0.30});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].mass == b[i].mass);
    }
}

TEST_CASE("integer translations shift spots exactly") {
    ImageF img(96, 72, 0.0f);
    test::add_blob(img, 40.3, 30.6, 2.0, 150.0);
    ImageF moved(96, 72, 0.0f);
    test::add_blob(moved, 40.3 + 9, 30.6 + 7, 2.0, 150.0);

    const auto a = locate_frame(wrap(img), {11, 100.0, 0.30});
    const auto b = locate_frame(wrap(moved), {11, 100.0, 0.30});
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(b[0].x == doctest::Approx(a[0].x + 9).epsilon(1e-9));
    CHECK(b[0].y == doctest::Approx(a[0].y + 7).epsilon(1e-9));
}

TEST_CASE("raising minmass never increases the spot count") {
    ImageF img(128, 96, 0.0f);
    test::add_blob(img, 30.0, 25.0, 2.0, 150.0);
    test::add_blob(img, 70.0, 45.0, 2.0, 90.0);
    test::add_blob(img, 100.0, 70.0, 2.0, 40.0);
    std::size_t prev = SIZE_MAX;
    for (double minmass : {0.0, 500.0, 1500.0, 3000.0, 6000.0}) {
        const auto spots = locate_frame(wrap(img), {11, minmass, 0.30});
        CHECK(spots.size() <= prev);
        prev = spots.size();
    }
}

TEST_CASE("locate parameter validation") {
    CHECK_THROWS_AS(find_maxima(ImageF(16, 16, 0.0f), 10, 0.30), ParamError);
    CHECK_THROWS_AS(find_maxima(ImageF(16, 16, 0.0f), 11, 0.0), ParamError);
    CHECK_THROWS_AS(find_maxima(ImageF(16, 16, 0.0f), 11, 1.0), ParamError);
}
