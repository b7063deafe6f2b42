#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cinephase/corners.hpp"
#include "cinephase/errors.hpp"
#include "support/oracles.hpp"

using namespace cinephase;

namespace {

Frame random_frame(int w, int h, unsigned seed) {
    std::mt19937 eng(seed);
    Frame f(w, h);
    for (float& v : f.data) v = static_cast<float>((eng() % 1001) / 1000.0);
    return f;
}

CornerResponseMap map_from(const std::vector<double>& r, int w, int h) {
    CornerResponseMap m;
    m.width = w;
    m.height = h;
    m.window_radius = 1;
    m.r = r;
    return m;
}

}  // namespace

TEST_CASE("sobel gradients vanish on a constant frame") {
    const Frame f(32, 32, 0.7f);
    const GradientField g = sobel_gradients(f);
    for (const double v : g.ix) CHECK(v == 0.0);
    for (const double v : g.iy) CHECK(v == 0.0);
}

TEST_CASE("sobel gradients of a horizontal ramp are 1/width inside, 0 vertically") {
    const int w = 32, h = 24;
    Frame f(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f.at(x, y) = static_cast<float>(x) / w;
    }
    const GradientField g = sobel_gradients(f);
    for (int y = 0; y < h; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            CHECK(g.gx(x, y) == doctest::Approx(1.0 / w).epsilon(1e-4));
            CHECK(g.gy(x, y) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("sobel gradients of a single bright pixel are antisymmetric about it") {
    Frame f(16, 16, 0.0f);
    f.at(5, 5) = 1.0f;
    const GradientField g = sobel_gradients(f);
    for (int d = 1; d <= 2; ++d) {
        CHECK(g.gx(5 - d, 5) == -g.gx(5 + d, 5));
        CHECK(g.gy(5, 5 - d) == -g.gy(5, 5 + d));
    }
    // and it matches the literal kernel oracle everywhere
    const auto [ox, oy] = oracles::sobel(f);
    for (std::size_t i = 0; i < ox.size(); ++i) {
        CHECK(g.ix[i] == doctest::Approx(ox[i]).scale(1.0).epsilon(1e-15));
        CHECK(g.iy[i] == doctest::Approx(oy[i]).scale(1.0).epsilon(1e-15));
    }
}

TEST_CASE("corner response is zero on a constant frame") {
    const Frame f(32, 32, 0.4f);
    const CornerResponseMap m = corner_response(f, {4, 4, 24, 24}, {});
    for (const double v : m.r) CHECK(v == 0.0);
}

TEST_CASE("corner response matches the brute-force structure-tensor oracle") {
    std::mt19937 eng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Frame f = random_frame(32, 32, 1000 + trial);
        DetectorConfig cfg;
        cfg.window_radius = 1 + static_cast<int>(eng() % 2);
        const Roi roi{2, 3, 26, 24};
        const CornerResponseMap m = corner_response(f, roi, cfg);
        const std::vector<double> oracle = oracles::corner_response(f, roi, cfg.window_radius);
        REQUIRE(m.r.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(std::abs(m.r[i] - oracle[i]) <= 1e-9);
        }
    }
}

TEST_CASE("corner response is non-negative and bounded by trace/2") {
    const Frame f = random_frame(32, 32, 42);
    const DetectorConfig cfg;
    const CornerResponseMap m = corner_response(f, {1, 1, 30, 30}, cfg);
    const GradientField g = sobel_gradients(f);
    for (int y = 2; y < 30; ++y) {
        for (int x = 2; x < 30; ++x) {
            double trace = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    trace += g.gx(x + dx, y + dy) * g.gx(x + dx, y + dy) +
                             g.gy(x + dx, y + dy) * g.gy(x + dx, y + dy);
                }
            }
            CHECK(m.at(x, y) >= 0.0);
            CHECK(m.at(x, y) <= trace / 2.0 + 1e-12);
        }
    }
}

TEST_CASE("a bright square produces peak responses at its corners") {
    Frame f(16, 16, 0.0f);
    for (int y = 5; y <= 10; ++y) {
        for (int x = 5; x <= 10; ++x) f.at(x, y) = 1.0f;
    }
    const CornerResponseMap m = corner_response(f, {0, 0, 16, 16}, {});

    const int corners[4][2] = {{5, 5}, {10, 5}, {5, 10}, {10, 10}};
    double weakest_corner = 1e9;
    for (const auto& c : corners) {
        // the local argmax around each square corner lies within 1 px of it
        double best = -1.0;
        int bx = -1, by = -1;
        for (int y = c[1] - 2; y <= c[1] + 2; ++y) {
            for (int x = c[0] - 2; x <= c[0] + 2; ++x) {
                if (m.at(x, y) > best) {
                    best = m.at(x, y);
                    bx = x;
                    by = y;
                }
            }
        }
        CHECK(std::abs(bx - c[0]) <= 1);
        CHECK(std::abs(by - c[1]) <= 1);
        weakest_corner = std::min(weakest_corner, best);
    }
    // edge midpoints respond strictly less than corners
    const int mids[4][2] = {{7, 5}, {7, 10}, {5, 7}, {10, 7}};
    for (const auto& e : mids) {
        CHECK(m.at(e[0], e[1]) < weakest_corner);
    }
    // the whole map agrees with the oracle
    const std::vector<double> oracle = oracles::corner_response(f, {0, 0, 16, 16}, 1);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(std::abs(m.r[i] - oracle[i]) <= 1e-9);
    }
}

TEST_CASE("roi smaller than the summation window is rejected") {
    const Frame f = random_frame(32, 32, 5);
    DetectorConfig cfg;
    cfg.window_radius = 5;
    CHECK_THROWS_AS(corner_response(f, {0, 0, 9, 20}, cfg), config_error);
}

TEST_CASE("select_key_points fails when the response is zero everywhere") {
    const CornerResponseMap m = map_from(std::vector<double>(16 * 16, 0.0), 16, 16);
    CHECK_THROWS_WITH_AS(select_key_points(m, {}), doctest::Contains("no key points"),
                         pipeline_error);
}

TEST_CASE("quality threshold 1.0 keeps only global-maximum pixels") {
    std::vector<double> r(16 * 16, 0.0);
    r[3 * 16 + 4] = 2.0;
    r[8 * 16 + 9] = 2.0;  // tied global maximum
    r[5 * 16 + 5] = 1.9;
    DetectorConfig cfg;
    cfg.quality_threshold = 1.0;
    cfg.min_distance = 0.0;
    const KeyPointSet pts = select_key_points(map_from(r, 16, 16), cfg);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].response == 2.0);
    CHECK(pts[1].response == 2.0);
    // row-major tie-break puts (4, 3) first
    CHECK(pts[0].x == 4.0);
    CHECK(pts[0].y == 3.0);
}

TEST_CASE("selected count never increases with the quality threshold") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        const Frame f = random_frame(32, 32, 300 + seed);
        const CornerResponseMap m = corner_response(f, {1, 1, 30, 30}, {});
        int prev_count = 1 << 20;
        for (const double t : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            DetectorConfig cfg;
            cfg.quality_threshold = t;
            cfg.max_points = 10000;
            cfg.min_distance = 3.0;
            const int count = static_cast<int>(select_key_points(m, cfg).size());
            CHECK(count <= prev_count);
            prev_count = count;
        }
    }
}

TEST_CASE("selection matches the brute-force selection oracle") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        const Frame f = random_frame(32, 32, 400 + seed);
        const CornerResponseMap m = corner_response(f, {1, 1, 30, 30}, {});
        DetectorConfig cfg;
        cfg.quality_threshold = 0.5;
        cfg.min_distance = 4.0;
        cfg.max_points = 20;
        const KeyPointSet pts = select_key_points(m, cfg);
        const auto oracle = oracles::select_points(m.r, m.width, m.height, cfg.quality_threshold,
                                                   cfg.min_distance, cfg.max_points);
        REQUIRE(pts.size() == oracle.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK(pts[i].x == oracle[i].x);
            CHECK(pts[i].y == oracle[i].y);
            CHECK(pts[i].response == oracle[i].r);
        }
    }
}

TEST_CASE("selected points are pairwise at least min_distance apart and sorted by response") {
    const Frame f = random_frame(32, 32, 77);
    const CornerResponseMap m = corner_response(f, {1, 1, 30, 30}, {});
    DetectorConfig cfg;
    cfg.quality_threshold = 0.2;
    cfg.min_distance = 5.0;
    cfg.max_points = 50;
    const KeyPointSet pts = select_key_points(m, cfg);
    REQUIRE(pts.size() > 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) CHECK(pts[i].response <= pts[i - 1].response);
        CHECK(pts[i].response > 0.0);
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
            CHECK(d >= cfg.min_distance);
        }
    }
}

TEST_CASE("detection is deterministic") {
    const Frame f = random_frame(32, 32, 123);
    const Roi roi{2, 2, 28, 28};
    DetectorConfig cfg;
    cfg.quality_threshold = 0.4;
    const CornerResponseMap m1 = corner_response(f, roi, cfg);
    const CornerResponseMap m2 = corner_response(f, roi, cfg);
    CHECK(m1.r == m2.r);
    const KeyPointSet p1 = select_key_points(m1, cfg);
    const KeyPointSet p2 = select_key_points(m2, cfg);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i].x == p2[i].x);
        CHECK(p1[i].y == p2[i].y);
        CHECK(p1[i].response == p2[i].response);
    }
}

TEST_CASE("detector config invariants are enforced") {
    DetectorConfig cfg;
    cfg.quality_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.quality_threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = {};
    cfg.max_points = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = {};
    cfg.min_distance = -1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}
