#include "doctest.h"

#include <algorithm>
#include <numbers>
#include <random>

#include "hypercurate/errors.hpp"
#include "hypercurate/geometry.hpp"

using namespace hypercurate;

namespace {

ConvexPolygon unit_square(double dx = 0, double dy = 0) { return ConvexPolygon::rectangle(dx, dy, dx + 1, dy + 1); }

/// Convex polygon from points on a jittered ellipse.
ConvexPolygon random_convex(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    const double cx = 100 * u(rng), cy = 100 * u(rng);
    const double rx = 10 + 60 * u(rng), ry = 10 + 60 * u(rng);
    const double rot = 2 * std::numbers::pi * u(rng);
    const int n = 3 + static_cast<int>(u(rng) * 9);
    std::vector<double> angles;
    for (int i = 0; i < n; ++i) angles.push_back(2 * std::numbers::pi * u(rng));
    std::sort(angles.begin(), angles.end());
    std::vector<Point2> ring;
    for (double a : angles) {
        const double x = rx * std::cos(a), y = ry * std::sin(a);
        ring.push_back({cx + x * std::cos(rot) - y * std::sin(rot), cy + x * std::sin(rot) + y * std::cos(rot)});
    }
    auto p = ConvexPolygon::try_make(ring);
    return p ? *p : random_convex(rng);
}

/// Signed distance from q to the nearest edge line (positive inside).
double edge_margin(const ConvexPolygon& p, const Point2& q) {
    double m = 1e300;
    const auto& v = p.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % v.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        m = std::min(m, ((b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x)) / len);
    }
    return m;
}

}  // namespace

TEST_SUITE("area") {
    TEST_CASE("examples") {
        CHECK(polygon_area(unit_square()) == 1.0);
        CHECK(polygon_area(ConvexPolygon::rectangle(0, 0, 3840, 3840)) == 14745600.0);
        CHECK(polygon_area(ConvexPolygon::make({{0, 0}, {2, 0}, {0, 2}})) == 2.0);
    }

    TEST_CASE("degenerate and non-convex rings are rejected") {
        CHECK_THROWS_AS(ConvexPolygon::make({{0, 0}, {1, 0}, {2, 0}}), DegenerateGeometryError);
        CHECK_THROWS_AS(ConvexPolygon::make({{0, 0}, {1e-7, 0}, {0, 1e-7}}), DegenerateGeometryError);
        CHECK_THROWS_AS(ConvexPolygon::make({{0, 0}, {2, 0}, {1, 0.5}, {2, 2}, {0, 2}}), ValidationError);
        // Bow tie.
        CHECK_THROWS_AS(ConvexPolygon::make({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), ValidationError);
    }

    TEST_CASE("normalisation") {
        // Clockwise input, repeated closing vertex, collinear midpoint.
        const auto p = ConvexPolygon::make({{0, 0}, {0, 1}, {1, 1}, {1, 0.5}, {1, 0}, {0, 0}});
        CHECK(p.size() == 4);
        CHECK(signed_area(p.vertices()) > 0);
    }
}

TEST_SUITE("intersection") {
    TEST_CASE("examples") {
        const auto p = ConvexPolygon::make({{0, 0}, {4, 1}, {3, 5}, {-1, 3}});
        CHECK(intersect_convex(p, p)->area() == doctest::Approx(p.area()).epsilon(1e-9));
        CHECK(intersect_convex(unit_square(), unit_square(0.5, 0.5))->area() == doctest::Approx(0.25));
        CHECK_FALSE(intersect_convex(unit_square(), unit_square(3, 0)));
        CHECK_FALSE(intersect_convex(unit_square(), unit_square(1, 0)));  // shared edge only
    }

    TEST_CASE("sliver threshold") {
        CHECK(intersect_convex(unit_square(), unit_square(0.5, 0.5), kSliverArea) == std::nullopt);
        const auto big = ConvexPolygon::rectangle(0, 0, 10, 10);
        CHECK(intersect_convex(big, ConvexPolygon::rectangle(9.5, 0, 20, 10), kSliverArea));
        CHECK_FALSE(intersect_convex(big, ConvexPolygon::rectangle(9.95, 0, 20, 10), kSliverArea));
    }

    TEST_CASE("cross-CRS is an error") {
        CHECK_THROWS_AS(intersect_convex(ConvexPolygon::rectangle(0, 0, 1, 1, 32633),
                                         ConvexPolygon::rectangle(0, 0, 1, 1, 32634)),
                        CrossCrsError);
    }

    TEST_CASE("random properties") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-20, 140);
        int nonempty = 0;
        for (int iter = 0; iter < 500; ++iter) {
            const auto a = random_convex(rng);
            const auto b = random_convex(rng);
            const auto ab = intersect_convex(a, b);
            const auto ba = intersect_convex(b, a);
            REQUIRE(ab.has_value() == ba.has_value());
            if (ab) {
                ++nonempty;
                CHECK(ab->area() <= std::min(a.area(), b.area()) * (1 + 1e-12));
                CHECK(ab->area() == doctest::Approx(ba->area()).epsilon(1e-12));
                // Same vertex set up to rotation.
                REQUIRE(ab->size() == ba->size());
                for (const auto& v : ab->vertices()) {
                    CHECK(std::any_of(ba->vertices().begin(), ba->vertices().end(), [&](const Point2& w) {
                        return std::abs(v.x - w.x) < 1e-9 && std::abs(v.y - w.y) < 1e-9;
                    }));
                }
                const auto box = bbox(*ab), boxa = bbox(a), boxb = bbox(b);
                CHECK(box.min_x >= std::max(boxa.min_x, boxb.min_x) - 1e-9);
                CHECK(box.max_x <= std::min(boxa.max_x, boxb.max_x) + 1e-9);
                CHECK(box.min_y >= std::max(boxa.min_y, boxb.min_y) - 1e-9);
                CHECK(box.max_y <= std::min(boxa.max_y, boxb.max_y) + 1e-9);
            }
            for (int s = 0; s < 200; ++s) {
                const Point2 q{u(rng), u(rng)};
                const double ma = edge_margin(a, q), mb = edge_margin(b, q);
                if (std::abs(ma) < 1e-6 || std::abs(mb) < 1e-6) continue;
                const bool in_both = ma > 0 && mb > 0;
                const bool in_result = ab && contains_point(*ab, q, 0.0);
                if (ab && std::abs(edge_margin(*ab, q)) < 1e-6) continue;
                CHECK(in_both == in_result);
            }
        }
        CHECK(nonempty > 100);
    }
}

TEST_SUITE("bbox and containment") {
    TEST_CASE("bbox examples") {
        CHECK(bbox(unit_square()) == BoundingBox{0, 0, 1, 1});
        CHECK(bbox(ConvexPolygon::make({{0, 0}, {2, 0}, {0, 2}})) == BoundingBox{0, 0, 2, 2});
        CHECK(bbox(ConvexPolygon::make({{1, 0}, {0, 1}, {-1, 0}, {0, -1}})) == BoundingBox{-1, -1, 1, 1});
    }

    TEST_CASE("contains_window examples") {
        const auto p = ConvexPolygon::rectangle(0, 0, 3 * 3840, 3 * 3840);
        CHECK(contains_window(p, PatchWindow{0, 1, 1}));
        CHECK(contains_window(p, PatchWindow{0, 0, 1}));  // shares the west edge
        CHECK(contains_window(p, PatchWindow{0, 256, 256}));  // shares two edges
        const auto shifted = ConvexPolygon::rectangle(1, 0, 3 * 3840, 3 * 3840);
        CHECK_FALSE(contains_window(shifted, PatchWindow{0, 0, 0}));
        const auto rotated = ConvexPolygon::make({{0, -3000}, {6000, 3000}, {0, 9000}, {-6000, 3000}});
        CHECK_FALSE(contains_window(rotated, PatchWindow{0, 0, 0}));
    }

    TEST_CASE("interior overlap is open") {
        const BoundingBox a{0, 0, 10, 10};
        CHECK_FALSE(interiors_overlap(a, {10, 0, 20, 10}));
        CHECK_FALSE(interiors_overlap(a, {10, 10, 20, 20}));
        CHECK(interiors_overlap(a, {9, 9, 20, 20}));
    }
}

TEST_SUITE("wkt") {
    TEST_CASE("round trip") {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 200; ++i) {
            const auto p = random_convex(rng);
            const auto q = parse_wkt(to_wkt(p), 32633);
            CHECK(q.vertices() == p.vertices());
            CHECK(q.crs() == 32633);
        }
    }

    TEST_CASE("format") {
        CHECK(to_wkt(unit_square()) == "POLYGON((0 0, 1 0, 1 1, 0 1, 0 0))");
        CHECK(parse_wkt("POLYGON ((0 0,1 0,1 1,0 1,0 0))").area() == 1.0);
        CHECK_THROWS_AS(parse_wkt("POINT(1 2)"), ValidationError);
        CHECK_THROWS_AS(parse_wkt("POLYGON((0 0, 1 0, 1 1, 0 1, 0 0), (0.2 0.2, 0.3 0.2, 0.3 0.3))"), ValidationError);
    }
}
