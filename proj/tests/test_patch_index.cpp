#include "doctest.h"

#include <random>

#include "hypercurate/errors.hpp"
#include "hypercurate/patch_index.hpp"
#include "generators.hpp"

using namespace hypercurate;
using testing::random_record;

namespace {

constexpr double kCell = 128 * 30.0;
const Lattice kLattice{30.0, 128, 0};

PatchWindow win(std::int64_t ix, std::int64_t iy) { return PatchWindow{0, ix, iy, 128, 30.0}; }

bool naive_overlap(const BoundingBox& a, const BoundingBox& b) {
    return std::min(a.max_x, b.max_x) > std::max(a.min_x, b.min_x) + 1e-6 &&
           std::min(a.max_y, b.max_y) > std::max(a.min_y, b.min_y) + 1e-6;
}


}  // namespace

TEST_SUITE("patchify") {
    TEST_CASE("polygon smaller than a cell") {
        SpatialIndex idx;
        CHECK(patchify(ConvexPolygon::rectangle(0, 0, kCell - 30, kCell), kLattice, idx).empty());
        CHECK_FALSE(holds_window(ConvexPolygon::rectangle(0, 0, kCell - 30, kCell), kLattice));
    }

    TEST_CASE("two by two rectangle") {
        SpatialIndex idx;
        const auto rect = ConvexPolygon::rectangle(0, 0, 2 * kCell, 2 * kCell);
        const auto w = patchify(rect, kLattice, idx);
        REQUIRE(w.size() == 4);
        // South to north, west to east.
        CHECK(w[0] == win(0, 0));
        CHECK(w[1] == win(128, 0));
        CHECK(w[2] == win(0, 128));
        CHECK(w[3] == win(128, 128));
        commit(idx, {win(128, 128)});
        CHECK(patchify(rect, kLattice, idx).size() == 3);
        CHECK(idx.size() == 1);
    }

    TEST_CASE("windows need not sit on a patch-size grid") {
        SpatialIndex idx;
        const auto rect = ConvexPolygon::rectangle(30 * 7, 30 * 3, 30 * 7 + kCell, 30 * 3 + kCell);
        const auto w = patchify(rect, kLattice, idx);
        REQUIRE(w.size() == 1);
        CHECK(w[0] == win(7, 3));
    }

    TEST_CASE("greedy placement is maximal and disjoint on rotated polygons") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0, 1);
        for (int iter = 0; iter < 40; ++iter) {
            const double cx = 1e5 + 1e4 * u(rng), cy = 4e6 + 1e4 * u(rng);
            const double a = u(rng), hw = kCell * (1 + 3 * u(rng)), hh = kCell * (1 + 3 * u(rng));
            std::vector<Point2> ring;
            for (auto [x, y] : {std::pair{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}) {
                ring.push_back({cx + x * std::cos(a) - y * std::sin(a), cy + x * std::sin(a) + y * std::cos(a)});
            }
            const auto poly = ConvexPolygon::make(ring);
            SpatialIndex idx;
            // Pre-commit a random blocker near the centre.
            const auto blocker = PatchWindow{0, static_cast<std::int64_t>(cx / 30), static_cast<std::int64_t>(cy / 30)};
            commit(idx, {blocker});
            const auto got = patchify(poly, kLattice, idx);
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(contains_window(poly, got[i]));
                CHECK_FALSE(naive_overlap(got[i].box(), blocker.box()));
                for (std::size_t j = i + 1; j < got.size(); ++j) CHECK_FALSE(naive_overlap(got[i].box(), got[j].box()));
            }
            // Maximality: every contained lattice window clashes with something.
            const auto b = bbox(poly);
            std::size_t unclaimed = 0;
            for (auto iy = static_cast<std::int64_t>(std::floor(b.min_y / 30)); iy * 30.0 <= b.max_y; ++iy) {
                for (auto ix = static_cast<std::int64_t>(std::floor(b.min_x / 30)); ix * 30.0 <= b.max_x; ++ix) {
                    const PatchWindow w{0, ix, iy};
                    if (!contains_window(poly, w)) continue;
                    bool clash = naive_overlap(w.box(), blocker.box());
                    for (const auto& g : got) clash = clash || naive_overlap(w.box(), g.box());
                    unclaimed += !clash;
                }
            }
            CHECK(unclaimed == 0);
        }
    }
}

TEST_SUITE("spatial index") {
    TEST_CASE("commit and query") {
        SpatialIndex idx;
        commit(idx, {});
        CHECK(idx.size() == 0);
        CHECK(query_overlap(idx, win(0, 0).box()).empty());
        commit(idx, {win(0, 0)});
        CHECK(query_overlap(idx, win(0, 0).box()) == std::vector<std::string>{assign_location_id(win(0, 0))});
        CHECK(query_overlap(idx, win(128, 0).box()).empty());  // edge contact
        commit(idx, {win(0, 0)});  // idempotent
        CHECK(idx.size() == 1);
        CHECK_THROWS_AS(commit(idx, {win(64, 64)}), ConsistencyError);
        CHECK_THROWS_AS(commit(idx, {win(500, 0), win(501, 0)}), ConsistencyError);
        CHECK(idx.size() == 1);  // failed batches leave no trace
    }

    TEST_CASE("query matches a linear scan") {
        std::mt19937_64 rng(8);
        std::uniform_int_distribution<std::int64_t> pos(0, 20000);
        SpatialIndex idx;
        std::vector<PatchWindow> committed;
        while (committed.size() < 1000) {
            const PatchWindow w{0, pos(rng), pos(rng)};
            bool free = true;
            for (const auto& c : committed) free = free && !naive_overlap(c.box(), w.box());
            if (!free) continue;
            commit(idx, {w});
            committed.push_back(w);
        }
        std::uniform_real_distribution<double> coord(0, 20000 * 30.0), extent(0, 20000.0);
        for (int probe = 0; probe < 500; ++probe) {
            const double x = coord(rng), y = coord(rng);
            const BoundingBox box{x, y, x + extent(rng), y + extent(rng)};
            std::vector<std::string> expect;
            for (const auto& c : committed) {
                if (naive_overlap(c.box(), box)) expect.push_back(assign_location_id(c));
            }
            std::sort(expect.begin(), expect.end());
            CHECK(query_overlap(idx, box) == expect);
            CHECK(idx.any_overlap(box) == !expect.empty());
        }
    }
}

TEST_SUITE("location ids and manifests") {
    TEST_CASE("location id") {
        CHECK(assign_location_id(win(5, -7)) == assign_location_id(win(5, -7)));
        CHECK(assign_location_id(win(5, -7)) != assign_location_id(win(6, -7)));
        CHECK(assign_location_id(win(5, -7)) == "0_5_-7_128_30");
        PatchWindow fine = win(5, -7);
        fine.gsd = 10;
        CHECK(assign_location_id(fine) != assign_location_id(win(5, -7)));
        CHECK(parse_location_id(assign_location_id(fine)) == fine);
    }

    TEST_CASE("manifest round trip") {
        std::mt19937_64 rng(21);
        std::vector<PatchRecord> recs;
        for (int i = 0; i < 1000; ++i) recs.push_back(random_record(rng));
        for (const auto& r : recs) CHECK(parse_manifest_line(format_manifest_line(r)) == r);
        sort_records(recs);
        const std::string text = format_manifest(recs);
        CHECK(parse_manifest(text) == recs);
        CHECK(format_manifest(parse_manifest(text)) == text);
    }

    TEST_CASE("malformed lines report their line number") {
        PatchRecord r{assign_location_id(win(1, 2)), win(1, 2), {{"a", 10, 0, 0}, {"b", 20, 0, 0}}};
        const std::string good = format_manifest_line(r) + "\n";
        auto expect_line = [&](const std::string& bad, const char* needle) {
            try {
                parse_manifest(good + bad + "\n");
                FAIL("no error");
            } catch (const ValidationError& e) {
                CHECK(std::string(e.what()).find("line 2") != std::string::npos);
                CHECK(std::string(e.what()).find(needle) != std::string::npos);
            }
        };
        auto swapped = r;
        std::swap(swapped.members[0], swapped.members[1]);
        expect_line(format_manifest_line(swapped), "increasing");
        auto wrong_id = r;
        wrong_id.location_id = assign_location_id(win(9, 9));
        expect_line(format_manifest_line(wrong_id), "does not match");
        expect_line("x\t0\t0\t0", "columns");
        CHECK(parse_manifest(good + "# comment\n\n").size() == 1);
    }
}
