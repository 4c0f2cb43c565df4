#include "doctest.h"

#include <fstream>

#include "hypercurate/errors.hpp"
#include "hypercurate/ingest.hpp"
#include "hypercurate/raster_io.hpp"
#include "hypercurate/stats.hpp"
#include "support.hpp"

using namespace hypercurate;

namespace {

std::string tile_line(const std::string& id, const std::string& wkt, double cloud, const std::string& extra = "") {
    return R"({"tile_id": ")" + id + R"(", "timestamp": "2023-06-01T10:00:00Z", "crs": 32633, "footprint": ")" + wkt +
           R"(", "raster": ")" + id + R"(.hsrc", "cloud_fraction": )" + format_double(cloud) +
           R"(, "gsd": 30, "bands": 4)" + extra + "}";
}

const std::string kSquare = "POLYGON((300000 4500000, 303840 4500000, 303840 4503840, 300000 4503840, 300000 4500000))";

}  // namespace

TEST_SUITE("ingest") {
    TEST_CASE("empty manifest") {
        const auto rep = ingest_text("", {});
        CHECK(rep.accepted.empty());
        CHECK(rep.rejected.empty());
    }

    TEST_CASE("per-tile reasons") {
        const std::string text =
            tile_line("ok", kSquare, 0.05) + "\n" + tile_line("cloudy", kSquare, 0.4) + "\n" +
            tile_line("bowtie", "POLYGON((0 0, 10 10, 10 0, 0 10, 0 0))", 0.0) + "\n" + tile_line("ok", kSquare, 0.0) +
            "\n" + tile_line("shifted", kSquare, 0.0, R"(, "grid": {"origin_x": 300001, "origin_y": 4503840, "width": 128, "height": 128})") +
            "\n" + tile_line("small", kSquare, 0.0, R"(, "grid": {"origin_x": 300000, "origin_y": 4503840, "width": 100, "height": 128})") +
            "\n\n" + tile_line("edge", kSquare, 0.10) + "\n";
        const auto rep = ingest_text(text, {});
        REQUIRE(rep.accepted.size() == 2);
        CHECK(rep.accepted[0].tile_id == "ok");
        CHECK(rep.accepted[1].tile_id == "edge");
        std::map<std::string, std::string> why;
        for (const auto& r : rep.rejected) why[r.tile_id] = r.reason;
        CHECK(why["cloudy"] == "cloud");
        CHECK(why["bowtie"] == "geometry");
        CHECK(why["ok"] == "duplicate");
        CHECK(why["shifted"] == "grid");
        CHECK(why["small"] == "grid");
        CHECK(rep.rejected[0].line == 2);
        CHECK(rep.warnings.size() == 2);  // no rasters on disk
        CHECK(rep.to_json().find("\"reason\": \"cloud\"") != std::string::npos);
    }

    TEST_CASE("schema violations are fatal with a line number") {
        const std::string text = tile_line("ok", kSquare, 0.0) + "\n{\"tile_id\": \"x\"}\n";
        try {
            ingest_text(text, {}, "m.jsonl");
            FAIL("no error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("m.jsonl:2") != std::string::npos);
        }
        CHECK_THROWS_AS(ingest_text("{not json\n", {}), ValidationError);
        CHECK_THROWS_AS(ingest_text(tile_line("bad id", kSquare, 0.0), {}), ValidationError);
        CHECK_THROWS_AS(ingest_text(tile_line("c", kSquare, 1.5), {}), ValidationError);
        CHECK_THROWS_AS(ingest_file("/nonexistent/m.jsonl", {}), IoError);
    }

    TEST_CASE("raster headers fill in and check the grid") {
        testing::TempDir dir("ingest");
        auto tiles = synthetic::random_layout({.tiles = 3, .bands = 4, .seed = 2});
        std::mt19937_64 rng(1);
        for (auto& t : tiles) synthetic::write_tile_raster(t, dir.file(t.tile_id + ".hsrc"), rng);
        // Catalog with relative paths and no grids; third tile claims the wrong band count.
        std::ofstream out(dir.file("tiles.jsonl"));
        for (std::size_t i = 0; i < tiles.size(); ++i) {
            TileRecord t = tiles[i];
            t.raster_ref = t.tile_id + ".hsrc";
            t.grid.reset();
            if (i == 2) t.band_count = 5;
            out << format_tile_json(t) << "\n";
        }
        out.close();
        const auto rep = ingest_file(dir.file("tiles.jsonl"), {});
        REQUIRE(rep.accepted.size() == 2);
        CHECK(rep.accepted[0].grid == tiles[0].grid);
        CHECK(rep.accepted[0].raster_ref == tiles[0].raster_ref);
        REQUIRE(rep.rejected.size() == 1);
        CHECK(rep.rejected[0].reason == "raster");
        CHECK(rep.warnings.empty());

        IngestOptions strict;
        strict.require_rasters = true;
        const auto missing = ingest_text(tile_line("gone", kSquare, 0.0), strict);
        REQUIRE(missing.rejected.size() == 1);
        CHECK(missing.rejected[0].reason == "raster");
    }
}

TEST_SUITE("stats") {
    TEST_CASE("identities and fraction") {
        std::vector<PatchRecord> recs;
        for (int i = 0; i < 12; ++i) {
            PatchRecord r;
            r.window = PatchWindow{0, i * 200, 0};
            r.location_id = assign_location_id(r.window);
            r.members.push_back({"a", parse_iso8601("2023-06-10T00:00:00Z")});
            if (i < 2) r.members.push_back({"b", parse_iso8601("2023-08-10T00:00:00Z")});
            recs.push_back(r);
        }
        const auto s = compute_stats(recs);
        CHECK(s.n_locations == 12);
        CHECK(s.n_multitemporal == 2);
        CHECK(s.n_patches == 14);
        CHECK(s.multitemporal_fraction() == doctest::Approx(2.0 / 12));
        CHECK(s.timestamps_histogram == std::map<std::size_t, std::size_t>{{1, 10}, {2, 2}});
        CHECK(s.per_month[5] == 12);
        CHECK(s.per_month[7] == 2);
        CHECK_NOTHROW(s.check());
        CHECK(timestamps_csv(s) == "timestamps,locations\n1,10\n2,2\n");
        CHECK(monthly_csv(s).find("\n6,12\n") != std::string::npos);
        REQUIRE(s.coverage.size() == 1);
        CHECK(s.coverage[0].locations == 12);
        CHECK(s.coverage[0].covered_area == doctest::Approx(12 * 3840.0 * 3840.0));
        CHECK(s.coverage[0].extent.max_x == doctest::Approx(11 * 200 * 30.0 + 3840.0));

        auto broken = s;
        broken.n_patches = 13;
        CHECK_THROWS_AS(broken.check(), ConsistencyError);
    }

    TEST_CASE("empty manifest") {
        const auto s = compute_stats({});
        CHECK(s.multitemporal_fraction() == 0.0);
        CHECK(s.coverage.empty());
        CHECK_NOTHROW(s.check());
    }

    TEST_CASE("class histogram csv") {
        const ClassHistogram h{"cdl", {"Corn", "Grass, mixed"}, {3, 1}};
        CHECK(class_histogram_csv(h) == "class_index,class_name,pixels,share\n0,Corn,3,0.75\n1,\"Grass, mixed\",1,0.25\n");
    }

    TEST_CASE("identities hold on curated random layouts") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto m = curate(synthetic::random_layout({.tiles = 50, .extent_px = 1500, .seed = seed}), CurationConfig{});
            const auto s = compute_stats(m.records);
            CHECK_NOTHROW(s.check());
            CHECK(s.n_locations == m.summary.locations);
            CHECK(s.n_patches == m.summary.patches);
            CHECK(s.n_multitemporal == m.summary.multitemporal);
        }
    }
}
