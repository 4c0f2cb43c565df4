#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "hypercurate/errors.hpp"
#include "hypercurate/raster_io.hpp"
#include "generators.hpp"
#include "support.hpp"

using namespace hypercurate;
using testing::random_mask;

namespace {

RasterHeader header_with_wavelengths(std::size_t bands) {
    RasterHeader h;
    h.width = h.height = 4;
    h.bands = static_cast<std::uint32_t>(bands);
    for (std::size_t i = 0; i < bands; ++i) h.wavelengths.push_back(420.0 + 10.0 * static_cast<double>(i));
    return h;
}

/// 224-band tile covering 4x3 windows, axis aligned, with a raster on disk.
TileRecord raster_tile(const testing::TempDir& dir, int bands, std::uint64_t seed) {
    TileRecord t;
    t.tile_id = "r" + std::to_string(seed);
    t.band_count = bands;
    t.footprint = ConvexPolygon::rectangle(300000, 4500000, 300000 + 4 * 3840, 4500000 + 3 * 3840);
    std::mt19937_64 rng(seed);
    synthetic::write_tile_raster(t, dir.file(t.tile_id + ".hsrc"), rng);
    return t;
}

}  // namespace

TEST_SUITE("band masks") {
    TEST_CASE("apply examples") {
        CHECK(apply_band_mask(header_with_wavelengths(224), BandMask::all(224)).bands == 224);
        const auto reduced = apply_band_mask(header_with_wavelengths(224), default_enmap_mask());
        CHECK(reduced.bands == 202);
        CHECK(reduced.wavelengths.size() == 202);
        CHECK(reduced.wavelengths[126] == 420.0 + 10.0 * 137);
        BandMask alt{std::vector<bool>(10), "alt"};
        for (std::size_t i = 0; i < 10; i += 2) alt.keep[i] = true;
        CHECK(apply_band_mask(header_with_wavelengths(10), alt).bands == 5);
        CHECK_THROWS_AS(apply_band_mask(header_with_wavelengths(10), BandMask{std::vector<bool>(10), "none"}),
                        ValidationError);
        CHECK_THROWS_AS(apply_band_mask(header_with_wavelengths(10), BandMask::all(9)), MaskMismatchError);
    }

    TEST_CASE("composition equals sequential application") {
        std::mt19937_64 rng(4);
        for (int i = 0; i < 100; ++i) {
            const std::size_t n = 1 + rng() % 240;
            const BandMask first = random_mask(n, rng);
            const BandMask second = random_mask(first.kept(), rng);
            const auto h = header_with_wavelengths(n);
            CHECK(apply_band_mask(apply_band_mask(h, first), second) == apply_band_mask(h, compose(first, second)));
        }
    }

    TEST_CASE("mask files") {
        const auto m = BandMask::parse("name = test\nbands = 12\ndrop = 0, 3-5\n");
        CHECK(m.kept() == 8);
        CHECK_FALSE(m.keep[4]);
        CHECK(BandMask::parse("bands = 5\nkeep = 1,2\n").kept_indices() == std::vector<std::size_t>{1, 2});
        CHECK_THROWS_AS(BandMask::parse("bands = 5\nkeep = 7\n"), ValidationError);
        CHECK_THROWS_AS(BandMask::parse("bands = 5\nkeep = 1\ndrop = 2\n"), ValidationError);
        const auto shipped = BandMask::load(std::string(HC_SOURCE_DIR) + "/config/enmap_default_mask.txt");
        CHECK(shipped.keep == default_enmap_mask().keep);
    }
}

TEST_SUITE("cloud filter") {
    TEST_CASE("threshold is inclusive") {
        std::vector<TileRecord> tiles(4);
        const double fractions[] = {0.05, 0.10, 0.4, 0.0};
        for (int i = 0; i < 4; ++i) {
            tiles[i].tile_id = "t" + std::to_string(i);
            tiles[i].cloud_fraction = fractions[i];
        }
        const auto kept = filter_by_cloud(tiles, 0.10);
        REQUIRE(kept.size() == 3);
        CHECK(kept[0].tile_id == "t0");
        CHECK(kept[1].tile_id == "t1");
        CHECK(kept[2].tile_id == "t3");
        CHECK(filter_by_cloud(tiles, 0.0).size() == 1);
        CHECK_THROWS_AS(filter_by_cloud(tiles, 1.5), ValidationError);
    }

    TEST_CASE("fraction from a mask raster") {
        testing::TempDir dir("cloud");
        RasterHeader h;
        h.width = 10;
        h.height = 10;
        h.bands = 1;
        h.dtype = SampleType::uint8;
        std::vector<std::uint8_t> m(100, 0);
        for (int i = 0; i < 7; ++i) m[static_cast<std::size_t>(i * 13)] = 1;
        write_raster(dir.file("m.hsrc"), h, std::span<const std::uint8_t>(m));
        CHECK(cloud_fraction_from_mask(dir.file("m.hsrc")) == doctest::Approx(0.07));
    }
}

TEST_SUITE("windowed reads") {
    TEST_CASE("window equals the matching slice of the full raster") {
        testing::TempDir dir("win");
        const TileRecord t = raster_tile(dir, 24, 1);
        const Raster full = read_raster(t.raster_ref);
        std::mt19937_64 rng(2);
        const BandMask mask = random_mask(24, rng);
        const auto kept = mask.kept_indices();
        for (std::int64_t wx = 0; wx < 4; ++wx) {
            for (std::int64_t wy = 0; wy < 3; ++wy) {
                const PatchWindow w{0, 10000 + wx * 128, 150000 + wy * 128};
                const PatchCube cube = read_window(t, w, mask);
                CHECK(cube.header.bands == kept.size());
                CHECK(cube.provenance.window == w);
                const std::int64_t col = w.ix - t.grid->origin_col;
                const std::int64_t row = t.grid->origin_row - (w.iy + 128);
                std::size_t mismatches = 0;
                for (std::size_t b = 0; b < kept.size(); ++b) {
                    for (std::size_t r = 0; r < 128; ++r) {
                        for (std::size_t c = 0; c < 128; ++c) {
                            mismatches += cube.at(b, r, c) !=
                                          full.at(kept[b], static_cast<std::size_t>(row) + r, static_cast<std::size_t>(col) + c);
                        }
                    }
                }
                CHECK(mismatches == 0);
            }
        }
    }

    TEST_CASE("default mask turns 224 bands into a 202-band cube") {
        testing::TempDir dir("enmap");
        const TileRecord t = raster_tile(dir, 224, 3);
        const PatchWindow w{0, 10000, 150000};
        CHECK(read_window(t, w, BandMask::all(224)).header.bands == 224);
        const PatchCube cube = read_window(t, w, default_enmap_mask());
        CHECK(cube.header.bands == 202);
        CHECK(cube.values.size() == 202u * 128 * 128);
    }

    TEST_CASE("rejections") {
        testing::TempDir dir("rej");
        TileRecord t = raster_tile(dir, 3, 5);
        CHECK_THROWS_AS(read_window(t, PatchWindow{0, 10000 + 4 * 128 - 1, 150000}, BandMask::all(3)), OutOfBoundsError);
        CHECK_THROWS_AS(read_window(t, PatchWindow{0, 10000, 150000}, BandMask::all(4)), MaskMismatchError);
        // Plant one nodata sample in band 1.
        Raster r = read_raster(t.raster_ref);
        r.samples[(1 * r.header.height + 200) * r.header.width + 5] = r.header.nodata;
        std::vector<std::int16_t> v(r.samples.begin(), r.samples.end());
        write_raster(t.raster_ref, r.header, std::span<const std::int16_t>(v));
        const std::int64_t iy = t.grid->origin_row - 200 - 128;
        const PatchWindow hit{0, 10000, iy + 1};
        CHECK_THROWS_AS(read_window(t, hit, BandMask::all(3)), NoDataError);
        BandMask skip = BandMask::all(3);
        skip.keep[1] = false;
        CHECK_NOTHROW(read_window(t, hit, skip));
        t.raster_ref = dir.file("missing.hsrc");
        CHECK_THROWS_AS(read_window(t, hit, skip), IoError);
    }
}

TEST_SUITE("hsrc format") {
    TEST_CASE("patch round trip and size") {
        testing::TempDir dir("hsrc");
        std::mt19937_64 rng(9);
        std::uniform_int_distribution<int> v(-32768, 32767);
        for (int i = 0; i < 20; ++i) {
            PatchCube c;
            c.header.width = c.header.height = 128;
            c.header.bands = 1 + static_cast<std::uint32_t>(rng() % 16);
            c.header.gsd = 30;
            c.header.crs = 32633;
            c.header.origin = {30.0 * static_cast<double>(rng() % 100000), 30.0 * static_cast<double>(rng() % 100000)};
            c.values.resize(c.header.sample_count());
            for (auto& x : c.values) x = static_cast<std::int16_t>(v(rng));
            const std::string path = dir.file("c" + std::to_string(i) + ".hsrc");
            write_patch(c, path);
            CHECK(std::filesystem::file_size(path) == 64 + c.header.bands * 128u * 128u * 2u);
            const PatchCube back = read_patch(path);
            CHECK(back.header == c.header);
            CHECK(back.values == c.values);
        }
    }

    TEST_CASE("header layout is bit-exact") {
        testing::TempDir dir("hdr");
        RasterHeader h;
        h.width = 3;
        h.height = 2;
        h.bands = 1;
        h.nodata = -9999;
        h.gsd = 30;
        h.origin = {300000, 4500000};
        h.crs = 32633;
        const std::vector<std::int16_t> s{1, -2, 3, 4, 5, 258};
        write_raster(dir.file("h.hsrc"), h, std::span<const std::int16_t>(s));
        std::ifstream in(dir.file("h.hsrc"), std::ios::binary);
        std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), {});
        REQUIRE(b.size() == 64 + 12);
        CHECK(std::string(b.begin(), b.begin() + 4) == "HSRC");
        CHECK(b[4] == 1);
        CHECK(b[6] == 1);
        CHECK(b[12] == 2);
        CHECK(b[16] == 3);
        CHECK(b[20] == 0xF1);  // -9999 = 0xFFFFD8F1
        CHECK(b[48] == (32633 & 0xFF));
        CHECK(std::all_of(b.begin() + 52, b.begin() + 64, [](unsigned char x) { return x == 0; }));
        CHECK(b[64 + 10] == 2);  // 258 little-endian
        CHECK(b[64 + 11] == 1);
    }

    TEST_CASE("bad files") {
        testing::TempDir dir("bad");
        CHECK_THROWS_AS(read_header(dir.file("none.hsrc")), IoError);
        std::ofstream(dir.file("junk.hsrc")) << "not a raster at all, definitely longer than sixty-four bytes.......";
        CHECK_THROWS_AS(read_header(dir.file("junk.hsrc")), ValidationError);
        PatchCube empty;
        CHECK_THROWS_AS(write_patch(empty, dir.file("z.hsrc")), ValidationError);
    }
}

TEST_SUITE("tile manifests") {
    TEST_CASE("json round trip") {
        synthetic::LayoutOptions o;
        o.tiles = 30;
        auto tiles = synthetic::random_layout(o);
        tiles[3].grid = RasterGrid{10, 20, 300, 400};
        tiles[4].cloud_fraction = 0.0625;
        for (const auto& t : tiles) {
            const TileRecord back = parse_tile_json(format_tile_json(t));
            CHECK(back.tile_id == t.tile_id);
            CHECK(back.footprint.vertices() == t.footprint.vertices());
            CHECK(back.timestamp == t.timestamp);
            CHECK(back.grid == t.grid);
            CHECK(back.cloud_fraction == t.cloud_fraction);
            CHECK(back.band_count == t.band_count);
        }
    }

    TEST_CASE("errors carry the line number") {
        testing::TempDir dir("tm");
        std::ofstream(dir.file("m.jsonl")) << format_tile_json(synthetic::coverage_layout(1, 0)[0]) << "\n{\"tile_id\": 3}\n";
        try {
            read_tile_manifest(dir.file("m.jsonl"));
            FAIL("no error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("m.jsonl:2") != std::string::npos);
        }
    }
}
