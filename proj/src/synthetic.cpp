#include "hypercurate/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "hypercurate/errors.hpp"
#include "hypercurate/raster_io.hpp"

namespace hypercurate::synthetic {

namespace {

// Keeps coordinates in a realistic UTM range.
constexpr double kEastingBase = 300000.0;
constexpr double kNorthingBase = 4500000.0;
constexpr Timestamp kEpochBase = 1682899200;  // 2023-05-01T00:00:00Z

std::string tile_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%04zu", i);
    return buf;
}

}  // namespace

std::vector<TileRecord> random_layout(const LayoutOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> centre(0.0, opts.extent_px * opts.gsd);
    std::uniform_int_distribution<int> side(opts.min_side_px, opts.max_side_px);
    std::uniform_real_distribution<double> angle(-opts.max_rotation_deg, opts.max_rotation_deg);
    std::uniform_int_distribution<std::size_t> date(0, std::max<std::size_t>(opts.dates, 1) - 1);
    std::uniform_int_distribution<Timestamp> within_day(0, 6 * 3600);
    std::vector<TileRecord> out;
    for (std::size_t i = 0; i < opts.tiles; ++i) {
        const double cx = kEastingBase + centre(rng);
        const double cy = kNorthingBase + centre(rng);
        const double hw = side(rng) * opts.gsd / 2;
        const double hh = side(rng) * opts.gsd / 2;
        const double a = angle(rng) * std::numbers::pi / 180.0;
        const double c = std::cos(a), s = std::sin(a);
        std::vector<Point2> ring;
        for (auto [u, v] : {std::pair{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}) {
            ring.push_back({cx + u * c - v * s, cy + u * s + v * c});
        }
        TileRecord t;
        t.tile_id = tile_name(i);
        t.crs = opts.crs;
        t.footprint = ConvexPolygon::make(std::move(ring), opts.crs);
        // Dates a week apart; two tiles on one date fall inside the 1-day gate.
        t.timestamp = kEpochBase + static_cast<Timestamp>(date(rng)) * 7 * kSecondsPerDay + within_day(rng);
        t.gsd = opts.gsd;
        t.band_count = opts.bands;
        t.raster_ref = t.tile_id + ".hsrc";
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TileRecord> coverage_layout(std::size_t singles, std::size_t doubles, int patch_px, double gsd,
                                        int crs) {
    std::vector<TileRecord> out;
    const double side = patch_px * gsd;
    const double step = 2 * side;
    auto square = [&](std::size_t cell, std::size_t visit) {
        const double x0 = kEastingBase + static_cast<double>(cell) * step;
        TileRecord t;
        t.tile_id = tile_name(out.size());
        t.crs = crs;
        t.footprint = ConvexPolygon::rectangle(x0, kNorthingBase, x0 + side, kNorthingBase + side, crs);
        t.timestamp = kEpochBase + static_cast<Timestamp>(visit) * 30 * kSecondsPerDay;
        t.gsd = gsd;
        out.push_back(std::move(t));
    };
    for (std::size_t i = 0; i < singles; ++i) square(i, 0);
    for (std::size_t i = 0; i < doubles; ++i) {
        square(singles + i, 0);
        square(singles + i, 1);
    }
    return out;
}

void write_tile_raster(TileRecord& tile, const std::string& path, std::mt19937_64& rng) {
    tile.grid.reset();
    const RasterGrid g = effective_grid(tile);
    RasterHeader h;
    h.width = static_cast<std::uint32_t>(g.width);
    h.height = static_cast<std::uint32_t>(g.height);
    h.bands = static_cast<std::uint32_t>(tile.band_count);
    h.gsd = tile.gsd;
    h.crs = tile.crs;
    h.origin = {static_cast<double>(g.origin_col) * tile.gsd, static_cast<double>(g.origin_row) * tile.gsd};
    std::vector<bool> inside(static_cast<std::size_t>(g.width * g.height));
    for (std::int64_t r = 0; r < g.height; ++r) {
        for (std::int64_t c = 0; c < g.width; ++c) {
            const Point2 centre{(static_cast<double>(g.origin_col + c) + 0.5) * tile.gsd,
                                (static_cast<double>(g.origin_row - r) - 0.5) * tile.gsd};
            inside[static_cast<std::size_t>(r * g.width + c)] = contains_point(tile.footprint, centre);
        }
    }
    std::uniform_int_distribution<int> value(0, 10000);
    std::vector<std::int16_t> samples(h.sample_count());
    const std::size_t plane = inside.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = inside[i % plane] ? static_cast<std::int16_t>(value(rng)) : static_cast<std::int16_t>(h.nodata);
    }
    write_raster(path, h, std::span<const std::int16_t>(samples));
    tile.raster_ref = path;
    tile.grid = g;
}

LabelRaster random_label_raster(std::int64_t origin_col, std::int64_t origin_row, std::uint32_t width,
                                std::uint32_t height, double gsd, int crs, const std::vector<std::int32_t>& codes,
                                int block_px, std::mt19937_64& rng) {
    if (codes.empty() || block_px < 1) throw ValidationError("label raster needs codes and a positive block size");
    LabelRaster out;
    out.header.width = width;
    out.header.height = height;
    out.header.bands = 1;
    out.header.gsd = gsd;
    out.header.crs = crs;
    out.header.origin = {static_cast<double>(origin_col) * gsd, static_cast<double>(origin_row) * gsd};
    const std::uint32_t bw = (width + block_px - 1) / block_px;
    const std::uint32_t bh = (height + block_px - 1) / block_px;
    std::uniform_int_distribution<std::size_t> pick(0, codes.size() - 1);
    std::vector<std::int32_t> blocks(static_cast<std::size_t>(bw) * bh);
    for (auto& b : blocks) b = codes[pick(rng)];
    out.codes.resize(static_cast<std::size_t>(width) * height);
    for (std::uint32_t r = 0; r < height; ++r) {
        for (std::uint32_t c = 0; c < width; ++c) {
            out.codes[static_cast<std::size_t>(r) * width + c] = blocks[(r / block_px) * bw + c / block_px];
        }
    }
    return out;
}

void write_label_raster(const LabelRaster& labels, const std::string& path) {
    std::vector<std::int16_t> v(labels.codes.begin(), labels.codes.end());
    RasterHeader h = labels.header;
    h.dtype = SampleType::int16;
    write_raster(path, h, std::span<const std::int16_t>(v));
}

}  // namespace hypercurate::synthetic
