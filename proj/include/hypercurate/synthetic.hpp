#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hypercurate/benchmark.hpp"
#include "hypercurate/tile.hpp"

// Synthetic catalogs and rasters for tests, benchmarks and demos.

namespace hypercurate::synthetic {

struct LayoutOptions {
    std::size_t tiles = 50;
    /// Side of the square area that tile centres are drawn from, in pixels.
    double extent_px = 2000;
    int min_side_px = 160;
    int max_side_px = 512;
    double max_rotation_deg = 12.0;
    /// Distinct acquisition days; tiles sharing a day fall inside the time gate.
    std::size_t dates = 6;
    double gsd = 30.0;
    int crs = 32633;
    int bands = 224;
    std::uint64_t seed = 1;
};

/// Rotated-rectangle footprints with ids T0000, T0001, ... Metadata only.
std::vector<TileRecord> random_layout(const LayoutOptions& opts);

/// Axis-aligned tiles of exactly one patch each, far apart: `singles` cells
/// seen once and `doubles` cells seen on two dates a month apart.
std::vector<TileRecord> coverage_layout(std::size_t singles, std::size_t doubles, int patch_px = 128,
                                        double gsd = 30.0, int crs = 32633);

/// Writes an int16 HSRC raster covering the tile's snapped bounding box with
/// random reflectance; pixels whose centre is outside the footprint are
/// nodata. Sets `raster_ref` and `grid` on the tile.
void write_tile_raster(TileRecord& tile, const std::string& path, std::mt19937_64& rng);

/// Piecewise-constant label raster: one code per `block_px` square, drawn
/// from `codes`. Origin is the upper-left corner in lattice units.
LabelRaster random_label_raster(std::int64_t origin_col, std::int64_t origin_row, std::uint32_t width,
                                std::uint32_t height, double gsd, int crs, const std::vector<std::int32_t>& codes,
                                int block_px, std::mt19937_64& rng);

void write_label_raster(const LabelRaster& labels, const std::string& path);

}  // namespace hypercurate::synthetic
