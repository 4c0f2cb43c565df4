#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypercurate/geometry.hpp"

namespace hypercurate {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

/// "2023-07-14T10:31:05Z". Fractional seconds and "+00:00" are accepted on input.
Timestamp parse_iso8601(std::string_view s);
std::string format_iso8601(Timestamp t);
/// Calendar month 1..12 of a timestamp.
int month_of(Timestamp t);

/// Pixel grid of a tile raster, expressed in lattice units of the tile's gsd.
/// Column `origin_col` starts at easting origin_col * gsd; row 0 is the
/// northern edge at northing origin_row * gsd and rows grow southwards.
struct RasterGrid {
    std::int64_t origin_col = 0;
    std::int64_t origin_row = 0;
    std::int64_t width = 0;
    std::int64_t height = 0;

    friend bool operator==(const RasterGrid&, const RasterGrid&) = default;
};

struct TileRecord {
    std::string tile_id;
    ConvexPolygon footprint = ConvexPolygon::rectangle(0, 0, 1, 1);
    Timestamp timestamp = 0;
    int crs = 0;
    std::string raster_ref;
    double cloud_fraction = 0.0;
    double gsd = 30.0;
    int band_count = 1;
    std::optional<RasterGrid> grid;
};

/// Checks the record invariants; throws ValidationError naming the tile.
void validate_tile(const TileRecord& t);

/// Tile ids travel inside `tile:timestamp:row:col` lists, so they may not
/// contain separators or whitespace.
bool is_valid_tile_id(std::string_view id);

/// Grid used for pixel offsets: the explicit grid when present, otherwise the
/// footprint bounding box snapped outwards to the lattice.
RasterGrid effective_grid(const TileRecord& t);

/// Integral lattice index of a coordinate, or nullopt when `v` is not a
/// multiple of `gsd` (within 1e-6 lattice units).
std::optional<std::int64_t> lattice_index(double v, double gsd);

}  // namespace hypercurate
