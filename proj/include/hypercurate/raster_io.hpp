#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypercurate/geometry.hpp"
#include "hypercurate/tile.hpp"

namespace hypercurate {

// HSRC raster/patch container, little-endian:
//
//   offset  size  field
//        0     4  magic "HSRC"
//        4     2  version (u16, = 1)
//        6     2  dtype code (u16: 1 = int16, 2 = uint8)
//        8     4  bands (u32)
//       12     4  height (u32)
//       16     4  width (u32)
//       20     4  nodata (i32)
//       24     8  gsd (f64)
//       32     8  origin_x (f64, west edge)
//       40     8  origin_y (f64, north edge)
//       48     4  crs (u32)
//       52    12  reserved (zero)
//       64     -  band-sequential samples, row-major, rows north to south

inline constexpr std::size_t kHsrcHeaderBytes = 64;
inline constexpr std::uint16_t kHsrcVersion = 1;
inline constexpr std::int32_t kDefaultNodata = -32768;

enum class SampleType : std::uint16_t { int16 = 1, uint8 = 2 };

std::size_t sample_bytes(SampleType t);

struct RasterHeader {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t bands = 0;
    SampleType dtype = SampleType::int16;
    std::int32_t nodata = kDefaultNodata;
    Point2 origin;  // upper-left corner
    double gsd = 30.0;
    int crs = 0;
    /// Band centre wavelengths (nm); not stored in HSRC, empty when unknown.
    std::vector<double> wavelengths;

    void validate() const;
    std::size_t sample_count() const {
        return static_cast<std::size_t>(width) * height * bands;
    }

    friend bool operator==(const RasterHeader&, const RasterHeader&) = default;
};

struct BandMask {
    std::vector<bool> keep;
    std::string name;

    std::size_t kept() const;
    /// Source indices of kept bands, ascending.
    std::vector<std::size_t> kept_indices() const;
    void validate() const;

    static BandMask all(std::size_t bands, std::string name = "all");
    /// Text file of `key = value` lines: name, bands, and either keep or drop
    /// (comma-separated indices or inclusive ranges such as `126-136`).
    static BandMask load(const std::string& path);
    static BandMask parse(std::string_view text, const std::string& origin = "<mask>");
};

/// Stand-in EnMAP water-absorption mask: 224 source bands, 202 kept.
BandMask default_enmap_mask();

/// Mask equivalent to applying `first` and then `second` (indexed into the
/// bands `first` keeps).
BandMask compose(const BandMask& first, const BandMask& second);

RasterHeader apply_band_mask(const RasterHeader& header, const BandMask& mask);

/// Tiles with cloud_fraction <= max_fraction, order preserved.
std::vector<TileRecord> filter_by_cloud(const std::vector<TileRecord>& tiles, double max_fraction);

struct PatchProvenance {
    std::string tile_id;
    Timestamp timestamp = 0;
    PatchWindow window;

    friend bool operator==(const PatchProvenance&, const PatchProvenance&) = default;
};

/// [bands x size x size] reflectance cube.
struct PatchCube {
    RasterHeader header;
    std::vector<std::int16_t> values;
    PatchProvenance provenance;

    std::int16_t at(std::size_t band, std::size_t row, std::size_t col) const {
        return values[(band * header.height + row) * header.width + col];
    }
};

// Whole-raster I/O. Samples are widened to int32 when reading so one path
// serves both dtypes.
struct Raster {
    RasterHeader header;
    std::vector<std::int32_t> samples;

    std::int32_t at(std::size_t band, std::size_t row, std::size_t col) const {
        return samples[(band * header.height + row) * header.width + col];
    }
};

RasterHeader read_header(const std::string& path);
Raster read_raster(const std::string& path);
void write_raster(const std::string& path, const RasterHeader& header,
                  std::span<const std::int16_t> samples);
void write_raster(const std::string& path, const RasterHeader& header,
                  std::span<const std::uint8_t> samples);

/// Reads the window from the tile raster, keeping masked bands. Rejects
/// windows with any nodata sample in kept bands (NoDataError).
PatchCube read_window(const TileRecord& tile, const PatchWindow& window, const BandMask& mask);

void write_patch(const PatchCube& cube, const std::string& path);
PatchCube read_patch(const std::string& path);

/// Fraction of nonzero samples in a single-band cloud-mask raster.
double cloud_fraction_from_mask(const std::string& path);

// Tile manifests: one JSON object per line with keys tile_id, timestamp
// (ISO-8601 UTC), crs, footprint (WKT), raster, cloud_fraction, gsd, bands and
// an optional grid {origin_x, origin_y, width, height}.
struct TileIssue {
    std::string reason;  // "geometry" or "grid"
    std::string detail;
};
/// With `issue`, an unusable footprint or misregistered grid is reported
/// there instead of thrown; the record is returned with a placeholder footprint.
TileRecord parse_tile_json(std::string_view line, std::optional<TileIssue>* issue = nullptr);
std::string format_tile_json(const TileRecord& t);
std::vector<TileRecord> read_tile_manifest(const std::string& path);
void write_tile_manifest(const std::string& path, const std::vector<TileRecord>& tiles);

/// Pixel grid described by a raster header in lattice units; throws
/// ValidationError if the header origin is not registered to its gsd lattice.
RasterGrid grid_from_header(const RasterHeader& h);

}  // namespace hypercurate
