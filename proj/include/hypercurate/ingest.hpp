#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hypercurate/tile.hpp"

namespace hypercurate {

struct IngestOptions {
    double cloud_max = 0.10;
    /// Reject tiles whose raster file is missing instead of warning.
    bool require_rasters = false;
    /// Relative raster paths are resolved against this directory.
    std::string base_dir;
};

struct Rejection {
    std::size_t line = 0;
    std::string tile_id;
    /// One of: geometry, duplicate, cloud, grid, raster.
    std::string reason;
    std::string detail;
};

struct IngestReport {
    std::vector<TileRecord> accepted;
    std::vector<Rejection> rejected;
    std::vector<std::string> warnings;
    std::size_t lines = 0;

    std::string to_json() const;
};

/// Validates a JSON-lines tile manifest. Per-tile problems become rejections;
/// unparseable lines and schema violations throw ValidationError carrying
/// `origin:line`.
IngestReport ingest_text(std::string_view text, const IngestOptions& opts, const std::string& origin = "<manifest>");
IngestReport ingest_file(const std::string& path, IngestOptions opts);

}  // namespace hypercurate
