#include "hypercurate/ingest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hypercurate/errors.hpp"
#include "hypercurate/raster_io.hpp"

namespace hypercurate {

namespace fs = std::filesystem;

namespace {

/// Checks the raster header against the catalog entry and fills in the grid.
/// Returns a rejection reason, or an empty string when the tile is usable.
std::string check_raster(TileRecord& t, std::string& detail) {
    RasterHeader h;
    try {
        h = read_header(t.raster_ref);
    } catch (const Error& e) {
        detail = e.what();
        return "raster";
    }
    if (h.bands != static_cast<std::uint32_t>(t.band_count)) {
        detail = "raster has " + std::to_string(h.bands) + " bands, record says " + std::to_string(t.band_count);
        return "raster";
    }
    if (h.crs != t.crs || h.gsd != t.gsd) {
        detail = "raster crs/gsd (" + std::to_string(h.crs) + ", " + format_double(h.gsd) + ") differ from record";
        return "raster";
    }
    RasterGrid g;
    try {
        g = grid_from_header(h);
    } catch (const ValidationError& e) {
        detail = e.what();
        return "grid";
    }
    if (t.grid && *t.grid != g) {
        detail = "declared grid differs from raster header";
        return "grid";
    }
    t.grid = g;
    return {};
}

/// The footprint must lie on pixels the raster actually has.
bool grid_covers(const TileRecord& t) {
    const RasterGrid& g = *t.grid;
    const BoundingBox b = bbox(t.footprint);
    const double tol = kLinearTol;
    return b.min_x >= static_cast<double>(g.origin_col) * t.gsd - tol &&
           b.max_x <= static_cast<double>(g.origin_col + g.width) * t.gsd + tol &&
           b.max_y <= static_cast<double>(g.origin_row) * t.gsd + tol &&
           b.min_y >= static_cast<double>(g.origin_row - g.height) * t.gsd - tol;
}

}  // namespace

IngestReport ingest_text(std::string_view text, const IngestOptions& opts, const std::string& origin) {
    if (!(opts.cloud_max >= 0.0 && opts.cloud_max <= 1.0)) {
        throw ValidationError("cloud_max must lie in [0, 1], got " + format_double(opts.cloud_max));
    }
    IngestReport rep;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++rep.lines;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(rep.lines);
        std::optional<TileIssue> issue;
        TileRecord t;
        try {
            t = parse_tile_json(line, &issue);
            if (!is_valid_tile_id(t.tile_id)) throw ValidationError("invalid tile_id '" + t.tile_id + "'");
            if (!(t.cloud_fraction >= 0.0 && t.cloud_fraction <= 1.0)) {
                throw ValidationError("cloud_fraction must lie in [0, 1]");
            }
            if (!(t.gsd > 0.0) || t.band_count < 1) throw ValidationError("gsd and bands must be positive");
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        auto reject = [&](std::string reason, std::string detail) {
            rep.rejected.push_back({rep.lines, t.tile_id, std::move(reason), std::move(detail)});
        };
        if (issue) {
            reject(issue->reason, issue->detail);
            continue;
        }
        if (!seen.insert(t.tile_id).second) {
            reject("duplicate", "tile_id already used earlier in the manifest");
            continue;
        }
        if (t.cloud_fraction > opts.cloud_max) {
            reject("cloud", "cloud_fraction " + format_double(t.cloud_fraction) + " exceeds " +
                                format_double(opts.cloud_max));
            continue;
        }
        if (!opts.base_dir.empty() && !t.raster_ref.empty() && fs::path(t.raster_ref).is_relative()) {
            t.raster_ref = (fs::path(opts.base_dir) / t.raster_ref).lexically_normal().string();
        }
        bool metadata_only = false;
        if (!t.raster_ref.empty() && fs::exists(t.raster_ref)) {
            std::string detail;
            if (std::string reason = check_raster(t, detail); !reason.empty()) {
                reject(reason, detail);
                continue;
            }
        } else if (opts.require_rasters) {
            reject("raster", "raster '" + t.raster_ref + "' not found");
            continue;
        } else {
            metadata_only = true;
        }
        if (t.grid && !grid_covers(t)) {
            reject("grid", "footprint extends beyond the raster grid");
            continue;
        }
        try {
            validate_tile(t);
        } catch (const ValidationError& e) {
            reject("geometry", e.what());
            continue;
        }
        if (metadata_only) {
            rep.warnings.push_back(where + ": tile '" + t.tile_id + "' has no readable raster; metadata only");
        }
        rep.accepted.push_back(std::move(t));
    }
    return rep;
}

IngestReport ingest_file(const std::string& path, IngestOptions opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tile manifest '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (opts.base_dir.empty()) opts.base_dir = fs::path(path).parent_path().string();
    return ingest_text(buf.str(), opts, path);
}

std::string IngestReport::to_json() const {
    nlohmann::ordered_json j;
    j["lines"] = lines;
    j["accepted"] = accepted.size();
    j["rejected"] = nlohmann::ordered_json::array();
    for (const auto& r : rejected) {
        j["rejected"].push_back({{"line", r.line}, {"tile_id", r.tile_id}, {"reason", r.reason}, {"detail", r.detail}});
    }
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

}  // namespace hypercurate
