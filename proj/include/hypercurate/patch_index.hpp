#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hypercurate/geometry.hpp"
#include "hypercurate/tile.hpp"

namespace hypercurate {

struct Lattice {
    double gsd = 30.0;
    int size_px = 128;
    int crs = 0;
};

struct PatchMember {
    std::string tile_id;
    Timestamp timestamp = 0;
    std::int64_t row = 0;
    std::int64_t col = 0;

    friend bool operator==(const PatchMember&, const PatchMember&) = default;
};

/// One location and every acquisition of it.
struct PatchRecord {
    std::string location_id;
    PatchWindow window;
    std::vector<PatchMember> members;  // strictly increasing timestamps

    friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

/// Committed window boxes keyed by location id, with interior-overlap queries.
class SpatialIndex {
public:
    SpatialIndex();
    ~SpatialIndex();
    SpatialIndex(SpatialIndex&&) noexcept;
    SpatialIndex& operator=(SpatialIndex&&) noexcept;
    SpatialIndex(const SpatialIndex&);
    SpatialIndex& operator=(const SpatialIndex&);

    /// Location ids of committed windows whose interiors intersect `box`.
    std::vector<std::string> query_overlap(const BoundingBox& box) const;
    /// Committed boxes whose interiors intersect `box`.
    std::vector<BoundingBox> overlapping_boxes(const BoundingBox& box) const;
    bool any_overlap(const BoundingBox& box) const;
    bool contains_id(std::string_view location_id) const;

    /// Throws ConsistencyError if a window overlaps committed content or
    /// another window in the batch. Re-committing an identical window is a no-op.
    void commit(const std::vector<PatchWindow>& windows);

    std::size_t size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Every lattice window fully inside `region` that overlaps nothing in
/// `index`, placed greedily: pixel rows south to north, columns west to east.
/// The returned windows are mutually disjoint; `index` is not modified.
std::vector<PatchWindow> patchify(const ConvexPolygon& region, const Lattice& lattice,
                                  const SpatialIndex& index);

/// True when `region` holds at least one lattice window (index ignored).
bool holds_window(const ConvexPolygon& region, const Lattice& lattice);

void commit(SpatialIndex& index, const std::vector<PatchWindow>& windows);

std::vector<std::string> query_overlap(const SpatialIndex& index, const BoundingBox& box);

/// "<crs>_<ix>_<iy>_<size_px>_<gsd>".
std::string assign_location_id(const PatchWindow& w);
PatchWindow parse_location_id(std::string_view id);

/// Tab-separated manifest line (no trailing newline):
/// location_id, crs, origin_x, origin_y, size_px, gsd, [tile:timestamp:row:col, ...]
std::string format_manifest_line(const PatchRecord& r);
PatchRecord parse_manifest_line(std::string_view line);

std::string format_manifest(const std::vector<PatchRecord>& records);
/// Parses a whole manifest; errors carry the 1-based line number.
std::vector<PatchRecord> parse_manifest(std::string_view text);

std::vector<PatchRecord> read_manifest_file(const std::string& path);
void write_manifest_file(const std::string& path, const std::vector<PatchRecord>& records);

/// Sorts records by location id (the canonical manifest order).
void sort_records(std::vector<PatchRecord>& records);

}  // namespace hypercurate
