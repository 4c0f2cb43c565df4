#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypercurate/config.hpp"
#include "hypercurate/geometry.hpp"
#include "hypercurate/patch_index.hpp"
#include "hypercurate/tile.hpp"

namespace hypercurate {

struct CurationConfig {
    /// Tuples retained per enumeration level; 0 means unbounded.
    std::size_t beam = 64;
    int max_order = 32;
    Timestamp min_dt_seconds = kSecondsPerDay;
    int patch_px = 128;
    double cloud_max = 0.10;
    std::string band_mask_ref;
    int worker_count = 1;

    /// Reads beam, max_order, min_dt_seconds, patch_px, cloud_max,
    /// band_mask_ref and worker_count; missing keys keep their defaults.
    static CurationConfig from(const KeyValueConfig& kv);
    void validate() const;
};

struct OverlapEdge {
    ConvexPolygon intersection;
    double area = 0.0;
};

/// Tiles as nodes; edges join tiles that overlap by at least one patch window
/// and were acquired more than `min_dt` apart. `contacts` additionally links
/// any two tiles whose footprint interiors meet, regardless of time.
class OverlapGraph {
public:
    const std::vector<TileRecord>& tiles() const { return tiles_; }
    std::size_t node_count() const { return tiles_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::optional<std::size_t> index_of(const std::string& tile_id) const;
    const TileRecord& tile(std::size_t i) const { return tiles_[i]; }

    /// Sorted neighbor indices over patchable, time-gated edges.
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
    /// Sorted indices of tiles whose footprint interiors meet tile i.
    const std::vector<std::size_t>& contacts(std::size_t i) const { return contacts_[i]; }
    const OverlapEdge* edge(std::size_t a, std::size_t b) const;
    const std::map<std::pair<std::size_t, std::size_t>, OverlapEdge>& edges() const { return edges_; }
    int patch_px() const { return patch_px_; }

    // Construction helpers, used by build_overlap_graph and tests.
    static OverlapGraph from_tiles(std::vector<TileRecord> tiles, int patch_px);
    void add_edge(std::size_t a, std::size_t b, OverlapEdge e);
    void add_contact(std::size_t a, std::size_t b);

private:
    std::vector<TileRecord> tiles_;  // sorted by tile_id
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::vector<std::size_t>> contacts_;
    std::map<std::pair<std::size_t, std::size_t>, OverlapEdge> edges_;
    int patch_px_ = 128;
};

struct Combination {
    std::vector<std::string> tiles;  // sorted
    ConvexPolygon intersection;
    double area = 0.0;
    std::size_t order() const { return tiles.size(); }
};

/// Lattice shared by a set of tiles (their common gsd and CRS).
Lattice lattice_for(const TileRecord& t, int patch_px);

OverlapGraph build_overlap_graph(const std::vector<TileRecord>& tiles, Timestamp min_dt,
                                 int patch_px = 128);

enum class Linkage {
    /// Patchable, time-gated edges only.
    edges,
    /// Edges plus spatial contacts. Curation partitions work this way so that
    /// tiles whose footprints touch always share one spatial index.
    contacts,
};

/// Sorted node sets; each component sorted, components ordered by first id.
std::vector<std::vector<std::string>> connected_components(const OverlapGraph& g,
                                                           Linkage linkage = Linkage::edges);

/// Intersections already evaluated for a tile set (indices into the graph),
/// shared across seed tiles of one component. nullopt marks an unpatchable set.
using CombinationMemo = std::map<std::vector<std::size_t>, std::optional<ConvexPolygon>>;

/// Level-wise expansion from `tile_id`: all incident edges, then n-tuples built
/// from retained (n-1)-tuples, keeping at most `beam` per level (0 = all)
/// ranked by area desc then ids asc.
std::vector<Combination> build_combinations(const std::string& tile_id, const OverlapGraph& g,
                                            std::size_t beam, int max_order,
                                            CombinationMemo* memo = nullptr);

struct ManifestSummary {
    std::size_t locations = 0;
    std::size_t patches = 0;
    std::size_t multitemporal = 0;
};

struct PatchManifest {
    std::vector<PatchRecord> records;  // sorted by location id
    ManifestSummary summary;
    std::size_t components = 0;
    std::size_t combinations = 0;
};

ManifestSummary summarize(const std::vector<PatchRecord>& records);

/// Validates the catalog: unique ids, one CRS, per-tile invariants.
void validate_catalog(const std::vector<TileRecord>& tiles);

/// Runs temporal-views extraction end to end and returns a non-overlapping,
/// deterministically sorted manifest.
PatchManifest curate(const std::vector<TileRecord>& tiles, const CurationConfig& cfg);

}  // namespace hypercurate
