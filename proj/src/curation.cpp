#include "hypercurate/curation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include "hypercurate/errors.hpp"

namespace hypercurate {

// ---------------------------------------------------------------------------
// Config

CurationConfig CurationConfig::from(const KeyValueConfig& kv) {
    CurationConfig c;
    if (auto beam = kv.get("beam")) {
        if (*beam == "inf" || *beam == "unbounded") {
            c.beam = 0;
        } else {
            const long long b = kv.get_int("beam", 64);
            if (b < 0) throw ValidationError("beam must be >= 1 (or 'inf')");
            c.beam = static_cast<std::size_t>(b);
        }
    }
    c.max_order = static_cast<int>(kv.get_int("max_order", c.max_order));
    c.min_dt_seconds = kv.get_int("min_dt_seconds", c.min_dt_seconds);
    c.patch_px = static_cast<int>(kv.get_int("patch_px", c.patch_px));
    c.cloud_max = kv.get_double("cloud_max", c.cloud_max);
    c.band_mask_ref = kv.get_string("band_mask_ref", c.band_mask_ref);
    c.worker_count = static_cast<int>(kv.get_int("worker_count", c.worker_count));
    c.validate();
    return c;
}

void CurationConfig::validate() const {
    if (max_order < 2) throw ValidationError("max_order must be >= 2");
    if (min_dt_seconds < 0) throw ValidationError("min_dt_seconds must be >= 0");
    if (patch_px < 1) throw ValidationError("patch_px must be >= 1");
    if (!(cloud_max >= 0.0 && cloud_max <= 1.0)) throw ValidationError("cloud_max must be in [0,1]");
    if (worker_count < 1) throw ValidationError("worker_count must be >= 1");
}

// ---------------------------------------------------------------------------
// Graph

std::optional<std::size_t> OverlapGraph::index_of(const std::string& tile_id) const {
    auto it = index_.find(tile_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const OverlapEdge* OverlapGraph::edge(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    auto it = edges_.find({a, b});
    return it == edges_.end() ? nullptr : &it->second;
}

OverlapGraph OverlapGraph::from_tiles(std::vector<TileRecord> tiles, int patch_px) {
    OverlapGraph g;
    std::sort(tiles.begin(), tiles.end(),
              [](const TileRecord& a, const TileRecord& b) { return a.tile_id < b.tile_id; });
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        if (!g.index_.emplace(tiles[i].tile_id, i).second) {
            throw ValidationError("duplicate tile_id '" + tiles[i].tile_id + "'");
        }
    }
    g.tiles_ = std::move(tiles);
    g.adjacency_.assign(g.tiles_.size(), {});
    g.contacts_.assign(g.tiles_.size(), {});
    g.patch_px_ = patch_px;
    return g;
}

namespace {

void insert_sorted(std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

void OverlapGraph::add_edge(std::size_t a, std::size_t b, OverlapEdge e) {
    if (a == b) throw ConsistencyError("self loop in overlap graph");
    if (a > b) std::swap(a, b);
    edges_.insert_or_assign({a, b}, std::move(e));
    insert_sorted(adjacency_[a], b);
    insert_sorted(adjacency_[b], a);
    add_contact(a, b);
}

void OverlapGraph::add_contact(std::size_t a, std::size_t b) {
    if (a == b) return;
    insert_sorted(contacts_[a], b);
    insert_sorted(contacts_[b], a);
}

Lattice lattice_for(const TileRecord& t, int patch_px) { return Lattice{t.gsd, patch_px, t.crs}; }

void validate_catalog(const std::vector<TileRecord>& tiles) {
    std::set<std::string> ids;
    for (const auto& t : tiles) {
        validate_tile(t);
        if (!ids.insert(t.tile_id).second) {
            throw ValidationError("duplicate tile_id '" + t.tile_id + "'");
        }
        if (t.crs != tiles.front().crs) {
            throw CrossCrsError("tile '" + t.tile_id + "' is in CRS " + std::to_string(t.crs) +
                                " but the catalog uses CRS " + std::to_string(tiles.front().crs));
        }
    }
}

OverlapGraph build_overlap_graph(const std::vector<TileRecord>& tiles, Timestamp min_dt,
                                 int patch_px) {
    validate_catalog(tiles);
    OverlapGraph g = OverlapGraph::from_tiles(tiles, patch_px);
    const std::size_t n = g.node_count();

    // Sweep over bbox.min_x to avoid testing every pair.
    std::vector<BoundingBox> boxes(n);
    for (std::size_t i = 0; i < n; ++i) boxes[i] = bbox(g.tile(i).footprint);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return boxes[a].min_x < boxes[b].min_x || (boxes[a].min_x == boxes[b].min_x && a < b);
    });

    std::vector<std::size_t> active;
    for (std::size_t oi : order) {
        const BoundingBox& bi = boxes[oi];
        std::erase_if(active, [&](std::size_t j) { return boxes[j].max_x <= bi.min_x; });
        for (std::size_t j : active) {
            const BoundingBox& bj = boxes[j];
            if (bj.max_y <= bi.min_y || bi.max_y <= bj.min_y) continue;
            const TileRecord& a = g.tile(oi);
            const TileRecord& b = g.tile(j);
            auto inter = intersect_convex(a.footprint, b.footprint);
            if (!inter) continue;
            g.add_contact(oi, j);
            if (inter->area() < kSliverArea) continue;
            const Timestamp dt = a.timestamp > b.timestamp ? a.timestamp - b.timestamp
                                                           : b.timestamp - a.timestamp;
            if (dt <= min_dt) continue;
            if (a.gsd != b.gsd) continue;
            if (!holds_window(*inter, lattice_for(a, patch_px))) continue;
            const double area = inter->area();
            g.add_edge(oi, j, OverlapEdge{std::move(*inter), area});
        }
        active.push_back(oi);
    }
    return g;
}

std::vector<std::vector<std::string>> connected_components(const OverlapGraph& g, Linkage linkage) {
    const std::size_t n = g.node_count();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::string>> out;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<std::size_t> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            out.back().push_back(g.tile(u).tile_id);
            const auto& nbrs = linkage == Linkage::edges ? g.neighbors(u) : g.contacts(u);
            for (std::size_t v : nbrs) {
                if (comp[v] < 0) {
                    comp[v] = id;
                    stack.push_back(v);
                }
            }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    // Nodes are visited in id order, so components are already ordered by first id.
    return out;
}

// ---------------------------------------------------------------------------
// Combinations

namespace {

struct Tuple {
    std::vector<std::size_t> members;  // sorted graph indices (= sorted ids)
    ConvexPolygon intersection;
    double area;
};

bool ranks_before(const Tuple& a, const Tuple& b) {
    if (a.area != b.area) return a.area > b.area;
    return a.members < b.members;
}

void retain(std::vector<Tuple>& level, std::size_t beam) {
    std::sort(level.begin(), level.end(), ranks_before);
    if (beam > 0 && level.size() > beam) level.erase(level.begin() + static_cast<std::ptrdiff_t>(beam), level.end());
}

/// Tiles adjacent to every member and not already in the tuple.
std::vector<std::size_t> common_neighbors(const OverlapGraph& g, const std::vector<std::size_t>& members) {
    std::vector<std::size_t> acc = g.neighbors(members.front());
    std::vector<std::size_t> tmp;
    for (std::size_t k = 1; k < members.size() && !acc.empty(); ++k) {
        const auto& nb = g.neighbors(members[k]);
        tmp.clear();
        std::set_intersection(acc.begin(), acc.end(), nb.begin(), nb.end(), std::back_inserter(tmp));
        acc.swap(tmp);
    }
    std::erase_if(acc, [&](std::size_t x) {
        return std::binary_search(members.begin(), members.end(), x);
    });
    return acc;
}

Combination to_combination(const OverlapGraph& g, const Tuple& t) {
    std::vector<std::string> ids;
    ids.reserve(t.members.size());
    for (std::size_t m : t.members) ids.push_back(g.tile(m).tile_id);
    return Combination{std::move(ids), t.intersection, t.area};
}

}  // namespace

std::vector<Combination> build_combinations(const std::string& tile_id, const OverlapGraph& g,
                                            std::size_t beam, int max_order, CombinationMemo* memo) {
    if (max_order < 2) throw ValidationError("max_order must be >= 2");
    const auto seed = g.index_of(tile_id);
    if (!seed) throw NotFoundError("tile '" + tile_id + "' is not in the overlap graph");

    CombinationMemo local_memo;
    CombinationMemo& cache = memo ? *memo : local_memo;

    std::vector<Tuple> level;
    for (std::size_t nb : g.neighbors(*seed)) {
        const OverlapEdge* e = g.edge(*seed, nb);
        std::vector<std::size_t> members{std::min(*seed, nb), std::max(*seed, nb)};
        cache.try_emplace(members, e->intersection);
        level.push_back(Tuple{std::move(members), e->intersection, e->area});
    }
    std::sort(level.begin(), level.end(), ranks_before);

    std::vector<Combination> out;
    for (const auto& t : level) out.push_back(to_combination(g, t));

    for (int n = 3; n <= max_order && !level.empty(); ++n) {
        std::vector<Tuple> next;
        std::set<std::vector<std::size_t>> seen;
        for (const Tuple& parent : level) {
            for (std::size_t x : common_neighbors(g, parent.members)) {
                std::vector<std::size_t> members = parent.members;
                members.insert(std::upper_bound(members.begin(), members.end(), x), x);
                if (!seen.insert(members).second) continue;

                auto it = cache.find(members);
                if (it == cache.end()) {
                    const TileRecord& tx = g.tile(x);
                    std::optional<ConvexPolygon> inter =
                        intersect_convex(parent.intersection, tx.footprint, kSliverArea);
                    if (inter && !holds_window(*inter, lattice_for(tx, g.patch_px()))) inter.reset();
                    it = cache.emplace(members, std::move(inter)).first;
                }
                if (!it->second) continue;
                const double area = it->second->area();
                next.push_back(Tuple{std::move(members), *it->second, area});
            }
        }
        if (next.empty()) break;
        retain(next, beam);
        for (const auto& t : next) out.push_back(to_combination(g, t));
        level = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Curation driver

ManifestSummary summarize(const std::vector<PatchRecord>& records) {
    ManifestSummary s;
    s.locations = records.size();
    for (const auto& r : records) {
        s.patches += r.members.size();
        if (r.members.size() >= 2) ++s.multitemporal;
    }
    return s;
}

namespace {

PatchMember member_for(const TileRecord& t, const PatchWindow& w) {
    const RasterGrid grid = effective_grid(t);
    const std::int64_t col = w.ix - grid.origin_col;
    const std::int64_t row = grid.origin_row - (w.iy + w.size_px);
    if (col < 0 || row < 0 || col + w.size_px > grid.width || row + w.size_px > grid.height) {
        throw ValidationError("tile '" + t.tile_id + "': raster grid does not cover window " +
                              assign_location_id(w));
    }
    return PatchMember{t.tile_id, t.timestamp, row, col};
}

struct ComponentResult {
    std::vector<PatchRecord> records;
    std::size_t combinations = 0;
};

ComponentResult curate_component(const OverlapGraph& g, const std::vector<std::string>& component,
                                 const CurationConfig& cfg) {
    ComponentResult result;
    CombinationMemo memo;
    std::map<std::vector<std::string>, Combination> unique;
    for (const auto& seed : component) {
        for (auto& c : build_combinations(seed, g, cfg.beam, cfg.max_order, &memo)) {
            unique.try_emplace(c.tiles, std::move(c));
        }
    }
    std::vector<Combination> combos;
    combos.reserve(unique.size());
    for (auto& [key, c] : unique) combos.push_back(std::move(c));
    // Longest time series claim space first.
    std::stable_sort(combos.begin(), combos.end(), [](const Combination& a, const Combination& b) {
        if (a.order() != b.order()) return a.order() > b.order();
        if (a.area != b.area) return a.area > b.area;
        return a.tiles < b.tiles;
    });
    result.combinations = combos.size();

    SpatialIndex index;
    auto emit = [&](const std::vector<const TileRecord*>& members, const std::vector<PatchWindow>& windows) {
        for (const auto& w : windows) {
            PatchRecord r;
            r.location_id = assign_location_id(w);
            r.window = w;
            for (const TileRecord* t : members) {
                if (!contains_window(t->footprint, w)) {
                    throw ConsistencyError("window " + r.location_id + " escapes tile '" + t->tile_id + "'");
                }
                r.members.push_back(member_for(*t, w));
            }
            result.records.push_back(std::move(r));
        }
    };

    for (const auto& c : combos) {
        std::vector<const TileRecord*> members;
        for (const auto& id : c.tiles) members.push_back(&g.tile(*g.index_of(id)));
        std::sort(members.begin(), members.end(), [](const TileRecord* a, const TileRecord* b) {
            return a->timestamp < b->timestamp;
        });
        const auto windows = patchify(c.intersection, lattice_for(*members.front(), cfg.patch_px), index);
        index.commit(windows);
        emit(members, windows);
    }
    // Residual single-timestamp pass.
    for (const auto& id : component) {
        const TileRecord& t = g.tile(*g.index_of(id));
        const auto windows = patchify(t.footprint, lattice_for(t, cfg.patch_px), index);
        index.commit(windows);
        emit({&t}, windows);
    }
    return result;
}

}  // namespace

PatchManifest curate(const std::vector<TileRecord>& tiles, const CurationConfig& cfg) {
    cfg.validate();
    PatchManifest manifest;
    if (tiles.empty()) return manifest;

    const OverlapGraph g = build_overlap_graph(tiles, cfg.min_dt_seconds, cfg.patch_px);
    const auto components = connected_components(g, Linkage::contacts);
    manifest.components = components.size();

    // Schedule big components first; results land in per-component slots.
    std::vector<std::size_t> schedule(components.size());
    std::iota(schedule.begin(), schedule.end(), 0);
    std::stable_sort(schedule.begin(), schedule.end(), [&](std::size_t a, std::size_t b) {
        return components[a].size() > components[b].size();
    });

    std::vector<ComponentResult> results(components.size());
    std::vector<std::exception_ptr> errors(components.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= schedule.size()) return;
            const std::size_t c = schedule[k];
            try {
                results[c] = curate_component(g, components[c], cfg);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.worker_count), components.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    }

    for (std::size_t c = 0; c < components.size(); ++c) {
        if (!errors[c]) continue;
        try {
            std::rethrow_exception(errors[c]);
        } catch (const Error& e) {
            const std::string ctx = "component starting at tile '" + components[c].front() + "': ";
            if (e.code() == ExitCode::internal) throw ConsistencyError(ctx + e.what());
            if (e.code() == ExitCode::io) throw IoError(ctx + e.what());
            throw ValidationError(ctx + e.what());
        }
    }

    for (auto& r : results) {
        manifest.combinations += r.combinations;
        manifest.records.insert(manifest.records.end(), std::make_move_iterator(r.records.begin()),
                                std::make_move_iterator(r.records.end()));
    }
    sort_records(manifest.records);
    for (std::size_t i = 1; i < manifest.records.size(); ++i) {
        if (manifest.records[i].location_id == manifest.records[i - 1].location_id) {
            throw ConsistencyError("location " + manifest.records[i].location_id + " emitted twice");
        }
    }
    manifest.summary = summarize(manifest.records);
    return manifest;
}

}  // namespace hypercurate
