#include "hypercurate/patch_index.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "hypercurate/errors.hpp"

namespace hypercurate {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using Entry = std::pair<BBox, std::size_t>;
using Tree = bgi::rtree<Entry, bgi::rstar<16>>;

BBox to_bbox(const BoundingBox& b) { return BBox(BPoint(b.min_x, b.min_y), BPoint(b.max_x, b.max_y)); }

BoundingBox from_bbox(const BBox& b) {
    return {b.min_corner().get<0>(), b.min_corner().get<1>(), b.max_corner().get<0>(),
            b.max_corner().get<1>()};
}

}  // namespace

struct SpatialIndex::Impl {
    Tree tree;
    std::vector<std::string> ids;
    std::vector<BoundingBox> boxes;
    std::unordered_map<std::string, std::size_t> by_id;

    template <typename Fn>
    void visit_overlaps(const BoundingBox& box, Fn&& fn) const {
        for (auto it = tree.qbegin(bgi::intersects(to_bbox(box))); it != tree.qend(); ++it) {
            if (interiors_overlap(from_bbox(it->first), box)) fn(it->second);
        }
    }
};

SpatialIndex::SpatialIndex() : impl_(std::make_unique<Impl>()) {}
SpatialIndex::~SpatialIndex() = default;
SpatialIndex::SpatialIndex(SpatialIndex&&) noexcept = default;
SpatialIndex& SpatialIndex::operator=(SpatialIndex&&) noexcept = default;
SpatialIndex::SpatialIndex(const SpatialIndex& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
SpatialIndex& SpatialIndex::operator=(const SpatialIndex& o) {
    if (this != &o) impl_ = std::make_unique<Impl>(*o.impl_);
    return *this;
}

std::vector<std::string> SpatialIndex::query_overlap(const BoundingBox& box) const {
    std::vector<std::string> out;
    impl_->visit_overlaps(box, [&](std::size_t i) { out.push_back(impl_->ids[i]); });
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<BoundingBox> SpatialIndex::overlapping_boxes(const BoundingBox& box) const {
    std::vector<BoundingBox> out;
    impl_->visit_overlaps(box, [&](std::size_t i) { out.push_back(impl_->boxes[i]); });
    return out;
}

bool SpatialIndex::any_overlap(const BoundingBox& box) const {
    bool hit = false;
    impl_->visit_overlaps(box, [&](std::size_t) { hit = true; });
    return hit;
}

bool SpatialIndex::contains_id(std::string_view location_id) const {
    return impl_->by_id.count(std::string(location_id)) > 0;
}

std::size_t SpatialIndex::size() const { return impl_->ids.size(); }

void SpatialIndex::commit(const std::vector<PatchWindow>& windows) {
    // Validate the whole batch before touching the tree.
    Tree batch;
    std::vector<std::size_t> fresh;
    std::vector<std::string> ids;
    ids.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        std::string id = assign_location_id(w);
        const BoundingBox box = w.box();
        if (auto it = impl_->by_id.find(id); it != impl_->by_id.end()) {
            ids.push_back(std::move(id));
            continue;
        }
        if (any_overlap(box)) {
            throw ConsistencyError("window " + id + " overlaps a committed window (" +
                                   query_overlap(box).front() + ")");
        }
        for (auto it = batch.qbegin(bgi::intersects(to_bbox(box))); it != batch.qend(); ++it) {
            if (interiors_overlap(from_bbox(it->first), box)) {
                throw ConsistencyError("window " + id + " overlaps window " + ids[it->second] +
                                       " in the same batch");
            }
        }
        batch.insert({to_bbox(box), i});
        fresh.push_back(i);
        ids.push_back(std::move(id));
    }
    for (std::size_t i : fresh) {
        const std::size_t slot = impl_->ids.size();
        const BoundingBox box = windows[i].box();
        impl_->ids.push_back(ids[i]);
        impl_->boxes.push_back(box);
        impl_->by_id.emplace(ids[i], slot);
        impl_->tree.insert({to_bbox(box), slot});
    }
}

void commit(SpatialIndex& index, const std::vector<PatchWindow>& windows) { index.commit(windows); }

std::vector<std::string> query_overlap(const SpatialIndex& index, const BoundingBox& box) {
    return index.query_overlap(box);
}

namespace {

struct Interval {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool empty() const { return lo > hi; }
};

/// Horizontal chord of a convex polygon at northing y.
Interval chord_at(const ConvexPolygon& p, const BoundingBox& b, double y) {
    Interval out;
    if (y < b.min_y - kLinearTol || y > b.max_y + kLinearTol) return out;
    y = std::clamp(y, b.min_y, b.max_y);
    const auto& v = p.vertices();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = v[i];
        const Point2& c = v[(i + 1) % n];
        if ((a.y - y) * (c.y - y) > 0.0) continue;
        if (std::abs(c.y - a.y) < 1e-12) {
            out.lo = std::min({out.lo, a.x, c.x});
            out.hi = std::max({out.hi, a.x, c.x});
        } else {
            const double x = a.x + (y - a.y) * (c.x - a.x) / (c.y - a.y);
            out.lo = std::min(out.lo, x);
            out.hi = std::max(out.hi, x);
        }
    }
    return out;
}

struct RowScan {
    std::int64_t iy_min = 0;
    std::int64_t iy_max = -1;
};

RowScan row_range(const BoundingBox& b, const Lattice& lat) {
    const double side = lat.size_px * lat.gsd;
    RowScan r;
    r.iy_min = static_cast<std::int64_t>(std::ceil((b.min_y - kLinearTol) / lat.gsd));
    r.iy_max = static_cast<std::int64_t>(std::floor((b.max_y - side + kLinearTol) / lat.gsd));
    return r;
}

/// Candidate column range for a row, generous by one pixel on each side;
/// candidates are confirmed with contains_window.
bool column_range(const ConvexPolygon& region, const BoundingBox& b, const Lattice& lat,
                  std::int64_t iy, std::int64_t& ix_min, std::int64_t& ix_max) {
    const double side = lat.size_px * lat.gsd;
    const double y0 = static_cast<double>(iy) * lat.gsd;
    const Interval c0 = chord_at(region, b, y0);
    const Interval c1 = chord_at(region, b, y0 + side);
    if (c0.empty() || c1.empty()) return false;
    const double lo = std::max(c0.lo, c1.lo) - lat.gsd;
    const double hi = std::min(c0.hi, c1.hi) + lat.gsd;
    if (hi - lo < side) return false;
    ix_min = static_cast<std::int64_t>(std::ceil(lo / lat.gsd));
    ix_max = static_cast<std::int64_t>(std::floor((hi - side) / lat.gsd));
    return ix_min <= ix_max;
}

PatchWindow window_at(const Lattice& lat, std::int64_t ix, std::int64_t iy) {
    return PatchWindow{lat.crs, ix, iy, lat.size_px, lat.gsd};
}

}  // namespace

bool holds_window(const ConvexPolygon& region, const Lattice& lattice) {
    const BoundingBox b = bbox(region);
    const RowScan rows = row_range(b, lattice);
    for (std::int64_t iy = rows.iy_min; iy <= rows.iy_max; ++iy) {
        std::int64_t lo = 0, hi = -1;
        if (!column_range(region, b, lattice, iy, lo, hi)) continue;
        for (std::int64_t ix = lo; ix <= hi; ++ix) {
            if (contains_window(region, window_at(lattice, ix, iy))) return true;
        }
    }
    return false;
}

std::vector<PatchWindow> patchify(const ConvexPolygon& region, const Lattice& lattice,
                                  const SpatialIndex& index) {
    std::vector<PatchWindow> placed;
    const BoundingBox b = bbox(region);
    const RowScan rows = row_range(b, lattice);
    const double side = lattice.size_px * lattice.gsd;
    Tree local;

    std::vector<BoundingBox> blockers;
    for (std::int64_t iy = rows.iy_min; iy <= rows.iy_max; ++iy) {
        std::int64_t ix_lo = 0, ix_hi = -1;
        if (!column_range(region, b, lattice, iy, ix_lo, ix_hi)) continue;
        const double y0 = static_cast<double>(iy) * lattice.gsd;
        const BoundingBox band{static_cast<double>(ix_lo) * lattice.gsd, y0,
                               static_cast<double>(ix_hi) * lattice.gsd + side, y0 + side};

        blockers = index.overlapping_boxes(band);
        for (auto it = local.qbegin(bgi::intersects(to_bbox(band))); it != local.qend(); ++it) {
            const BoundingBox lb = from_bbox(it->first);
            if (interiors_overlap(lb, band)) blockers.push_back(lb);
        }
        std::sort(blockers.begin(), blockers.end(),
                  [](const BoundingBox& l, const BoundingBox& r) { return l.min_x < r.min_x; });

        std::int64_t ix = ix_lo;
        while (ix <= ix_hi) {
            const double x0 = static_cast<double>(ix) * lattice.gsd;
            double blocked_until = -std::numeric_limits<double>::infinity();
            for (const auto& blk : blockers) {
                if (blk.min_x >= x0 + side - kLinearTol) break;
                if (blk.max_x > x0 + kLinearTol) blocked_until = std::max(blocked_until, blk.max_x);
            }
            if (std::isfinite(blocked_until)) {
                const auto next =
                    static_cast<std::int64_t>(std::ceil((blocked_until - kLinearTol) / lattice.gsd));
                ix = std::max(ix + 1, next);
                continue;
            }
            const PatchWindow w = window_at(lattice, ix, iy);
            if (!contains_window(region, w)) {
                ++ix;
                continue;
            }
            placed.push_back(w);
            const BoundingBox wb = w.box();
            local.insert({to_bbox(wb), placed.size() - 1});
            blockers.insert(std::upper_bound(blockers.begin(), blockers.end(), wb,
                                             [](const BoundingBox& l, const BoundingBox& r) {
                                                 return l.min_x < r.min_x;
                                             }),
                            wb);
            ix += lattice.size_px;
        }
    }
    return placed;
}

// ---------------------------------------------------------------------------
// Location ids and manifest lines

std::string assign_location_id(const PatchWindow& w) {
    std::string s = std::to_string(w.crs);
    s += '_';
    s += std::to_string(w.ix);
    s += '_';
    s += std::to_string(w.iy);
    s += '_';
    s += std::to_string(w.size_px);
    s += '_';
    s += format_double(w.gsd);
    return s;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_num(std::string_view s, const char* what) {
    T v{};
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError(std::string("invalid ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

PatchWindow parse_location_id(std::string_view id) {
    const auto parts = split(id, '_');
    if (parts.size() != 5) throw ValidationError("malformed location id '" + std::string(id) + "'");
    PatchWindow w;
    w.crs = parse_num<int>(parts[0], "crs");
    w.ix = parse_num<std::int64_t>(parts[1], "lattice column");
    w.iy = parse_num<std::int64_t>(parts[2], "lattice row");
    w.size_px = parse_num<int>(parts[3], "size_px");
    w.gsd = parse_num<double>(parts[4], "gsd");
    if (w.size_px < 1 || !(w.gsd > 0)) {
        throw ValidationError("malformed location id '" + std::string(id) + "'");
    }
    return w;
}

std::string format_manifest_line(const PatchRecord& r) {
    const Point2 o = r.window.origin();
    std::string s = r.location_id;
    s += '\t';
    s += std::to_string(r.window.crs);
    s += '\t';
    s += format_double(o.x);
    s += '\t';
    s += format_double(o.y);
    s += '\t';
    s += std::to_string(r.window.size_px);
    s += '\t';
    s += format_double(r.window.gsd);
    s += "\t[";
    for (std::size_t i = 0; i < r.members.size(); ++i) {
        const auto& m = r.members[i];
        if (i) s += ", ";
        s += m.tile_id;
        s += ':';
        s += std::to_string(m.timestamp);
        s += ':';
        s += std::to_string(m.row);
        s += ':';
        s += std::to_string(m.col);
    }
    s += ']';
    return s;
}

PatchRecord parse_manifest_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto cols = split(line, '\t');
    if (cols.size() != 7) {
        throw ValidationError("expected 7 tab-separated columns, found " +
                              std::to_string(cols.size()));
    }
    PatchRecord r;
    r.location_id = std::string(trim(cols[0]));
    r.window.crs = parse_num<int>(cols[1], "crs");
    const double ox = parse_num<double>(cols[2], "origin_x");
    const double oy = parse_num<double>(cols[3], "origin_y");
    r.window.size_px = parse_num<int>(cols[4], "size_px");
    r.window.gsd = parse_num<double>(cols[5], "gsd");
    if (r.window.size_px < 1 || !(r.window.gsd > 0)) throw ValidationError("invalid window size or gsd");
    const auto ix = lattice_index(ox, r.window.gsd);
    const auto iy = lattice_index(oy, r.window.gsd);
    if (!ix || !iy) throw ValidationError("window origin is not aligned to the gsd lattice");
    r.window.ix = *ix;
    r.window.iy = *iy;
    if (parse_location_id(r.location_id) != r.window) {
        throw ValidationError("location id '" + r.location_id + "' does not match its window");
    }

    std::string_view list = trim(cols[6]);
    if (list.size() < 2 || list.front() != '[' || list.back() != ']') {
        throw ValidationError("member list must be enclosed in brackets");
    }
    list = trim(list.substr(1, list.size() - 2));
    if (list.empty()) throw ValidationError("record has no members");
    for (std::string_view item : split(list, ',')) {
        const auto f = split(trim(item), ':');
        if (f.size() != 4) throw ValidationError("member '" + std::string(item) + "' is not tile:timestamp:row:col");
        PatchMember m;
        m.tile_id = std::string(trim(f[0]));
        if (!is_valid_tile_id(m.tile_id)) throw ValidationError("invalid tile id '" + m.tile_id + "'");
        m.timestamp = parse_num<Timestamp>(f[1], "timestamp");
        m.row = parse_num<std::int64_t>(f[2], "row");
        m.col = parse_num<std::int64_t>(f[3], "col");
        if (!r.members.empty() && m.timestamp <= r.members.back().timestamp) {
            throw ValidationError("member timestamps are not strictly increasing");
        }
        r.members.push_back(std::move(m));
    }
    return r;
}

std::string format_manifest(const std::vector<PatchRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += format_manifest_line(r);
        out += '\n';
    }
    return out;
}

std::vector<PatchRecord> parse_manifest(std::string_view text) {
    std::vector<PatchRecord> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (trim(line).empty() || line.front() == '#') continue;
        try {
            out.push_back(parse_manifest_line(line));
        } catch (const ValidationError& e) {
            throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<PatchRecord> read_manifest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_manifest(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_manifest_file(const std::string& path, const std::vector<PatchRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest '" + path + "'");
    out << format_manifest(records);
    if (!out) throw IoError("write failed for '" + path + "'");
}

void sort_records(std::vector<PatchRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const PatchRecord& a, const PatchRecord& b) { return a.location_id < b.location_id; });
}

}  // namespace hypercurate
