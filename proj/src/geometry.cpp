#include "hypercurate/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>

#include "hypercurate/errors.hpp"

namespace hypercurate {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Signed angle turned when walking prev -> cur -> next.
double turn_angle(const Point2& prev, const Point2& cur, const Point2& next) {
    const double ux = cur.x - prev.x, uy = cur.y - prev.y;
    const double vx = next.x - cur.x, vy = next.y - cur.y;
    return std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
}

enum class RingStatus { ok, degenerate, non_convex, non_finite };

struct CleanRing {
    RingStatus status = RingStatus::ok;
    std::vector<Point2> ring;
    double area = 0.0;
};

void merge_close_vertices(std::vector<Point2>& ring) {
    std::vector<Point2> merged;
    merged.reserve(ring.size());
    for (const auto& p : ring) {
        if (merged.empty() || dist(merged.back(), p) >= kVertexMergeTol) merged.push_back(p);
    }
    while (merged.size() > 1 && dist(merged.front(), merged.back()) < kVertexMergeTol) {
        merged.pop_back();
    }
    ring = std::move(merged);
}

// strict: reject right turns. Lenient mode drops them as numerical noise,
// which is only used for clipper output built from convex inputs.
CleanRing clean_ring(std::vector<Point2> ring, bool strict) {
    CleanRing out;
    for (const auto& p : ring) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            out.status = RingStatus::non_finite;
            return out;
        }
    }
    merge_close_vertices(ring);
    if (ring.size() < 3) {
        out.status = RingStatus::degenerate;
        return out;
    }
    double area = signed_area(ring);
    if (std::abs(area) < kDegenerateArea) {
        out.status = RingStatus::degenerate;
        return out;
    }
    if (area < 0) std::reverse(ring.begin(), ring.end());

    bool changed = true;
    while (changed && ring.size() >= 3) {
        changed = false;
        const std::size_t n = ring.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& prev = ring[(i + n - 1) % n];
            const auto& next = ring[(i + 1) % n];
            const double a = turn_angle(prev, ring[i], next);
            const bool collinear = std::abs(a) < kCollinearAngleTol;
            if (collinear || (!strict && a < 0)) {
                ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
                merge_close_vertices(ring);
                changed = true;
                break;
            }
            if (a < 0) {
                out.status = RingStatus::non_convex;
                return out;
            }
        }
    }
    if (ring.size() < 3) {
        out.status = RingStatus::degenerate;
        return out;
    }
    // A convex simple ring turns exactly once around.
    double total = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        total += turn_angle(ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
    }
    if (std::abs(total - 2.0 * std::numbers::pi) > 1e-6) {
        out.status = RingStatus::non_convex;
        return out;
    }
    area = signed_area(ring);
    if (area < kDegenerateArea) {
        out.status = RingStatus::degenerate;
        return out;
    }
    out.ring = std::move(ring);
    out.area = area;
    return out;
}

}  // namespace

bool BoundingBox::contains(const BoundingBox& o, double tol) const {
    return o.min_x >= min_x - tol && o.min_y >= min_y - tol && o.max_x <= max_x + tol &&
           o.max_y <= max_y + tol;
}

bool interiors_overlap(const BoundingBox& a, const BoundingBox& b, double tol) {
    return a.min_x < b.max_x - tol && b.min_x < a.max_x - tol && a.min_y < b.max_y - tol &&
           b.min_y < a.max_y - tol;
}

ConvexPolygon ConvexPolygon::make(std::vector<Point2> ring, int crs) {
    auto cleaned = clean_ring(std::move(ring), /*strict=*/true);
    switch (cleaned.status) {
        case RingStatus::ok:
            return ConvexPolygon(std::move(cleaned.ring), crs, cleaned.area);
        case RingStatus::degenerate:
            throw DegenerateGeometryError("degenerate polygon: fewer than 3 distinct vertices or zero area");
        case RingStatus::non_convex:
            throw ValidationError("polygon is not convex or is self-intersecting");
        case RingStatus::non_finite:
            break;
    }
    throw ValidationError("polygon has non-finite coordinates");
}

std::optional<ConvexPolygon> ConvexPolygon::try_make(std::vector<Point2> ring, int crs) {
    auto cleaned = clean_ring(std::move(ring), /*strict=*/true);
    if (cleaned.status != RingStatus::ok) return std::nullopt;
    return ConvexPolygon(std::move(cleaned.ring), crs, cleaned.area);
}

ConvexPolygon ConvexPolygon::rectangle(double min_x, double min_y, double max_x, double max_y,
                                       int crs) {
    return make({{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}}, crs);
}

BoundingBox PatchWindow::box() const {
    const Point2 o = origin();
    return {o.x, o.y, o.x + side(), o.y + side()};
}

double signed_area(std::span<const Point2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    // Translate to the first vertex to limit cancellation at UTM magnitudes.
    const Point2 o = ring[0];
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        acc += cross(o, ring[i], ring[i + 1]);
    }
    return 0.5 * acc;
}

double polygon_area(const ConvexPolygon& p) {
    if (p.area() < kDegenerateArea) throw DegenerateGeometryError("polygon area below tolerance");
    return p.area();
}

std::optional<ConvexPolygon> intersect_convex(const ConvexPolygon& a, const ConvexPolygon& b,
                                              double min_area) {
    if (a.crs() != b.crs()) {
        throw CrossCrsError("cannot intersect polygons in CRS " + std::to_string(a.crs()) +
                            " and " + std::to_string(b.crs()));
    }
    const BoundingBox ba = bbox(a), bb = bbox(b);
    if (ba.max_x <= bb.min_x || bb.max_x <= ba.min_x || ba.max_y <= bb.min_y ||
        bb.max_y <= ba.min_y) {
        return std::nullopt;
    }

    // Sutherland-Hodgman: clip a against every edge of b (closed half-planes).
    std::vector<Point2> out = a.vertices();
    std::vector<Point2> in;
    const auto& clip = b.vertices();
    const std::size_t m = clip.size();
    for (std::size_t e = 0; e < m && !out.empty(); ++e) {
        const Point2& p = clip[e];
        const Point2& q = clip[(e + 1) % m];
        const double len = dist(p, q);
        auto side = [&](const Point2& v) { return cross(p, q, v) / len; };

        in.swap(out);
        out.clear();
        const std::size_t n = in.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2& cur = in[i];
            const Point2& prev = in[(i + n - 1) % n];
            const double dc = side(cur);
            const double dp = side(prev);
            const bool cur_in = dc >= 0.0;
            const bool prev_in = dp >= 0.0;
            if (cur_in != prev_in) {
                const double t = std::clamp(dp / (dp - dc), 0.0, 1.0);
                out.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
            }
            if (cur_in) out.push_back(cur);
        }
    }
    if (out.size() < 3) return std::nullopt;
    auto cleaned = clean_ring(std::move(out), /*strict=*/false);
    if (cleaned.status != RingStatus::ok) return std::nullopt;
    if (cleaned.area < std::max(min_area, kDegenerateArea)) return std::nullopt;
    return ConvexPolygon::try_make(std::move(cleaned.ring), a.crs());
}

BoundingBox bbox(const ConvexPolygon& p) {
    const auto& v = p.vertices();
    BoundingBox b{v[0].x, v[0].y, v[0].x, v[0].y};
    for (const auto& q : v) {
        b.min_x = std::min(b.min_x, q.x);
        b.min_y = std::min(b.min_y, q.y);
        b.max_x = std::max(b.max_x, q.x);
        b.max_y = std::max(b.max_y, q.y);
    }
    return b;
}

bool contains_point(const ConvexPolygon& p, const Point2& q, double tol) {
    const auto& v = p.vertices();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % n];
        if (cross(a, b, q) / dist(a, b) < -tol) return false;
    }
    return true;
}

bool contains_window(const ConvexPolygon& p, const PatchWindow& w) {
    const BoundingBox b = w.box();
    return contains_point(p, {b.min_x, b.min_y}) && contains_point(p, {b.max_x, b.min_y}) &&
           contains_point(p, {b.max_x, b.max_y}) && contains_point(p, {b.min_x, b.max_y});
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw ConsistencyError("failed to format double");
    return std::string(buf, end);
}

std::string to_wkt(const ConvexPolygon& p) {
    std::string s = "POLYGON((";
    const auto& v = p.vertices();
    for (std::size_t i = 0; i <= v.size(); ++i) {
        const auto& q = v[i % v.size()];
        if (i) s += ", ";
        s += format_double(q.x);
        s += ' ';
        s += format_double(q.y);
    }
    s += "))";
    return s;
}

namespace {

void skip_ws(std::string_view s, std::size_t& i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

void expect(std::string_view s, std::size_t& i, char c) {
    skip_ws(s, i);
    if (i >= s.size() || s[i] != c) {
        throw ValidationError("malformed WKT: expected '" + std::string(1, c) + "' at offset " +
                              std::to_string(i));
    }
    ++i;
}

double parse_number(std::string_view s, std::size_t& i) {
    skip_ws(s, i);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (ec != std::errc{}) {
        throw ValidationError("malformed WKT: expected number at offset " + std::to_string(i));
    }
    i = static_cast<std::size_t>(ptr - s.data());
    return v;
}

}  // namespace

ConvexPolygon parse_wkt(std::string_view wkt, int crs) {
    std::size_t i = 0;
    skip_ws(wkt, i);
    constexpr std::string_view kTag = "POLYGON";
    if (wkt.size() - i < kTag.size()) throw ValidationError("malformed WKT: missing POLYGON tag");
    for (std::size_t k = 0; k < kTag.size(); ++k) {
        if (std::toupper(static_cast<unsigned char>(wkt[i + k])) != kTag[k]) {
            throw ValidationError("malformed WKT: only POLYGON is supported");
        }
    }
    i += kTag.size();
    expect(wkt, i, '(');
    expect(wkt, i, '(');
    std::vector<Point2> ring;
    while (true) {
        const double x = parse_number(wkt, i);
        const double y = parse_number(wkt, i);
        ring.push_back({x, y});
        skip_ws(wkt, i);
        if (i < wkt.size() && wkt[i] == ',') {
            ++i;
            continue;
        }
        break;
    }
    expect(wkt, i, ')');
    skip_ws(wkt, i);
    if (i < wkt.size() && wkt[i] == ',') throw ValidationError("WKT polygons with holes are not supported");
    expect(wkt, i, ')');
    skip_ws(wkt, i);
    if (i != wkt.size()) throw ValidationError("malformed WKT: trailing characters");
    return ConvexPolygon::make(std::move(ring), crs);
}

}  // namespace hypercurate
