#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypercurate {

// Planar geometry in a projected CRS. All lengths are meters.

/// Vertices closer than this are merged.
inline constexpr double kVertexMergeTol = 1e-6;
/// Turning angles below this (radians) are treated as collinear.
inline constexpr double kCollinearAngleTol = 1e-9;
/// Closed-containment slack for point/half-plane tests.
inline constexpr double kLinearTol = 1e-6;
/// Polygons below this area cannot be represented.
inline constexpr double kDegenerateArea = 1e-9;
/// Intersections smaller than this are slivers and count as empty during curation.
inline constexpr double kSliverArea = 1.0;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct BoundingBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    bool contains(const BoundingBox& other, double tol = 0.0) const;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// True when the open interiors of two boxes intersect (shared edges do not count).
bool interiors_overlap(const BoundingBox& a, const BoundingBox& b, double tol = kLinearTol);

/// Convex, counter-clockwise polygon without a repeated closing vertex.
///
/// Instances are only produced through `make` / `try_make`, which normalise
/// orientation, merge near-duplicate vertices, drop collinear vertices and
/// reject non-convex or degenerate input.
class ConvexPolygon {
public:
    /// Throws DegenerateGeometryError for collapsed input and ValidationError
    /// for non-convex or self-intersecting rings.
    static ConvexPolygon make(std::vector<Point2> ring, int crs = 0);
    /// Like `make` but returns nullopt instead of throwing.
    static std::optional<ConvexPolygon> try_make(std::vector<Point2> ring, int crs = 0);

    static ConvexPolygon rectangle(double min_x, double min_y, double max_x, double max_y,
                                   int crs = 0);

    const std::vector<Point2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    int crs() const { return crs_; }
    double area() const { return area_; }

private:
    ConvexPolygon(std::vector<Point2> v, int crs, double area)
        : vertices_(std::move(v)), crs_(crs), area_(area) {}

    std::vector<Point2> vertices_;
    int crs_ = 0;
    double area_ = 0.0;
};

/// A lattice-aligned square patch window. The origin is the lower-left
/// corner at (ix * gsd, iy * gsd).
struct PatchWindow {
    int crs = 0;
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    int size_px = 128;
    double gsd = 30.0;

    Point2 origin() const { return {static_cast<double>(ix) * gsd, static_cast<double>(iy) * gsd}; }
    double side() const { return size_px * gsd; }
    BoundingBox box() const;

    friend bool operator==(const PatchWindow&, const PatchWindow&) = default;
};

/// Shoelace signed area of an arbitrary ring (positive when counter-clockwise).
double signed_area(std::span<const Point2> ring);

double polygon_area(const ConvexPolygon& p);

/// Exact convex intersection. Returns nullopt when interiors do not meet or
/// the result is smaller than `min_area`.
std::optional<ConvexPolygon> intersect_convex(const ConvexPolygon& a, const ConvexPolygon& b,
                                              double min_area = 0.0);

BoundingBox bbox(const ConvexPolygon& p);

/// Closed containment: boundary points count as inside.
bool contains_point(const ConvexPolygon& p, const Point2& q, double tol = kLinearTol);

/// True iff all four window corners lie inside or on the boundary of `p`.
bool contains_window(const ConvexPolygon& p, const PatchWindow& w);

/// `POLYGON((x y, ...))` with an explicit closing vertex.
std::string to_wkt(const ConvexPolygon& p);
ConvexPolygon parse_wkt(std::string_view wkt, int crs = 0);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace hypercurate
