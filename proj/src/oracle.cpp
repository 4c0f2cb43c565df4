#include "hypercurate/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "hypercurate/errors.hpp"

namespace hypercurate::oracle {

namespace {

struct P {
    double x, y;
};

using Ring = std::vector<P>;

constexpr double kTol = 1e-6;

double orient(const P& o, const P& a, const P& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

Ring ring_of(const TileRecord& t) {
    Ring r;
    for (const auto& v : t.footprint.vertices()) r.push_back({v.x, v.y});
    return r;
}

double ring_area(const Ring& r) {
    double a = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const P& p = r[i];
        const P& q = r[(i + 1) % r.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

bool inside(const Ring& r, const P& p, double tol) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        const P& a = r[i];
        const P& b = r[(i + 1) % r.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (orient(a, b, p) < -tol * len) return false;
    }
    return true;
}

/// Andrew's monotone chain; drops collinear points.
Ring hull(std::vector<P> pts) {
    std::sort(pts.begin(), pts.end(), [](const P& a, const P& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    if (pts.size() < 3) return {};
    Ring h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && orient(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && orient(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

/// Convex intersection as the hull of mutually-contained vertices and edge crossings.
Ring intersect(const Ring& a, const Ring& b) {
    std::vector<P> pts;
    for (const P& p : a) {
        if (inside(b, p, 1e-9)) pts.push_back(p);
    }
    for (const P& p : b) {
        if (inside(a, p, 1e-9)) pts.push_back(p);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const P& p1 = a[i];
        const P& p2 = a[(i + 1) % a.size()];
        for (std::size_t j = 0; j < b.size(); ++j) {
            const P& q1 = b[j];
            const P& q2 = b[(j + 1) % b.size()];
            const double rx = p2.x - p1.x, ry = p2.y - p1.y;
            const double sx = q2.x - q1.x, sy = q2.y - q1.y;
            const double den = rx * sy - ry * sx;
            if (std::abs(den) < 1e-18) continue;
            const double t = ((q1.x - p1.x) * sy - (q1.y - p1.y) * sx) / den;
            const double u = ((q1.x - p1.x) * ry - (q1.y - p1.y) * rx) / den;
            if (t >= -1e-12 && t <= 1 + 1e-12 && u >= -1e-12 && u <= 1 + 1e-12) {
                pts.push_back({p1.x + t * rx, p1.y + t * ry});
            }
        }
    }
    Ring h = hull(std::move(pts));
    if (h.size() < 3 || ring_area(h) < 1e-9) return {};
    return h;
}

/// Clips a convex ring by the half-plane n.x * x + n.y * y <= c.
Ring clip_halfplane(const Ring& r, double nx, double ny, double c) {
    Ring out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const P& cur = r[i];
        const P& nxt = r[(i + 1) % r.size()];
        const double fc = nx * cur.x + ny * cur.y - c;
        const double fn = nx * nxt.x + ny * nxt.y - c;
        if (fc <= 0) out.push_back(cur);
        if ((fc < 0 && fn > 0) || (fc > 0 && fn < 0)) {
            const double t = fc / (fc - fn);
            out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
        }
    }
    return out;
}

/// A window of side s with lower-left corner o fits in r iff every corner
/// satisfies every edge constraint. The feasible set of o is the polygon
/// eroded by the square; search it for a lattice point.
bool patchable(const Ring& r, double gsd, int patch_px) {
    const double s = gsd * patch_px;
    double x0 = r[0].x, x1 = r[0].x, y0 = r[0].y, y1 = r[0].y;
    for (const P& p : r) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    if (x1 - x0 < s - 2 * kTol || y1 - y0 < s - 2 * kTol) return false;
    Ring region{{x0 - 1, y0 - 1}, {x1 + 1, y0 - 1}, {x1 + 1, y1 + 1}, {x0 - 1, y1 + 1}};
    const P corners[4] = {{0, 0}, {s, 0}, {s, s}, {0, s}};
    for (std::size_t i = 0; i < r.size() && region.size() >= 3; ++i) {
        const P& a = r[i];
        const P& b = r[(i + 1) % r.size()];
        const double dx = b.x - a.x, dy = b.y - a.y;
        const double len = std::hypot(dx, dy);
        // Inside means dx*(py-ay) - dy*(px-ax) >= -tol*len for p = o + corner.
        double worst = 1e300;
        for (const P& c : corners) worst = std::min(worst, dx * c.y - dy * c.x);
        // dy*ox - dx*oy <= tol*len + worst + dy*ax - dx*ay ... rearranged below.
        const double rhs = kTol * len + worst - dx * a.y + dy * a.x;
        region = clip_halfplane(region, dy, -dx, rhs);
    }
    if (region.size() < 3) {
        // Degenerate feasible set: test its points directly.
        for (const P& p : region) {
            const double ix = std::round(p.x / gsd), iy = std::round(p.y / gsd);
            if (std::abs(ix * gsd - p.x) < 1e-9 && std::abs(iy * gsd - p.y) < 1e-9) return true;
        }
        return false;
    }
    double ry0 = region[0].y, ry1 = region[0].y;
    for (const P& p : region) {
        ry0 = std::min(ry0, p.y);
        ry1 = std::max(ry1, p.y);
    }
    for (auto iy = static_cast<long long>(std::ceil(ry0 / gsd - 1e-9)); iy * gsd <= ry1 + 1e-9; ++iy) {
        const double y = static_cast<double>(iy) * gsd;
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < region.size(); ++i) {
            const P& a = region[i];
            const P& b = region[(i + 1) % region.size()];
            if (std::min(a.y, b.y) > y + 1e-9 || std::max(a.y, b.y) < y - 1e-9) continue;
            if (std::abs(b.y - a.y) < 1e-12) {
                lo = std::min({lo, a.x, b.x});
                hi = std::max({hi, a.x, b.x});
            } else {
                const double t = std::clamp((y - a.y) / (b.y - a.y), 0.0, 1.0);
                const double x = a.x + t * (b.x - a.x);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        if (lo > hi) continue;
        if (std::floor(hi / gsd + 1e-9) >= std::ceil(lo / gsd - 1e-9)) return true;
    }
    return false;
}

}  // namespace

std::vector<ReferenceCombination> exhaustive_combinations(const std::vector<TileRecord>& tiles, Timestamp min_dt,
                                                          int patch_px) {
    if (tiles.size() > kMaxExhaustiveTiles) {
        throw SizeLimitError("exhaustive enumeration is limited to " + std::to_string(kMaxExhaustiveTiles) +
                             " tiles, got " + std::to_string(tiles.size()));
    }
    std::vector<const TileRecord*> sorted;
    for (const auto& t : tiles) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(), [](const TileRecord* a, const TileRecord* b) { return a->tile_id < b->tile_id; });
    std::vector<Ring> rings;
    for (const auto* t : sorted) rings.push_back(ring_of(*t));

    std::vector<ReferenceCombination> out;
    const std::size_t n = sorted.size();
    // Plain enumeration of every subset mask.
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) < 2) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) members.push_back(i);
        }
        bool gated = true;
        for (std::size_t i = 0; i < members.size() && gated; ++i) {
            for (std::size_t j = i + 1; j < members.size() && gated; ++j) {
                const TileRecord& a = *sorted[members[i]];
                const TileRecord& b = *sorted[members[j]];
                const Timestamp dt = a.timestamp > b.timestamp ? a.timestamp - b.timestamp : b.timestamp - a.timestamp;
                gated = dt > min_dt && a.gsd == b.gsd;
            }
        }
        if (!gated) continue;
        Ring common = rings[members[0]];
        for (std::size_t i = 1; i < members.size() && !common.empty(); ++i) common = intersect(common, rings[members[i]]);
        if (common.empty() || ring_area(common) < 1.0) continue;
        if (!patchable(common, sorted[members[0]]->gsd, patch_px)) continue;
        ReferenceCombination c;
        for (std::size_t m : members) c.tiles.push_back(sorted[m]->tile_id);
        c.area = ring_area(common);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    return out;
}

OracleReport naive_overlap_check(const std::vector<PatchRecord>& records) {
    OracleReport rep;
    rep.checked_property = "no two same-CRS windows overlap in their interiors";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PatchWindow& a = records[i].window;
        const double ax0 = static_cast<double>(a.ix) * a.gsd, ay0 = static_cast<double>(a.iy) * a.gsd;
        const double ax1 = ax0 + a.size_px * a.gsd, ay1 = ay0 + a.size_px * a.gsd;
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            const PatchWindow& b = records[j].window;
            if (a.crs != b.crs) continue;
            const double bx0 = static_cast<double>(b.ix) * b.gsd, by0 = static_cast<double>(b.iy) * b.gsd;
            const double bx1 = bx0 + b.size_px * b.gsd, by1 = by0 + b.size_px * b.gsd;
            const double ox = std::min(ax1, bx1) - std::max(ax0, bx0);
            const double oy = std::min(ay1, by1) - std::max(ay0, by0);
            if (ox > kTol && oy > kTol) {
                rep.violations.push_back({{records[i].location_id, records[j].location_id},
                                          "interiors overlap by " + std::to_string(ox) + " x " + std::to_string(oy) + " m"});
            }
        }
    }
    return rep;
}

OracleReport containment_check(const std::vector<PatchRecord>& records, const std::vector<TileRecord>& tiles) {
    OracleReport rep;
    rep.checked_property = "every member tile footprint contains its window";
    std::map<std::string, const TileRecord*> by_id;
    for (const auto& t : tiles) by_id[t.tile_id] = &t;
    for (const auto& r : records) {
        const PatchWindow& w = r.window;
        const double x0 = static_cast<double>(w.ix) * w.gsd, y0 = static_cast<double>(w.iy) * w.gsd;
        const double s = w.size_px * w.gsd;
        const P corners[4] = {{x0, y0}, {x0 + s, y0}, {x0 + s, y0 + s}, {x0, y0 + s}};
        for (const auto& m : r.members) {
            auto it = by_id.find(m.tile_id);
            if (it == by_id.end()) {
                rep.violations.push_back({{r.location_id, m.tile_id}, "member tile not in catalog"});
                continue;
            }
            if (it->second->timestamp != m.timestamp) {
                rep.violations.push_back({{r.location_id, m.tile_id}, "member timestamp differs from catalog"});
            }
            const Ring ring = ring_of(*it->second);
            for (const P& c : corners) {
                if (!inside(ring, c, kTol)) {
                    rep.violations.push_back({{r.location_id, m.tile_id}, "window corner outside footprint"});
                    break;
                }
            }
        }
    }
    return rep;
}

OracleReport record_check(const std::vector<PatchRecord>& records) {
    OracleReport rep;
    rep.checked_property = "location ids unique; member timestamps strictly increasing";
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.location_id).second) rep.violations.push_back({{r.location_id}, "duplicate location id"});
        if (r.members.empty()) rep.violations.push_back({{r.location_id}, "record without members"});
        for (std::size_t i = 1; i < r.members.size(); ++i) {
            if (r.members[i].timestamp <= r.members[i - 1].timestamp) {
                rep.violations.push_back({{r.location_id}, "timestamps not strictly increasing"});
                break;
            }
        }
        const std::string expect = std::to_string(r.window.crs) + "_" + std::to_string(r.window.ix) + "_" +
                                   std::to_string(r.window.iy) + "_" + std::to_string(r.window.size_px) + "_";
        if (r.location_id.rfind(expect, 0) != 0) {
            rep.violations.push_back({{r.location_id}, "location id does not encode its window"});
        }
    }
    return rep;
}

ReferenceF1 naive_f1(const MultiLabelBatch& b) {
    ReferenceF1 out;
    double tp_all = 0, fp_all = 0, fn_all = 0;
    double macro = 0;
    int macro_n = 0;
    for (std::size_t k = 0; k < b.classes; ++k) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < b.samples; ++i) {
            const bool p = b.predictions[i * b.classes + k];
            const bool t = b.targets[i * b.classes + k];
            tp += p && t;
            fp += p && !t;
            fn += !p && t;
        }
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;
        if (tp + fp + fn > 0) {
            const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
            const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
            macro += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
            ++macro_n;
        }
    }
    const double p_all = tp_all + fp_all > 0 ? tp_all / (tp_all + fp_all) : 0.0;
    const double r_all = tp_all + fn_all > 0 ? tp_all / (tp_all + fn_all) : 0.0;
    if (tp_all + fp_all + fn_all == 0) {
        out.micro = 1.0;
    } else {
        out.micro = p_all + r_all > 0 ? 2 * p_all * r_all / (p_all + r_all) : 0.0;
    }
    out.macro = macro_n ? macro / macro_n : 1.0;
    return out;
}

double naive_miou(const MaskBatch& b) {
    double sum = 0;
    int present = 0;
    for (std::size_t k = 0; k < b.classes; ++k) {
        double inter = 0, uni = 0;
        for (std::size_t i = 0; i < b.targets.size(); ++i) {
            if (b.targets[i] == MaskBatch::kIgnore) continue;
            const bool t = b.targets[i] == k;
            const bool p = b.predictions[i] == k;
            inter += t && p;
            uni += t || p;
        }
        if (uni > 0) {
            sum += inter / uni;
            ++present;
        }
    }
    return present ? sum / present : 0.0;
}

ReferenceNmse naive_normalized_mse(const RegressionBatch& b) {
    ReferenceNmse out;
    for (std::size_t p = 0; p < b.params; ++p) {
        double se = 0, base = 0;
        for (std::size_t i = 0; i < b.samples; ++i) {
            const double t = b.targets[i * b.params + p];
            se += std::pow(b.predictions[i * b.params + p] - t, 2);
            base += std::pow(b.baseline_means[p] - t, 2);
        }
        out.sum_form += (se / b.samples) / (base / b.samples);
    }
    out.percent_form = out.sum_form * 100.0 / b.params;
    return out;
}

}  // namespace hypercurate::oracle
