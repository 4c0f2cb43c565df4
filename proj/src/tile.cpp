#include "hypercurate/tile.hpp"

#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "hypercurate/errors.hpp"

namespace hypercurate {

namespace {

int parse_digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) throw ValidationError("truncated timestamp '" + std::string(s) + "'");
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') {
            throw ValidationError("malformed timestamp '" + std::string(s) + "'");
        }
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

void expect_char(std::string_view s, std::size_t pos, char c) {
    if (pos >= s.size() || s[pos] != c) {
        throw ValidationError("malformed timestamp '" + std::string(s) + "'");
    }
}

}  // namespace

Timestamp parse_iso8601(std::string_view s) {
    using namespace std::chrono;
    const int yr = parse_digits(s, 0, 4);
    expect_char(s, 4, '-');
    const int mo = parse_digits(s, 5, 2);
    expect_char(s, 7, '-');
    const int dy = parse_digits(s, 8, 2);
    if (s.size() <= 10 || (s[10] != 'T' && s[10] != ' ')) {
        throw ValidationError("malformed timestamp '" + std::string(s) + "'");
    }
    const int hh = parse_digits(s, 11, 2);
    expect_char(s, 13, ':');
    const int mm = parse_digits(s, 14, 2);
    expect_char(s, 16, ':');
    const int ss = parse_digits(s, 17, 2);
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
    const std::string_view zone = s.substr(pos);
    if (zone != "Z" && zone != "+00:00") {
        throw ValidationError("timestamp '" + std::string(s) + "' is not UTC");
    }
    const year_month_day ymd{year{yr}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(dy)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
        throw ValidationError("invalid calendar timestamp '" + std::string(s) + "'");
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    Timestamp days = t / kSecondsPerDay;
    Timestamp rem = t % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

int month_of(Timestamp t) {
    using namespace std::chrono;
    Timestamp days = t / kSecondsPerDay;
    if (t % kSecondsPerDay < 0) --days;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

bool is_valid_tile_id(std::string_view id) {
    if (id.empty()) return false;
    for (char c : id) {
        if (c == ':' || c == ',' || c == '[' || c == ']' || c == '"' ||
            std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

void validate_tile(const TileRecord& t) {
    auto fail = [&](const std::string& why) {
        throw ValidationError("tile '" + t.tile_id + "': " + why);
    };
    if (!is_valid_tile_id(t.tile_id)) fail("invalid tile_id");
    if (!(t.cloud_fraction >= 0.0 && t.cloud_fraction <= 1.0)) fail("cloud_fraction outside [0,1]");
    if (!(t.gsd > 0.0) || !std::isfinite(t.gsd)) fail("gsd must be positive");
    if (t.band_count < 1) fail("band_count must be >= 1");
    if (t.footprint.crs() != t.crs) fail("footprint CRS differs from tile CRS");
    if (t.grid && (t.grid->width < 1 || t.grid->height < 1)) fail("raster grid is empty");
}

std::optional<std::int64_t> lattice_index(double v, double gsd) {
    const double q = v / gsd;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-6) return std::nullopt;
    return static_cast<std::int64_t>(r);
}

RasterGrid effective_grid(const TileRecord& t) {
    if (t.grid) return *t.grid;
    const BoundingBox b = bbox(t.footprint);
    // Snap with a small slack so coordinates already on the lattice stay put.
    const auto c0 = static_cast<std::int64_t>(std::floor(b.min_x / t.gsd + 1e-6));
    const auto c1 = static_cast<std::int64_t>(std::ceil(b.max_x / t.gsd - 1e-6));
    const auto r0 = static_cast<std::int64_t>(std::floor(b.min_y / t.gsd + 1e-6));
    const auto r1 = static_cast<std::int64_t>(std::ceil(b.max_y / t.gsd - 1e-6));
    return {c0, r1, std::max<std::int64_t>(1, c1 - c0), std::max<std::int64_t>(1, r1 - r0)};
}

}  // namespace hypercurate
