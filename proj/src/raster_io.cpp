#include "hypercurate/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hypercurate/config.hpp"
#include "hypercurate/errors.hpp"
#include "hypercurate/patch_index.hpp"

namespace hypercurate {

namespace {

template <typename T>
void put_le(unsigned char* dst, T v) {
    unsigned char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(T));
    std::memcpy(dst, tmp, sizeof(T));
}

template <typename T>
T get_le(const unsigned char* src) {
    unsigned char tmp[sizeof(T)];
    std::memcpy(tmp, src, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(T));
    T v;
    std::memcpy(&v, tmp, sizeof(T));
    return v;
}

void encode_header(const RasterHeader& h, unsigned char* buf) {
    std::memset(buf, 0, kHsrcHeaderBytes);
    std::memcpy(buf, "HSRC", 4);
    put_le<std::uint16_t>(buf + 4, kHsrcVersion);
    put_le<std::uint16_t>(buf + 6, static_cast<std::uint16_t>(h.dtype));
    put_le<std::uint32_t>(buf + 8, h.bands);
    put_le<std::uint32_t>(buf + 12, h.height);
    put_le<std::uint32_t>(buf + 16, h.width);
    put_le<std::int32_t>(buf + 20, h.nodata);
    put_le<double>(buf + 24, h.gsd);
    put_le<double>(buf + 32, h.origin.x);
    put_le<double>(buf + 40, h.origin.y);
    put_le<std::uint32_t>(buf + 48, static_cast<std::uint32_t>(h.crs));
}

RasterHeader decode_header(const unsigned char* buf, const std::string& path) {
    if (std::memcmp(buf, "HSRC", 4) != 0) throw ValidationError(path + ": not an HSRC file (bad magic)");
    const auto version = get_le<std::uint16_t>(buf + 4);
    if (version != kHsrcVersion) {
        throw ValidationError(path + ": unsupported HSRC version " + std::to_string(version));
    }
    RasterHeader h;
    const auto dtype = get_le<std::uint16_t>(buf + 6);
    if (dtype != 1 && dtype != 2) {
        throw ValidationError(path + ": unknown dtype code " + std::to_string(dtype));
    }
    h.dtype = static_cast<SampleType>(dtype);
    h.bands = get_le<std::uint32_t>(buf + 8);
    h.height = get_le<std::uint32_t>(buf + 12);
    h.width = get_le<std::uint32_t>(buf + 16);
    h.nodata = get_le<std::int32_t>(buf + 20);
    h.gsd = get_le<double>(buf + 24);
    h.origin.x = get_le<double>(buf + 32);
    h.origin.y = get_le<double>(buf + 40);
    h.crs = static_cast<int>(get_le<std::uint32_t>(buf + 48));
    try {
        h.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return h;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

RasterHeader read_header_from(std::ifstream& in, const std::string& path) {
    unsigned char buf[kHsrcHeaderBytes];
    if (!in.read(reinterpret_cast<char*>(buf), kHsrcHeaderBytes)) {
        throw IoError(path + ": truncated HSRC header");
    }
    return decode_header(buf, path);
}

template <typename T>
void write_samples(const std::string& path, const RasterHeader& header, std::span<const T> samples,
                   SampleType expected) {
    header.validate();
    if (header.dtype != expected) throw ValidationError(path + ": header dtype does not match samples");
    if (samples.size() != header.sample_count()) {
        throw ValidationError(path + ": sample count " + std::to_string(samples.size()) +
                              " does not match header " + std::to_string(header.sample_count()));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path + "'");
    unsigned char hdr[kHsrcHeaderBytes];
    encode_header(header, hdr);
    out.write(reinterpret_cast<const char*>(hdr), kHsrcHeaderBytes);
    if constexpr (sizeof(T) == 1 || std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(samples.data()),
                  static_cast<std::streamsize>(samples.size() * sizeof(T)));
    } else {
        std::vector<unsigned char> buf(samples.size() * sizeof(T));
        for (std::size_t i = 0; i < samples.size(); ++i) put_le<T>(buf.data() + i * sizeof(T), samples[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<std::size_t> parse_index_list(std::string_view text, const std::string& origin) {
    std::vector<std::size_t> out;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        if (item.empty()) continue;
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoul(item));
            } else {
                const std::size_t lo = std::stoul(item.substr(0, dash));
                const std::size_t hi = std::stoul(item.substr(dash + 1));
                if (hi < lo) throw ValidationError(origin + ": empty range '" + item + "'");
                for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
            }
        } catch (const std::logic_error&) {
            throw ValidationError(origin + ": bad band index '" + item + "'");
        }
    }
    return out;
}

}  // namespace

std::size_t sample_bytes(SampleType t) { return t == SampleType::int16 ? 2 : 1; }

void RasterHeader::validate() const {
    if (width < 1 || height < 1 || bands < 1) throw ValidationError("raster dimensions must be >= 1");
    if (!(gsd > 0.0)) throw ValidationError("raster gsd must be positive");
    if (!wavelengths.empty() && wavelengths.size() != bands) {
        throw ValidationError("wavelength table length does not match band count");
    }
}

// ---------------------------------------------------------------------------
// Band masks

std::size_t BandMask::kept() const { return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true)); }

std::vector<std::size_t> BandMask::kept_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i]) out.push_back(i);
    }
    return out;
}

void BandMask::validate() const {
    if (kept() == 0) throw ValidationError("band mask '" + name + "' keeps no bands");
}

BandMask BandMask::all(std::size_t bands, std::string name) {
    return BandMask{std::vector<bool>(bands, true), std::move(name)};
}

BandMask BandMask::parse(std::string_view text, const std::string& origin) {
    const KeyValueConfig kv = KeyValueConfig::parse(text, origin);
    const long long bands = kv.get_int("bands", 0);
    if (bands < 1) throw ValidationError(origin + ": 'bands' must be a positive integer");
    BandMask m;
    m.name = kv.get_string("name", origin);
    const auto keep = kv.get("keep");
    const auto drop = kv.get("drop");
    if (keep && drop) throw ValidationError(origin + ": specify either 'keep' or 'drop', not both");
    m.keep.assign(static_cast<std::size_t>(bands), keep ? false : true);
    for (std::size_t idx : parse_index_list(keep ? *keep : drop.value_or(""), origin)) {
        if (idx >= m.keep.size()) {
            throw ValidationError(origin + ": band index " + std::to_string(idx) + " out of range");
        }
        m.keep[idx] = keep.has_value();
    }
    m.validate();
    return m;
}

BandMask BandMask::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open band mask '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

BandMask default_enmap_mask() {
    // Stand-in indices around the 1.4 um and 1.9 um water vapour absorption
    // features; replace with the product's own list when available.
    BandMask m = BandMask::all(224, "enmap-default-202");
    for (std::size_t i = 126; i <= 136; ++i) m.keep[i] = false;
    for (std::size_t i = 165; i <= 175; ++i) m.keep[i] = false;
    return m;
}

BandMask compose(const BandMask& first, const BandMask& second) {
    if (second.keep.size() != first.kept()) {
        throw MaskMismatchError("second mask has " + std::to_string(second.keep.size()) +
                                " entries but the first keeps " + std::to_string(first.kept()));
    }
    BandMask out{std::vector<bool>(first.keep.size(), false), first.name + "+" + second.name};
    std::size_t k = 0;
    for (std::size_t i = 0; i < first.keep.size(); ++i) {
        if (!first.keep[i]) continue;
        out.keep[i] = second.keep[k++];
    }
    return out;
}

RasterHeader apply_band_mask(const RasterHeader& header, const BandMask& mask) {
    if (mask.keep.size() != header.bands) {
        throw MaskMismatchError("mask '" + mask.name + "' has " + std::to_string(mask.keep.size()) +
                                " entries for a " + std::to_string(header.bands) + "-band raster");
    }
    mask.validate();
    RasterHeader out = header;
    out.bands = static_cast<std::uint32_t>(mask.kept());
    if (!header.wavelengths.empty()) {
        out.wavelengths.clear();
        for (std::size_t i : mask.kept_indices()) out.wavelengths.push_back(header.wavelengths[i]);
    }
    return out;
}

std::vector<TileRecord> filter_by_cloud(const std::vector<TileRecord>& tiles, double max_fraction) {
    if (!(max_fraction >= 0.0 && max_fraction <= 1.0)) {
        throw ValidationError("cloud threshold must be in [0,1]");
    }
    std::vector<TileRecord> out;
    std::copy_if(tiles.begin(), tiles.end(), std::back_inserter(out),
                 [&](const TileRecord& t) { return t.cloud_fraction <= max_fraction; });
    return out;
}

// ---------------------------------------------------------------------------
// Raster files

RasterHeader read_header(const std::string& path) {
    auto in = open_in(path);
    return read_header_from(in, path);
}

Raster read_raster(const std::string& path) {
    auto in = open_in(path);
    Raster r;
    r.header = read_header_from(in, path);
    const std::size_t n = r.header.sample_count();
    const std::size_t sb = sample_bytes(r.header.dtype);
    std::vector<unsigned char> buf(n * sb);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
        throw IoError(path + ": truncated sample data");
    }
    r.samples.resize(n);
    if (r.header.dtype == SampleType::int16) {
        for (std::size_t i = 0; i < n; ++i) r.samples[i] = get_le<std::int16_t>(buf.data() + 2 * i);
    } else {
        for (std::size_t i = 0; i < n; ++i) r.samples[i] = buf[i];
    }
    return r;
}

void write_raster(const std::string& path, const RasterHeader& header,
                  std::span<const std::int16_t> samples) {
    write_samples(path, header, samples, SampleType::int16);
}

void write_raster(const std::string& path, const RasterHeader& header,
                  std::span<const std::uint8_t> samples) {
    write_samples(path, header, samples, SampleType::uint8);
}

RasterGrid grid_from_header(const RasterHeader& h) {
    const auto col = lattice_index(h.origin.x, h.gsd);
    const auto row = lattice_index(h.origin.y, h.gsd);
    if (!col || !row) {
        throw ValidationError("raster origin (" + format_double(h.origin.x) + ", " +
                              format_double(h.origin.y) + ") is not registered to the " +
                              format_double(h.gsd) + " m lattice");
    }
    return RasterGrid{*col, *row, h.width, h.height};
}

PatchCube read_window(const TileRecord& tile, const PatchWindow& window, const BandMask& mask) {
    if (mask.keep.size() != static_cast<std::size_t>(tile.band_count)) {
        throw MaskMismatchError("tile '" + tile.tile_id + "': mask '" + mask.name + "' has " +
                                std::to_string(mask.keep.size()) + " entries for " +
                                std::to_string(tile.band_count) + " bands");
    }
    mask.validate();
    auto in = open_in(tile.raster_ref);
    const RasterHeader h = read_header_from(in, tile.raster_ref);
    if (h.dtype != SampleType::int16) throw ValidationError(tile.raster_ref + ": tile rasters must be int16");
    if (h.bands != static_cast<std::uint32_t>(tile.band_count)) {
        throw ValidationError(tile.raster_ref + ": raster has " + std::to_string(h.bands) +
                              " bands, catalog says " + std::to_string(tile.band_count));
    }
    if (h.gsd != window.gsd) throw ValidationError(tile.raster_ref + ": window gsd differs from raster gsd");

    const RasterGrid grid = grid_from_header(h);
    const std::int64_t col = window.ix - grid.origin_col;
    const std::int64_t row = grid.origin_row - (window.iy + window.size_px);
    const std::int64_t size = window.size_px;
    if (col < 0 || row < 0 || col + size > grid.width || row + size > grid.height) {
        throw OutOfBoundsError("tile '" + tile.tile_id + "': window " + assign_location_id(window) +
                               " lies outside the raster");
    }

    PatchCube cube;
    cube.header = apply_band_mask(h, mask);
    cube.header.width = static_cast<std::uint32_t>(size);
    cube.header.height = static_cast<std::uint32_t>(size);
    cube.header.origin = {window.origin().x, window.origin().y + window.side()};
    cube.provenance = PatchProvenance{tile.tile_id, tile.timestamp, window};
    cube.values.resize(cube.header.sample_count());

    std::vector<unsigned char> line(static_cast<std::size_t>(size) * 2);
    std::size_t out_idx = 0;
    for (std::size_t band : mask.kept_indices()) {
        for (std::int64_t r = 0; r < size; ++r) {
            const std::uint64_t sample =
                (static_cast<std::uint64_t>(band) * h.height + static_cast<std::uint64_t>(row + r)) * h.width +
                static_cast<std::uint64_t>(col);
            in.seekg(static_cast<std::streamoff>(kHsrcHeaderBytes + sample * 2));
            if (!in.read(reinterpret_cast<char*>(line.data()), static_cast<std::streamsize>(line.size()))) {
                throw IoError(tile.raster_ref + ": truncated sample data");
            }
            for (std::int64_t c = 0; c < size; ++c) {
                const std::int16_t v = get_le<std::int16_t>(line.data() + 2 * c);
                if (v == h.nodata) {
                    throw NoDataError("tile '" + tile.tile_id + "': window " + assign_location_id(window) +
                                      " contains no-data in band " + std::to_string(band));
                }
                cube.values[out_idx++] = v;
            }
        }
    }
    return cube;
}

void write_patch(const PatchCube& cube, const std::string& path) {
    if (cube.header.bands == 0) throw ValidationError("cannot write a zero-band cube");
    write_raster(path, cube.header, std::span<const std::int16_t>(cube.values));
}

PatchCube read_patch(const std::string& path) {
    Raster r = read_raster(path);
    if (r.header.dtype != SampleType::int16) throw ValidationError(path + ": patch cubes must be int16");
    PatchCube cube;
    cube.header = r.header;
    cube.values.assign(r.samples.begin(), r.samples.end());
    return cube;
}

double cloud_fraction_from_mask(const std::string& path) {
    const Raster r = read_raster(path);
    if (r.header.bands != 1) throw ValidationError(path + ": cloud mask must have one band");
    const auto flagged = std::count_if(r.samples.begin(), r.samples.end(), [](std::int32_t v) { return v != 0; });
    return static_cast<double>(flagged) / static_cast<double>(r.samples.size());
}

// ---------------------------------------------------------------------------
// Tile manifests

TileRecord parse_tile_json(std::string_view line, std::optional<TileIssue>* issue) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("tile record must be a JSON object");
    auto field = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end()) throw ValidationError(std::string("missing key '") + key + "'");
        return *it;
    };
    try {
        TileRecord t;
        t.tile_id = field("tile_id").get<std::string>();
        t.timestamp = parse_iso8601(field("timestamp").get<std::string>());
        t.crs = field("crs").get<int>();
        t.raster_ref = field("raster").get<std::string>();
        t.cloud_fraction = field("cloud_fraction").get<double>();
        t.gsd = field("gsd").get<double>();
        t.band_count = field("bands").get<int>();
        const std::string wkt = field("footprint").get<std::string>();
        try {
            t.footprint = parse_wkt(wkt, t.crs);
        } catch (const ValidationError& e) {
            if (!issue) throw;
            *issue = TileIssue{"geometry", e.what()};
        }
        if (auto g = j.find("grid"); g != j.end()) {
            const double ox = g->at("origin_x").get<double>();
            const double oy = g->at("origin_y").get<double>();
            const auto width = g->at("width").get<std::int64_t>();
            const auto height = g->at("height").get<std::int64_t>();
            const auto col = lattice_index(ox, t.gsd);
            const auto row = lattice_index(oy, t.gsd);
            if (col && row) {
                t.grid = RasterGrid{*col, *row, width, height};
            } else if (!issue) {
                throw ValidationError("grid origin is not registered to the gsd lattice");
            } else if (!*issue) {
                *issue = TileIssue{"grid", "grid origin (" + format_double(ox) + ", " + format_double(oy) +
                                               ") is not registered to the " + format_double(t.gsd) + " m lattice"};
            }
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("schema violation: ") + e.what());
    }
}

std::string format_tile_json(const TileRecord& t) {
    nlohmann::ordered_json j;
    j["tile_id"] = t.tile_id;
    j["timestamp"] = format_iso8601(t.timestamp);
    j["crs"] = t.crs;
    j["footprint"] = to_wkt(t.footprint);
    j["raster"] = t.raster_ref;
    j["cloud_fraction"] = t.cloud_fraction;
    j["gsd"] = t.gsd;
    j["bands"] = t.band_count;
    if (t.grid) {
        j["grid"] = {{"origin_x", static_cast<double>(t.grid->origin_col) * t.gsd},
                     {"origin_y", static_cast<double>(t.grid->origin_row) * t.gsd},
                     {"width", t.grid->width},
                     {"height", t.grid->height}};
    }
    return j.dump();
}

std::vector<TileRecord> read_tile_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tile manifest '" + path + "'");
    std::vector<TileRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_tile_json(line));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_tile_manifest(const std::string& path, const std::vector<TileRecord>& tiles) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (const auto& t : tiles) out << format_tile_json(t) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace hypercurate
