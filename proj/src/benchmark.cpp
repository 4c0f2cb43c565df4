#include "hypercurate/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hypercurate/errors.hpp"

namespace hypercurate {

LabelRaster LabelRaster::load(const std::string& path) {
    Raster r = read_raster(path);
    if (r.header.bands != 1) throw ValidationError(path + ": label raster must have exactly one band");
    LabelRaster out;
    out.header = r.header;
    out.codes = std::move(r.samples);
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation maps

int AggregationMap::lookup(std::int32_t code) const {
    auto it = targets.find(code);
    if (it == targets.end()) {
        throw MappingError("aggregation '" + name + "' has no entry for source code " + std::to_string(code), code);
    }
    return it->second;
}

void AggregationMap::validate() const {
    if (class_names.empty()) throw ValidationError("aggregation '" + name + "' declares no classes");
    if (class_names.size() >= kIgnoreIndex) throw ValidationError("aggregation '" + name + "' has too many classes");
    for (const auto& [code, idx] : targets) {
        if (idx < -1 || idx >= static_cast<int>(class_names.size())) {
            throw ValidationError("aggregation '" + name + "': code " + std::to_string(code) +
                                  " maps to invalid class " + std::to_string(idx));
        }
    }
}

AggregationMap AggregationMap::parse(std::string_view json_text, const std::string& origin) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        AggregationMap m;
        m.name = j.value("name", origin);
        m.class_names = j.at("classes").get<std::vector<std::string>>();
        for (const auto& [key, val] : j.at("map").items()) {
            std::size_t used = 0;
            const long code = std::stol(key, &used);
            if (used != key.size()) throw ValidationError(origin + ": bad source code '" + key + "'");
            m.targets[static_cast<std::int32_t>(code)] = val.is_null() ? -1 : val.get<int>();
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(origin + ": " + e.what());
    } catch (const std::logic_error& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

AggregationMap AggregationMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open aggregation map '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

AggregationMap AggregationMap::identity(std::size_t k) {
    AggregationMap m;
    m.name = "identity-" + std::to_string(k);
    for (std::size_t i = 0; i < k; ++i) {
        m.class_names.push_back("class_" + std::to_string(i));
        m.targets[static_cast<std::int32_t>(i)] = static_cast<int>(i);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

constexpr int kNoClass = -1;

/// Label cell under a map coordinate; throws CoverageError outside the raster.
std::int32_t sample_code(const LabelRaster& labels, double x, double y, const PatchWindow& w) {
    const auto& h = labels.header;
    const double fc = std::floor((x - h.origin.x) / h.gsd);
    const double fr = std::floor((h.origin.y - y) / h.gsd);
    if (fc < 0 || fr < 0 || fc >= h.width || fr >= h.height) {
        throw CoverageError("label raster does not cover window " + assign_location_id(w));
    }
    return labels.at(static_cast<std::size_t>(fr), static_cast<std::size_t>(fc));
}

int map_code(const LabelRaster& labels, const AggregationMap& agg, std::int32_t code) {
    if (code == labels.nodata()) return kNoClass;
    return agg.lookup(code);
}

void check_crs(const PatchWindow& w, const LabelRaster& labels) {
    if (labels.header.crs != w.crs) {
        throw CrossCrsError("label raster CRS " + std::to_string(labels.header.crs) + " differs from window CRS " +
                            std::to_string(w.crs));
    }
}

/// Class index per output pixel by nearest neighbour at pixel centres.
std::vector<int> nearest_classes(const PatchWindow& w, const LabelRaster& labels, const AggregationMap& agg) {
    check_crs(w, labels);
    const Point2 o = w.origin();
    const double top = o.y + w.side();
    const int n = w.size_px;
    std::vector<int> out(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        const double y = top - (r + 0.5) * w.gsd;
        for (int c = 0; c < n; ++c) {
            const double x = o.x + (c + 0.5) * w.gsd;
            out[static_cast<std::size_t>(r) * n + c] = map_code(labels, agg, sample_code(labels, x, y, w));
        }
    }
    return out;
}

}  // namespace

std::optional<MultiLabelTarget> multilabel_from_raster(const PatchWindow& window, const LabelRaster& labels,
                                                       const AggregationMap& agg, double min_fraction) {
    if (!(min_fraction >= 0.0 && min_fraction < 1.0)) throw ValidationError("min_fraction must be in [0,1)");
    const auto classes = nearest_classes(window, labels, agg);
    std::vector<std::uint64_t> counts(agg.class_count(), 0);
    std::uint64_t valid = 0;
    for (int k : classes) {
        if (k == kNoClass) continue;
        ++counts[static_cast<std::size_t>(k)];
        ++valid;
    }
    if (valid == 0) return std::nullopt;
    MultiLabelTarget t;
    t.location_id = assign_location_id(window);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (static_cast<double>(counts[k]) / static_cast<double>(valid) > min_fraction) {
            t.classes.push_back(static_cast<int>(k));
        }
    }
    return t;
}

SegmentationPair segmentation_mask(const PatchWindow& window, const LabelRaster& labels, const AggregationMap& agg,
                                   Resampling mode) {
    SegmentationPair pair;
    pair.location_id = assign_location_id(window);
    pair.size = window.size_px;
    const auto nearest = nearest_classes(window, labels, agg);
    pair.mask.resize(nearest.size());
    for (std::size_t i = 0; i < nearest.size(); ++i) {
        pair.mask[i] = nearest[i] == kNoClass ? kIgnoreIndex : static_cast<std::uint8_t>(nearest[i]);
    }
    if (mode == Resampling::nearest || labels.header.gsd >= window.gsd) return pair;

    // Fine labels: vote over label cells whose centres fall inside each pixel.
    const auto& h = labels.header;
    const Point2 o = window.origin();
    const double top = o.y + window.side();
    const int n = window.size_px;
    std::vector<std::uint32_t> votes(agg.class_count());
    for (int r = 0; r < n; ++r) {
        const double y_hi = top - r * window.gsd;
        const double y_lo = y_hi - window.gsd;
        const auto lr0 = static_cast<std::int64_t>(std::ceil((h.origin.y - y_hi) / h.gsd - 0.5));
        const auto lr1 = static_cast<std::int64_t>(std::ceil((h.origin.y - y_lo) / h.gsd - 0.5)) - 1;
        for (int c = 0; c < n; ++c) {
            const double x_lo = o.x + c * window.gsd;
            const double x_hi = x_lo + window.gsd;
            const auto lc0 = static_cast<std::int64_t>(std::ceil((x_lo - h.origin.x) / h.gsd - 0.5));
            const auto lc1 = static_cast<std::int64_t>(std::ceil((x_hi - h.origin.x) / h.gsd - 0.5)) - 1;
            std::fill(votes.begin(), votes.end(), 0);
            bool any = false;
            for (std::int64_t lr = std::max<std::int64_t>(lr0, 0); lr <= std::min<std::int64_t>(lr1, h.height - 1); ++lr) {
                for (std::int64_t lc = std::max<std::int64_t>(lc0, 0); lc <= std::min<std::int64_t>(lc1, h.width - 1); ++lc) {
                    const int k = map_code(labels, agg, labels.at(static_cast<std::size_t>(lr), static_cast<std::size_t>(lc)));
                    any = true;
                    if (k != kNoClass) ++votes[static_cast<std::size_t>(k)];
                }
            }
            if (!any) continue;
            const auto best = std::max_element(votes.begin(), votes.end());
            pair.mask[static_cast<std::size_t>(r) * n + c] =
                *best == 0 ? kIgnoreIndex : static_cast<std::uint8_t>(best - votes.begin());
        }
    }
    return pair;
}

std::vector<std::uint64_t> class_histogram(const SegmentationPair& pair, std::size_t n_classes) {
    std::vector<std::uint64_t> h(n_classes, 0);
    for (std::uint8_t v : pair.mask) {
        if (v == kIgnoreIndex) continue;
        if (v >= n_classes) throw ValidationError("mask value " + std::to_string(v) + " exceeds class count");
        ++h[v];
    }
    return h;
}

// ---------------------------------------------------------------------------
// Rebalancing

RebalanceResult rebalance(const std::vector<SegmentationPair>& pairs, std::size_t target_count, double cap_fraction,
                          std::uint64_t seed, std::size_t n_classes) {
    if (target_count > pairs.size()) {
        throw ValidationError("rebalance target " + std::to_string(target_count) + " exceeds pool of " +
                              std::to_string(pairs.size()));
    }
    if (!(cap_fraction > 0.0 && cap_fraction <= 1.0)) throw ValidationError("cap_fraction must be in (0,1]");

    std::vector<std::vector<std::uint64_t>> hists;
    hists.reserve(pairs.size());
    for (const auto& p : pairs) hists.push_back(class_histogram(p, n_classes));

    // Seeded rank breaks ties between equally good candidates.
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::uint64_t> running(n_classes, 0);
    std::uint64_t running_total = 0;
    std::vector<bool> taken(pairs.size(), false);
    RebalanceResult result;
    result.selected.reserve(target_count);

    for (std::size_t step = 0; step < target_count; ++step) {
        std::size_t best = pairs.size();
        double best_excess = std::numeric_limits<double>::infinity();
        double best_max = std::numeric_limits<double>::infinity();
        for (std::size_t idx : order) {
            if (taken[idx]) continue;
            const auto& h = hists[idx];
            const std::uint64_t total = running_total + std::accumulate(h.begin(), h.end(), std::uint64_t{0});
            double excess = 0.0, max_share = 0.0;
            if (total > 0) {
                for (std::size_t k = 0; k < n_classes; ++k) {
                    const double share = static_cast<double>(running[k] + h[k]) / static_cast<double>(total);
                    excess += std::max(0.0, share - cap_fraction);
                    max_share = std::max(max_share, share);
                }
            }
            if (excess < best_excess || (excess == best_excess && max_share < best_max)) {
                best = idx;
                best_excess = excess;
                best_max = max_share;
            }
        }
        taken[best] = true;
        result.selected.push_back(best);
        for (std::size_t k = 0; k < n_classes; ++k) {
            running[k] += hists[best][k];
            running_total += hists[best][k];
        }
    }

    result.class_shares.assign(n_classes, 0.0);
    if (running_total > 0) {
        for (std::size_t k = 0; k < n_classes; ++k) {
            result.class_shares[k] = static_cast<double>(running[k]) / static_cast<double>(running_total);
        }
    }
    result.max_share = result.class_shares.empty()
                           ? 0.0
                           : *std::max_element(result.class_shares.begin(), result.class_shares.end());
    result.cap_satisfied = result.max_share <= cap_fraction + 1e-12;
    return result;
}

// ---------------------------------------------------------------------------
// Splits

std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

std::uint64_t stable_hash(std::string_view key, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    // splitmix64 finaliser
    std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::map<std::string, Split> assign_blocks(const std::vector<std::string>& block_keys, SplitRatios ratios,
                                           std::uint64_t seed) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw ValidationError("split ratios must be non-negative and sum to 1");
    }
    std::vector<std::string> blocks(block_keys);
    std::sort(blocks.begin(), blocks.end());
    blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
    std::vector<std::pair<std::uint64_t, const std::string*>> keyed;
    keyed.reserve(blocks.size());
    for (const auto& b : blocks) keyed.emplace_back(stable_hash(b, seed), &b);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : *a.second < *b.second;
    });

    const double n = static_cast<double>(keyed.size());
    const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    const auto n_val = std::min(keyed.size() - std::min(keyed.size(), n_train),
                                static_cast<std::size_t>(std::llround(ratios.val * n)));
    std::map<std::string, Split> out;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        Split s = Split::test;
        if (i < n_train) s = Split::train;
        else if (i < n_train + n_val) s = Split::val;
        out.emplace(*keyed[i].second, s);
    }
    return out;
}

std::vector<Split> make_split(const std::vector<PatchRecord>& records, SplitRatios ratios, std::uint64_t seed) {
    std::vector<std::string> keys;
    keys.reserve(records.size());
    for (const auto& r : records) {
        if (r.members.empty()) throw ValidationError("record " + r.location_id + " has no members");
        keys.push_back(r.members.front().tile_id);
    }
    const auto blocks = assign_blocks(keys, ratios, seed);
    std::vector<Split> out;
    out.reserve(records.size());
    for (const auto& k : keys) out.push_back(blocks.at(k));
    return out;
}

std::optional<PatchMember> member_in_season(const PatchRecord& r, const std::set<int>& months) {
    for (const auto& m : r.members) {
        if (months.count(month_of(m.timestamp))) return m;
    }
    return std::nullopt;
}

}  // namespace hypercurate
