#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hypercurate/geometry.hpp"
#include "hypercurate/patch_index.hpp"
#include "hypercurate/raster_io.hpp"

namespace hypercurate {

inline constexpr std::uint8_t kIgnoreIndex = 255;

/// Categorical raster of source class codes (e.g. CORINE level-3 codes).
struct LabelRaster {
    RasterHeader header;
    std::vector<std::int32_t> codes;  // row-major, north to south
    std::map<std::int32_t, std::string> class_names;

    std::int32_t nodata() const { return header.nodata; }
    std::int32_t at(std::size_t row, std::size_t col) const { return codes[row * header.width + col]; }

    static LabelRaster load(const std::string& path);
};

/// Maps declared source codes onto target class indices 0..K-1. A target of
/// -1 declares a code that is deliberately dropped (treated like nodata).
struct AggregationMap {
    std::string name;
    std::vector<std::string> class_names;
    std::map<std::int32_t, int> targets;

    std::size_t class_count() const { return class_names.size(); }
    /// Target index, -1 for dropped codes; throws MappingError for undeclared codes.
    int lookup(std::int32_t code) const;
    void validate() const;

    /// JSON: {"name": ..., "classes": [...], "map": {"<code>": index, ...}}
    static AggregationMap parse(std::string_view json_text, const std::string& origin = "<aggregation>");
    static AggregationMap load(const std::string& path);
    /// Identity mapping over codes 0..k-1.
    static AggregationMap identity(std::size_t k);
};

struct MultiLabelTarget {
    std::string location_id;
    std::vector<int> classes;  // ascending

    friend bool operator==(const MultiLabelTarget&, const MultiLabelTarget&) = default;
};

struct SegmentationPair {
    std::string location_id;
    int size = 128;
    std::vector<std::uint8_t> mask;  // size x size, row 0 = north

    std::uint8_t at(int row, int col) const { return mask[static_cast<std::size_t>(row) * size + col]; }
};

enum class Resampling {
    nearest,
    /// Most frequent class among label cells centred inside each output pixel;
    /// falls back to nearest when no cell centre lands inside (coarse labels).
    majority,
};

/// Classes whose pixel fraction exceeds `min_fraction` over the window grid
/// (nodata and dropped codes excluded from the denominator). nullopt when the
/// window holds no valid label pixel.
std::optional<MultiLabelTarget> multilabel_from_raster(const PatchWindow& window, const LabelRaster& labels,
                                                       const AggregationMap& agg, double min_fraction = 0.0);

SegmentationPair segmentation_mask(const PatchWindow& window, const LabelRaster& labels,
                                   const AggregationMap& agg, Resampling mode = Resampling::nearest);

/// Pixel count per class (ignore value excluded).
std::vector<std::uint64_t> class_histogram(const SegmentationPair& pair, std::size_t n_classes);

struct RebalanceResult {
    std::vector<std::size_t> selected;  // indices into the input, in pick order
    std::vector<double> class_shares;   // of selected pixels
    double max_share = 0.0;
    bool cap_satisfied = true;
};

/// Greedy selection of `target_count` patches that keeps the running class
/// histogram as flat as possible; see RebalanceResult::cap_satisfied.
RebalanceResult rebalance(const std::vector<SegmentationPair>& pairs, std::size_t target_count,
                          double cap_fraction, std::uint64_t seed, std::size_t n_classes);

enum class Split { train, val, test };
std::string_view split_name(Split s);

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

/// Block-level split assignment; every record of a block lands in one split.
/// Blocks are ordered by a seeded hash of their key and cut by quota.
std::map<std::string, Split> assign_blocks(const std::vector<std::string>& block_keys, SplitRatios ratios,
                                           std::uint64_t seed);

/// Split per record, blocked by the record's first member tile.
std::vector<Split> make_split(const std::vector<PatchRecord>& records, SplitRatios ratios, std::uint64_t seed);

/// First member acquired in one of `months` (1..12), if any.
std::optional<PatchMember> member_in_season(const PatchRecord& r, const std::set<int>& months);

/// Stable 64-bit hash used for deterministic assignments.
std::uint64_t stable_hash(std::string_view key, std::uint64_t seed);

}  // namespace hypercurate
