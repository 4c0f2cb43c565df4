#pragma once

#include <string>
#include <vector>

#include "hypercurate/metrics.hpp"
#include "hypercurate/patch_index.hpp"
#include "hypercurate/tile.hpp"

// Brute-force reference implementations. Nothing here calls into the
// geometry, patch_index, curation or metrics code paths; only their value
// types are shared.

namespace hypercurate::oracle {

struct Violation {
    std::vector<std::string> refs;
    std::string detail;
};

struct OracleReport {
    std::string checked_property;
    std::vector<Violation> violations;
    bool pass() const { return violations.empty(); }
};

struct ReferenceCombination {
    std::vector<std::string> tiles;  // sorted
    double area = 0.0;

    friend bool operator<(const ReferenceCombination& a, const ReferenceCombination& b) { return a.tiles < b.tiles; }
};

inline constexpr std::size_t kMaxExhaustiveTiles = 16;

/// Every subset of >= 2 tiles whose members are pairwise more than `min_dt`
/// apart, share one gsd, and whose common footprint holds a full
/// `patch_px` lattice window. Sorted by tile set.
std::vector<ReferenceCombination> exhaustive_combinations(const std::vector<TileRecord>& tiles, Timestamp min_dt,
                                                          int patch_px = 128);

/// O(n^2) pairwise interior-overlap test over same-CRS windows.
OracleReport naive_overlap_check(const std::vector<PatchRecord>& records);

/// Each member tile exists, its footprint contains the window (closed), its
/// timestamp matches, and timestamps increase strictly. Location ids are unique.
OracleReport containment_check(const std::vector<PatchRecord>& records, const std::vector<TileRecord>& tiles);

/// Location ids unique and consistent with their windows; member lists valid.
OracleReport record_check(const std::vector<PatchRecord>& records);

struct ReferenceF1 {
    double micro = 0.0;
    double macro = 0.0;
};

ReferenceF1 naive_f1(const MultiLabelBatch& batch);
double naive_miou(const MaskBatch& batch);
struct ReferenceNmse {
    double sum_form = 0.0;
    double percent_form = 0.0;
};
ReferenceNmse naive_normalized_mse(const RegressionBatch& batch);

}  // namespace hypercurate::oracle
