#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hypercurate/patch_index.hpp"

namespace hypercurate {

struct ClassHistogram {
    std::string name;
    std::vector<std::string> class_names;
    std::vector<std::uint64_t> counts;
};

/// Extent and covered ground of the windows in one CRS.
struct CoverageSummary {
    int crs = 0;
    BoundingBox extent;
    std::size_t locations = 0;
    /// Sum of window areas (windows never overlap), square map units.
    double covered_area = 0.0;
};

struct DatasetStats {
    std::size_t n_locations = 0;
    std::size_t n_patches = 0;
    std::size_t n_multitemporal = 0;
    /// Number of timestamps -> number of locations with that many.
    std::map<std::size_t, std::size_t> timestamps_histogram;
    /// Patches acquired in each calendar month, January first.
    std::array<std::size_t, 12> per_month{};
    std::vector<ClassHistogram> class_histograms;
    /// One entry per CRS, ascending.
    std::vector<CoverageSummary> coverage;

    /// Share of locations with two or more timestamps; 0 for an empty manifest.
    double multitemporal_fraction() const;
    /// Throws ConsistencyError unless the histogram identities hold.
    void check() const;
    std::string to_json() const;
};

DatasetStats compute_stats(const std::vector<PatchRecord>& records);

/// `timestamps,locations` rows in ascending count order.
std::string timestamps_csv(const DatasetStats& s);
/// `month,patches` rows 1..12.
std::string monthly_csv(const DatasetStats& s);
/// `class_index,class_name,<unit>,share` rows; unit is "pixels" for masks
/// and "samples" for multi-label targets.
std::string class_histogram_csv(const ClassHistogram& h, const std::string& unit = "pixels");

}  // namespace hypercurate
