#include "hypercurate/stats.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hypercurate/errors.hpp"

namespace hypercurate {

double DatasetStats::multitemporal_fraction() const {
    return n_locations ? static_cast<double>(n_multitemporal) / static_cast<double>(n_locations) : 0.0;
}

void DatasetStats::check() const {
    std::size_t patches = 0, locations = 0, multi = 0;
    for (const auto& [count, locs] : timestamps_histogram) {
        patches += count * locs;
        locations += locs;
        if (count >= 2) multi += locs;
    }
    if (patches != n_patches || locations != n_locations || multi != n_multitemporal) {
        throw ConsistencyError("dataset stats do not satisfy the histogram identities");
    }
    if (std::accumulate(per_month.begin(), per_month.end(), std::size_t{0}) != n_patches) {
        throw ConsistencyError("monthly counts do not sum to the patch count");
    }
}

DatasetStats compute_stats(const std::vector<PatchRecord>& records) {
    DatasetStats s;
    std::map<int, CoverageSummary> coverage;
    for (const auto& r : records) {
        const BoundingBox b = r.window.box();
        auto [it, fresh] = coverage.try_emplace(r.window.crs, CoverageSummary{r.window.crs, b, 0, 0.0});
        auto& c = it->second;
        if (!fresh) {
            c.extent.min_x = std::min(c.extent.min_x, b.min_x);
            c.extent.min_y = std::min(c.extent.min_y, b.min_y);
            c.extent.max_x = std::max(c.extent.max_x, b.max_x);
            c.extent.max_y = std::max(c.extent.max_y, b.max_y);
        }
        ++c.locations;
        c.covered_area += r.window.side() * r.window.side();
        ++s.n_locations;
        s.n_patches += r.members.size();
        if (r.members.size() >= 2) ++s.n_multitemporal;
        ++s.timestamps_histogram[r.members.size()];
        for (const auto& m : r.members) ++s.per_month[static_cast<std::size_t>(month_of(m.timestamp) - 1)];
    }
    for (auto& [crs, c] : coverage) s.coverage.push_back(c);
    return s;
}

std::string DatasetStats::to_json() const {
    nlohmann::ordered_json j;
    j["n_locations"] = n_locations;
    j["n_patches"] = n_patches;
    j["n_multitemporal"] = n_multitemporal;
    j["multitemporal_fraction"] = multitemporal_fraction();
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [count, locs] : timestamps_histogram) hist[std::to_string(count)] = locs;
    j["timestamps_histogram"] = hist;
    j["per_month"] = per_month;
    j["coverage"] = nlohmann::ordered_json::array();
    for (const auto& c : coverage) {
        j["coverage"].push_back({{"crs", c.crs},
                                 {"extent", {c.extent.min_x, c.extent.min_y, c.extent.max_x, c.extent.max_y}},
                                 {"locations", c.locations},
                                 {"covered_area", c.covered_area}});
    }
    if (!class_histograms.empty()) {
        j["class_histograms"] = nlohmann::ordered_json::array();
        for (const auto& h : class_histograms) {
            j["class_histograms"].push_back({{"name", h.name}, {"classes", h.class_names}, {"counts", h.counts}});
        }
    }
    return j.dump(2) + "\n";
}

std::string timestamps_csv(const DatasetStats& s) {
    std::string out = "timestamps,locations\n";
    for (const auto& [count, locs] : s.timestamps_histogram) {
        out += std::to_string(count) + "," + std::to_string(locs) + "\n";
    }
    return out;
}

std::string monthly_csv(const DatasetStats& s) {
    std::string out = "month,patches\n";
    for (std::size_t m = 0; m < 12; ++m) out += std::to_string(m + 1) + "," + std::to_string(s.per_month[m]) + "\n";
    return out;
}

namespace {

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

std::string class_histogram_csv(const ClassHistogram& h, const std::string& unit) {
    const double total = static_cast<double>(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}));
    std::string out = "class_index,class_name," + unit + ",share\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const std::string name = k < h.class_names.size() ? h.class_names[k] : "";
        const double share = total > 0 ? static_cast<double>(h.counts[k]) / total : 0.0;
        out += std::to_string(k) + "," + csv_field(name) + "," + std::to_string(h.counts[k]) + "," +
               format_double(share) + "\n";
    }
    return out;
}

}  // namespace hypercurate
