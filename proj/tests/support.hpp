#pragma once

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hypercurate/curation.hpp"
#include "hypercurate/oracle.hpp"
#include "hypercurate/synthetic.hpp"

namespace testing {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("hc_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Small, heavily overlapping layout sized for exhaustive enumeration.
inline std::vector<hypercurate::TileRecord> dense_layout(std::uint64_t seed, std::size_t tiles) {
    hypercurate::synthetic::LayoutOptions o;
    o.tiles = tiles;
    o.extent_px = 260;
    o.min_side_px = 200;
    o.max_side_px = 420;
    o.dates = 5;
    o.seed = seed;
    return hypercurate::synthetic::random_layout(o);
}

/// Union over seed tiles of the beam search's tile sets.
inline std::set<std::vector<std::string>> searched_sets(const std::vector<hypercurate::TileRecord>& tiles,
                                                         std::size_t beam, int patch_px,
                                                         std::map<std::vector<std::string>, double>* areas = nullptr) {
    using namespace hypercurate;
    const OverlapGraph g = build_overlap_graph(tiles, kSecondsPerDay, patch_px);
    CombinationMemo memo;
    std::set<std::vector<std::string>> out;
    for (const auto& t : g.tiles()) {
        for (const auto& c : build_combinations(t.tile_id, g, beam, 32, &memo)) {
            out.insert(c.tiles);
            if (areas) (*areas)[c.tiles] = c.area;
        }
    }
    return out;
}

inline std::set<std::vector<std::string>> reference_sets(const std::vector<hypercurate::oracle::ReferenceCombination>& v) {
    std::set<std::vector<std::string>> out;
    for (const auto& c : v) out.insert(c.tiles);
    return out;
}

}  // namespace testing
