#pragma once

#include <array>
#include <random>
#include <string>

#include "hypercurate/metrics.hpp"
#include "hypercurate/patch_index.hpp"
#include "hypercurate/raster_io.hpp"

// Random inputs shared by the unit tests and the acceptance run.

namespace testing {

using namespace hypercurate;

inline MultiLabelBatch random_multilabel(std::mt19937_64& rng) {
    MultiLabelBatch b;
    b.samples = 1 + rng() % 40;
    b.classes = 1 + rng() % 20;
    const double p = (rng() % 100) / 100.0;
    std::bernoulli_distribution coin(p);
    for (std::size_t i = 0; i < b.samples * b.classes; ++i) {
        b.predictions.push_back(coin(rng));
        b.targets.push_back(coin(rng));
    }
    return b;
}

inline MaskBatch random_masks(std::mt19937_64& rng) {
    MaskBatch b;
    b.samples = 1 + rng() % 4;
    b.height = 1 + rng() % 32;
    b.width = 1 + rng() % 32;
    b.classes = 1 + rng() % 12;
    const std::size_t n = b.samples * b.pixels_per_sample();
    for (std::size_t i = 0; i < n; ++i) {
        b.predictions.push_back(static_cast<std::uint8_t>(rng() % 9 == 0 ? MaskBatch::kIgnore : rng() % b.classes));
        b.targets.push_back(static_cast<std::uint8_t>(rng() % 7 == 0 ? MaskBatch::kIgnore : rng() % b.classes));
    }
    b.targets[0] = 0;  // at least one valid pixel
    return b;
}

inline RegressionBatch random_regression(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, 1);
    RegressionBatch b;
    b.samples = 2 + rng() % 50;
    b.params = 1 + rng() % 6;
    for (std::size_t i = 0; i < b.samples * b.params; ++i) {
        b.targets.push_back(50 * g(rng));
        b.predictions.push_back(b.targets.back() + 20 * g(rng));
    }
    for (std::size_t p = 0; p < b.params; ++p) b.baseline_means.push_back(10 * g(rng));
    return b;
}

inline PatchRecord random_record(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::int64_t> idx(-100000, 100000);
    std::uniform_int_distribution<int> crs(32601, 32660), n(1, 6), px(0, 2000);
    std::uniform_int_distribution<Timestamp> dt(1, 90 * kSecondsPerDay);
    const double gsds[] = {30.0, 10.0, 2.5, 0.3};
    PatchRecord r;
    r.window = PatchWindow{crs(rng), idx(rng), idx(rng), std::array{128, 64, 256}[rng() % 3], gsds[rng() % 4]};
    r.location_id = assign_location_id(r.window);
    Timestamp t = 1600000000 + dt(rng);
    for (int i = n(rng); i > 0; --i) {
        r.members.push_back({"tile-" + std::to_string(rng() % 1000) + "_x.v" + std::to_string(i), t, px(rng), px(rng)});
        t += dt(rng);
    }
    return r;
}

inline BandMask random_mask(std::size_t n, std::mt19937_64& rng) {
    BandMask m{std::vector<bool>(n), "r"};
    do {
        for (std::size_t i = 0; i < n; ++i) m.keep[i] = rng() % 3 != 0;
    } while (m.kept() == 0);
    return m;
}

}  // namespace testing
